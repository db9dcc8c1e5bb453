//! Command-line experiment runner: one subcommand per headline experiment,
//! JSON configuration, CSV/JSON outputs.
//!
//! Exit codes: `0` pass, `1` usage error, `2` computational failure,
//! `3` asserted-property violation.

use crate::coeffs::{AffineFamily, FamilyDescriptor, PiecewiseCoefficient};
use crate::holomorphy::{
    cauchy_residual, region_radius_part1, region_radius_part2, verify_factor_two, AllocationRule,
};
use crate::mesh::{assemble_a0, assemble_perturbation, solve_with_coeff_load, Mesh, PerturbationMatrix};
use crate::opnorm::{k_sweep, norm_relation_check, solution_operator_norm, weighted_norm, NormKind};
use crate::poles::k_sequence_experiment;
use crate::{C64, Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Serializable experiment configuration; flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub ppw: f64,
    pub pollution_exp: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
    /// Path to a family-descriptor JSON; `None` means the built-in model
    /// family (discontinuous base index, indicator mode on `[0, 1]`).
    pub family: Option<String>,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            ppw: crate::suite::DEFAULT_PPW,
            pollution_exp: crate::suite::DEFAULT_PE,
            k_min: 10.0,
            k_max: 200.0,
            k_count: 40,
            family: None,
            out_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Short content hash recorded in every output artifact.  The output
    /// directory is excluded: it changes where results land, not what they
    /// are, and identical experiments must produce identical artifacts.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.out_dir = String::new();
        let json = serde_json::to_string(&keyed).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    fn family(&self) -> Result<AffineFamily> {
        match &self.family {
            None => Ok(AffineFamily::model()),
            Some(path) => {
                let d: FamilyDescriptor = serde_json::from_str(&fs::read_to_string(path)?)?;
                AffineFamily::from_descriptor(&d)
            }
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# helmholo {} config={}",
            env!("CARGO_PKG_VERSION"),
            self.hash()
        )
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        let path = Path::new(&self.out_dir).join(name);
        let mut text = String::new();
        writeln!(text, "{}", self.comment_line()).unwrap();
        writeln!(text, "{header}").unwrap();
        for row in rows {
            writeln!(text, "{row}").unwrap();
        }
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    H1k,
    H2k,
}

impl From<NormArg> for NormKind {
    fn from(a: NormArg) -> Self {
        match a {
            NormArg::L2 => NormKind::L2,
            NormArg::H1k => NormKind::H1k,
            NormArg::H2k => NormKind::H2k,
        }
    }
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `re,im`, got `{s}`"));
    }
    let re: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok(C64::new(re, im))
}

fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect()
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_f64_list(s)?;
    if v.len() != 2 || v[0] >= v[1] {
        return Err(format!("expected `lo,hi` with lo < hi, got `{s}`"));
    }
    Ok((v[0], v[1]))
}

#[derive(Parser, Debug)]
#[command(
    name = "helmholo",
    version,
    about = "Wavenumber-explicit parametric holomorphy experiments for the 1-d Helmholtz equation"
)]
struct Cli {
    /// JSON configuration file (flags override its values)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts
    #[arg(long, global = true)]
    out_dir: Option<String>,
    /// Mesh resolution in points per wavelength
    #[arg(long, global = true)]
    ppw: Option<f64>,
    /// Pollution exponent of the mesh rule h <= c k^{-pe}
    #[arg(long, global = true)]
    pollution_exp: Option<f64>,
    /// PRNG seed for power-iteration starts and sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the model problem at one (k, y) and write the nodal solution
    Solve {
        #[arg(long)]
        k: f64,
        /// Parameter value `re,im` for the single-mode model family
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        y: C64,
    },
    /// Sweep the base solution-operator norm over k and fit the slope
    OpnormSweep {
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value = "l2")]
        target: NormArg,
    },
    /// Check the norm-relation inequalities at the given wavenumbers
    NormRelations {
        #[arg(long, value_delimiter = ',', default_value = "20,80")]
        k: Vec<f64>,
    },
    /// Compute a guaranteed polydisc of parametric holomorphy
    HoloRegion {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        part: u8,
    },
    /// Sample the factor-2 resolvent bound over the guaranteed region
    HoloVerify {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Cauchy-integral analyticity residual on a circle in the y-plane
    Cauchy {
        #[arg(long)]
        k: f64,
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        center: C64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        /// Skip the in-region containment check (e.g. to enclose a pole)
        #[arg(long)]
        unchecked: bool,
    },
    /// Sharpness sequence of solution-operator poles
    Poles {
        #[arg(long, default_value_t = 5)]
        m_lo: usize,
        #[arg(long, default_value_t = 40)]
        m_hi: usize,
        /// Largest m for which the matrix-pencil cross-check runs
        #[arg(long, default_value_t = 20)]
        pencil_upto: usize,
    },
    /// Grid of log10 condition estimates of A0 + y P1 over a y-rectangle
    PoleMap {
        #[arg(long)]
        k: f64,
        #[arg(long, value_parser = parse_range)]
        re_range: (f64, f64),
        #[arg(long, value_parser = parse_range)]
        im_range: (f64, f64),
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Sign properties of the 2-d DtN symbol across modes
    DtnCheck {
        #[arg(long, default_value_t = 50)]
        nmax: i64,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        z: Vec<f64>,
    },
    /// Evaluate one DtN symbol value
    DtnSymbol {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        z: f64,
    },
    /// Run the full reproduction suite (one line per criterion)
    ReproAll,
}

/// Parses `std::env::args`, runs the requested experiment, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version are successful exits
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut config = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error reading config: {e}");
                return EXIT_USAGE;
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        config.out_dir = d.clone();
    }
    if let Some(p) = cli.ppw {
        config.ppw = p;
    }
    if let Some(p) = cli.pollution_exp {
        config.pollution_exp = p;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Ok(threads) = std::env::var("HELMHOLO_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: HELMHOLO_THREADS must be a positive integer");
                return EXIT_USAGE;
            }
        }
    }
    match dispatch(&cli.command, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) | Error::Invalid(_) | Error::InvalidCoefficient(_)
                | Error::DimensionMismatch(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
                _ => EXIT_COMPUTE,
            }
        }
    }
}

fn dispatch(cmd: &Command, config: &ExperimentConfig) -> Result<i32> {
    match cmd {
        Command::Solve { k, y } => cmd_solve(config, *k, *y),
        Command::OpnormSweep {
            k_min,
            k_max,
            count,
            target,
        } => cmd_sweep(
            config,
            k_min.unwrap_or(config.k_min),
            k_max.unwrap_or(config.k_max),
            count.unwrap_or(config.k_count),
            (*target).into(),
        ),
        Command::NormRelations { k } => cmd_norm_relations(config, k),
        Command::HoloRegion { k, part } => cmd_holo_region(config, *k, *part),
        Command::HoloVerify { k, samples } => cmd_holo_verify(config, *k, *samples),
        Command::Cauchy {
            k,
            center,
            radius,
            nodes,
            unchecked,
        } => cmd_cauchy(config, *k, *center, *radius, *nodes, *unchecked),
        Command::Poles {
            m_lo,
            m_hi,
            pencil_upto,
        } => cmd_poles(config, *m_lo, *m_hi, *pencil_upto),
        Command::PoleMap {
            k,
            re_range,
            im_range,
            grid,
        } => cmd_pole_map(config, *k, *re_range, *im_range, *grid),
        Command::DtnCheck { nmax, z } => cmd_dtn_check(config, *nmax, z),
        Command::DtnSymbol { n, z } => {
            let s = crate::dtn::dtn_symbol(*n, *z)?;
            println!("{} {}", s.value.re, s.value.im);
            Ok(EXIT_OK)
        }
        Command::ReproAll => Ok(cmd_repro_all()),
    }
}

fn model_pieces(
    config: &ExperimentConfig,
    k: f64,
) -> Result<(
    crate::mesh::DiscreteOperator,
    Vec<crate::mesh::PerturbationMatrix>,
    AffineFamily,
    Mesh,
)> {
    let family = config.family()?;
    let mut breakpoints: Vec<f64> = family.base().breakpoints().to_vec();
    for mode in family.modes() {
        for &b in mode.breakpoints() {
            if !breakpoints.iter().any(|&x| (x - b).abs() < 1e-14) {
                breakpoints.push(b);
            }
        }
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mesh = Mesh::build(k, config.ppw, config.pollution_exp, &breakpoints)?;
    let op = assemble_a0(&mesh, family.base())?;
    let perts = family
        .modes()
        .iter()
        .enumerate()
        .map(|(j, psi)| assemble_perturbation(&mesh, psi, j))
        .collect::<Result<Vec<_>>>()?;
    Ok((op, perts, family, mesh))
}

fn cmd_solve(config: &ExperimentConfig, k: f64, y: C64) -> Result<i32> {
    let (op, perts, _, mesh) = model_pieces(config, k)?;
    let pairs: Vec<(&PerturbationMatrix, C64)> = perts.iter().map(|p| (p, y)).collect();
    let load = PiecewiseCoefficient::constant(C64::new(1.0, 0.0), mesh.domain_end());
    let sol = solve_with_coeff_load(&op, &pairs, &load)?;
    let rows: Vec<String> = mesh
        .nodes()
        .iter()
        .zip(&sol.values)
        .map(|(x, u)| format!("{x},{},{}", u.re, u.im))
        .collect();
    let path = config.write_csv("solution.csv", "x,re_u,im_u", &rows)?;
    let l2 = weighted_norm(&sol.values, NormKind::L2, &mesh)?;
    let h1k = weighted_norm(&sol.values, NormKind::H1k, &mesh)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "k": k, "y": [y.re, y.im], "n_dofs": mesh.n_dofs(),
            "l2_norm": l2, "h1k_norm": h1k, "csv": path,
        }))?
    );
    Ok(EXIT_OK)
}

fn cmd_sweep(
    config: &ExperimentConfig,
    k_min: f64,
    k_max: f64,
    count: usize,
    target: NormKind,
) -> Result<i32> {
    let family = config.family()?;
    let ks: Vec<f64> = (0..count)
        .map(|i| k_min * (k_max / k_min).powf(i as f64 / (count.max(2) - 1) as f64))
        .collect();
    let table = k_sweep(
        family.base(),
        &ks,
        (NormKind::L2, target),
        config.ppw,
        config.pollution_exp,
    );
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{},{},{}", r.k, r.value, r.iterations))
        .collect();
    config.write_csv("opnorm_sweep.csv", "k,norm,iterations", &rows)?;
    println!("{}", serde_json::to_string_pretty(&table.fit)?);
    if let Some(msg) = &table.aborted {
        eprintln!("sweep aborted: {msg}");
        return Ok(EXIT_COMPUTE);
    }
    Ok(EXIT_OK)
}

fn cmd_norm_relations(config: &ExperimentConfig, ks: &[f64]) -> Result<i32> {
    let family = config.family()?;
    let mut reports = Vec::new();
    let mut ok = true;
    for &k in ks {
        let mesh = Mesh::build(k, config.ppw, config.pollution_exp, family.base().breakpoints())?;
        let op = assemble_a0(&mesh, family.base())?;
        let rep = norm_relation_check(&op)?;
        ok &= rep.ineq1_holds && rep.ineq2_holds;
        reports.push(rep);
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_holo_region(config: &ExperimentConfig, k: f64, part: u8) -> Result<i32> {
    let (op, _, family, _) = model_pieces(config, k)?;
    let region = match part {
        1 => {
            let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k)?;
            region_radius_part1(&opn, &family, AllocationRule::EqualBudget)?
        }
        2 => {
            let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H2k)?;
            region_radius_part2(&opn, &family, 1.0)?
        }
        _ => return Err(Error::Invalid("--part must be 1 or 2".into())),
    };
    println!("{}", serde_json::to_string_pretty(&region)?);
    Ok(EXIT_OK)
}

fn cmd_holo_verify(config: &ExperimentConfig, k: f64, samples: usize) -> Result<i32> {
    let (op, perts, family, _) = model_pieces(config, k)?;
    let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k)?;
    let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget)?;
    let pert_refs: Vec<_> = perts.iter().collect();
    let report = verify_factor_two(&op, &pert_refs, &region, samples, config.seed)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.all_within_factor_two && report.max_neumann_direct_rel <= 1e-8 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_cauchy(
    config: &ExperimentConfig,
    k: f64,
    center: C64,
    radius: f64,
    nodes: usize,
    unchecked: bool,
) -> Result<i32> {
    let (op, perts, family, _) = model_pieces(config, k)?;
    let region = if unchecked {
        None
    } else {
        let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k)?;
        Some(region_radius_part1(&opn, &family, AllocationRule::EqualBudget)?)
    };
    let res = cauchy_residual(&op, &perts[0], center, radius, nodes, region.as_ref())?;
    println!("{res}");
    Ok(EXIT_OK)
}

fn cmd_poles(config: &ExperimentConfig, m_lo: usize, m_hi: usize, pencil_upto: usize) -> Result<i32> {
    let report = k_sequence_experiment(m_lo, m_hi, pencil_upto, config.ppw, config.pollution_exp)?;
    let mut rows = Vec::new();
    for r in &report.rows {
        rows.push(format!(
            "{},{},{},{},{},transcendental,",
            r.m, r.k, r.y_transcendental.re, r.y_transcendental.im, r.k_abs_y
        ));
        if let (Some(yp), Some(a)) = (r.y_pencil, r.agreement) {
            rows.push(format!(
                "{},{},{},{},{},pencil,{a}",
                r.m,
                r.k,
                yp.re,
                yp.im,
                r.k * yp.norm()
            ));
        }
    }
    config.write_csv("poles.csv", "m,k,re_y,im_y,k_abs_y,source,agreement", &rows)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "min_k_abs_y": report.min_k_abs_y,
            "max_k_abs_y": report.max_k_abs_y,
            "rows": report.rows.len(),
        }))?
    );
    let ok = report.min_k_abs_y >= 1.0 && report.max_k_abs_y <= 1.5;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_pole_map(
    config: &ExperimentConfig,
    k: f64,
    re_range: (f64, f64),
    im_range: (f64, f64),
    grid: usize,
) -> Result<i32> {
    if grid < 2 {
        return Err(Error::Invalid("--grid must be at least 2".into()));
    }
    let (op, perts, _, _) = model_pieces(config, k)?;
    let pert = &perts[0];
    let mut rows = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let re = re_range.0 + (re_range.1 - re_range.0) * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let im = im_range.0 + (im_range.1 - im_range.0) * j as f64 / (grid - 1) as f64;
            let y = C64::new(re, im);
            let shifted = op.system.add_scaled(y, &pert.matrix);
            let log_cond = match shifted.factor() {
                Ok(lu) => (shifted.norm_1() * lu.inv_norm_1_estimate()).log10(),
                Err(_) => f64::INFINITY,
            };
            rows.push(format!("{re},{im},{log_cond}"));
        }
    }
    let path = config.write_csv("pole_map.csv", "re_y,im_y,log10_cond", &rows)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

fn cmd_dtn_check(config: &ExperimentConfig, nmax: i64, z: &[f64]) -> Result<i32> {
    let report = crate::dtn::check_sign_properties(nmax, z)?;
    let _ = config; // symbol checks need no mesh configuration
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.all_pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_repro_all() -> i32 {
    let outcomes = crate::suite::run_all();
    let mut ok = true;
    for o in &outcomes {
        println!(
            "[{}] criterion {} ({}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
        ok &= o.pass;
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}
