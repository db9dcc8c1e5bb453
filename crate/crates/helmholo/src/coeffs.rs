//! Piecewise-smooth complex coefficients on `[0, R]` and affine parametric
//! families `n(x, y) = n0(x) + sum_j y_j psi_j(x)`.
//!
//! Evaluation at a breakpoint takes the value of the piece to the *right*
//! (right-continuous convention); the value at `x = R` comes from the last
//! piece.

use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};

/// One smooth descriptor on a breakpoint interval.
///
/// Polynomials are stored in the global coordinate `x` with coefficients in
/// ascending degree order: `p(x) = c0 + c1 x + c2 x^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Const(C64),
    Poly(Vec<C64>),
}

impl Piece {
    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Piece::Const(c) => *c,
            Piece::Poly(coeffs) => {
                let mut acc = C64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
        }
    }

    /// Derivative as a new piece.
    pub fn derivative(&self) -> Piece {
        match self {
            Piece::Const(_) => Piece::Const(C64::new(0.0, 0.0)),
            Piece::Poly(coeffs) => {
                if coeffs.len() <= 1 {
                    Piece::Const(C64::new(0.0, 0.0))
                } else {
                    Piece::Poly(
                        coeffs
                            .iter()
                            .enumerate()
                            .skip(1)
                            .map(|(j, c)| c * j as f64)
                            .collect(),
                    )
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Piece::Const(_) => 0,
            Piece::Poly(c) => c.len().saturating_sub(1),
        }
    }

    fn scaled(&self, factor: C64) -> Piece {
        match self {
            Piece::Const(c) => Piece::Const(c * factor),
            Piece::Poly(coeffs) => Piece::Poly(coeffs.iter().map(|c| c * factor).collect()),
        }
    }

    fn plus(&self, other: &Piece) -> Piece {
        match (self, other) {
            (Piece::Const(a), Piece::Const(b)) => Piece::Const(a + b),
            _ => {
                let a = self.coeff_vec();
                let b = other.coeff_vec();
                let n = a.len().max(b.len());
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (i, c) in a.iter().enumerate() {
                    out[i] += c;
                }
                for (i, c) in b.iter().enumerate() {
                    out[i] += c;
                }
                Piece::Poly(out)
            }
        }
    }

    fn coeff_vec(&self) -> Vec<C64> {
        match self {
            Piece::Const(c) => vec![*c],
            Piece::Poly(c) => c.clone(),
        }
    }

    /// Supremum of `|p(x)|` over `[a, b]`, exact for constants and computed
    /// from the critical points of `|p|^2` for polynomials.
    fn sup_abs(&self, a: f64, b: f64) -> f64 {
        match self {
            Piece::Const(c) => c.norm(),
            Piece::Poly(_) => {
                // |p|^2 = re(p)^2 + im(p)^2 is a real polynomial; its critical
                // points are roots of the derivative, bracketed by sampling.
                let f = |x: f64| self.eval(x).norm();
                let mut best = f(a).max(f(b));
                let samples = 64 * self.degree().max(1);
                let mut prev_x = a;
                let mut prev = f(a);
                for i in 1..=samples {
                    let x = a + (b - a) * i as f64 / samples as f64;
                    let v = f(x);
                    best = best.max(v);
                    // golden-section polish around each local max
                    if i >= 2 && prev >= f(prev_x - (b - a) / samples as f64) && prev >= v {
                        best = best.max(local_max(&f, prev_x - (b - a) / samples as f64, x));
                    }
                    prev_x = x;
                    prev = v;
                }
                best
            }
        }
    }
}

fn local_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Piecewise-smooth complex-valued coefficient on `[0, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCoefficient {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseCoefficient {
    /// `breakpoints` must be strictly increasing with `breakpoints[0] = 0`;
    /// `pieces.len() == breakpoints.len() - 1`.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidCoefficient(
                "need at least two breakpoints".into(),
            ));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(Error::InvalidCoefficient(format!(
                "{} pieces for {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidCoefficient(
                "first breakpoint must be 0".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCoefficient(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    /// Constant coefficient `value` on `[0, r]`.
    pub fn constant(value: C64, r: f64) -> Self {
        Self::new(vec![0.0, r], vec![Piece::Const(value)]).expect("valid constant coefficient")
    }

    /// The coefficient `n0` of the shipped 1-d model: `1/2` on `[0, 1]`,
    /// `1` on `(1, 2]`.
    pub fn model_n0() -> Self {
        Self::new(
            vec![0.0, 1.0, 2.0],
            vec![
                Piece::Const(C64::new(0.5, 0.0)),
                Piece::Const(C64::new(1.0, 0.0)),
            ],
        )
        .expect("valid model coefficient")
    }

    /// The shipped mode `psi_1 = -1_{[0,1]}`: the negated indicator of
    /// `[0, 1]` inside `[0, 2]`.
    ///
    /// The sign is chosen so that a parameter with `Re(y) > 0` *lowers* the
    /// refractive index inside the obstacle: `n0 + y psi_1` equals
    /// `1/2 - y` on `[0, 1]`.  With this convention the resonances of the
    /// family (roots of `tan(k sqrt(1/2 - y)) = -i sqrt(1/2 - y)`) sit in
    /// the upper half-plane `Im(y) > 0`.
    pub fn model_psi1() -> Self {
        Self::new(
            vec![0.0, 1.0, 2.0],
            vec![
                Piece::Const(C64::new(-1.0, 0.0)),
                Piece::Const(C64::new(0.0, 0.0)),
            ],
        )
        .expect("valid model coefficient")
    }

    pub fn domain_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Index of the piece whose (half-open) interval contains `x`.
    fn piece_index(&self, x: f64) -> Result<usize> {
        let r = self.domain_end();
        if !(0.0..=r).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {r}]")));
        }
        if x == r {
            return Ok(self.pieces.len() - 1);
        }
        // right-continuous: a breakpoint belongs to the piece on its right
        let idx = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(idx.min(self.pieces.len() - 1))
    }

    /// Evaluate at `x` under the right-continuous breakpoint convention.
    pub fn eval(&self, x: f64) -> Result<C64> {
        Ok(self.pieces[self.piece_index(x)?].eval(x))
    }

    /// Exact supremum of `|coeff(x)|` over the domain.
    pub fn sup_norm(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.sup_abs(w[0], w[1]))
            .fold(0.0, f64::max)
    }

    /// Infimum of `Re(coeff(x))` over the domain (exact for constants,
    /// sampled with local polish for polynomial pieces).  Used for the
    /// coefficient lower bound `n_min` in the norm-relation inequalities.
    pub fn min_real_on_domain(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| match p {
                Piece::Const(c) => c.re,
                Piece::Poly(_) => {
                    let f = |x: f64| -p.eval(x).re;
                    let samples = 64 * p.degree().max(1);
                    let mut best = f(w[0]).max(f(w[1]));
                    for i in 1..samples {
                        let x0 = w[0] + (w[1] - w[0]) * (i - 1) as f64 / samples as f64;
                        let x1 = w[0] + (w[1] - w[0]) * (i + 1) as f64 / samples as f64;
                        best = best.max(local_max(&f, x0, x1));
                    }
                    -best
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Piecewise `W^{1,infty}` norm: `sup |coeff| + sup |coeff'|` with the
    /// derivative taken piece-by-piece (jump discontinuities at breakpoints
    /// are excluded; such coefficients are not genuinely `W^{1,infty}` and
    /// are ineligible for the part-2 holomorphy condition).
    pub fn w1inf_norm(&self) -> f64 {
        let dsup = self
            .pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.derivative().sup_abs(w[0], w[1]))
            .fold(0.0, f64::max);
        self.sup_norm() + dsup
    }

    /// True when the coefficient has no jumps at interior breakpoints, i.e.
    /// it is continuous and genuinely `W^{1,infty}`.
    pub fn is_continuous(&self) -> bool {
        self.breakpoints[1..self.breakpoints.len() - 1]
            .iter()
            .zip(self.pieces.windows(2))
            .all(|(&b, w)| (w[0].eval(b) - w[1].eval(b)).norm() < 1e-14)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scaled(factor)).collect(),
        }
    }

    /// Pointwise sum on the union of breakpoints.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.domain_end() - other.domain_end()).abs() > 1e-14 {
            return Err(Error::DimensionMismatch(
                "coefficients live on different domains".into(),
            ));
        }
        let breakpoints = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let a = self.pieces[self.piece_index(w[0])?].clone();
            let b = other.pieces[other.piece_index(w[0])?].clone();
            pieces.push(a.plus(&b));
        }
        Self::new(breakpoints, pieces)
    }

    /// Largest interval `(a, b)` outside of which the coefficient vanishes
    /// identically; `None` for the zero coefficient.
    pub fn support(&self) -> Option<(f64, f64)> {
        let nonzero: Vec<usize> = self
            .pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| match p {
                Piece::Const(c) => c.norm() > 0.0,
                Piece::Poly(cs) => cs.iter().any(|c| c.norm() > 0.0),
            })
            .map(|(i, _)| i)
            .collect();
        nonzero
            .first()
            .map(|&lo| (self.breakpoints[lo], self.breakpoints[nonzero.last().unwrap() + 1]))
    }

    pub fn to_descriptor(&self) -> CoefficientDescriptor {
        CoefficientDescriptor {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| match p {
                    Piece::Const(c) => PieceDescriptor::Const { re: c.re, im: c.im },
                    Piece::Poly(cs) => PieceDescriptor::Poly {
                        coeffs: cs.iter().map(|c| [c.re, c.im]).collect(),
                    },
                })
                .collect(),
        }
    }

    pub fn from_descriptor(d: &CoefficientDescriptor) -> Result<Self> {
        let pieces = d
            .pieces
            .iter()
            .map(|p| match p {
                PieceDescriptor::Const { re, im } => Piece::Const(C64::new(*re, *im)),
                PieceDescriptor::Poly { coeffs } => {
                    Piece::Poly(coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
                }
            })
            .collect();
        Self::new(d.breakpoints.clone(), pieces)
    }
}

fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    all
}

/// JSON wire format for a piecewise coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientDescriptor {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<PieceDescriptor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PieceDescriptor {
    Const { re: f64, im: f64 },
    Poly { coeffs: Vec<[f64; 2]> },
}

/// JSON wire format for an affine family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub base: CoefficientDescriptor,
    pub modes: Vec<CoefficientDescriptor>,
}

/// A point `y` in the complex parameter space `C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub y: Vec<C64>,
}

impl ParamPoint {
    pub fn new(y: Vec<C64>) -> Self {
        Self { y }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            y: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn scalar(y: C64) -> Self {
        Self { y: vec![y] }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Affine coefficient family `n0 + sum_j y_j psi_j`.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    base: PiecewiseCoefficient,
    modes: Vec<PiecewiseCoefficient>,
}

impl AffineFamily {
    /// Every mode must be supported strictly inside `(0, R)`... strictly
    /// away from the truncation boundary `x = R` (`supp n_p subset B_R`).
    pub fn new(base: PiecewiseCoefficient, modes: Vec<PiecewiseCoefficient>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidCoefficient(
                "family needs at least one mode".into(),
            ));
        }
        let r = base.domain_end();
        for (j, m) in modes.iter().enumerate() {
            if (m.domain_end() - r).abs() > 1e-14 {
                return Err(Error::DimensionMismatch(format!(
                    "mode {j} lives on a different domain"
                )));
            }
            if let Some((_, hi)) = m.support() {
                if hi >= r {
                    return Err(Error::InvalidCoefficient(format!(
                        "mode {j} support touches the truncation boundary x = {r}"
                    )));
                }
            }
        }
        Ok(Self { base, modes })
    }

    /// The shipped model family: `n0` of the 1-d example with the single
    /// mode `psi_1 = -1_{[0,1]}`, so `n0 + y psi_1 = 1/2 - y` on `[0, 1]`.
    pub fn model() -> Self {
        Self::new(
            PiecewiseCoefficient::model_n0(),
            vec![PiecewiseCoefficient::model_psi1()],
        )
        .expect("valid model family")
    }

    pub fn base(&self) -> &PiecewiseCoefficient {
        &self.base
    }

    pub fn modes(&self) -> &[PiecewiseCoefficient] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `n0 + sum_j y_j psi_j` as a merged piecewise coefficient.
    pub fn instantiate(&self, y: &ParamPoint) -> Result<PiecewiseCoefficient> {
        if y.len() != self.modes.len() {
            return Err(Error::DimensionMismatch(format!(
                "parameter has {} entries, family has {} modes",
                y.len(),
                self.modes.len()
            )));
        }
        let mut out = self.base.clone();
        for (yj, psi) in y.y.iter().zip(&self.modes) {
            out = out.add(&psi.scale(*yj))?;
        }
        Ok(out)
    }

    /// The perturbation part `n_p(y) = sum_j y_j psi_j` alone.
    pub fn perturbation(&self, y: &ParamPoint) -> Result<PiecewiseCoefficient> {
        if y.len() != self.modes.len() {
            return Err(Error::DimensionMismatch(format!(
                "parameter has {} entries, family has {} modes",
                y.len(),
                self.modes.len()
            )));
        }
        let mut out = self.modes[0].scale(y.y[0]);
        for (yj, psi) in y.y.iter().zip(&self.modes).skip(1) {
            out = out.add(&psi.scale(*yj))?;
        }
        Ok(out)
    }

    pub fn to_descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            base: self.base.to_descriptor(),
            modes: self.modes.iter().map(|m| m.to_descriptor()).collect(),
        }
    }

    pub fn from_descriptor(d: &FamilyDescriptor) -> Result<Self> {
        Self::new(
            PiecewiseCoefficient::from_descriptor(&d.base)?,
            d.modes
                .iter()
                .map(PiecewiseCoefficient::from_descriptor)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}
