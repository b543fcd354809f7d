//! Compactly supported probability laws on the real line and their integral
//! transforms.
//!
//! A [`MeasureSpec`] is raw user input (it is also the JSON measure-file
//! schema). [`Measure::new`] validates and normalizes it into a [`Measure`],
//! which carries either a list of atoms or a list of density pieces.
//!
//! Every transform used downstream is an integral of a kernel in `x` against
//! the measure. For atoms these are finite sums. For densities they go through
//! adaptive Gauss–Legendre quadrature; kernels such as `1/((a0-x)^2+v^2)` peak
//! at `x = a0` with width `v`, so each piece is pre-split at the peak and at a
//! few multiples of `v` around it. Semicircle pieces are integrated in the
//! angle variable `x = R sin(theta)`, which removes the square-root edges.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Raw description of a law. Doubles as the measure-file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Atomic { atoms: Vec<AtomSpec> },
    PiecewisePoly { pieces: Vec<PieceSpec> },
    Semicircle { variance: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Mass `alpha` at `+1` and `1 - alpha` at `-1`.
    Bernoulli { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub x: f64,
    pub w: f64,
}

/// Polynomial density on `[lo, hi]`; `coeffs` are in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl MeasureSpec {
    pub fn semicircle(variance: f64) -> Self {
        MeasureSpec::Semicircle { variance }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        MeasureSpec::Uniform { lo, hi }
    }

    pub fn bernoulli(alpha: f64) -> Self {
        MeasureSpec::Bernoulli { alpha }
    }

    pub fn atomic(atoms: &[(f64, f64)]) -> Self {
        MeasureSpec::Atomic {
            atoms: atoms.iter().map(|&(x, w)| AtomSpec { x, w }).collect(),
        }
    }

    pub fn piecewise_poly(pieces: &[(f64, f64, &[f64])]) -> Self {
        MeasureSpec::PiecewisePoly {
            pieces: pieces
                .iter()
                .map(|&(lo, hi, c)| PieceSpec {
                    lo,
                    hi,
                    coeffs: c.to_vec(),
                })
                .collect(),
        }
    }

    /// Parses a preset of the form `NAME[:param[:param]]`.
    ///
    /// Known names: `semicircle[:variance]`, `uniform[:lo:hi]`,
    /// `bernoulli[:alpha]`, `quadratic` (density `3x^2` on `[0, 1]`).
    pub fn from_preset(text: &str) -> Result<Self> {
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidMeasure(format!("bad preset parameter {p:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| -> Result<()> {
            if params.len() > n {
                Err(Error::InvalidMeasure(format!(
                    "preset {name} takes at most {n} parameter(s)"
                )))
            } else {
                Ok(())
            }
        };
        match name.as_str() {
            "semicircle" | "elliptic" => {
                arity(1)?;
                Ok(Self::semicircle(params.first().copied().unwrap_or(1.0)))
            }
            "uniform" => {
                arity(2)?;
                match params.as_slice() {
                    [] => Ok(Self::uniform(-1.0, 1.0)),
                    [lo, hi] => Ok(Self::uniform(*lo, *hi)),
                    _ => Err(Error::InvalidMeasure("uniform takes lo:hi".into())),
                }
            }
            "bernoulli" => {
                arity(1)?;
                Ok(Self::bernoulli(params.first().copied().unwrap_or(0.5)))
            }
            "quadratic" => {
                arity(0)?;
                Ok(Self::piecewise_poly(&[(0.0, 1.0, &[0.0, 0.0, 3.0])]))
            }
            _ => Err(Error::InvalidMeasure(format!("unknown preset {name:?}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure spec serializes")
    }
}

/// `[m, M]`: infimum and supremum of the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Poly {
        lo: f64,
        hi: f64,
        coeffs: Vec<f64>,
        peak: f64,
    },
    /// Semicircle density of radius `R` (variance `R^2/4`), unit mass.
    Semicircle { radius: f64 },
}

impl Piece {
    fn lo(&self) -> f64 {
        match self {
            Piece::Poly { lo, .. } => *lo,
            Piece::Semicircle { radius } => -radius,
        }
    }

    fn hi(&self) -> f64 {
        match self {
            Piece::Poly { hi, .. } => *hi,
            Piece::Semicircle { radius } => *radius,
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        match self {
            Piece::Poly { coeffs, .. } => horner(coeffs, x),
            Piece::Semicircle { radius } => {
                let r2 = radius * radius;
                2.0 * (r2 - x * x).max(0.0).sqrt() / (PI * r2)
            }
        }
    }

    /// Mass in `[lo, x]`.
    fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = (self.lo(), self.hi());
        if x <= lo {
            return 0.0;
        }
        let x = x.min(hi);
        match self {
            Piece::Poly { coeffs, .. } => antiderivative(coeffs, x) - antiderivative(coeffs, lo),
            Piece::Semicircle { radius } => {
                let th = (x / radius).clamp(-1.0, 1.0).asin();
                (th + th.sin() * th.cos()) / PI + 0.5
            }
        }
    }

    /// True when `int rho(x)/(a0-x)^2 dx` over this piece diverges.
    fn inverse_square_diverges(&self, a0: f64) -> bool {
        let (lo, hi) = (self.lo(), self.hi());
        if a0 < lo || a0 > hi {
            return false;
        }
        match self {
            Piece::Semicircle { .. } => true,
            Piece::Poly {
                coeffs, peak, lo, hi, ..
            } => {
                let tiny = 1e-13 * peak;
                let c0 = horner(coeffs, a0);
                let c1 = horner_derivative(coeffs, a0);
                c0 > tiny || c1.abs() * (hi - lo) > tiny
            }
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn horner_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
}

fn antiderivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, c)| acc * x + c / (k as f64 + 1.0))
        * x
}

/// The moment family at `(a0, v)` with `D = (a0-x)^2 + v^2`:
/// `p0 = ∫1/D`, `p1 = ∫x/D`, `q0 = ∫1/D^2`, `q1 = ∫(a0-x)/D^2`,
/// `q2 = ∫(a0-x)^2/D^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub p0: f64,
    pub p1: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QIntegrals {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

/// A validated, normalized probability law with compact support.
#[derive(Debug, Clone)]
pub struct Measure {
    spec: MeasureSpec,
    atoms: Vec<Atom>,
    pieces: Vec<Piece>,
    support: Support,
    rescale: f64,
    tol: Tolerance,
}

fn merge_tolerance(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidMeasure(format!("{what} is not finite")))
    }
}

impl Measure {
    /// Validates `spec`: normalizes the mass to one, merges coincident atoms,
    /// and rejects point masses and negative mass.
    pub fn new(spec: &MeasureSpec) -> Result<Self> {
        match spec {
            MeasureSpec::Atomic { atoms } => Self::from_atoms(atoms),
            MeasureSpec::Bernoulli { alpha } => {
                let alpha = finite(*alpha, "alpha")?;
                if alpha == 0.0 || alpha == 1.0 {
                    return Err(Error::DiracMeasure);
                }
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidMeasure(format!(
                        "bernoulli alpha {alpha} outside (0, 1)"
                    )));
                }
                let mut m = Self::from_atoms(&[
                    AtomSpec {
                        x: -1.0,
                        w: 1.0 - alpha,
                    },
                    AtomSpec { x: 1.0, w: alpha },
                ])?;
                m.spec = MeasureSpec::Bernoulli { alpha };
                Ok(m)
            }
            MeasureSpec::Semicircle { variance } => {
                let s = finite(*variance, "variance")?;
                if s <= 0.0 {
                    return Err(Error::InvalidMeasure(format!(
                        "semicircle variance {s} must be positive"
                    )));
                }
                let radius = 2.0 * s.sqrt();
                Ok(Measure {
                    spec: spec.clone(),
                    atoms: Vec::new(),
                    pieces: vec![Piece::Semicircle { radius }],
                    support: Support {
                        lo: -radius,
                        hi: radius,
                    },
                    rescale: 1.0,
                    tol: Tolerance::default(),
                })
            }
            MeasureSpec::Uniform { lo, hi } => {
                let (lo, hi) = (finite(*lo, "lo")?, finite(*hi, "hi")?);
                if lo >= hi {
                    return Err(Error::InvalidMeasure(format!(
                        "uniform needs lo < hi, got [{lo}, {hi}]"
                    )));
                }
                let mut m = Self::from_pieces(&[PieceSpec {
                    lo,
                    hi,
                    coeffs: vec![1.0 / (hi - lo)],
                }])?;
                m.spec = spec.clone();
                Ok(m)
            }
            MeasureSpec::PiecewisePoly { pieces } => Self::from_pieces(pieces),
        }
    }

    fn from_atoms(raw: &[AtomSpec]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(raw.len());
        for a in raw {
            let x = finite(a.x, "atom position")?;
            let w = finite(a.w, "atom weight")?;
            if w < 0.0 {
                return Err(Error::NegativeMass(format!("atom at {x} has weight {w}")));
            }
            if w > 0.0 {
                atoms.push(Atom { x, w });
            }
        }
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if (a.x - last.x).abs() <= merge_tolerance(last.x) => {
                    last.x = (last.x * last.w + a.x * a.w) / (last.w + a.w);
                    last.w += a.w;
                }
                _ => merged.push(a),
            }
        }
        let total: f64 = merged.iter().map(|a| a.w).sum();
        if total <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        if merged.len() < 2 {
            return Err(Error::DiracMeasure);
        }
        for a in &mut merged {
            a.w /= total;
        }
        let support = Support {
            lo: merged[0].x,
            hi: merged[merged.len() - 1].x,
        };
        let spec = MeasureSpec::Atomic {
            atoms: merged.iter().map(|a| AtomSpec { x: a.x, w: a.w }).collect(),
        };
        Ok(Measure {
            spec,
            atoms: merged,
            pieces: Vec::new(),
            support,
            rescale: 1.0 / total,
            tol: Tolerance::default(),
        })
    }

    fn from_pieces(raw: &[PieceSpec]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(raw.len());
        let mut total = 0.0;
        for p in raw {
            let (lo, hi) = (finite(p.lo, "piece lo")?, finite(p.hi, "piece hi")?);
            if lo >= hi {
                return Err(Error::InvalidMeasure(format!(
                    "piece needs lo < hi, got [{lo}, {hi}]"
                )));
            }
            if p.coeffs.is_empty() {
                return Err(Error::InvalidMeasure("piece without coefficients".into()));
            }
            for &c in &p.coeffs {
                finite(c, "coefficient")?;
            }
            let samples = 512;
            let mut peak = 0.0f64;
            let mut low = f64::INFINITY;
            for k in 0..=samples {
                let x = lo + (hi - lo) * k as f64 / samples as f64;
                let y = horner(&p.coeffs, x);
                peak = peak.max(y);
                low = low.min(y);
            }
            if low < -1e-12 * peak.max(f64::MIN_POSITIVE) {
                return Err(Error::NegativeMass(format!(
                    "density on [{lo}, {hi}] reaches {low}"
                )));
            }
            let mass = antiderivative(&p.coeffs, hi) - antiderivative(&p.coeffs, lo);
            if mass < 0.0 {
                return Err(Error::NegativeMass(format!("piece [{lo}, {hi}] has mass {mass}")));
            }
            if mass == 0.0 {
                continue;
            }
            total += mass;
            pieces.push(Piece::Poly {
                lo,
                hi,
                coeffs: p.coeffs.clone(),
                peak,
            });
        }
        if pieces.is_empty() || total <= 0.0 {
            return Err(Error::EmptyMeasure);
        }
        pieces.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
        for w in pieces.windows(2) {
            if w[1].lo() < w[0].hi() - merge_tolerance(w[0].hi()) {
                return Err(Error::InvalidMeasure("overlapping pieces".into()));
            }
        }
        for p in &mut pieces {
            if let Piece::Poly { coeffs, peak, .. } = p {
                for c in coeffs.iter_mut() {
                    *c /= total;
                }
                *peak /= total;
            }
        }
        let support = Support {
            lo: pieces[0].lo(),
            hi: pieces[pieces.len() - 1].hi(),
        };
        let spec = MeasureSpec::PiecewisePoly {
            pieces: pieces
                .iter()
                .map(|p| match p {
                    Piece::Poly { lo, hi, coeffs, .. } => PieceSpec {
                        lo: *lo,
                        hi: *hi,
                        coeffs: coeffs.clone(),
                    },
                    Piece::Semicircle { .. } => unreachable!(),
                })
                .collect(),
        };
        Ok(Measure {
            spec,
            atoms: Vec::new(),
            pieces,
            support,
            rescale: 1.0 / total,
            tol: Tolerance::default(),
        })
    }

    /// Replaces the per-integral quadrature tolerance.
    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// The normalized spec (sorted, merged atoms; rescaled coefficients).
    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Factor the raw input mass was multiplied by.
    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Total mass, evaluated from the stored representation.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>()
            + self
                .pieces
                .iter()
                .map(|p| p.cdf(p.hi()))
                .sum::<f64>()
    }

    /// Density of the absolutely continuous part at `x`.
    pub fn density(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.density(x)).sum()
    }

    /// Interval endpoints of the density pieces, for callers that build their
    /// own quadrature grids.
    pub fn piece_bounds(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.lo(), p.hi())).collect()
    }

    /// True when `x` lies in the closed support, up to the atom merge
    /// tolerance.
    pub fn on_support(&self, x: f64) -> bool {
        let tol = merge_tolerance(x);
        self.atoms.iter().any(|a| (a.x - x).abs() <= tol)
            || self
                .pieces
                .iter()
                .any(|p| x >= p.lo() - tol && x <= p.hi() + tol)
    }

    /// `∫ f(x) dμ(x)`. `center` and `width` describe where `f` is sharply
    /// peaked (used to pre-split density pieces); pass `width = 0` for a
    /// kernel singular at `center`.
    pub fn integrate<const N: usize>(
        &self,
        center: f64,
        width: f64,
        f: impl Fn(f64) -> [f64; N],
    ) -> [f64; N] {
        let mut total = [0.0; N];
        for a in &self.atoms {
            let y = f(a.x);
            for k in 0..N {
                total[k] += a.w * y[k];
            }
        }
        for piece in &self.pieces {
            let part = self.integrate_piece(piece, center, width, &f);
            for k in 0..N {
                total[k] += part[k];
            }
        }
        total
    }

    fn integrate_piece<const N: usize>(
        &self,
        piece: &Piece,
        center: f64,
        width: f64,
        f: &impl Fn(f64) -> [f64; N],
    ) -> [f64; N] {
        let (lo, hi) = (piece.lo(), piece.hi());
        let peak = center.clamp(lo, hi);
        let scale = width.abs().hypot(center - peak);
        let mut breaks = vec![lo, hi, peak];
        for c in [1.0, 8.0, 64.0] {
            breaks.push(peak - c * scale);
            breaks.push(peak + c * scale);
        }
        breaks.retain(|b| *b >= lo && *b <= hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        match piece {
            Piece::Poly { coeffs, .. } => {
                let g = |x: f64| {
                    let rho = horner(coeffs, x);
                    let mut y = f(x);
                    for v in &mut y {
                        *v *= rho;
                    }
                    y
                };
                quadrature::integrate(&g, &breaks, self.tol)
            }
            Piece::Semicircle { radius } => {
                let r = *radius;
                let mut angles: Vec<f64> = breaks
                    .iter()
                    .map(|x| (x / r).clamp(-1.0, 1.0).asin())
                    .collect();
                angles[0] = -FRAC_PI_2;
                *angles.last_mut().unwrap() = FRAC_PI_2;
                angles.dedup();
                let g = |th: f64| {
                    let c = th.cos();
                    let w = 2.0 / PI * c * c;
                    let mut y = f(r * th.sin());
                    for v in &mut y {
                        *v *= w;
                    }
                    y
                };
                quadrature::integrate(&g, &angles, self.tol)
            }
        }
    }

    /// True when `∫ dμ(x)/(a0-x)^2` diverges.
    pub fn inverse_square_diverges(&self, a0: f64) -> bool {
        let tol = merge_tolerance(a0);
        self.atoms.iter().any(|a| (a.x - a0).abs() <= tol)
            || self.pieces.iter().any(|p| p.inverse_square_diverges(a0))
    }

    /// `∫ dμ(x) / ((a0-x)^2 + v^2)`; `+∞` when `v = 0` and the integral
    /// diverges.
    pub fn p0(&self, a0: f64, v: f64) -> f64 {
        let v = v.abs();
        if v == 0.0 && self.inverse_square_diverges(a0) {
            return f64::INFINITY;
        }
        let v2 = v * v;
        self.integrate(a0, v, |x| {
            let d = a0 - x;
            [1.0 / (d * d + v2)]
        })[0]
    }

    /// `∫ x dμ(x) / ((a0-x)^2 + v^2)`. With `v = 0` it is finite exactly when
    /// [`Measure::p0`] is; otherwise `NaN` is returned.
    pub fn p1(&self, a0: f64, v: f64) -> f64 {
        let v = v.abs();
        if v == 0.0 && self.inverse_square_diverges(a0) {
            return f64::NAN;
        }
        let v2 = v * v;
        self.integrate(a0, v, |x| {
            let d = a0 - x;
            [x / (d * d + v2)]
        })[0]
    }

    /// `p0` together with `q0 = ∫ dμ/D^2`, sharing one subdivision. This is
    /// what a Newton step on `p0(a0, v) = c` needs.
    pub fn p0_q0(&self, a0: f64, v: f64) -> (f64, f64) {
        let v = v.abs();
        if v == 0.0 && self.inverse_square_diverges(a0) {
            return (f64::INFINITY, f64::INFINITY);
        }
        let v2 = v * v;
        let [p0, q0] = self.integrate(a0, v, |x| {
            let d = a0 - x;
            let inv = 1.0 / (d * d + v2);
            [inv, inv * inv]
        });
        (p0, q0)
    }

    /// The full moment family at `(a0, v)`, `v > 0`.
    pub fn moments(&self, a0: f64, v: f64) -> Moments {
        let v = v.abs();
        let v2 = v * v;
        let [p0, p1, q0, q1, q2] = self.integrate(a0, v, |x| {
            let d = a0 - x;
            let inv = 1.0 / (d * d + v2);
            let inv2 = inv * inv;
            [inv, x * inv, inv2, d * inv2, d * d * inv2]
        });
        Moments { p0, p1, q0, q1, q2 }
    }

    /// `q0 = ∫dμ/D^2`, `q1 = ∫(a0-x)dμ/D^2`, `q2 = ∫(a0-x)^2 dμ/D^2`.
    pub fn q_integrals(&self, a0: f64, v: f64) -> QIntegrals {
        let m = self.moments(a0, v);
        QIntegrals {
            q0: m.q0,
            q1: m.q1,
            q2: m.q2,
        }
    }

    fn check_off_support(&self, z: Complex64) -> Result<()> {
        if z.im == 0.0 && self.on_support(z.re) {
            Err(Error::OnSupport(format!("{z}")))
        } else if !(z.re.is_finite() && z.im.is_finite()) {
            Err(Error::InvalidArgument(format!("non-finite point {z}")))
        } else {
            Ok(())
        }
    }

    /// Cauchy transform `G(z) = ∫ dμ(x)/(z - x)`.
    pub fn cauchy(&self, z: Complex64) -> Result<Complex64> {
        self.check_off_support(z)?;
        let (a, b) = (z.re, z.im);
        let b2 = b * b;
        let [re, im] = self.integrate(a, b, |x| {
            let d = a - x;
            let inv = 1.0 / (d * d + b2);
            [d * inv, -b * inv]
        });
        Ok(Complex64::new(re, im))
    }

    /// `G'(z) = -∫ dμ(x)/(z - x)^2`.
    pub fn cauchy_prime(&self, z: Complex64) -> Result<Complex64> {
        self.check_off_support(z)?;
        Ok(self.cauchy_with_derivative(z)?.1)
    }

    /// `(G(z), G'(z))` from one quadrature pass.
    pub fn cauchy_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_off_support(z)?;
        let (a, b) = (z.re, z.im);
        let b2 = b * b;
        let [gr, gi, dr, di] = self.integrate(a, b, |x| {
            let d = a - x;
            let inv = 1.0 / (d * d + b2);
            let inv2 = inv * inv;
            [d * inv, -b * inv, (b2 - d * d) * inv2, 2.0 * b * d * inv2]
        });
        Ok((Complex64::new(gr, gi), Complex64::new(dr, di)))
    }

    /// `∫ log(|x - z|^2 + eps) dμ(x)`.
    pub fn log_potential(&self, z: Complex64, eps: f64) -> Result<f64> {
        if eps < 0.0 {
            return Err(Error::InvalidArgument(format!("eps = {eps} < 0")));
        }
        if eps == 0.0 && z.im == 0.0 {
            let tol = merge_tolerance(z.re);
            if self.atoms.iter().any(|a| (a.x - z.re).abs() <= tol) {
                return Err(Error::DivergentLog(format!("{z}")));
            }
        }
        let (a, b) = (z.re, z.im);
        let c = b * b + eps;
        Ok(self.integrate(a, c.sqrt(), |x| {
            let d = a - x;
            [(d * d + c).ln()]
        })[0])
    }

    /// Cumulative distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.x <= x).map(|a| a.w).sum();
        let pieces: f64 = self.pieces.iter().map(|p| p.cdf(x)).sum();
        (atoms + pieces).min(1.0)
    }

    /// `inf { x : F(x) >= p }` for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level {p} not in (0, 1)")));
        }
        if self.is_atomic() {
            let mut cum = 0.0;
            for a in &self.atoms {
                cum += a.w;
                if cum >= p - 1e-14 {
                    return Ok(a.x);
                }
            }
            return Ok(self.support.hi);
        }
        let (mut lo, mut hi) = (self.support.lo, self.support.hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
