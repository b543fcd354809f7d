//! The Brown measure of `x0 + i·σ_t`: the domain `Ω_t`, the inverse
//! `a ↦ a0^t(a)` of the boundary map, the height `b_t`, the density `w_t`,
//! point classification and the log-potential outside `Ω̄_t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::quadrature::Tolerance;
use crate::subordination::{self, BoundaryPoint, LambdaRegion, ScanConfig};

/// One component of `Λ_t ∩ ℝ` together with its image under `a_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub lambda: (f64, f64),
    pub omega: (f64, f64),
}

/// Where a point sits relative to `Ω_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
    Boundary,
}

/// Result of [`BrownMeasure::classify`]. Above `Ω_t ∩ ℝ` the margin is
/// `|Im λ| - b_t(Re λ)`; elsewhere it is the distance to `Ω_t ∩ ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionVerdict {
    pub region: Region,
    pub margin: f64,
}

/// Default half-width of the boundary band used by [`BrownMeasure::classify`].
pub fn boundary_tolerance(lambda: Complex64) -> f64 {
    1e-9 * (1.0 + lambda.norm())
}

/// The Brown measure for a fixed law and time, with the correspondence
/// between the components of `Λ_t ∩ ℝ` and `Ω_t ∩ ℝ` precomputed.
#[derive(Debug, Clone)]
pub struct BrownMeasure {
    measure: Measure,
    fine: Measure,
    t: f64,
    region: LambdaRegion,
    branches: Vec<Branch>,
}

impl BrownMeasure {
    pub fn new(measure: &Measure, t: f64) -> Result<Self> {
        Self::with_scan(measure, t, &ScanConfig::default())
    }

    pub fn with_scan(measure: &Measure, t: f64, scan: &ScanConfig) -> Result<Self> {
        let region = LambdaRegion::compute(measure, t, scan)?;
        let mut branches = Vec::with_capacity(region.intervals.len());
        for &(lo, hi) in &region.intervals {
            let a_lo = subordination::a_t(measure, t, lo)?;
            let a_hi = subordination::a_t(measure, t, hi)?;
            branches.push(Branch {
                lambda: (lo, hi),
                omega: (a_lo, a_hi),
            });
        }
        let fine = measure.clone().with_tolerance(Tolerance {
            abs: 1e-15,
            rel: 1e-14,
        });
        Ok(BrownMeasure {
            measure: measure.clone(),
            fine,
            t,
            region,
            branches,
        })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambda_region(&self) -> &LambdaRegion {
        &self.region
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The intervals of `Ω_t ∩ ℝ`, ascending.
    pub fn omega_intervals(&self) -> Vec<(f64, f64)> {
        self.branches.iter().map(|b| b.omega).collect()
    }

    fn branch_of(&self, a: f64) -> Option<&Branch> {
        self.branches
            .iter()
            .find(|b| a >= b.omega.0 && a <= b.omega.1)
    }

    /// `v_t`, `a_t` and `da_t/da0` at `a0`.
    pub fn boundary_point(&self, a0: f64) -> Result<BoundaryPoint> {
        subordination::boundary_point(&self.measure, self.t, a0)
    }

    /// The boundary data at `a0^t(a)` for `a` in the closure of `Ω_t ∩ ℝ`.
    pub fn inverse_point(&self, a: f64) -> Result<BoundaryPoint> {
        let branch = *self.branch_of(a).ok_or(Error::OutsideOmega(a))?;
        let (l0, l1) = branch.lambda;
        let (o0, o1) = branch.omega;
        if a == o0 {
            return self.boundary_point(l0);
        }
        if a == o1 {
            return self.boundary_point(l1);
        }
        // Safeguarded Newton on the increasing map a_t over (l0, l1).
        let (mut lo, mut hi) = (l0, l1);
        let mut a0 = l0 + (l1 - l0) * (a - o0) / (o1 - o0);
        let tol = 1e-14 * (1.0 + a.abs());
        let mut best: Option<BoundaryPoint> = None;
        for _ in 0..200 {
            let bp = self.boundary_point(a0)?;
            let r = bp.a - a;
            if best.is_none_or(|b| (b.a - a).abs() > r.abs()) {
                best = Some(bp);
            }
            if r.abs() <= tol {
                return Ok(bp);
            }
            if r > 0.0 {
                hi = a0;
            } else {
                lo = a0;
            }
            let newton = a0 - r / bp.slope;
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == a0 || hi - lo <= 4.0 * f64::EPSILON * a0.abs().max(1e-300) {
                break;
            }
            a0 = next;
        }
        match best {
            Some(bp) if (bp.a - a).abs() <= 1e-11 * (1.0 + a.abs()) => Ok(bp),
            _ => Err(Error::NoConvergence(format!("inverse of a_t at a = {a}"))),
        }
    }

    /// `a0^t(a)`: the unique `a0` in `Λ_t ∩ ℝ` with `a_t(a0) = a`.
    pub fn a0_of_a(&self, a: f64) -> Result<f64> {
        Ok(self.inverse_point(a)?.a0)
    }

    /// Half-height `b_t(a) = 2·v_t(a0^t(a))` of `Ω_t` above `a`; zero off
    /// `Ω_t ∩ ℝ`.
    pub fn b_t(&self, a: f64) -> Result<f64> {
        if !self
            .branches
            .iter()
            .any(|b| a > b.omega.0 && a < b.omega.1)
        {
            return Ok(0.0);
        }
        Ok(2.0 * self.inverse_point(a)?.v)
    }

    /// Density `w_t(a) = (1/2πt)(da0^t/da - 1/2)` on `Ω_t`.
    pub fn w_t(&self, a: f64) -> Result<f64> {
        let bp = self.inverse_point(a)?;
        Ok(density_from_slope(self.t, bp.slope))
    }

    /// Compares `|Im λ|` with `b_t(Re λ)` using [`boundary_tolerance`].
    pub fn classify(&self, lambda: Complex64) -> Result<RegionVerdict> {
        self.classify_with_tolerance(lambda, boundary_tolerance(lambda))
    }

    pub fn classify_with_tolerance(&self, lambda: Complex64, tol: f64) -> Result<RegionVerdict> {
        let a = lambda.re;
        let margin = if self
            .branches
            .iter()
            .any(|b| a > b.omega.0 && a < b.omega.1)
        {
            lambda.im.abs() - self.b_t(a)?
        } else {
            let gap = self
                .branches
                .iter()
                .map(|b| (b.omega.0 - a).max(a - b.omega.1))
                .fold(f64::INFINITY, f64::min);
            gap.hypot(lambda.im)
        };
        let region = if margin.abs() <= tol {
            Region::Boundary
        } else if margin < 0.0 {
            Region::Inside
        } else {
            Region::Outside
        };
        Ok(RegionVerdict { region, margin })
    }

    /// `s_t(λ) = ∫log|z-x|^2 dμ(x) - t·Re[G(z)^2]` with `z = J_t^{-1}(λ)`,
    /// for `λ` outside `Ω̄_t`.
    pub fn s_outside(&self, lambda: Complex64) -> Result<f64> {
        let verdict = self.classify(lambda)?;
        if verdict.region != Region::Outside {
            return Err(Error::OutsideOnly(format!("{lambda}")));
        }
        let z = subordination::j_t_inverse(&self.fine, self.t, lambda)?;
        let g = self.fine.cauchy(z)?;
        let log = self.fine.log_potential(z, 0.0)?;
        Ok(log - self.t * (g * g).re)
    }

    /// Samples the measure on `n` Chebyshev points per interval of
    /// `Ω_t ∩ ℝ`.
    pub fn profile(&self, n: usize) -> Result<BrownProfile> {
        if n < 16 {
            return Err(Error::InvalidArgument(format!(
                "profile needs at least 16 points per interval, got {n}"
            )));
        }
        let mut profile = BrownProfile {
            t: self.t,
            omega_intervals: self.omega_intervals(),
            a: Vec::new(),
            a0: Vec::new(),
            b: Vec::new(),
            w: Vec::new(),
            near_boundary: Vec::new(),
            segment: Vec::new(),
            cdf: Vec::new(),
            interval_mass: Vec::new(),
            mass: 0.0,
        };
        let mut below = 0.0;
        for (seg, branch) in self.branches.iter().enumerate() {
            let (lo, hi) = branch.omega;
            let xs = chebyshev::nodes_on(n, lo, hi);
            let points: Vec<BoundaryPoint> = xs
                .par_iter()
                .map(|&a| self.inverse_point(a))
                .collect::<Result<_>>()?;
            // b_t vanishes like a square root at the ends, so integrate
            // 2·b_t·w_t as √(1-x²) times a smooth factor.
            let factor: Vec<f64> = chebyshev::nodes(n)
                .iter()
                .zip(&points)
                .map(|(x, bp)| {
                    4.0 * bp.v * density_from_slope(self.t, bp.slope) / (1.0 - x * x).sqrt()
                })
                .collect();
            let (cum, total) = chebyshev::cumulative_semicircle(&factor);
            let half = 0.5 * (hi - lo);
            for (k, (a, bp)) in xs.iter().zip(&points).enumerate() {
                profile.a.push(*a);
                profile.a0.push(bp.a0);
                profile.b.push(2.0 * bp.v);
                profile.w.push(density_from_slope(self.t, bp.slope));
                profile.near_boundary.push(k == 0 || k == n - 1);
                profile.segment.push(seg);
                profile.cdf.push(below + half * cum[k]);
            }
            below += half * total;
            profile.interval_mass.push(half * total);
        }
        profile.mass = below;
        Ok(profile)
    }
}

/// `w = (1/2πt)(1/(da_t/da0) - 1/2)`.
pub fn density_from_slope(t: f64, slope: f64) -> f64 {
    (1.0 / slope - 0.5) / (2.0 * PI * t)
}

/// The Brown measure sampled on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownProfile {
    pub t: f64,
    pub omega_intervals: Vec<(f64, f64)>,
    pub a: Vec<f64>,
    /// `a0^t(a)`.
    pub a0: Vec<f64>,
    /// `b_t(a)`.
    pub b: Vec<f64>,
    /// `w_t(a)`.
    pub w: Vec<f64>,
    /// The two outermost points of each interval.
    pub near_boundary: Vec<bool>,
    /// Index of the interval of `Ω_t ∩ ℝ` each point belongs to.
    pub segment: Vec<usize>,
    /// Mass of `{Re λ <= a}` at each grid point.
    pub cdf: Vec<f64>,
    /// `∫ 2·b_t·w_t da` over each interval.
    pub interval_mass: Vec<f64>,
    /// `∫ 2·b_t·w_t da`.
    pub mass: f64,
}

impl BrownProfile {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Mass of `{Re λ <= x}`, interpolated linearly between grid points.
    pub fn marginal_cdf(&self, x: f64) -> f64 {
        interpolate_cdf(&self.a, &self.cdf, &self.omega_intervals, &self.interval_mass, x)
    }

    /// `n` points drawn from the Brown measure: `Re λ` by inverting the
    /// marginal CDF, then `Im λ` uniform on `(-b_t, b_t)`, which is exact
    /// because `w_t` does not depend on `Im λ`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        // (a, cdf, b_t) with the interval ends pinned.
        let mut knots = Vec::with_capacity(self.len() + 2 * self.omega_intervals.len());
        let mut before = 0.0;
        for (seg, (&(lo, hi), &mass)) in self.omega_intervals.iter().zip(&self.interval_mass).enumerate() {
            knots.push((lo, before, 0.0));
            for k in (0..self.len()).filter(|&k| self.segment[k] == seg) {
                knots.push((self.a[k], self.cdf[k], self.b[k]));
            }
            before += mass;
            knots.push((hi, before, 0.0));
        }
        if knots.len() < 2 {
            return Vec::new();
        }
        (0..n)
            .map(|_| {
                let p = rng.random::<f64>() * self.mass;
                let pos = knots.partition_point(|k| k.1 < p).clamp(1, knots.len() - 1);
                let (x0, f0, b0) = knots[pos - 1];
                let (x1, f1, b1) = knots[pos];
                let s = if f1 > f0 { (p - f0) / (f1 - f0) } else { 0.0 };
                let height = b0 + s * (b1 - b0);
                Complex64::new(x0 + s * (x1 - x0), height * (2.0 * rng.random::<f64>() - 1.0))
            })
            .collect()
    }

    /// CSV with header `a,a0,b_t,w_t,flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,a0,b_t,w_t,flag\n");
        for k in 0..self.len() {
            let flag = if self.near_boundary[k] {
                "near_boundary"
            } else {
                "interior"
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_g17(self.a[k]),
                fmt_g17(self.a0[k]),
                fmt_g17(self.b[k]),
                fmt_g17(self.w[k]),
                flag
            ));
        }
        out
    }
}

// Piecewise-linear CDF through the grid values, pinned to the cumulative
// mass at both ends of every interval.
pub(crate) fn interpolate_cdf(
    xs: &[f64],
    cdf: &[f64],
    intervals: &[(f64, f64)],
    interval_mass: &[f64],
    x: f64,
) -> f64 {
    let mut before = 0.0;
    let mut k = 0;
    for (&(lo, hi), &mass) in intervals.iter().zip(interval_mass) {
        let after = before + mass;
        if x < lo {
            return before;
        }
        let start = k;
        while k < xs.len() && xs[k] <= hi {
            k += 1;
        }
        if x >= hi {
            before = after;
            continue;
        }
        let mut knots = Vec::with_capacity(k - start + 2);
        knots.push((lo, before));
        knots.extend(xs[start..k].iter().copied().zip(cdf[start..k].iter().copied()));
        knots.push((hi, after));
        let pos = knots.partition_point(|p| p.0 <= x).clamp(1, knots.len() - 1);
        let (x0, y0) = knots[pos - 1];
        let (x1, y1) = knots[pos];
        return if x1 > x0 {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        } else {
            y1
        };
    }
    before
}

/// C-style `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    fmt_g(x, 17)
}

/// C-style `%.{prec}g`.
pub fn fmt_g(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = prec.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
