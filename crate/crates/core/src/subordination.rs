//! Subordination side of the construction: the function `v_t`, the real
//! section of `Λ_t`, the boundary map `a_t`, and the holomorphic maps
//! `H_t(z) = z + tG(z)` and `J_t(z) = z - tG(z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::Measure;

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time t = {t} must be positive")))
    }
}

/// `v_t(a0)`: the unique `v > 0` with `p0(a0, v) = 1/t` when
/// `p0(a0, 0) > 1/t`, and `0` otherwise.
pub fn v_t(measure: &Measure, t: f64, a0: f64) -> Result<f64> {
    check_time(t)?;
    let target = 1.0 / t;
    if !(measure.p0(a0, 0.0) > target) {
        return Ok(0.0);
    }
    solve_v(measure, t, a0)
}

// Safeguarded Newton in u = v^2 on the bracket [0, t]. There
// g(u) = p0(a0, √u) - 1/t is convex and decreasing with g'(u) = -q0,
// g(0) > 0 and g(t) < 0 because p0 <= 1/v^2 with equality only for a
// point mass at a0.
fn solve_v(measure: &Measure, t: f64, a0: f64) -> Result<f64> {
    let target = 1.0 / t;
    let (mut lo, mut hi) = (0.0_f64, t);
    let mut u = 0.5 * t;
    for _ in 0..200 {
        let (p0, q0) = measure.p0_q0(a0, u.sqrt());
        let g = p0 - target;
        if g > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        if g == 0.0 {
            return Ok(u.sqrt());
        }
        let newton = u + g / q0;
        let next = if newton > lo && newton < hi && q0.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - u).abs();
        u = next;
        if step <= 4.0 * f64::EPSILON * u || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(u.sqrt());
        }
    }
    Err(Error::NoConvergence(format!("v_t at a0 = {a0}")))
}

/// Everything known about the boundary of `Λ_t` above one real point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub a0: f64,
    /// `v_t(a0)`.
    pub v: f64,
    /// `a_t(a0)`.
    pub a: f64,
    /// `da_t/da0`.
    pub slope: f64,
}

/// `v_t`, `a_t` and `da_t/da0` at `a0`, sharing the integrals.
pub fn boundary_point(measure: &Measure, t: f64, a0: f64) -> Result<BoundaryPoint> {
    let v = v_t(measure, t, a0)?;
    if v > 0.0 {
        let m = measure.moments(a0, v);
        if !(m.q0 > 0.0) {
            return Err(Error::DegenerateJacobian(format!("q0 = {} at a0 = {a0}", m.q0)));
        }
        let det = m.q0 * m.q2 - m.q1 * m.q1;
        Ok(BoundaryPoint {
            a0,
            v,
            a: t * m.p1,
            slope: 2.0 * t * det / m.q0,
        })
    } else {
        let (g, p0) = real_cauchy(measure, a0)?;
        Ok(BoundaryPoint {
            a0,
            v,
            a: a0 - t * g,
            slope: 1.0 + t * p0,
        })
    }
}

// `∫dμ/(a0-x)` and `∫dμ/(a0-x)^2` at a real point where the second one
// converges. Endpoints of `Λ_t ∩ ℝ` can sit on the closure of a density
// piece whose density vanishes there; the integrals are then finite.
fn real_cauchy(measure: &Measure, a0: f64) -> Result<(f64, f64)> {
    if measure.inverse_square_diverges(a0) {
        return Err(Error::OnSupport(format!("{a0}")));
    }
    let [g, p0] = measure.integrate(a0, 0.0, |x| {
        let d = a0 - x;
        if d == 0.0 {
            [0.0, 0.0]
        } else {
            [1.0 / d, 1.0 / (d * d)]
        }
    });
    Ok((g, p0))
}

/// The boundary map `a_t(a0)`: `t·p1(a0, v_t(a0))` on `Λ_t ∩ ℝ`, and
/// `a0 - t·G(a0)` off it.
pub fn a_t(measure: &Measure, t: f64, a0: f64) -> Result<f64> {
    Ok(boundary_point(measure, t, a0)?.a)
}

/// `da_t/da0 = 2t(q0·q2 - q1^2)/q0` at a point with `v_t(a0) > 0`.
pub fn da_t_da0(measure: &Measure, t: f64, a0: f64) -> Result<f64> {
    let bp = boundary_point(measure, t, a0)?;
    if bp.v == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "v_t({a0}) = 0: a0 is outside Λ_t"
        )));
    }
    Ok(bp.slope)
}

/// `H_t(z) = z + tG(z)`.
pub fn h_t(measure: &Measure, t: f64, z: Complex64) -> Result<Complex64> {
    Ok(z + t * measure.cauchy(z)?)
}

/// `J_t(z) = z - tG(z)`.
pub fn j_t(measure: &Measure, t: f64, z: Complex64) -> Result<Complex64> {
    Ok(z - t * measure.cauchy(z)?)
}

/// Grid used to locate `Λ_t ∩ ℝ` by sign changes of `p0(·, 0) - 1/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub grid: usize,
    pub bisection_steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid: 4096,
            bisection_steps: 200,
        }
    }
}

/// The open intervals of the real line where `v_t > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRegion {
    pub t: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl LambdaRegion {
    pub fn compute(measure: &Measure, t: f64, cfg: &ScanConfig) -> Result<Self> {
        check_time(t)?;
        if cfg.grid < 2 {
            return Err(Error::InvalidArgument("scan grid needs two points".into()));
        }
        let target = 1.0 / t;
        let sup = measure.support();
        let pad = t.sqrt() * (1.0 + 1e-6) + 1e-12 * sup.width();
        let (lo, hi) = (sup.lo - pad, sup.hi + pad);
        let mut xs: Vec<f64> = (0..cfg.grid)
            .map(|k| lo + (hi - lo) * k as f64 / (cfg.grid - 1) as f64)
            .collect();
        // Components around isolated atoms can be much narrower than the grid
        // pitch; every atom lies inside Λ_t so it seeds a sample.
        xs.extend(measure.atoms().iter().map(|a| a.x));
        for (plo, phi) in measure.piece_bounds() {
            xs.push(0.5 * (plo + phi));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        let inside = |x: f64| measure.p0(x, 0.0) > target;
        let mut flags: Vec<bool> = xs.iter().map(|&x| inside(x)).collect();

        // Two adjacent inside samples can still belong to different
        // components. Off the density pieces p0(·, 0) is convex between
        // samples, so a dip below 1/t exists iff its minimum is below 1/t.
        let pieces = measure.piece_bounds();
        let mut dips = Vec::new();
        for k in 0..xs.len().saturating_sub(1) {
            let (x0, x1) = (xs[k], xs[k + 1]);
            if !(flags[k] && flags[k + 1]) || pieces.iter().any(|&(lo, hi)| lo < x1 && hi > x0) {
                continue;
            }
            if let Some(d) = find_dip(measure, target, x0, x1) {
                dips.push(d);
            }
        }
        if !dips.is_empty() {
            xs.extend(dips);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            flags = xs.iter().map(|&x| inside(x)).collect();
        }
        let refine = |mut out: f64, mut inn: f64| {
            for _ in 0..cfg.bisection_steps {
                let mid = 0.5 * (out + inn);
                if mid == out || mid == inn {
                    break;
                }
                if inside(mid) {
                    inn = mid;
                } else {
                    out = mid;
                }
            }
            out
        };

        let mut intervals = Vec::new();
        let mut start = None;
        for k in 0..xs.len() {
            match (flags[k], start) {
                (true, None) => {
                    let left = if k == 0 { xs[0] } else { refine(xs[k - 1], xs[k]) };
                    start = Some(left);
                }
                (false, Some(left)) => {
                    intervals.push((left, refine(xs[k], xs[k - 1])));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(left) = start {
            intervals.push((left, xs[xs.len() - 1]));
        }
        Ok(LambdaRegion { t, intervals })
    }

    /// Index of the interval containing `a0`.
    pub fn locate(&self, a0: f64) -> Option<usize> {
        self.intervals
            .iter()
            .position(|&(lo, hi)| a0 > lo && a0 < hi)
    }
}

// Slope of p0(·, 0), i.e. -2∫dμ/(x-y)^3, at a point off the support.
fn p0_slope(measure: &Measure, x: f64) -> f64 {
    -2.0 * measure.integrate(x, 0.0, |y| {
        let d = x - y;
        [1.0 / (d * d * d)]
    })[0]
}

// A point of (x0, x1) where the convex function p0(·, 0) drops to 1/t or
// below, found by bisection on its increasing slope.
fn find_dip(measure: &Measure, target: f64, x0: f64, x1: f64) -> Option<f64> {
    let (mut lo, mut hi) = (x0, x1);
    let inner = |x: f64| x > x0 && x < x1;
    let probe_lo = lo + (hi - lo) * 1e-9;
    let probe_hi = hi - (hi - lo) * 1e-9;
    if !(inner(probe_lo) && inner(probe_hi))
        || p0_slope(measure, probe_lo) >= 0.0
        || p0_slope(measure, probe_hi) <= 0.0
    {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if measure.p0(mid, 0.0) <= target {
            return Some(mid);
        }
        if p0_slope(measure, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// `Λ_t ∩ ℝ` with the default scan.
pub fn lambda_region(measure: &Measure, t: f64) -> Result<LambdaRegion> {
    LambdaRegion::compute(measure, t, &ScanConfig::default())
}

fn residual_tol(lambda: Complex64) -> f64 {
    1e-12 * (1.0 + lambda.norm())
}

// Outside Λ̄_t means p0(Re z, |Im z|) <= 1/t.
fn outside_lambda(measure: &Measure, t: f64, z: Complex64) -> bool {
    measure.p0(z.re, z.im.abs()) <= (1.0 / t) * (1.0 + 1e-9)
}

/// Damped Newton for `J_t(z) = λ` from `z`, staying in the half-plane of the
/// start. Returns the last iterate and its residual.
fn newton_j(
    measure: &Measure,
    t: f64,
    lambda: Complex64,
    mut z: Complex64,
    max_iter: usize,
) -> (Complex64, f64) {
    let sign = z.im.signum();
    let eval = |z: Complex64| -> Option<(Complex64, Complex64)> {
        let (g, dg) = measure.cauchy_with_derivative(z).ok()?;
        Some((z - t * g - lambda, 1.0 - t * dg))
    };
    let Some((mut f, mut df)) = eval(z) else {
        return (z, f64::INFINITY);
    };
    let tol = residual_tol(lambda);
    for _ in 0..max_iter {
        let res = f.norm();
        if res < tol {
            break;
        }
        let step = f / df;
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = z - damp * step;
            if z.im != 0.0 && cand.im * sign <= 0.0 {
                damp *= 0.5;
                continue;
            }
            if let Some((fc, dfc)) = eval(cand) {
                if fc.norm() < res {
                    z = cand;
                    f = fc;
                    df = dfc;
                    accepted = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (z, f.norm())
}

/// The preimage of `λ` under `J_t` in the complement of `Λ̄_t`.
///
/// Newton starts at `λ`; if it stalls or lands inside `Λ_t`, the root is
/// followed by continuation along the vertical ray from far above `λ`.
pub fn j_t_inverse(measure: &Measure, t: f64, lambda: Complex64) -> Result<Complex64> {
    check_time(t)?;
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite point {lambda}")));
    }
    let tol = residual_tol(lambda);
    let (z, res) = newton_j(measure, t, lambda, lambda, 100);
    let direct_ok = res < tol && outside_lambda(measure, t, z);
    if direct_ok {
        return Ok(z);
    }

    let sup = measure.support();
    let sign = if lambda.im < 0.0 { -1.0 } else { 1.0 };
    let height = 4.0 * (sup.width() + lambda.norm() + t.sqrt() + 1.0);
    let steps = 64;
    let mut z = Complex64::new(lambda.re, sign * height);
    z += t / z;
    for k in 0..=steps {
        let frac = 1.0 - k as f64 / steps as f64;
        // Quadratic spacing concentrates steps near the real axis.
        let target = Complex64::new(lambda.re, lambda.im + sign * height * frac * frac);
        let (zn, rn) = newton_j(measure, t, target, z, 100);
        if rn >= residual_tol(target).max(1e-8 * (1.0 + target.norm())) {
            return Err(Error::NoConvergence(format!("J_t inverse at {lambda}")));
        }
        z = zn;
    }
    if lambda.im == 0.0 {
        // Finish on the real line where the preimage of a real point lies.
        let (zr, _) = newton_j(measure, t, lambda, Complex64::new(z.re, 0.0), 100);
        z = zr;
    }
    let res = (j_t(measure, t, z)? - lambda).norm();
    if res >= tol {
        return Err(Error::NoConvergence(format!(
            "J_t inverse at {lambda}: residual {res:e}"
        )));
    }
    if !outside_lambda(measure, t, z) {
        return Err(Error::WrongBasin(format!("J_t inverse at {lambda}")));
    }
    Ok(z)
}
