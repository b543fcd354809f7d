//! Jarosz–Nowak route to the same density: solve the conjugate fixed point
//! `g = G(a + t·conj(g))` with `Im g > 0` and read off
//! `w = (1/4π)(1/t + 2·d Re g/da)`.
//!
//! This solver only uses the Cauchy transform; it does not call into the
//! subordination or Brown-measure modules.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::Measure;

fn residual(measure: &Measure, t: f64, a: f64, g: Complex64) -> Option<(Complex64, Complex64)> {
    let z = Complex64::new(a + t * g.re, -t * g.im);
    let (gz, dg) = measure.cauchy_with_derivative(z).ok()?;
    Some((g - gz, dg))
}

fn tolerance() -> f64 {
    1e-11
}

fn newton(measure: &Measure, t: f64, a: f64, mut g: Complex64) -> Option<(Complex64, f64)> {
    let (mut f, mut dg) = residual(measure, t, a, g)?;
    for _ in 0..100 {
        let res = f.norm();
        if res < 1e-3 * tolerance() {
            break;
        }
        // Real Jacobian of (Re F, Im F) with respect to (Re g, Im g).
        let (gr, gi) = (dg.re, dg.im);
        let j = [[1.0 - t * gr, -t * gi], [-t * gi, 1.0 + t * gr]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) {
            return None;
        }
        let dx = (j[1][1] * f.re - j[0][1] * f.im) / det;
        let dy = (-j[1][0] * f.re + j[0][0] * f.im) / det;
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = Complex64::new(g.re - damp * dx, g.im - damp * dy);
            if cand.im > 0.0 {
                if let Some((fc, dgc)) = residual(measure, t, a, cand) {
                    if fc.norm() < res {
                        g = cand;
                        f = fc;
                        dg = dgc;
                        accepted = true;
                        break;
                    }
                }
            }
            damp *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((g, f.norm()))
}

fn collapse_threshold(t: f64) -> f64 {
    1e-7 / t.sqrt()
}

/// Solves `g = G(a + t·conj(g))` with `Im g > 0` from the guess `seed`.
pub fn solve_g_from(measure: &Measure, t: f64, a: f64, seed: Complex64) -> Result<Complex64> {
    match newton(measure, t, a, seed) {
        Some((g, res)) if res < tolerance() => {
            if g.im < collapse_threshold(t) {
                Err(Error::NoComplexSolution(a))
            } else {
                Ok(g)
            }
        }
        Some((g, _)) if g.im < collapse_threshold(t) => Err(Error::NoComplexSolution(a)),
        _ => Err(Error::NoConvergence(format!("conjugate fixed point at a = {a}"))),
    }
}

/// Solves `g = G(a + t·conj(g))` with `Im g > 0`, seeded by a coarse scan
/// of the residual over `Re g ∈ [(m - √t - a)/t, (M + √t - a)/t]`,
/// `Im g ∈ (0, 1/√t)`.
pub fn solve_g(measure: &Measure, t: f64, a: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time t = {t} must be positive")));
    }
    let sup = measure.support();
    let rt = t.sqrt();
    let (re_lo, re_hi) = ((sup.lo - rt - a) / t, (sup.hi + rt - a) / t);
    let (nr, ni) = (48, 24);
    let mut candidates = Vec::with_capacity(nr * ni);
    for i in 0..nr {
        let gr = re_lo + (re_hi - re_lo) * (i as f64 + 0.5) / nr as f64;
        for k in 0..ni {
            let gi = (k as f64 + 0.5) / ni as f64 / rt;
            let g = Complex64::new(gr, gi);
            if let Some((f, _)) = residual(measure, t, a, g) {
                candidates.push((f.norm(), g));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut last = Error::NoComplexSolution(a);
    for &(_, seed) in candidates.iter().take(6) {
        match solve_g_from(measure, t, a, seed) {
            Ok(g) => return Ok(g),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Solutions along an ascending grid, each Newton solve seeded by its
/// neighbour and the first one by [`solve_g`].
pub fn solve_g_grid(measure: &Measure, t: f64, grid: &[f64]) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::with_capacity(grid.len());
    for &a in grid {
        let g = match out.last() {
            Some(&prev) => solve_g_from(measure, t, a, prev).or_else(|_| solve_g(measure, t, a))?,
            None => solve_g(measure, t, a)?,
        };
        out.push(g);
    }
    Ok(out)
}

/// `(1/4π)(1/t + 2·d Re g/da)` with a five-point stencil of half-width `2h`.
pub fn jn_density_with(measure: &Measure, t: f64, a: f64, g: Complex64, h: f64) -> Result<f64> {
    let mut re = [0.0; 4];
    for (k, off) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        re[k] = solve_g_from(measure, t, a + off * h, g)?.re;
    }
    let deriv = (re[0] - 8.0 * re[1] + 8.0 * re[2] - re[3]) / (12.0 * h);
    Ok((1.0 / t + 2.0 * deriv) / (4.0 * PI))
}

/// Density from the Jarosz–Nowak formula at `a`, with stencil step
/// `1e-3·(1 + |a|)`.
pub fn jn_density(measure: &Measure, t: f64, a: f64) -> Result<f64> {
    let g = solve_g(measure, t, a)?;
    jn_density_with(measure, t, a, g, 1e-3 * (1.0 + a.abs()))
}

/// `(b/2t)² - (Im g)²`: zero exactly on the boundary of `Ω_t`, negative
/// inside and positive outside.
pub fn jn_boundary_gap(measure: &Measure, t: f64, a: f64, b: f64) -> Result<f64> {
    let g = solve_g(measure, t, a)?;
    Ok(gap_from(t, b, g))
}

pub fn gap_from(t: f64, b: f64, g: Complex64) -> f64 {
    let half = b / (2.0 * t);
    half * half - g.im * g.im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpec;

    fn m(spec: MeasureSpec) -> Measure {
        Measure::new(&spec).unwrap()
    }

    #[test]
    fn solution_matches_boundary_data() {
        // Semicircle s = t = 1: a0^t(a) = 1.5a and v_t(1.5a) = √(2 - a²/2)/2... check via
        // the closed-form Λ boundary: a0 = 1.5a, v = √(1 - a0²·2/9)/√2.
        let e = m(MeasureSpec::semicircle(1.0));
        for a in [0.0, 0.4, -1.1] {
            let g = solve_g(&e, 1.0, a).unwrap();
            let a0 = 1.5 * a;
            let v = (0.5 * (1.0 - 2.0 * a0 * a0 / 9.0)).sqrt();
            assert!((g.re - (a0 - a)).abs() < 1e-9, "{g}");
            assert!((g.im - v).abs() < 1e-9, "{g} vs {v}");
        }
    }

    #[test]
    fn symmetric_law_has_zero_real_part_at_origin() {
        let u = m(MeasureSpec::uniform(-1.0, 1.0));
        assert!(solve_g(&u, 0.3, 0.0).unwrap().re.abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let e = m(MeasureSpec::semicircle(1.0));
        assert!((jn_density(&e, 1.0, 0.2).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-8);
        let b = m(MeasureSpec::bernoulli(2.0 / 3.0));
        let expect = (-1.0 / 1.05 + 1.0) / (4.0 * PI);
        assert!((jn_density(&b, 1.05, 0.0).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn outside_collapses() {
        let e = m(MeasureSpec::semicircle(1.0));
        assert!(solve_g(&e, 1.0, 2.0).is_err());
    }

    #[test]
    fn gap_signs() {
        let e = m(MeasureSpec::semicircle(1.0));
        let a: f64 = 0.5;
        let bt = 2.0 * (0.5 * (1.0 - 2.0 * (1.5 * a).powi(2) / 9.0)).sqrt();
        assert!(jn_boundary_gap(&e, 1.0, a, bt).unwrap().abs() < 1e-9);
        assert!(jn_boundary_gap(&e, 1.0, a, 0.0).unwrap() < 0.0);
        assert!(jn_boundary_gap(&e, 1.0, a, 2.0 * bt).unwrap() > 0.0);
    }
}
