//! Pushforward structure: `U_t` carries the Brown measure of `x0 + c_t`
//! (density `ρ_t` on `Λ_t`) onto the Brown measure of `x0 + iσ_t`, and `Q_t`
//! carries the latter onto the law of `x0 + σ_t`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::brown::{interpolate_cdf, BrownMeasure, BrownProfile, Region};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

fn lambda_tolerance(v: f64) -> f64 {
    1e-9 * (1.0 + v) + 1e-12
}

/// `U_t(a0 + i b0) = a_t(a0) + 2i·b0` on `Λ̄_t`.
pub fn u_t(bm: &BrownMeasure, lambda0: Complex64) -> Result<Complex64> {
    let bp = bm.boundary_point(lambda0.re)?;
    if lambda0.im.abs() > bp.v + lambda_tolerance(bp.v) {
        return Err(Error::OutsideLambda(format!("{lambda0}")));
    }
    Ok(Complex64::new(bp.a, 2.0 * lambda0.im))
}

fn check_not_outside(bm: &BrownMeasure, lambda: Complex64) -> Result<()> {
    if bm.classify(lambda)?.region == Region::Outside {
        return Err(Error::OutsideOmega(lambda.re));
    }
    Ok(())
}

/// `U_t^{-1}(a + ib) = a0^t(a) + i·b/2` on `Ω̄_t`.
pub fn u_t_inverse(bm: &BrownMeasure, lambda: Complex64) -> Result<Complex64> {
    check_not_outside(bm, lambda)?;
    Ok(Complex64::new(bm.a0_of_a(lambda.re)?, 0.5 * lambda.im))
}

/// `Q_t(a + ib) = 2·a0^t(a) - a` on `Ω̄_t`; independent of `b`.
pub fn q_t(bm: &BrownMeasure, lambda: Complex64) -> Result<f64> {
    check_not_outside(bm, lambda)?;
    Ok(2.0 * bm.a0_of_a(lambda.re)? - lambda.re)
}

/// Density `(1/πt)(1 - ½·da_t/da0)` of the Brown measure of `x0 + c_t` at a
/// point strictly inside `Λ_t`.
pub fn circular_density(bm: &BrownMeasure, lambda0: Complex64) -> Result<f64> {
    let bp = bm.boundary_point(lambda0.re)?;
    if !(lambda0.im.abs() < bp.v) {
        return Err(Error::OutsideLambda(format!("{lambda0}")));
    }
    Ok(circular_from_slope(bm.t(), bp.slope))
}

fn circular_from_slope(t: f64, slope: f64) -> f64 {
    (1.0 - 0.5 * slope) / (PI * t)
}

/// The law of `x0 + σ_t` as the `Q_t`-image of a profile: density `f` at the
/// points `u = Q_t(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawAdditive {
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    /// `Q_t` images of the intervals of `Ω_t ∩ ℝ`.
    pub intervals: Vec<(f64, f64)>,
    pub cdf: Vec<f64>,
    pub interval_mass: Vec<f64>,
    pub mass: f64,
}

/// `u_i = Q_t(a_i)`, `f_i = b_t(a_i)/(2πt)`, from a profile. The CDF is
/// inherited from the profile because `Q_t` is increasing.
pub fn law_additive(bm: &BrownMeasure, profile: &BrownProfile) -> Result<LawAdditive> {
    let t = profile.t;
    let u = profile
        .a
        .iter()
        .zip(&profile.a0)
        .map(|(a, a0)| 2.0 * a0 - a)
        .collect();
    let f = profile.b.iter().map(|b| b / (2.0 * PI * t)).collect();
    let intervals = bm
        .branches()
        .iter()
        .map(|br| {
            (
                2.0 * br.lambda.0 - br.omega.0,
                2.0 * br.lambda.1 - br.omega.1,
            )
        })
        .collect();
    Ok(LawAdditive {
        u,
        f,
        intervals,
        cdf: profile.cdf.clone(),
        interval_mass: profile.interval_mass.clone(),
        mass: profile.mass,
    })
}

impl LawAdditive {
    pub fn cdf_at(&self, u: f64) -> f64 {
        interpolate_cdf(&self.u, &self.cdf, &self.intervals, &self.interval_mass, u)
    }

    /// Linear resampling of `f` onto `n` equispaced points spanning the
    /// support; zero in gaps between intervals.
    pub fn resample(&self, n: usize) -> Vec<(f64, f64)> {
        let (Some(first), Some(last)) = (self.intervals.first(), self.intervals.last()) else {
            return Vec::new();
        };
        let (lo, hi) = (first.0, last.1);
        (0..n)
            .map(|k| {
                let x = if n == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                };
                (x, self.density_at(x))
            })
            .collect()
    }

    fn density_at(&self, x: f64) -> f64 {
        if !self.intervals.iter().any(|&(lo, hi)| x > lo && x < hi) {
            return 0.0;
        }
        let pos = self.u.partition_point(|&u| u <= x);
        if pos == 0 || pos >= self.u.len() {
            let k = pos.min(self.u.len() - 1);
            return self.f[k];
        }
        let (x0, x1) = (self.u[pos - 1], self.u[pos]);
        let (y0, y1) = (self.f[pos - 1], self.f[pos]);
        if x1 > x0 {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        } else {
            y1
        }
    }

    /// CSV with header `u,f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,f\n");
        for (u, f) in self.u.iter().zip(&self.f) {
            out.push_str(&format!(
                "{},{}\n",
                crate::brown::fmt_g17(*u),
                crate::brown::fmt_g17(*f)
            ));
        }
        out
    }
}

/// An axis-aligned rectangle `[a_lo, a_hi] × [b_lo, b_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

/// Masses of one rectangle under the Brown measure and of its `U_t`
/// preimage under `ρ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleCheck {
    pub rect: Rectangle,
    pub brown: f64,
    pub circular: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardReport {
    pub checks: Vec<RectangleCheck>,
    pub max_discrepancy: f64,
}

fn overlap(lo: f64, hi: f64, h: f64) -> f64 {
    (hi.min(h) - lo.max(-h)).max(0.0)
}

fn check_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-12,
        rel: 1e-10,
    }
}

/// Mass of `rect` under the Brown measure, integrating over `a`.
pub fn brown_mass(bm: &BrownMeasure, rect: &Rectangle) -> Result<f64> {
    let mut failure = None;
    let mut total = 0.0;
    for br in bm.branches() {
        let lo = rect.a.0.max(br.omega.0);
        let hi = rect.a.1.min(br.omega.1);
        if hi <= lo {
            continue;
        }
        let f = |a: f64| match bm.inverse_point(a) {
            Ok(bp) => {
                let w = crate::brown::density_from_slope(bm.t(), bp.slope);
                [w * overlap(rect.b.0, rect.b.1, 2.0 * bp.v)]
            }
            Err(_) => [f64::NAN],
        };
        let part = quadrature::integrate(&f, &[lo, hi], check_tolerance())[0];
        if !part.is_finite() {
            failure = Some(lo);
        }
        total += part;
    }
    match failure {
        Some(a) => Err(Error::NoConvergence(format!("brown mass near a = {a}"))),
        None => Ok(total),
    }
}

/// Mass of `U_t^{-1}(rect)` under `ρ_t`, integrating over `a0`.
pub fn circular_mass(bm: &BrownMeasure, rect: &Rectangle) -> Result<f64> {
    let mut total = 0.0;
    for br in bm.branches() {
        let lo = rect.a.0.max(br.omega.0);
        let hi = rect.a.1.min(br.omega.1);
        if hi <= lo {
            continue;
        }
        let a0_lo = if lo == br.omega.0 { br.lambda.0 } else { bm.a0_of_a(lo)? };
        let a0_hi = if hi == br.omega.1 { br.lambda.1 } else { bm.a0_of_a(hi)? };
        let f = |a0: f64| match bm.boundary_point(a0) {
            Ok(bp) if bp.v > 0.0 => {
                let rho = circular_from_slope(bm.t(), bp.slope);
                [rho * overlap(0.5 * rect.b.0, 0.5 * rect.b.1, bp.v)]
            }
            Ok(_) => [0.0],
            Err(_) => [f64::NAN],
        };
        let part = quadrature::integrate(&f, &[a0_lo, a0_hi], check_tolerance())[0];
        if !part.is_finite() {
            return Err(Error::NoConvergence(format!("circular mass near a0 = {a0_lo}")));
        }
        total += part;
    }
    Ok(total)
}

/// A fixed family of rectangles inside and across `Ω_t`: for every interval,
/// the whole component, a strip through the middle, and off-centre boxes
/// that cut the boundary.
pub fn default_rectangles(bm: &BrownMeasure) -> Result<Vec<Rectangle>> {
    let mut out = Vec::new();
    for br in bm.branches() {
        let (lo, hi) = br.omega;
        let width = hi - lo;
        let at = |f: f64| lo + f * width;
        let height = 2.0 * bm.boundary_point(bm.a0_of_a(at(0.5))?)?.v;
        let cap = 4.0 * height + 1.0;
        out.push(Rectangle {
            a: (lo, hi),
            b: (-cap, cap),
        });
        out.push(Rectangle {
            a: (at(0.3), at(0.7)),
            b: (-0.5 * height, 0.5 * height),
        });
        out.push(Rectangle {
            a: (at(0.05), at(0.45)),
            b: (0.2 * height, cap),
        });
        out.push(Rectangle {
            a: (at(0.6), at(0.97)),
            b: (-cap, -0.1 * height),
        });
    }
    Ok(out)
}

/// Checks that `U_t` pushes `ρ_t` forward to the Brown measure on a family
/// of rectangles.
pub fn pushforward_check(bm: &BrownMeasure) -> Result<PushforwardReport> {
    let rects = default_rectangles(bm)?;
    pushforward_check_on(bm, &rects)
}

pub fn pushforward_check_on(bm: &BrownMeasure, rects: &[Rectangle]) -> Result<PushforwardReport> {
    let mut checks = Vec::with_capacity(rects.len());
    let mut max_discrepancy: f64 = 0.0;
    for rect in rects {
        let brown = brown_mass(bm, rect)?;
        let circular = circular_mass(bm, rect)?;
        max_discrepancy = max_discrepancy.max((brown - circular).abs());
        checks.push(RectangleCheck {
            rect: *rect,
            brown,
            circular,
        });
    }
    Ok(PushforwardReport {
        checks,
        max_discrepancy,
    })
}
