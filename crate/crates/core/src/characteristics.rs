//! Closed-form characteristics of the Hamilton–Jacobi equation
//! `∂S/∂t = ¼((∂S/∂a)² - (∂S/∂b)²) + ε(∂S/∂ε)²` satisfied by
//! `S(t, λ, ε) = τ[log((x_t - λ)*(x_t - λ) + ε)]`, and their use to evaluate
//! `S` and test the equation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::quadrature::Tolerance;

/// Starting point `(λ0, ε0)` of a characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub lambda0: Complex64,
    pub eps0: f64,
}

impl InitialData {
    pub fn new(a0: f64, b0: f64, eps0: f64) -> Self {
        InitialData {
            lambda0: Complex64::new(a0, b0),
            eps0,
        }
    }
}

/// Initial momenta; `p0` and `p1` are the integrals of `1` and `x` against
/// `dμ(x)/((a0-x)² + b0² + ε0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momenta {
    pub p_a0: f64,
    pub p_b0: f64,
    pub p0: f64,
    pub p1: f64,
}

/// State of a characteristic at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub t: f64,
    pub lambda: Complex64,
    pub eps: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_eps: f64,
}

impl PathState {
    /// `H = -¼(p_a² - p_b²) - ε·p_ε²`.
    pub fn hamiltonian(&self) -> f64 {
        hamiltonian(self.p_a, self.p_b, self.eps, self.p_eps)
    }
}

pub fn hamiltonian(p_a: f64, p_b: f64, eps: f64, p_eps: f64) -> f64 {
    -0.25 * (p_a * p_a - p_b * p_b) - eps * p_eps * p_eps
}

pub fn initial_momenta(measure: &Measure, init: &InitialData) -> Result<Momenta> {
    if !(init.eps0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial ε0 = {} must be positive",
            init.eps0
        )));
    }
    let (a0, b0) = (init.lambda0.re, init.lambda0.im);
    let v = (b0 * b0 + init.eps0).sqrt();
    let m = measure.moments(a0, v);
    Ok(Momenta {
        p_a0: 2.0 * a0 * m.p0 - 2.0 * m.p1,
        p_b0: 2.0 * b0 * m.p0,
        p0: m.p0,
        p1: m.p1,
    })
}

/// Lifetime `1/p0` of the characteristic. With `ε0 = 0` this is `T(λ0)`,
/// which is `0` when the integral diverges.
pub fn lifetime(measure: &Measure, init: &InitialData) -> Result<f64> {
    if init.eps0 < 0.0 {
        return Err(Error::InvalidArgument(format!("ε0 = {} < 0", init.eps0)));
    }
    let (a0, b0) = (init.lambda0.re, init.lambda0.im);
    let p0 = measure.p0(a0, (b0 * b0 + init.eps0).sqrt());
    Ok(if p0.is_infinite() { 0.0 } else { 1.0 / p0 })
}

fn state_at(init: &InitialData, mom: &Momenta, t: f64) -> Result<PathState> {
    let decay = 1.0 - mom.p0 * t;
    if !(decay > 0.0) || t < 0.0 {
        return Err(Error::PastLifetime {
            t,
            lifetime: 1.0 / mom.p0,
        });
    }
    Ok(PathState {
        t,
        lambda: Complex64::new(
            init.lambda0.re - 0.5 * mom.p_a0 * t,
            init.lambda0.im + 0.5 * mom.p_b0 * t,
        ),
        eps: init.eps0 * decay * decay,
        p_a: mom.p_a0,
        p_b: mom.p_b0,
        p_eps: mom.p0 / decay,
    })
}

/// The characteristic through `init` at time `t < 1/p0`.
pub fn flow(measure: &Measure, init: &InitialData, t: f64) -> Result<PathState> {
    let mom = initial_momenta(measure, init)?;
    state_at(init, &mom, t)
}

/// `S(0, λ, ε) = ∫ log(|x - λ|² + ε) dμ(x)`.
pub fn s_initial(measure: &Measure, lambda: Complex64, eps: f64) -> Result<f64> {
    measure.log_potential(lambda, eps)
}

/// `S` at the end of the characteristic: `S(0, λ0, ε0) + t·H0`.
pub fn hj_value(measure: &Measure, init: &InitialData, t: f64) -> Result<f64> {
    let mom = initial_momenta(measure, init)?;
    state_at(init, &mom, t)?;
    let h0 = hamiltonian(mom.p_a0, mom.p_b0, init.eps0, mom.p0);
    Ok(s_initial(measure, init.lambda0, init.eps0)? + t * h0)
}

// Flow map in the coordinates (a0, b0, r0 = √ε0) ↦ (a, b, √ε), with its
// Jacobian assembled from the q-integrals.
fn flow_map(measure: &Measure, t: f64, x: [f64; 3]) -> Option<([f64; 3], [[f64; 3]; 3])> {
    let [a0, b0, r0] = x;
    let v2 = b0 * b0 + r0 * r0;
    let m = measure.moments(a0, v2.sqrt());
    let decay = 1.0 - t * m.p0;
    if !(decay > 0.0 && r0 > 0.0) {
        return None;
    }
    let value = [
        a0 - t * (a0 * m.p0 - m.p1),
        b0 * (1.0 + t * m.p0),
        r0 * decay,
    ];
    let eps0 = r0 * r0;
    // Derivatives with respect to ε0, converted to r0 by d/dr0 = 2r0·d/dε0.
    let jac = [
        [
            1.0 - t * (v2 * m.q0 - m.q2),
            2.0 * t * b0 * m.q1,
            2.0 * r0 * t * m.q1,
        ],
        [
            -2.0 * t * b0 * m.q1,
            1.0 + t * m.p0 - 2.0 * t * b0 * b0 * m.q0,
            -2.0 * r0 * t * b0 * m.q0,
        ],
        [
            2.0 * t * r0 * m.q1,
            2.0 * t * r0 * b0 * m.q0,
            decay + 2.0 * eps0 * t * m.q0,
        ],
    ];
    Some((value, jac))
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if !(d.abs() > 0.0) || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

fn norm3(x: [f64; 3]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton for the initial data whose characteristic reaches
/// `(λ, ε)` at time `t`, starting from `start = (a0, b0, √ε0)`.
fn newton_initial(
    measure: &Measure,
    t: f64,
    target: [f64; 3],
    start: [f64; 3],
) -> Option<([f64; 3], f64)> {
    let scale = 1.0 + norm3(target);
    let mut x = start;
    let (mut val, mut jac) = flow_map(measure, t, x)?;
    let resid = |val: [f64; 3]| norm3([val[0] - target[0], val[1] - target[1], val[2] - target[2]]);
    let mut res = resid(val);
    for _ in 0..100 {
        if res <= 1e-14 * scale {
            break;
        }
        let rhs = [target[0] - val[0], target[1] - val[1], target[2] - val[2]];
        let step = solve3(jac, rhs)?;
        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand = [
                x[0] + damp * step[0],
                x[1] + damp * step[1],
                x[2] + damp * step[2],
            ];
            if let Some((v, j)) = flow_map(measure, t, cand) {
                let r = resid(v);
                if r < res {
                    x = cand;
                    val = v;
                    jac = j;
                    res = r;
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
    Some((x, res))
}

/// Accuracy of the measure used by [`s_of`] and [`pde_residual`].
pub fn fine_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-14,
    }
}

/// Initial data of the characteristic that reaches `(λ, ε)` at time `t`.
///
/// A second solve from a backward predictor guards against two distinct
/// preimages with different values of `S`.
pub fn solve_initial(measure: &Measure, t: f64, lambda: Complex64, eps: f64) -> Result<InitialData> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time t = {t} must be positive")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must be positive")));
    }
    let target = [lambda.re, lambda.im, eps.sqrt()];
    let accept = 1e-10 * (1.0 + norm3(target));
    let first = newton_initial(measure, t, target, target).filter(|(_, r)| *r <= accept);

    // Run the flow backwards with the momenta at (λ, ε) as a second start.
    let here = initial_momenta(measure, &InitialData { lambda0: lambda, eps0: eps })?;
    let grow = 1.0 + t * here.p0;
    let predictor = [
        lambda.re + 0.5 * here.p_a0 * t,
        lambda.im / (1.0 + t * here.p0),
        eps.sqrt() * grow,
    ];
    let second = newton_initial(measure, t, target, predictor).filter(|(_, r)| *r <= accept);

    let to_init = |x: [f64; 3]| InitialData::new(x[0], x[1], x[2] * x[2]);
    match (first, second) {
        (Some((x, _)), Some((y, _))) => {
            let gap = norm3([x[0] - y[0], x[1] - y[1], x[2] - y[2]]);
            if gap > 1e-7 * (1.0 + norm3(x)) {
                let sx = hj_value(measure, &to_init(x), t)?;
                let sy = hj_value(measure, &to_init(y), t)?;
                if (sx - sy).abs() > 1e-9 * (1.0 + sx.abs()) {
                    return Err(Error::AmbiguousBranch(format!(
                        "(λ, ε) = ({lambda}, {eps}): S = {sx} or {sy}"
                    )));
                }
            }
            Ok(to_init(x))
        }
        (Some((x, _)), None) | (None, Some((x, _))) => Ok(to_init(x)),
        (None, None) => continuation(measure, t, lambda, eps)
            .map(to_init)
            .ok_or_else(|| {
                Error::NoConvergence(format!("characteristic reaching ({lambda}, {eps}) at t = {t}"))
            }),
    }
}

// For small ε inside Ω_t the preimage sits next to a singular point of the
// flow map. Solve at a larger ε first and walk ε back down.
fn continuation(measure: &Measure, t: f64, lambda: Complex64, eps: f64) -> Option<[f64; 3]> {
    let solve = |e: f64, start: [f64; 3]| {
        let target = [lambda.re, lambda.im, e.sqrt()];
        let accept = 1e-10 * (1.0 + norm3(target));
        newton_initial(measure, t, target, start)
            .filter(|(_, r)| *r <= accept)
            .map(|(x, _)| x)
    };
    let mut e = eps;
    let mut x = None;
    for _ in 0..16 {
        e *= 10.0;
        let start = [lambda.re, lambda.im, e.sqrt()];
        if let Some(found) = solve(e, start) {
            x = Some(found);
            break;
        }
    }
    let mut x = x?;
    while e > eps {
        let next = (e / 10f64.sqrt()).max(eps);
        x = solve(next, x)?;
        e = next;
    }
    Some(x)
}

/// `S(t, λ, ε)` by inverting the flow map and evaluating [`hj_value`].
pub fn s_of(measure: &Measure, t: f64, lambda: Complex64, eps: f64) -> Result<f64> {
    let init = solve_initial(measure, t, lambda, eps)?;
    hj_value(measure, &init, t)
}

/// Finite-difference partial derivatives `(S_t, S_a, S_b, S_ε)` of `S`.
pub fn gradient(measure: &Measure, t: f64, lambda: Complex64, eps: f64) -> Result<[f64; 4]> {
    let h_t = 1e-4 * t;
    let h_x = 1e-4 * (1.0 + lambda.norm());
    let h_e = 1e-4 * eps;
    let s = |t: f64, l: Complex64, e: f64| s_of(measure, t, l, e);
    let dt = (s(t + h_t, lambda, eps)? - s(t - h_t, lambda, eps)?) / (2.0 * h_t);
    let da = (s(t, lambda + h_x, eps)? - s(t, lambda - h_x, eps)?) / (2.0 * h_x);
    let ib = Complex64::new(0.0, h_x);
    let db = (s(t, lambda + ib, eps)? - s(t, lambda - ib, eps)?) / (2.0 * h_x);
    let de = (s(t, lambda, eps + h_e)? - s(t, lambda, eps - h_e)?) / (2.0 * h_e);
    Ok([dt, da, db, de])
}

/// `|S_t - ¼(S_a² - S_b²) - ε·S_ε²|` from central differences of [`s_of`],
/// computed with [`fine_tolerance`].
pub fn pde_residual(measure: &Measure, t: f64, lambda: Complex64, eps: f64) -> Result<f64> {
    let fine = measure.clone().with_tolerance(fine_tolerance());
    let [dt, da, db, de] = gradient(&fine, t, lambda, eps)?;
    Ok((dt - 0.25 * (da * da - db * db) - eps * de * de).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpec;

    fn m(spec: MeasureSpec) -> Measure {
        Measure::new(&spec).unwrap()
    }

    #[test]
    fn momenta_examples() {
        let b = m(MeasureSpec::bernoulli(0.5));
        let mom = initial_momenta(&b, &InitialData::new(0.0, 0.0, 1e-12)).unwrap();
        assert!((mom.p0 - 1.0).abs() < 1e-11);
        assert!(mom.p_a0.abs() < 1e-15);
        let init = InitialData::new(0.3, 0.7, 0.2);
        let mom = initial_momenta(&b, &init).unwrap();
        assert!((mom.p_b0 / mom.p0 - 1.4).abs() < 1e-14);
        assert!((mom.p_a0 - (2.0 * 0.3 * mom.p0 - 2.0 * mom.p1)).abs() < 1e-14);
        assert!(initial_momenta(&b, &InitialData::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn lifetime_examples() {
        let b = m(MeasureSpec::bernoulli(0.5));
        assert!((lifetime(&b, &InitialData::new(0.0, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lifetime(&b, &InitialData::new(1.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn flow_examples() {
        let b = m(MeasureSpec::bernoulli(0.5));
        // At λ0 = 0, ε0 = 1: p0 = 1/2.
        let init = InitialData::new(0.0, 0.0, 1.0);
        let s = flow(&b, &init, 1.0).unwrap();
        assert!((s.eps - 0.25).abs() < 1e-15);
        assert!(matches!(flow(&b, &init, 2.5), Err(Error::PastLifetime { .. })));

        // Near the lifetime with p0 = 1/t, the point approaches (t·p1, 2b0).
        let u = m(MeasureSpec::uniform(-1.0, 2.0));
        let init = InitialData::new(0.4, 0.3, 1e-6);
        let mom = initial_momenta(&u, &init).unwrap();
        let t = (1.0 / mom.p0) * (1.0 - 1e-9);
        let s = flow(&u, &init, t).unwrap();
        assert!((s.lambda.re - t * mom.p1).abs() < 1e-6);
        assert!((s.lambda.im - 0.6).abs() < 1e-6);
        assert!(s.eps < 1e-20);
    }

    #[test]
    fn small_eps_limit_is_j_t() {
        let u = m(MeasureSpec::uniform(-1.0, 1.0));
        let l0 = Complex64::new(1.3, 0.8);
        let t = 0.2;
        let s = flow(&u, &InitialData { lambda0: l0, eps0: 1e-12 }, t).unwrap();
        let j = crate::subordination::j_t(&u, t, l0).unwrap();
        assert!((s.lambda - j).norm() < 1e-9);
    }

    #[test]
    fn constants_of_motion() {
        let b = m(MeasureSpec::bernoulli(0.3));
        let init = InitialData::new(0.2, 0.4, 0.5);
        let mom = initial_momenta(&b, &init).unwrap();
        let h0 = hamiltonian(mom.p_a0, mom.p_b0, init.eps0, mom.p0);
        let life = 1.0 / mom.p0;
        for k in 0..10 {
            let t = life * k as f64 / 10.0;
            let s = flow(&b, &init, t).unwrap();
            assert_eq!(s.p_a, mom.p_a0);
            assert_eq!(s.p_b, mom.p_b0);
            let c = s.eps * s.p_eps * s.p_eps;
            let c0 = init.eps0 * mom.p0 * mom.p0;
            assert!((c - c0).abs() <= 1e-14 * c0);
            let scale = 0.25 * (mom.p_a0.powi(2) + mom.p_b0.powi(2)) + c0;
            assert!((s.hamiltonian() - h0).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn hj_value_at_zero_time_is_initial() {
        let u = m(MeasureSpec::uniform(-1.0, 1.0));
        let init = InitialData::new(0.2, 0.1, 0.3);
        let s0 = s_initial(&u, init.lambda0, init.eps0).unwrap();
        assert_eq!(hj_value(&u, &init, 0.0).unwrap(), s0);
    }

    #[test]
    fn s_of_round_trip() {
        let b = m(MeasureSpec::bernoulli(2.0 / 3.0)).with_tolerance(fine_tolerance());
        let init = InitialData::new(0.3, 0.5, 0.4);
        let t = 0.7;
        let end = flow(&b, &init, t).unwrap();
        let direct = hj_value(&b, &init, t).unwrap();
        let via = s_of(&b, t, end.lambda, end.eps).unwrap();
        assert!((direct - via).abs() < 1e-9);
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let u = m(MeasureSpec::uniform(-1.0, 1.0)).with_tolerance(fine_tolerance());
        let t = 0.6;
        let x = [0.3, 0.4, 0.7];
        let (_, jac) = flow_map(&u, t, x).unwrap();
        let h = 1e-6;
        for col in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let (fp, _) = flow_map(&u, t, xp).unwrap();
            let (fm, _) = flow_map(&u, t, xm).unwrap();
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!((fd - jac[row][col]).abs() < 1e-7, "{row},{col}: {fd} vs {}", jac[row][col]);
            }
        }
    }

    #[test]
    fn transported_momenta_are_the_gradient() {
        let b = m(MeasureSpec::bernoulli(0.4)).with_tolerance(fine_tolerance());
        let init = InitialData::new(-0.2, 0.6, 0.5);
        let t = 0.5;
        let end = flow(&b, &init, t).unwrap();
        let [_, da, db, de] = gradient(&b, t, end.lambda, end.eps).unwrap();
        assert!((da - end.p_a).abs() < 1e-5);
        assert!((db - end.p_b).abs() < 1e-5);
        assert!((de - end.p_eps).abs() < 1e-5);
    }

    #[test]
    fn pde_residual_is_small() {
        let e = m(MeasureSpec::semicircle(1.0));
        let r = pde_residual(&e, 0.8, Complex64::new(0.4, 0.3), 0.5).unwrap();
        assert!(r < 1e-4, "{r}");
    }
}
