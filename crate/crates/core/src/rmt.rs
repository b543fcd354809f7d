//! Monte Carlo check against the random-matrix model `X + i√t·Y`, with `X`
//! a deterministic diagonal matrix whose spectrum approximates `μ` and `Y`
//! drawn from the Gaussian unitary ensemble.

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::brown::{fmt_g17, BrownMeasure, BrownProfile};
use crate::error::{Error, Result};
use crate::maps::LawAdditive;
use crate::measure::Measure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub t: f64,
    pub reps: usize,
    pub seed: u64,
    /// Slack added to `b_t` when counting points inside `Ω̄_t`.
    pub dilation: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("matrix size {} < 2", self.n)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("time t = {} must be positive", self.t)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if !(self.dilation >= 0.0) {
            return Err(Error::InvalidArgument(format!("dilation {} < 0", self.dilation)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCloud {
    pub points: Vec<Complex64>,
    /// Repetition index of each point.
    pub rep: Vec<usize>,
    pub config: SimConfig,
}

impl EigenCloud {
    /// CSV with header `re,im,rep`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,rep\n");
        for (z, r) in self.points.iter().zip(&self.rep) {
            out.push_str(&format!("{},{},{}\n", fmt_g17(z.re), fmt_g17(z.im), r));
        }
        out
    }
}

/// A GUE matrix normalised so that its spectrum approaches the standard
/// semicircle: off-diagonal `E|y_ij|² = 1/n`, real diagonal of variance `1/n`.
/// Each `(seed, stream)` pair gives an independent, reproducible draw.
pub fn sample_gue_stream(n: usize, seed: u64, stream: u64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let diag = (1.0 / n as f64).sqrt();
    let off = (0.5 / n as f64).sqrt();
    let mut y = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            if i == j {
                let g: f64 = StandardNormal.sample(&mut rng);
                y[(i, i)] = c64::new(diag * g, 0.0);
            } else {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                y[(i, j)] = c64::new(off * re, off * im);
                y[(j, i)] = c64::new(off * re, -off * im);
            }
        }
    }
    y
}

pub fn sample_gue(n: usize, seed: u64) -> Mat<c64> {
    sample_gue_stream(n, seed, 0)
}

/// Diagonal entries `quantile((j - ½)/n)`, `j = 1..n`.
pub fn deterministic_x(measure: &Measure, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("matrix size {n} < 2")));
    }
    (0..n)
        .map(|j| measure.quantile((j as f64 + 0.5) / n as f64))
        .collect()
}

/// `diag(x) + scale·Y`, with `scale` either `i√t` or `√t`.
pub fn model_matrix(x: &[f64], y: &Mat<c64>, scale: c64) -> Mat<c64> {
    let n = x.len();
    Mat::from_fn(n, n, |i, j| {
        let d = if i == j { c64::new(x[i], 0.0) } else { c64::new(0.0, 0.0) };
        d + scale * y[(i, j)]
    })
}

fn eigenvalues(a: &Mat<c64>) -> Result<Vec<Complex64>> {
    match a.eigenvalues() {
        Ok(ev) => Ok(ev),
        // Same spectrum, different rounding and shift sequence.
        Err(_) => a
            .transpose()
            .to_owned()
            .eigenvalues()
            .map_err(|e| Error::EigenFailure(format!("{e:?}"))),
    }
}

/// Eigenvalues of `X + i√t·Y` for `cfg.reps` independent draws of `Y`.
pub fn simulate(measure: &Measure, cfg: &SimConfig) -> Result<EigenCloud> {
    cfg.validate()?;
    let x = deterministic_x(measure, cfg.n)?;
    let scale = c64::new(0.0, cfg.t.sqrt());
    let per_rep: Vec<Vec<Complex64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let y = sample_gue_stream(cfg.n, cfg.seed, r as u64);
            eigenvalues(&model_matrix(&x, &y, scale))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(cfg.n * cfg.reps);
    let mut rep = Vec::with_capacity(cfg.n * cfg.reps);
    for (r, ev) in per_rep.into_iter().enumerate() {
        rep.extend(std::iter::repeat_n(r, ev.len()));
        points.extend(ev);
    }
    Ok(EigenCloud {
        points,
        rep,
        config: *cfg,
    })
}

/// Eigenvalues of the Hermitian control `X + √t·Y`, same draws of `Y` as
/// [`simulate`].
pub fn simulate_hermitian(measure: &Measure, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let x = deterministic_x(measure, cfg.n)?;
    let scale = c64::new(cfg.t.sqrt(), 0.0);
    let per_rep: Vec<Vec<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let y = sample_gue_stream(cfg.n, cfg.seed, r as u64);
            model_matrix(&x, &y, scale)
                .self_adjoint_eigenvalues(faer::Side::Lower)
                .map_err(|e| Error::EigenFailure(format!("{e:?}")))
        })
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Kolmogorov distance between the empirical law of `samples` and the
/// right-continuous `cdf`.
pub fn sup_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // Ties jump together.
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        // Left limit for laws with atoms.
        let below = cdf(xs[i].next_down());
        let f = cdf(xs[i]);
        worst = worst.max((below - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub points: usize,
    /// Share of points with `|Im λ| <= b_t(Re λ) + dilation`.
    pub inside_fraction: f64,
    /// Sup-distance between the empirical CDF of `Re λ` and the marginal of
    /// the Brown measure.
    pub marginal_sup: f64,
    /// Sup-distance between the empirical CDF of `Q_t(Re λ)` (with `Re λ`
    /// clamped to `Ω̄_t ∩ ℝ`) and the law of `x0 + σ_t`.
    pub pushed_sup: f64,
}

fn clamp_to(intervals: &[(f64, f64)], x: f64) -> f64 {
    let mut best = x;
    let mut dist = f64::INFINITY;
    for &(lo, hi) in intervals {
        let c = x.clamp(lo, hi);
        if (c - x).abs() < dist {
            dist = (c - x).abs();
            best = c;
        }
    }
    best
}

pub fn compare(
    cloud: &EigenCloud,
    profile: &BrownProfile,
    law: &LawAdditive,
    bm: &BrownMeasure,
) -> Result<CompareReport> {
    if (profile.t - bm.t()).abs() > 0.0 || (cloud.config.t - bm.t()).abs() > 0.0 {
        return Err(Error::InvalidArgument("cloud, profile and measure disagree on t".into()));
    }
    let intervals = bm.omega_intervals();
    let dilation = cloud.config.dilation;
    let rows: Vec<(bool, f64)> = cloud
        .points
        .par_iter()
        .map(|z| -> Result<(bool, f64)> {
            let inside = z.im.abs() <= bm.b_t(z.re)? + dilation;
            let a = clamp_to(&intervals, z.re);
            Ok((inside, 2.0 * bm.a0_of_a(a)? - a))
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    let inside = rows.iter().filter(|r| r.0).count();
    let re: Vec<f64> = cloud.points.iter().map(|z| z.re).collect();
    let pushed: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(CompareReport {
        points: n,
        inside_fraction: if n == 0 { 0.0 } else { inside as f64 / n as f64 },
        marginal_sup: sup_distance(&re, |x| profile.marginal_cdf(x)),
        pushed_sup: sup_distance(&pushed, |u| law.cdf_at(u)),
    })
}

/// Sup-distance between the Hermitian control's eigenvalues and the law of
/// `x0 + σ_t`.
pub fn compare_hermitian(eigenvalues: &[f64], law: &LawAdditive) -> f64 {
    sup_distance(eigenvalues, |u| law.cdf_at(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpec;

    #[test]
    fn gue_is_hermitian_and_reproducible() {
        let y = sample_gue(6, 42);
        for i in 0..6 {
            assert_eq!(y[(i, i)].im, 0.0);
            for j in 0..6 {
                assert_eq!(y[(i, j)], y[(j, i)].conj());
            }
        }
        assert_eq!(y, sample_gue(6, 42));
        assert_ne!(y, sample_gue_stream(6, 42, 1));
    }

    #[test]
    fn gue_entry_variances() {
        // Pool entries of many small draws; check second moments within 3σ.
        let n = 4;
        let draws = 10_000;
        let (mut diag2, mut off2, mut trace) = (0.0, 0.0, Vec::with_capacity(draws));
        for k in 0..draws {
            let y = sample_gue_stream(n, 7, k as u64);
            let mut tr = 0.0;
            for i in 0..n {
                diag2 += y[(i, i)].re.powi(2);
                tr += y[(i, i)].re;
                off2 += y[(i, (i + 1) % n)].norm_sqr();
            }
            trace.push(tr);
        }
        let cnt = (draws * n) as f64;
        let var = 1.0 / n as f64;
        // Var of y² for a centred Gaussian is 2σ⁴; of |z|² for a complex one σ⁴.
        assert!((diag2 / cnt - var).abs() < 3.0 * (2.0f64).sqrt() * var / cnt.sqrt());
        assert!((off2 / cnt - var).abs() < 3.0 * var / cnt.sqrt());
        let mean = trace.iter().sum::<f64>() / draws as f64;
        // Var(trace) = n·(1/n) = 1.
        assert!(mean.abs() < 3.0 / (draws as f64).sqrt());
    }

    #[test]
    fn deterministic_diagonals() {
        let b = Measure::new(&MeasureSpec::bernoulli(2.0 / 3.0)).unwrap();
        assert_eq!(deterministic_x(&b, 3).unwrap(), vec![-1.0, 1.0, 1.0]);
        let u = Measure::new(&MeasureSpec::uniform(-1.0, 1.0)).unwrap();
        let x = deterministic_x(&u, 4).unwrap();
        for (got, want) in x.iter().zip([-0.75, -0.25, 0.25, 0.75]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_matches_quadratic_formula() {
        let b = Measure::new(&MeasureSpec::bernoulli(0.5)).unwrap();
        let cfg = SimConfig { n: 2, t: 0.7, reps: 1, seed: 3, dilation: 0.0 };
        let cloud = simulate(&b, &cfg).unwrap();
        let y = sample_gue_stream(2, 3, 0);
        let a = model_matrix(&[-1.0, 1.0], &y, c64::new(0.0, 0.7f64.sqrt()));
        let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let half = (p + s) / 2.0;
        let disc = (half * half - (p * s - q * r)).sqrt();
        let mut want = [half + disc, half - disc];
        let mut got = [cloud.points[0], cloud.points[1]];
        let key = |z: &Complex64| (z.re, z.im);
        want.sort_by(|u, v| key(u).partial_cmp(&key(v)).unwrap());
        got.sort_by(|u, v| key(u).partial_cmp(&key(v)).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn transpose_has_same_spectrum() {
        let u = Measure::new(&MeasureSpec::uniform(-1.0, 1.0)).unwrap();
        let x = deterministic_x(&u, 8).unwrap();
        let a = model_matrix(&x, &sample_gue(8, 1), c64::new(0.0, 0.5));
        let mut e1 = eigenvalues(&a).unwrap();
        let mut e2 = eigenvalues(&a.transpose().to_owned()).unwrap();
        let key = |z: &Complex64| (z.re, z.im);
        e1.sort_by(|u, v| key(u).partial_cmp(&key(v)).unwrap());
        e2.sort_by(|u, v| key(u).partial_cmp(&key(v)).unwrap());
        for (p, q) in e1.iter().zip(&e2) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn small_cloud_report_is_sane() {
        let e = Measure::new(&MeasureSpec::semicircle(1.0)).unwrap();
        let bm = BrownMeasure::new(&e, 1.0).unwrap();
        let profile = bm.profile(64).unwrap();
        let law = crate::maps::law_additive(&bm, &profile).unwrap();
        let cfg = SimConfig { n: 40, t: 1.0, reps: 2, seed: 9, dilation: 0.05 };
        let cloud = simulate(&e, &cfg).unwrap();
        assert_eq!(cloud.points.len(), 80);
        assert_eq!(cloud, simulate(&e, &cfg).unwrap());
        let rep = compare(&cloud, &profile, &law, &bm).unwrap();
        assert!((0.0..=1.0).contains(&rep.inside_fraction));
        assert!(rep.marginal_sup < 0.5 && rep.pushed_sup < 0.5);
        assert!(cloud.to_csv().starts_with("re,im,rep\n"));
    }

    #[test]
    fn sup_distance_against_uniform() {
        let xs: Vec<f64> = (0..10).map(|k| (k as f64 + 0.5) / 10.0).collect();
        assert!((sup_distance(&xs, |x| x.clamp(0.0, 1.0)) - 0.05).abs() < 1e-15);
    }
}
