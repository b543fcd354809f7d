//! Chebyshev points of the first kind and spectral cumulative integration.

use std::f64::consts::PI;

/// The `n` first-kind Chebyshev points on `(-1, 1)`, ascending.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -((k as f64 + 0.5) * PI / n as f64).cos())
        .collect()
}

/// Maps [`nodes`] onto `(lo, hi)`.
pub fn nodes_on(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    nodes(n).into_iter().map(|x| c + h * x).collect()
}

/// Given samples of a smooth `g` at [`nodes`]`(n)`, returns
/// `∫_{-1}^{x_k} √(1-x²)·g(x) dx` at every node together with the integral
/// over `[-1, 1]`.
pub fn cumulative_semicircle(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // With x = -cos θ the integral is ∫_0^θ sin²φ·g dφ, and g is a cosine
    // series in φ.
    let period = 4 * n;
    let angle = |m: usize| m as f64 * PI / (2 * n) as f64;
    let cos_table: Vec<f64> = (0..period).map(|m| angle(m).cos()).collect();
    let sin_table: Vec<f64> = (0..period).map(|m| angle(m).sin()).collect();
    let idx = |j: usize, k: usize| (j * (2 * k + 1)) % period;

    let mut d = vec![0.0; n];
    for (j, dj) in d.iter_mut().enumerate() {
        let s: f64 = values
            .iter()
            .enumerate()
            .map(|(k, f)| f * cos_table[idx(j, k)])
            .sum();
        *dj = 2.0 * s / n as f64;
    }
    d[0] *= 0.5;
    // sin²φ·cos jφ = ½cos jφ - ¼cos (j+2)φ - ¼cos |j-2|φ.
    let mut e = vec![0.0; n + 2];
    for (j, &dj) in d.iter().enumerate() {
        e[j] += 0.5 * dj;
        e[j + 2] -= 0.25 * dj;
        e[j.abs_diff(2)] -= 0.25 * dj;
    }
    let total = e[0] * PI;
    let cum = (0..n)
        .map(|k| {
            let theta = (k as f64 + 0.5) * PI / n as f64;
            e[0] * theta
                + (1..e.len())
                    .map(|m| e[m] * sin_table[idx(m, k)] / m as f64)
                    .sum::<f64>()
        })
        .collect();
    (cum, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_ascending_and_symmetric() {
        let x = nodes(7);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert!(x[3].abs() < 1e-15);
        assert!((x[0] + x[6]).abs() < 1e-15);
    }

    #[test]
    fn semicircle_weight_is_exact_for_smooth_factors() {
        let x = nodes(32);
        let g: Vec<f64> = x.iter().map(|x| 1.0 + x + x.exp()).collect();
        let (cum, total) = cumulative_semicircle(&g);
        // Reference by a fine composite midpoint rule in θ.
        let reference = |upper: f64| {
            let m = 200_000;
            let th_hi = (-upper).acos();
            let h = th_hi / m as f64;
            (0..m)
                .map(|i| {
                    let th = (i as f64 + 0.5) * h;
                    let x = -th.cos();
                    th.sin().powi(2) * (1.0 + x + x.exp()) * h
                })
                .sum::<f64>()
        };
        assert!((total - reference(1.0)).abs() < 1e-9);
        for k in [0, 7, 16, 31] {
            assert!((cum[k] - reference(x[k])).abs() < 1e-9, "{k}");
        }
    }
}
