//! Adaptive Gauss–Legendre quadrature for small vector-valued integrands.
//!
//! Every integral transform of a density-type measure in this crate is routed
//! through [`integrate`]. The integrand returns `[f64; N]` so that families of
//! related integrals (for example the Poisson integral together with its
//! `v`-derivative) share one subdivision of the interval.
//!
//! The scheme is local and recursive: an interval is accepted when the
//! fixed-order rule on the whole interval agrees with the sum of the rule on
//! its two halves, to within a tolerance proportional to the interval length.
//! The accepted value is the (more accurate) two-half sum.

use std::sync::OnceLock;

/// Number of nodes of the underlying fixed-order rule.
pub const ORDER: usize = 16;

const MAX_DEPTH: u32 = 60;

/// Absolute and relative tolerance of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-10,
        }
    }
}

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn apply<const N: usize>(&self, a: f64, b: f64, f: &impl Fn(f64) -> [f64; N]) -> [f64; N] {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; N];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let y = f(mid + half * x);
            for k in 0..N {
                acc[k] += w * y[k];
            }
        }
        for v in &mut acc {
            *v *= half;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ORDER))
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, treating every entry of
/// `breaks` as a forced subdivision point. `breaks` must be ascending.
pub fn integrate<const N: usize>(
    f: &impl Fn(f64) -> [f64; N],
    breaks: &[f64],
    tol: Tolerance,
) -> [f64; N] {
    let mut total = [0.0; N];
    if breaks.len() < 2 {
        return total;
    }
    let gl = rule();
    let lo = breaks[0];
    let hi = breaks[breaks.len() - 1];
    let length = hi - lo;
    if length <= 0.0 {
        return total;
    }

    // Coarse pass: per-interval estimates and an L1 scale per component.
    let abs_f = |x: f64| {
        let y = f(x);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = y[k].abs();
        }
        out
    };
    let mut coarse = Vec::with_capacity(breaks.len() - 1);
    let mut scale = [0.0; N];
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let est = gl.apply(w[0], w[1], f);
        let mag = gl.apply(w[0], w[1], &abs_f);
        for k in 0..N {
            scale[k] += mag[k];
        }
        coarse.push((w[0], w[1], est));
    }
    let mut density_tol = [0.0; N];
    for k in 0..N {
        density_tol[k] = tol.abs.max(tol.rel * scale[k]) / length;
    }

    for (a, b, est) in coarse {
        let part = refine(f, a, b, est, &density_tol, 0);
        for k in 0..N {
            total[k] += part[k];
        }
    }
    total
}

fn refine<const N: usize>(
    f: &impl Fn(f64) -> [f64; N],
    a: f64,
    b: f64,
    whole: [f64; N],
    density_tol: &[f64; N],
    depth: u32,
) -> [f64; N] {
    let gl = rule();
    let mid = 0.5 * (a + b);
    if mid <= a || mid >= b {
        return whole;
    }
    let left = gl.apply(a, mid, f);
    let right = gl.apply(mid, b, f);
    let mut sum = [0.0; N];
    let mut converged = true;
    for k in 0..N {
        sum[k] = left[k] + right[k];
        let err = (sum[k] - whole[k]).abs();
        // Rounding floor: nodes carry an absolute error of about eps·|x|, which
        // relative to the interval length bounds how well the integrand can be
        // resolved there. Without it a tall narrow peak away from the origin
        // asks for more digits than the arithmetic carries.
        let floor = 16.0 * f64::EPSILON * (a.abs() + b.abs()).max(b - a) / (b - a)
            * (left[k].abs() + right[k].abs());
        if !(err <= (density_tol[k] * (b - a)).max(floor)) {
            converged = false;
        }
    }
    if converged || depth >= MAX_DEPTH || !sum.iter().all(|v| v.is_finite()) {
        return sum;
    }
    let l = refine(f, a, mid, left, density_tol, depth + 1);
    let r = refine(f, mid, b, right, density_tol, depth + 1);
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = l[k] + r[k];
    }
    out
}
