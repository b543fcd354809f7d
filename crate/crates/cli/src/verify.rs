use brownmeasure::brown::BrownMeasure;
use brownmeasure::{characteristics, jn, maps, subordination as sub, Complex64, Measure};

pub struct Row {
    pub name: &'static str,
    /// Worst deviation, or `None` when the check could not be evaluated.
    pub value: Option<f64>,
    pub limit: f64,
    pub note: Option<String>,
}

impl Row {
    pub fn passed(&self) -> bool {
        self.value.is_some_and(|v| v <= self.limit)
    }
}

fn row(name: &'static str, limit: f64, value: brownmeasure::Result<f64>) -> Row {
    match value {
        Ok(v) => Row { name, value: Some(v), limit, note: None },
        Err(e) => Row { name, value: None, limit, note: Some(e.to_string()) },
    }
}

fn interior(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
}

pub fn run(measure: &Measure, bm: &BrownMeasure, grid: usize) -> Vec<Row> {
    let t = bm.t();
    let mut rows = Vec::new();

    let mass_limit = if measure.is_atomic() { 1e-4 } else { 1e-6 };
    rows.push(row("mass", mass_limit, bm.profile(grid).map(|p| (p.mass - 1.0).abs())));

    let boundary = || -> brownmeasure::Result<(f64, f64)> {
        let (mut j_err, mut h_err) = (0.0f64, 0.0f64);
        for br in bm.branches() {
            for a0 in interior(br.lambda.0, br.lambda.1, 200) {
                let v = sub::v_t(measure, t, a0)?;
                if v == 0.0 {
                    continue;
                }
                let z = Complex64::new(a0, v);
                j_err = j_err.max((sub::j_t(measure, t, z)?.im - 2.0 * v).abs());
                h_err = h_err.max(sub::h_t(measure, t, z)?.im.abs());
            }
        }
        Ok((j_err, h_err))
    };
    let b = boundary();
    rows.push(row("Im J_t = 2 v_t on boundary", 1e-9, b.clone().map(|x| x.0)));
    rows.push(row("H_t real on boundary", 1e-9, b.map(|x| x.1)));

    let round_trip = || -> brownmeasure::Result<f64> {
        let mut worst = 0.0f64;
        for (lo, hi) in bm.omega_intervals() {
            for a in interior(lo, hi, 200) {
                worst = worst.max((sub::a_t(measure, t, bm.a0_of_a(a)?)? - a).abs());
            }
        }
        Ok(worst)
    };
    rows.push(row("a_t(a0_t(a)) = a", 1e-10, round_trip()));

    let jn_check = || -> brownmeasure::Result<(f64, f64)> {
        let (mut dens, mut re) = (0.0f64, 0.0f64);
        for (lo, hi) in bm.omega_intervals() {
            let pts: Vec<f64> = interior(lo, hi, 200).collect();
            let gs = jn::solve_g_grid(measure, t, &pts)?;
            let h = 1e-3 * ((hi - lo) / 2.0).min(1.0);
            for (&a, &g) in pts.iter().zip(&gs) {
                let d = jn::jn_density_with(measure, t, a, g, h * (1.0 + a.abs()))?;
                dens = dens.max((d - bm.w_t(a)?).abs());
                re = re.max((t * g.re - (bm.a0_of_a(a)? - a)).abs());
            }
        }
        Ok((dens, re))
    };
    let j = jn_check();
    rows.push(row("JN density = w_t", 1e-5, j.clone().map(|x| x.0)));
    rows.push(row("JN t·Re g = a0_t(a) - a", 1e-8, j.map(|x| x.1)));

    let pde = || -> brownmeasure::Result<f64> {
        let sup = measure.support();
        let (c, r) = (0.5 * (sup.lo + sup.hi), 0.5 * (sup.hi - sup.lo) + 1.0);
        let mut worst = 0.0f64;
        for k in 0..20 {
            // Deterministic points spread over a disc around the support.
            let theta = k as f64 * 2.399963229728653;
            let rho = r * ((k as f64 + 0.5) / 20.0).sqrt();
            let lambda = Complex64::new(c + rho * theta.cos(), rho * theta.sin());
            let eps = 0.1 + 0.9 * ((k * 7) % 20) as f64 / 19.0;
            worst = worst.max(characteristics::pde_residual(measure, t, lambda, eps)?.abs());
        }
        Ok(worst)
    };
    rows.push(row("Hamilton-Jacobi residual", 1e-4, pde()));

    rows.push(row(
        "U_t rectangle pushforward",
        1e-5,
        maps::pushforward_check(bm).map(|r| r.max_discrepancy),
    ));
    rows
}
