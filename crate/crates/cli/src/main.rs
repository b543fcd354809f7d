use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brownmeasure::brown::{fmt_g17, BrownMeasure};
use brownmeasure::characteristics::{self, InitialData};
use brownmeasure::quadrature::Tolerance;
use brownmeasure::rmt::{self, SimConfig};
use brownmeasure::{jn, maps, subordination, Measure, MeasureSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

mod svg;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "brownm", version, about = "Brown measure of x0 + i·σ_t")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density profile, Ω_t ∩ ℝ and mass.
    Compute {
        #[command(flatten)]
        common: Common,
        /// Also write a two-panel SVG figure.
        #[arg(long)]
        svg: bool,
    },
    /// Samples of Λ_t, U_t, Q_t and the law of x0 + σ_t.
    Pushforward {
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalues of X + i√t·Y compared with the Brown measure.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        dilation: f64,
    },
    /// Density from the conjugate fixed point, next to w_t.
    Jn {
        #[command(flatten)]
        common: Common,
    },
    /// One characteristic of the Hamilton–Jacobi equation.
    Characteristics {
        #[command(flatten)]
        common: Common,
        /// Starting point a0.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        /// Starting point b0.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        b: f64,
        /// Starting regulariser ε0.
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Runs the invariant checks and prints a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Measure file (JSON).
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Named measure, e.g. `bernoulli:0.6667` or `uniform:-1:1`.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[command(flatten)]
    source: Source,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Points per interval of Ω_t ∩ ℝ.
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Quadrature tolerance, absolute and relative.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug)]
enum Failure {
    Lib(brownmeasure::Error),
    Usage(String),
    Io(String),
    Checks(usize),
}

impl From<brownmeasure::Error> for Failure {
    fn from(e: brownmeasure::Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Input {
    spec: MeasureSpec,
    measure: Measure,
    digest: String,
}

fn load(common: &Common) -> Outcome<Input> {
    let spec = match (&common.source.measure, &common.source.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            MeasureSpec::from_json(&text)?
        }
        (None, Some(name)) => MeasureSpec::from_preset(name)?,
        (None, None) => return Err(Failure::Usage("one of --measure or --preset is required".into())),
    };
    if !(common.t > 0.0 && common.t.is_finite()) {
        return Err(Failure::Usage(format!("--t must be positive, got {}", common.t)));
    }
    if common.grid < 16 {
        return Err(Failure::Usage(format!("--grid must be at least 16, got {}", common.grid)));
    }
    let mut measure = Measure::new(&spec)?;
    if let Some(tol) = common.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {tol}")));
        }
        measure = measure.with_tolerance(Tolerance { abs: tol, rel: tol });
    }
    let digest = Sha256::digest(spec.to_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(Input { spec, measure, digest })
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn summary(command: &str, input: &Input, t: f64, body: Value) -> Value {
    let mut v = json!({
        "schema": 1,
        "command": command,
        "measure": serde_json::from_str::<Value>(&input.spec.to_json()).unwrap_or(Value::Null),
        "measure_sha256": input.digest,
        "t": t,
    });
    if let (Some(map), Value::Object(extra)) = (v.as_object_mut(), body) {
        map.extend(extra);
    }
    v
}

fn emit_summary(dir: &Path, name: &str, value: &Value) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).expect("summary serialises") + "\n";
    write(dir, name, &text)?;
    print!("{text}");
    Ok(())
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn compute(common: &Common, want_svg: bool) -> Outcome<()> {
    let input = load(common)?;
    let bm = BrownMeasure::new(&input.measure, common.t)?;
    let profile = bm.profile(common.grid)?;
    write(&common.out, "profile.csv", &profile.to_csv())?;
    let (lo, hi) = profile
        .w
        .iter()
        .zip(&profile.near_boundary)
        .filter(|(_, nb)| !**nb)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (w, _)| (lo.min(*w), hi.max(*w)));
    let value = summary(
        "compute",
        &input,
        common.t,
        json!({
            "grid": common.grid,
            "omega_intervals": bm.omega_intervals(),
            "lambda_intervals": bm.branches().iter().map(|b| b.lambda).collect::<Vec<_>>(),
            "mass": profile.mass,
            "min_density": finite(lo),
            "max_density": finite(hi),
        }),
    );
    if want_svg {
        write(&common.out, "brown.svg", &svg::figure(&profile, common.t, &input.digest))?;
    }
    emit_summary(&common.out, "summary.json", &value)
}

fn pushforward(common: &Common) -> Outcome<()> {
    let input = load(common)?;
    let t = common.t;
    let bm = BrownMeasure::new(&input.measure, t)?;
    let profile = bm.profile(common.grid)?;

    // Λ_t boundary with ρ_t and its image under U_t.
    let mut lambda_csv = String::from("a0,v_t,rho_t,a,b\n");
    for br in bm.branches() {
        let (lo, hi) = br.lambda;
        for k in 0..common.grid {
            let a0 = lo + (hi - lo) * (k as f64 + 0.5) / common.grid as f64;
            let bp = subordination::boundary_point(&input.measure, t, a0)?;
            let rho = (1.0 - 0.5 * bp.slope) / (std::f64::consts::PI * t);
            lambda_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_g17(a0),
                fmt_g17(bp.v),
                fmt_g17(rho),
                fmt_g17(bp.a),
                fmt_g17(2.0 * bp.v)
            ));
        }
    }
    write(&common.out, "lambda.csv", &lambda_csv)?;

    let mut q_csv = String::from("a,q_t\n");
    for (a, a0) in profile.a.iter().zip(&profile.a0) {
        q_csv.push_str(&format!("{},{}\n", fmt_g17(*a), fmt_g17(2.0 * a0 - a)));
    }
    write(&common.out, "q_t.csv", &q_csv)?;

    let law = maps::law_additive(&bm, &profile)?;
    write(&common.out, "law_additive.csv", &law.to_csv())?;
    let report = maps::pushforward_check(&bm)?;
    let value = summary(
        "pushforward",
        &input,
        t,
        json!({
            "grid": common.grid,
            "mass": law.mass,
            "law_intervals": law.intervals,
            "rectangles": report.checks.len(),
            "max_discrepancy": report.max_discrepancy,
        }),
    );
    emit_summary(&common.out, "summary.json", &value)
}

fn simulate(common: &Common, n: usize, reps: usize, seed: u64, dilation: f64) -> Outcome<()> {
    let input = load(common)?;
    let t = common.t;
    let cfg = SimConfig { n, t, reps, seed, dilation };
    cfg.validate()?;
    let bm = BrownMeasure::new(&input.measure, t)?;
    let profile = bm.profile(common.grid)?;
    let law = maps::law_additive(&bm, &profile)?;
    let cloud = rmt::simulate(&input.measure, &cfg)?;
    write(&common.out, "cloud.csv", &cloud.to_csv())?;
    let report = rmt::compare(&cloud, &profile, &law, &bm)?;
    let hermitian = rmt::compare_hermitian(&rmt::simulate_hermitian(&input.measure, &cfg)?, &law);
    let value = summary(
        "simulate",
        &input,
        t,
        json!({
            "n": n,
            "reps": reps,
            "seed": seed,
            "dilation": dilation,
            "points": report.points,
            "inside_fraction": report.inside_fraction,
            "marginal_sup_distance": report.marginal_sup,
            "pushed_sup_distance": report.pushed_sup,
            "hermitian_sup_distance": hermitian,
        }),
    );
    emit_summary(&common.out, "report.json", &value)
}

fn jn_cmd(common: &Common) -> Outcome<()> {
    let input = load(common)?;
    let t = common.t;
    let bm = BrownMeasure::new(&input.measure, t)?;
    let mut csv = String::from("a,re_g,im_g,jn_density,w_t\n");
    let mut max_diff: f64 = 0.0;
    for (lo, hi) in bm.omega_intervals() {
        let grid: Vec<f64> = (0..common.grid)
            .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / common.grid as f64)
            .collect();
        let gs = jn::solve_g_grid(&input.measure, t, &grid)?;
        let h = 1e-3 * ((hi - lo) / 2.0).min(1.0);
        for (&a, &g) in grid.iter().zip(&gs) {
            let d = jn::jn_density_with(&input.measure, t, a, g, h * (1.0 + a.abs()))?;
            let w = bm.w_t(a)?;
            max_diff = max_diff.max((d - w).abs());
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_g17(a),
                fmt_g17(g.re),
                fmt_g17(g.im),
                fmt_g17(d),
                fmt_g17(w)
            ));
        }
    }
    write(&common.out, "jn.csv", &csv)?;
    let value = summary(
        "jn",
        &input,
        t,
        json!({ "grid": common.grid, "max_abs_difference": max_diff }),
    );
    emit_summary(&common.out, "summary.json", &value)
}

fn characteristics_cmd(common: &Common, a: f64, b: f64, eps: f64) -> Outcome<()> {
    let input = load(common)?;
    let t = common.t;
    let init = InitialData::new(a, b, eps);
    let life = characteristics::lifetime(&input.measure, &init)?;
    if t >= life {
        return Err(Failure::Lib(brownmeasure::Error::PastLifetime { t, lifetime: life }));
    }
    let mut csv = String::from("t,a,b,eps,p_a,p_b,p_eps,h\n");
    let steps = common.grid;
    for k in 0..=steps {
        let s = characteristics::flow(&input.measure, &init, t * k as f64 / steps as f64)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_g17(s.t),
            fmt_g17(s.lambda.re),
            fmt_g17(s.lambda.im),
            fmt_g17(s.eps),
            fmt_g17(s.p_a),
            fmt_g17(s.p_b),
            fmt_g17(s.p_eps),
            fmt_g17(s.hamiltonian())
        ));
    }
    write(&common.out, "characteristic.csv", &csv)?;
    let end = characteristics::flow(&input.measure, &init, t)?;
    let s_end = characteristics::hj_value(&input.measure, &init, t)?;
    let residual = characteristics::pde_residual(&input.measure, t, end.lambda, end.eps)?;
    let value = summary(
        "characteristics",
        &input,
        t,
        json!({
            "lambda0": [a, b],
            "eps0": eps,
            "lifetime": life,
            "lambda": [end.lambda.re, end.lambda.im],
            "eps": end.eps,
            "s": s_end,
            "pde_residual": residual,
        }),
    );
    emit_summary(&common.out, "summary.json", &value)
}

fn verify_cmd(common: &Common) -> Outcome<()> {
    let input = load(common)?;
    let bm = BrownMeasure::new(&input.measure, common.t)?;
    let rows = verify::run(&input.measure, &bm, common.grid);
    let mut failed = 0;
    println!("{:<28} {:>12} {:>12}  result", "check", "value", "limit");
    for row in &rows {
        let ok = row.passed();
        if !ok {
            failed += 1;
        }
        let value = row.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "error".into());
        println!(
            "{:<28} {:>12} {:>12.1e}  {}",
            row.name,
            value,
            row.limit,
            if ok { "PASS" } else { "FAIL" }
        );
        if let Some(note) = &row.note {
            println!("    {note}");
        }
    }
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Compute { common, svg } => compute(&common, svg),
        Command::Pushforward { common } => pushforward(&common),
        Command::Simulate { common, n, reps, seed, dilation } => simulate(&common, n, reps, seed, dilation),
        Command::Jn { common } => jn_cmd(&common),
        Command::Characteristics { common, a, b, eps } => characteristics_cmd(&common, a, b, eps),
        Command::Verify { common } => verify_cmd(&common),
    }
}

fn exit_code(failure: &Failure) -> u8 {
    match failure {
        Failure::Lib(e) if e.is_validation() => 2,
        Failure::Lib(e) if e.is_convergence() => 3,
        Failure::Usage(_) => 2,
        Failure::Lib(_) | Failure::Io(_) | Failure::Checks(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Usage(msg) | Failure::Io(msg) => eprintln!("error: {msg}"),
                Failure::Checks(n) => eprintln!("{n} check(s) failed"),
            }
            ExitCode::from(exit_code(&failure))
        }
    }
}
