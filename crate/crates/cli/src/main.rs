use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evap_core::ellipsoid::{harmonics_to_quadric, semi_axes, EllipsoidGeometry, Quadric};
use evap_core::evolution::{set_b2_sign_flip, shoot_parameters, simulate, Integrator, Simulation, SimulationOptions};
use evap_core::geometry::{CutoffProfile, Surface};
use evap_core::verify::{self, Suite};
use evap_core::{Complex64, Error, SpectralCoefficients};
use serde_json::json;

#[derive(Parser)]
#[command(name = "evap", version, about = "Self-similar collapse of an evaporating drop")]
struct Cli {
    /// Negate B(2) for a negative-control build.
    #[arg(long, global = true, hide = true)]
    dev_flip_b2: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the rescaled evolution from an initial spectrum.
    Simulate(RunConfig),
    /// Axes, orientation, capacity and t0 of an ellipsoid.
    Ellipsoid(EllipsoidArgs),
    /// Run an invariant suite.
    Verify {
        #[arg(default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunConfig {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 16)]
    lmax: usize,
    #[arg(long, default_value_t = 8.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    dtau: f64,
    #[arg(long, default_value = "closed_form")]
    integrator: Integrator,
    /// Spectrum file, one `l m re im` per line.
    #[arg(long)]
    input: PathBuf,
    /// Trajectory CSV; omitted means no CSV.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accepted for reproducible scripting; the run itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EllipsoidArgs {
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], conflicts_with = "input")]
    axes: Option<Vec<f64>>,
    /// Spectrum file; only g00 and g2m are used.
    #[arg(long, required_unless_present = "axes")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    json: bool,
}

/// Exit status with a message for stderr.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

const USAGE: u8 = 2;
const EPSILON: u8 = 3;
const STEP: u8 = 4;

fn read_spectrum(path: &PathBuf, lmax: usize) -> Result<SpectralCoefficients, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
    SpectralCoefficients::parse_real(&text, lmax).map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::new(USAGE, format!("--{name} must be positive, got {v}")))
    }
}

fn simulate_cmd(cfg: &RunConfig) -> Result<(), Failure> {
    positive("sigma", cfg.sigma)?;
    positive("tau-max", cfg.tau_max)?;
    positive("dtau", cfg.dtau)?;
    if !(cfg.epsilon >= 0.0 && cfg.epsilon.is_finite()) {
        return Err(Failure::new(
            EPSILON,
            format!("epsilon must be nonnegative, got {}", cfg.epsilon),
        ));
    }
    let g0 = read_spectrum(&cfg.input, cfg.lmax)?;

    let inadmissible = |e: Error| Failure::new(EPSILON, format!("epsilon={} is inadmissible: {e}", cfg.epsilon));
    Surface::new(cfg.epsilon, g0.clone())
        .and_then(|s| s.check_admissible(&CutoffProfile::default()))
        .map_err(inadmissible)?;
    shoot_parameters(&g0, cfg.epsilon, cfg.sigma).map_err(inadmissible)?;

    let opts = SimulationOptions {
        tau_max: cfg.tau_max,
        dtau: cfg.dtau,
        integrator: cfg.integrator,
        fit_window: None,
    };
    let sim = simulate(&g0, cfg.epsilon, cfg.sigma, &opts).map_err(|e| match e {
        Error::StepSize { .. } => Failure::new(STEP, e.to_string()),
        other => Failure::new(1, other.to_string()),
    })?;

    if let Some(path) = &cfg.output {
        let file = fs::File::create(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        sim.trajectory
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    }
    let report = if cfg.json {
        format!("{}\n", simulation_json(&sim, &g0))
    } else {
        simulation_report(&sim, &g0)
    };
    if let Some(path) = &cfg.report {
        fs::write(path, &report).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    }
    print!("{report}");
    Ok(())
}

/// (m, limit/g⁰, shot/g⁰) for each nonzero degree-2 input.
fn ratios(sim: &Simulation, g0: &SpectralCoefficients) -> Vec<(i64, Complex64, Complex64)> {
    if g0.lmax() < 2 {
        return Vec::new();
    }
    (-2..=2)
        .filter(|&m| g0.get(2, m).norm() > 0.0)
        .map(|m| {
            let g = g0.get(2, m);
            let lim = sim
                .trajectory
                .limit_estimate(2, m)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            (m, lim / g, sim.singularity.g_e2m[(m + 2) as usize] / g)
        })
        .collect()
}

fn simulation_report(sim: &Simulation, g0: &SpectralCoefficients) -> String {
    let mut s = sim.singularity.report();
    match &sim.rate {
        Some(r) => {
            let _ = writeln!(s, "lambda_hat={:.16e}", r.lambda_hat);
            let _ = writeln!(s, "lambda_plain={:.16e}", r.lambda_plain);
            let _ = writeln!(s, "fit_window={},{}", r.window.0, r.window.1);
        }
        None => s.push_str("lambda_hat=none\n"),
    }
    for (m, lim, shot) in ratios(sim, g0) {
        let _ = writeln!(s, "limit_ratio2m[{m}]={:.16e},{:.16e}", lim.re, lim.im);
        let _ = writeln!(s, "shot_ratio2m[{m}]={:.16e},{:.16e}", shot.re, shot.im);
    }
    s
}

fn simulation_json(sim: &Simulation, g0: &SpectralCoefficients) -> serde_json::Value {
    let d = &sim.singularity;
    let pair = |z: Complex64| [z.re, z.im];
    json!({
        "extinction_time": d.extinction_time(),
        "t0": d.t0,
        "x0": d.x0,
        "gE00": d.g_e00,
        "gE2m": d.g_e2m.map(pair),
        "b1m": d.b1m.map(pair),
        "epsilon": d.epsilon,
        "rate": sim.rate,
        "ratios2m": ratios(sim, g0)
            .into_iter()
            .map(|(m, lim, shot)| json!({"m": m, "limit": pair(lim), "shot": pair(shot)}))
            .collect::<Vec<_>>(),
    })
}

fn ellipsoid_cmd(args: &EllipsoidArgs) -> Result<(), Failure> {
    let (geom, quadric) = match &args.axes {
        Some(axes) => {
            let axes = [axes[0], axes[1], axes[2]];
            if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(Failure::new(USAGE, format!("semi-axes must be positive, got {axes:?}")));
            }
            if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
                return Err(Failure::new(
                    EPSILON,
                    format!("epsilon must be positive, got {}", args.epsilon),
                ));
            }
            let g = EllipsoidGeometry::from_axes(axes, args.epsilon).map_err(|e| Failure::new(USAGE, e.to_string()))?;
            (g, None)
        }
        None => {
            let path = args.input.as_ref().expect("clap enforces --axes or --input");
            let g = read_spectrum(path, 2)?;
            if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
                return Err(Failure::new(
                    EPSILON,
                    format!("epsilon must be positive, got {}", args.epsilon),
                ));
            }
            let g2 = [-2, -1, 0, 1, 2].map(|m| g.get(2, m));
            let q = harmonics_to_quadric(g.get(0, 0).re, &g2, args.epsilon)
                .map_err(|e| Failure::new(EPSILON, format!("epsilon={} is inadmissible: {e}", args.epsilon)))?;
            let geom = semi_axes(&q).map_err(|e| Failure::new(EPSILON, e.to_string()))?;
            (geom, Some(q))
        }
    };
    if args.json {
        let o = geom.orientation;
        let rows: Vec<[f64; 3]> = (0..3).map(|i| [o[(i, 0)], o[(i, 1)], o[(i, 2)]]).collect();
        let mut v = json!({
            "axes": geom.semi_axes,
            "orientation": rows,
            "E": geom.capacity,
            "t0": geom.t0,
        });
        if let Some(q) = &quadric {
            v["quadric"] = json!(q.to_vector().as_slice());
        }
        println!("{v}");
    } else {
        print!("{}", ellipsoid_report(&geom, quadric.as_ref()));
    }
    Ok(())
}

fn ellipsoid_report(g: &EllipsoidGeometry, q: Option<&Quadric>) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
    let mut s = String::new();
    if let Some(q) = q {
        let _ = writeln!(s, "quadric={}", join(q.to_vector().as_slice()));
    }
    let _ = writeln!(s, "axes={}", join(&g.semi_axes));
    let o = g.orientation;
    let rows: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| o[(i, j)])).collect();
    let _ = writeln!(s, "orientation={}", join(&rows));
    let _ = writeln!(s, "E={:.16e}", g.capacity);
    if let Some(t0) = g.t0 {
        let _ = writeln!(s, "t0={t0:.16e}");
    }
    s
}

fn verify_cmd(suite: Suite, seed: u64) -> Result<(), Failure> {
    let checks = verify::run(suite, seed);
    let mut out = io::stdout().lock();
    let failed = checks.iter().filter(|c| !c.passed()).count();
    for c in &checks {
        let _ = writeln!(out, "{c}");
    }
    let _ = writeln!(out, "SUMMARY {} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure::new(1, format!("{failed} checks failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_b2_sign_flip(cli.dev_flip_b2);
    let result = match &cli.command {
        Command::Simulate(cfg) => simulate_cmd(cfg),
        Command::Ellipsoid(args) => ellipsoid_cmd(args),
        Command::Verify { suite, seed } => verify_cmd(*suite, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("evap: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
