//! Subcommand implementations. Each returns `Ok(())` or a [`Failure`]
//! carrying its exit class; everything the user sees on success goes to
//! stdout or the requested output files.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;
use geofil::diagnostics;
use geofil::geometry::GeodesicState;
use geofil::solver::{
    integrate_caratheodory_system, integrate_filippov, integrate_regularized, GeodesicSwitched,
    StopReason, Trajectory,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::config::{ResolvedRun, RunConfig, SolverSpec, StateSpec, Tolerances, FORMAT_VERSION};
use crate::formats;
use crate::scenarios;
use crate::Failure;

/// Flags shared by every run-producing subcommand: either a config file or
/// an inline description of the run.
#[derive(Args, Debug, Clone, Default)]
pub struct RunSource {
    /// JSON run config; conflicts with the inline flags below.
    #[arg(long, conflicts_with_all = ["metric", "param", "x0", "v0", "tspan", "scenario"])]
    pub config: Option<PathBuf>,

    /// Catalog entry name (flat, kink1d, conformal2d, rosen).
    #[arg(long)]
    pub metric: Option<String>,

    /// Entry parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub param: Vec<String>,

    /// Initial position (one value per coordinate).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_name = "X")]
    pub x0: Vec<f64>,

    /// Initial velocity (one value per coordinate).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, value_name = "V")]
    pub v0: Vec<f64>,

    /// Integration span as two times t0 t1.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_name = "T")]
    pub tspan: Vec<f64>,

    /// Named start condition filling whatever x0/v0/tspan leave out.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Random seed; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunSource {
    /// Build the validated run this invocation describes.
    pub fn resolve(&self) -> Result<ResolvedRun, Failure> {
        let mut run = match (&self.config, &self.metric) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(metric)) => {
                let params = parse_params(&self.param)?;
                let entry = geofil::catalog::CatalogEntry::by_name(metric, &params)
                    .map_err(|e| Failure::Validation(e.to_string()))?;
                let scenario =
                    scenarios::resolve(&entry, self.scenario.as_deref().unwrap_or("reference"))?;
                if self.x0.is_empty() != self.v0.is_empty() {
                    return Err(Failure::Validation(
                        "provide both --x0 and --v0, or neither".into(),
                    ));
                }
                let state = if self.x0.is_empty() {
                    scenario.state
                } else {
                    StateSpec { x: self.x0.clone(), v: self.v0.clone() }
                };
                let tspan = match self.tspan.as_slice() {
                    [] => scenario.tspan,
                    [t0, t1] => [*t0, *t1],
                    _ => unreachable!("clap enforces two values"),
                };
                RunConfig {
                    metric: metric.clone(),
                    params,
                    initial_state: state,
                    tspan,
                    solver: SolverSpec::default(),
                    tolerances: Tolerances::default(),
                    seed: 0,
                }
                .validate()?
            }
            (None, None) => {
                return Err(Failure::Validation("either --config or --metric is required".into()))
            }
        };
        if let Some(seed) = self.seed {
            run.config.seed = seed;
        }
        Ok(run)
    }
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(Failure::Validation(format!(
                "--param needs KEY=VALUE, got `{pair}`"
            )));
        };
        let value: f64 = value.parse().map_err(|_| {
            Failure::Validation(format!("--param {key}: `{value}` is not a number"))
        })?;
        map.insert(key.to_string(), value);
    }
    Ok(map)
}

/// Run the config's solver method on its initial state.
pub fn run_method(run: &ResolvedRun) -> Result<Trajectory, Failure> {
    let model = run.entry.model();
    let tspan = (run.config.tspan[0], run.config.tspan[1]);
    let solver = &run.config.solver;
    let traj = match solver.method {
        crate::config::Method::Filippov => integrate_filippov(&model, &run.z0, tspan, &run.cfg),
        crate::config::Method::Caratheodory => {
            let sys = GeodesicSwitched::new(&model);
            integrate_caratheodory_system(
                &sys,
                &run.z0,
                tspan,
                solver.step.expect("validation resolves the step"),
                run.cfg.tie_break,
            )
        }
        crate::config::Method::Regularized => integrate_regularized(
            &run.entry,
            solver.epsilon.expect("validation resolves epsilon"),
            &run.z0,
            tspan,
            &run.cfg,
        ),
    };
    traj.map_err(|e| Failure::Solver(e.to_string()))
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub source: RunSource,

    /// Trajectory CSV path; the event log lands next to it as
    /// `<stem>.events.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct IntegrateReport<'a> {
    format_version: u32,
    command: &'static str,
    config: &'a RunConfig,
    stop: &'a StopReason,
    t_end: f64,
    n_samples: usize,
    n_events: usize,
    max_velocity_jump: f64,
    events: &'a [geofil::solver::Event],
}

pub fn integrate(args: &IntegrateArgs) -> Result<(), Failure> {
    let run = args.source.resolve()?;
    let traj = run_method(&run)?;
    let csv = formats::trajectory_csv(&traj, &run.config)?;
    formats::write_atomic(&args.out, &csv)?;

    let c1 = diagnostics::velocity_jump(&traj);
    let report = IntegrateReport {
        format_version: FORMAT_VERSION,
        command: "integrate",
        config: &run.config,
        stop: &traj.stop,
        t_end: traj.t_end(),
        n_samples: traj.samples.len(),
        n_events: traj.events.len(),
        max_velocity_jump: c1.max_velocity_jump,
        events: &traj.events,
    };
    let events_path = args.out.with_extension("events.json");
    formats::write_atomic(&events_path, &formats::report_json(&report)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: RunSource,

    /// Mollification scale for the regularized run.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Step size for the fixed-step run.
    #[arg(long)]
    pub step: Option<f64>,

    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    format_version: u32,
    command: &'static str,
    config: &'a RunConfig,
    step: f64,
    epsilon: f64,
    n_probes: usize,
    /// Largest position deviation of the fixed-step run from the event-driven one.
    max_dev_caratheodory: f64,
    /// Largest position deviation of the mollified run from the event-driven one.
    max_dev_regularized: f64,
    /// Largest position deviation of the event-driven run from the closed form,
    /// absent when the entry has none.
    max_dev_exact: Option<f64>,
    stops: BTreeMap<&'static str, String>,
}

fn stop_label(stop: &StopReason) -> String {
    match stop {
        StopReason::Completed => "completed".into(),
        StopReason::LeftChart { t } => format!("left_chart at t = {t:.6e}"),
        StopReason::DegenerateMetric { t } => format!("degenerate_metric at t = {t:.6e}"),
        StopReason::EventBudgetExhausted { t } => format!("event_budget_exhausted at t = {t:.6e}"),
        StopReason::StepUnderflow { t } => format!("step_underflow at t = {t:.6e}"),
        StopReason::StepBudgetExhausted { t } => format!("step_budget_exhausted at t = {t:.6e}"),
        StopReason::NonFiniteState { t } => format!("non_finite_state at t = {t:.6e}"),
    }
}

/// Largest position-block distance between two trajectories over `n` probe
/// times spanning the overlap of their integrated ranges.
fn max_position_deviation(a: &Trajectory, b: &Trajectory, n: usize) -> f64 {
    let t0 = a.tspan.0.max(b.tspan.0);
    let t1 = a.t_end().min(b.t_end());
    let mut worst = 0.0_f64;
    for i in 0..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        if let (Some(za), Some(zb)) = (a.state_at(t), b.state_at(t)) {
            let d = za
                .x
                .iter()
                .zip(&zb.x)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn compare(args: &CompareArgs) -> Result<(), Failure> {
    let run = args.source.resolve()?;
    for (name, value) in [("--eps", args.eps), ("--step", args.step)] {
        if let Some(v) = value {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Failure::Validation(format!(
                    "{name}: must be positive and finite, got {v}"
                )));
            }
        }
    }
    let step = args.step.or(run.config.solver.step).unwrap_or(1e-3);
    let epsilon = args.eps.or(run.config.solver.epsilon).unwrap_or(1e-3);

    let model = run.entry.model();
    let tspan = (run.config.tspan[0], run.config.tspan[1]);
    let filippov =
        integrate_filippov(&model, &run.z0, tspan, &run.cfg).map_err(|e| Failure::Solver(e.to_string()))?;
    let sys = GeodesicSwitched::new(&model);
    let cara = integrate_caratheodory_system(&sys, &run.z0, tspan, step, run.cfg.tie_break)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    let reg = integrate_regularized(&run.entry, epsilon, &run.z0, tspan, &run.cfg)
        .map_err(|e| Failure::Solver(e.to_string()))?;

    const PROBES: usize = 200;
    let max_dev_exact = if run.entry.has_oracle() {
        let mut worst = 0.0_f64;
        for i in 0..=PROBES {
            let t = tspan.0 + (filippov.t_end() - tspan.0) * i as f64 / PROBES as f64;
            let exact = run
                .entry
                .oracle_state(&run.z0, t)
                .map_err(|e| Failure::Solver(e.to_string()))?;
            if let Some(z) = filippov.state_at(t) {
                let d = z
                    .x
                    .iter()
                    .zip(&exact.x)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d);
            }
        }
        Some(worst)
    } else {
        None
    };

    let mut stops = BTreeMap::new();
    stops.insert("filippov", stop_label(&filippov.stop));
    stops.insert("caratheodory", stop_label(&cara.stop));
    stops.insert("regularized", stop_label(&reg.stop));

    let report = CompareReport {
        format_version: FORMAT_VERSION,
        command: "compare",
        config: &run.config,
        step,
        epsilon,
        n_probes: PROBES + 1,
        max_dev_caratheodory: max_position_deviation(&cara, &filippov, PROBES),
        max_dev_regularized: max_position_deviation(&reg, &filippov, PROBES),
        max_dev_exact,
        stops,
    };
    emit(&report, args.out.as_deref())
}

fn emit<T: Serialize>(report: &T, out: Option<&std::path::Path>) -> Result<(), Failure> {
    let bytes = formats::report_json(report)?;
    match out {
        Some(path) => formats::write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: RunSource,

    /// Number of random initial conditions.
    #[arg(long, default_value_t = 100)]
    pub count: usize,

    /// Worker threads; runs are deterministic regardless of this value.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    /// Summary CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

struct SweepRow {
    x0: Vec<f64>,
    v0: Vec<f64>,
    outcome: Result<Trajectory, geofil::Error>,
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    if args.count == 0 {
        return Err(Failure::Validation("--count must be positive".into()));
    }
    if args.jobs == 0 {
        return Err(Failure::Validation("--jobs must be positive".into()));
    }
    let run = args.source.resolve()?;
    let model = run.entry.model();
    let d = run.entry.dim();
    let (lo, hi) = run.entry.reference_box();
    let tspan = (run.config.tspan[0], run.config.tspan[1]);

    // All starts are drawn up front from the config seed, so the sweep is
    // one deterministic sequence no matter how it is scheduled.
    let mut rng = ChaCha8Rng::seed_from_u64(run.config.seed);
    let starts: Vec<(Vec<f64>, Vec<f64>)> = (0..args.count)
        .map(|_| {
            let x: Vec<f64> =
                (0..d).map(|i| uniform_in(&mut rng, lo[i], hi[i])).collect();
            let v: Vec<f64> = (0..d).map(|_| uniform_in(&mut rng, -1.0, 1.0)).collect();
            (x, v)
        })
        .collect();

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new((0..args.count).map(|_| None).collect());
    let workers = args.jobs.min(args.count);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= args.count {
                    break;
                }
                let (x, v) = &starts[i];
                let z0 = GeodesicState::new(x.clone(), v.clone());
                let outcome = integrate_filippov(&model, &z0, tspan, &run.cfg);
                let row = SweepRow { x0: x.clone(), v0: v.clone(), outcome };
                rows.lock().expect("sweep worker panicked")[i] = Some(row);
            });
        }
    });

    let mut columns = vec!["run".to_string()];
    columns.extend((1..=d).map(|i| format!("x0_{i}")));
    columns.extend((1..=d).map(|i| format!("v0_{i}")));
    for c in ["stop", "t_end", "n_events", "max_velocity_jump", "energy_drift"] {
        columns.push(c.to_string());
    }

    let rows = rows.into_inner().expect("sweep worker panicked");
    let mut table: Vec<Vec<String>> = Vec::with_capacity(args.count);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row.expect("every index is claimed by a worker");
        let mut cells = Vec::with_capacity(2 * d + 6);
        cells.push(i.to_string());
        cells.extend(row.x0.iter().map(|&c| formats::fmt17(c)));
        cells.extend(row.v0.iter().map(|&c| formats::fmt17(c)));
        match &row.outcome {
            Ok(traj) => {
                let jump = diagnostics::velocity_jump(traj).max_velocity_jump;
                let drift = diagnostics::energy_drift(traj, &model).unwrap_or(f64::NAN);
                cells.push(stop_label(&traj.stop));
                cells.push(formats::fmt17(traj.t_end()));
                cells.push(traj.events.len().to_string());
                cells.push(formats::fmt17(jump));
                cells.push(formats::fmt17(drift));
            }
            Err(e) => {
                cells.push(format!("error: {e}"));
                cells.push(formats::fmt17(f64::NAN));
                cells.push("0".to_string());
                cells.push(formats::fmt17(f64::NAN));
                cells.push(formats::fmt17(f64::NAN));
            }
        }
        table.push(cells);
    }

    let bytes = formats::table_csv(&columns, &table, &run.config)?;
    formats::write_atomic(&args.out, &bytes)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or one catalog entry name.
    #[arg(long, default_value = "all")]
    pub suite: String,

    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyReport {
    format_version: u32,
    command: &'static str,
    suite: String,
    passed: bool,
    n_checks: usize,
    n_failed: usize,
    entries: Vec<diagnostics::SuiteReport>,
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let entries = if args.suite == "all" {
        geofil::catalog::default_entries()
    } else {
        vec![geofil::catalog::CatalogEntry::by_name(&args.suite, &BTreeMap::new())
            .map_err(|e| Failure::Validation(e.to_string()))?]
    };
    let reports: Vec<diagnostics::SuiteReport> =
        entries.iter().map(diagnostics::verify_entry).collect();
    let n_checks = reports.iter().map(|r| r.checks.len()).sum();
    let n_failed = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| !c.passed)
        .count();
    let report = VerifyReport {
        format_version: FORMAT_VERSION,
        command: "verify",
        suite: args.suite.clone(),
        passed: n_failed == 0,
        n_checks,
        n_failed,
        entries: reports,
    };
    emit(&report, args.out.as_deref())?;
    if n_failed > 0 {
        return Err(Failure::Verify { failed: n_failed });
    }
    Ok(())
}
