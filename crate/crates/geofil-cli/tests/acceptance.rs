//! End-to-end acceptance gate: twelve numbered criteria, one test and one
//! printed pass/fail line each. Tolerances are pinned here on purpose —
//! loosening one is a contract change, not a tweak.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use geofil::catalog::{default_entries, CatalogEntry};
use geofil::diagnostics::{
    energy_drift, holder_fit, inclusion_residual, regularization_convergence,
    shoot_between, shortest_curve_oracle, totality_sample, velocity_jump,
};
use geofil::filippov::{
    piecewise_hull, sampled_hull, sliding_field, ConvexSet, FilippovConfig, SwitchingSurface,
};
use geofil::geometry::GeodesicState;
use geofil::solver::{
    integrate_caratheodory, integrate_filippov, integrate_switched, IntegratorConfig,
};

fn criterion(n: usize, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("ACCEPTANCE {n:02} ({name}): PASS — {detail}"),
        Err(msg) => {
            println!("ACCEPTANCE {n:02} ({name}): FAIL — {msg}");
            panic!("acceptance criterion {n} ({name}) failed: {msg}");
        }
    }
}

fn entry(name: &str) -> CatalogEntry {
    CatalogEntry::by_name(name, &BTreeMap::new()).expect("catalog entry")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Least-squares slope of y against x.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------
// 1. Velocity continuity across a fan of crossing starts, with a time budget.
// ---------------------------------------------------------------------------

#[test]
fn c01_crossing_fans_stay_velocity_continuous() {
    criterion(1, "velocity continuity", (|| {
        const JUMP_TOL: f64 = 1e-6;
        const BUDGET_SECS: f64 = 5.0;
        let cfg = IntegratorConfig::default();
        let clock = Instant::now();
        let mut worst = 0.0_f64;
        let mut n_runs = 0usize;

        let fans: Vec<(CatalogEntry, Vec<GeodesicState>, (f64, f64))> = vec![
            (
                entry("kink1d"),
                linspace(0.5, 2.0, 20)
                    .into_iter()
                    .map(|v| GeodesicState::new(vec![-1.0], vec![v]))
                    .collect(),
                (0.0, 2.0),
            ),
            (
                entry("conformal2d"),
                linspace(-0.8, 0.8, 20)
                    .into_iter()
                    .map(|y| GeodesicState::new(vec![-1.0, y], vec![1.0, 0.0]))
                    .collect(),
                (0.0, 2.0),
            ),
            (
                entry("rosen"),
                linspace(-0.3, 0.3, 20)
                    .into_iter()
                    .map(|vy| GeodesicState::new(vec![-0.25, 0.0, 0.0, 0.0], vec![1.0, 0.1, vy, 0.1]))
                    .collect(),
                (0.0, 0.6),
            ),
        ];
        for (e, starts, tspan) in &fans {
            let model = e.model();
            for (i, z0) in starts.iter().enumerate() {
                let traj = integrate_filippov(&model, z0, *tspan, &cfg)
                    .map_err(|err| format!("{} start {i}: {err}", e.name()))?;
                if !traj.completed() {
                    return Err(format!("{} start {i} stopped early: {:?}", e.name(), traj.stop));
                }
                if traj.events.is_empty() {
                    return Err(format!("{} start {i} never reached the surface", e.name()));
                }
                let jump = velocity_jump(&traj).max_velocity_jump;
                if jump >= JUMP_TOL {
                    return Err(format!(
                        "{} start {i}: velocity jump {jump:.3e} >= {JUMP_TOL:.0e}",
                        e.name()
                    ));
                }
                worst = worst.max(jump);
                n_runs += 1;
            }
        }
        let elapsed = clock.elapsed().as_secs_f64();
        if elapsed >= BUDGET_SECS {
            return Err(format!("{n_runs} runs took {elapsed:.2} s >= {BUDGET_SECS} s"));
        }
        Ok(format!("{n_runs} crossing runs, max jump {worst:.3e}, {elapsed:.2} s"))
    })());
}

// ---------------------------------------------------------------------------
// 2. Agreement with the closed forms of the two solvable entries.
// ---------------------------------------------------------------------------

#[test]
fn c02_closed_forms_are_reproduced() {
    criterion(2, "closed-form agreement", (|| {
        const TOL: f64 = 1e-6;
        let cfg = IntegratorConfig::default();

        // Exponential-wall crossing: time 1 - 1/e, coordinate speed e.
        let kink = entry("kink1d");
        let traj = integrate_filippov(
            &kink.model(),
            &GeodesicState::new(vec![-1.0], vec![1.0]),
            (0.0, 2.0),
            &cfg,
        )
        .map_err(|e| e.to_string())?;
        let ev = traj.events.first().ok_or("kink1d run has no crossing event")?;
        let t_star = 1.0 - (-1.0_f64).exp();
        if (ev.t - t_star).abs() >= TOL {
            return Err(format!("crossing time {:.9} vs {t_star:.9}", ev.t));
        }
        let speed = ev.state_after.v[0].abs();
        if (speed - core::f64::consts::E).abs() >= TOL {
            return Err(format!("crossing speed {speed:.9} vs e"));
        }

        // Impulsive wave, expanding polarization: X(u) = X(0) + p u / (1 + u).
        let rosen = entry("rosen");
        let z0 = rosen.reference_state();
        let p = z0.v[2];
        let traj = integrate_filippov(&rosen.model(), &z0, (0.0, 0.9), &cfg)
            .map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for u in linspace(0.0, 0.9, 201) {
            let z = traj.state_at(u).ok_or("dense output gap")?;
            let exact = z0.x[2] + p * u / (1.0 + u);
            worst = worst.max((z.x[2] - exact).abs());
        }
        if worst >= TOL {
            return Err(format!("wave polarization deviates by {worst:.3e}"));
        }
        Ok(format!(
            "crossing time/speed within {TOL:.0e}, wave profile within {worst:.3e}"
        ))
    })());
}

// ---------------------------------------------------------------------------
// 3. The essential hull: segment for a sign field, singleton for a spike,
//    shrinking diameter for continuous fields.
// ---------------------------------------------------------------------------

#[test]
fn c03_essential_hulls_match_the_field_class() {
    criterion(3, "essential hull construction", (|| {
        let fcfg = FilippovConfig::default();
        let delta_min = *fcfg.delta_ladder.last().unwrap();

        // Sign field: undefined exactly at the origin, hull is [-1, 1].
        let sign_field = |x: &[f64]| -> Option<Vec<f64>> {
            if x[0] == 0.0 {
                None
            } else {
                Some(vec![x[0].signum()])
            }
        };
        let hull = sampled_hull(&sign_field, &[0.0], &fcfg).map_err(|e| e.to_string())?;
        let verts = hull.hull().vertices();
        let (lo, hi) = match verts.as_slice() {
            [a, b] => (a[0].min(b[0]), a[0].max(b[0])),
            _ => return Err(format!("sign-field hull has {} vertices, want 2", verts.len())),
        };
        if (lo + 1.0).abs() > 5e-2 || (hi - 1.0).abs() > 5e-2 {
            return Err(format!("sampled endpoints [{lo:.3}, {hi:.3}] off [-1, 1]"));
        }

        // The exact two-sided rule at the surface point.
        let surf = SwitchingSurface::coordinate("wall", 0, 1);
        let exact = piecewise_hull(&surf, &[0.0], &[-1.0], &[1.0], 1e-9);
        let want = ConvexSet::Segment { a: vec![-1.0], b: vec![1.0] };
        let gap = exact.hausdorff(&want);
        if gap > 1e-12 {
            return Err(format!("piecewise rule off by {gap:.3e}"));
        }

        // A measure-zero spike must leave no trace.
        let spike = |x: &[f64]| -> Option<Vec<f64>> {
            Some(vec![if x[0] == 0.0 { 100.0 } else { 1.0 }])
        };
        let hull = sampled_hull(&spike, &[0.0], &fcfg).map_err(|e| e.to_string())?;
        match hull.hull() {
            ConvexSet::Singleton(v) if (v[0] - 1.0).abs() <= 1e-12 => {}
            other => return Err(format!("spike hull is {other:?}, want the singleton {{1}}")),
        }

        // Continuous fields: diameter bounded by the Lipschitz constant times
        // the sampling-ball diameter (two draws sit up to 2 delta apart).
        for (name, l, x0, f) in [
            ("sine", 1.0, 0.3, (|x: &[f64]| Some(vec![x[0].sin()])) as fn(&[f64]) -> Option<Vec<f64>>),
            ("linear", 0.7, -0.2, |x: &[f64]| Some(vec![0.7 * x[0]])),
        ] {
            let boxed: &dyn Fn(&[f64]) -> Option<Vec<f64>> = &f;
            let hull = sampled_hull(boxed, &[x0], &fcfg).map_err(|e| e.to_string())?;
            let diam = hull.hull().diameter();
            let bound = 2.0 * l * delta_min + 1e-6;
            if diam > bound {
                return Err(format!("{name} field diameter {diam:.3e} > {bound:.3e}"));
            }
        }
        Ok(format!(
            "segment endpoints at [{lo:.4}, {hi:.4}], exact rule gap {gap:.1e}, spike collapsed"
        ))
    })());
}

// ---------------------------------------------------------------------------
// 4. Trajectories solve their differential inclusion pointwise.
// ---------------------------------------------------------------------------

#[test]
fn c04_inclusion_residuals_stay_small() {
    criterion(4, "inclusion residual", (|| {
        const TOL: f64 = 1e-6;
        // The probes differentiate the dense interpolant; resolve well below
        // the threshold so its h^4 derivative error cannot dominate.
        let cfg = IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..IntegratorConfig::default()
        };
        let mut detail = Vec::new();
        for e in default_entries() {
            let model = e.model();
            let traj = integrate_filippov(&model, &e.reference_state(), e.reference_tspan(), &cfg)
                .map_err(|err| format!("{}: {err}", e.name()))?;
            let rep = inclusion_residual(&traj, &model, 1000, 0x1f2e_3d4c)
                .map_err(|err| format!("{}: {err}", e.name()))?;
            if rep.n_samples != 1000 {
                return Err(format!("{}: only {} probe times", e.name(), rep.n_samples));
            }
            if rep.max_residual >= TOL {
                return Err(format!(
                    "{}: residual {:.3e} >= {TOL:.0e}",
                    e.name(),
                    rep.max_residual
                ));
            }
            detail.push(format!("{} {:.1e}", e.name(), rep.max_residual));
        }
        Ok(format!("1000 probes each: {}", detail.join(", ")))
    })());
}

// ---------------------------------------------------------------------------
// 5. Totality: random starts either integrate or stop with a declared reason.
// ---------------------------------------------------------------------------

#[test]
fn c05_random_starts_never_fail_silently() {
    criterion(5, "solver totality", (|| {
        let mut completed = Vec::new();
        for e in default_entries() {
            let rep = totality_sample(&e, 1000, (0.0, 0.4), 0xace5);
            if rep.n_errors != 0 {
                return Err(format!(
                    "{}: {} of {} starts errored; first: {}",
                    e.name(),
                    rep.n_errors,
                    rep.n_runs,
                    rep.first_error.as_deref().unwrap_or("?")
                ));
            }
            completed.push(format!("{} {}/{}", e.name(), rep.n_completed, rep.n_runs));
        }
        Ok(format!("zero errors; completed: {}", completed.join(", ")))
    })());
}

// ---------------------------------------------------------------------------
// 6. Mollified runs converge to the nonsmooth solution as epsilon shrinks.
// ---------------------------------------------------------------------------

#[test]
fn c06_mollified_runs_converge() {
    criterion(6, "mollification convergence", (|| {
        let cfg = IntegratorConfig::default();
        let ladder = [1e-1, 1e-2, 1e-3];
        let mut detail = Vec::new();
        for name in ["kink1d", "rosen"] {
            let e = entry(name);
            let rep = regularization_convergence(
                &e,
                &e.reference_state(),
                e.reference_tspan(),
                &ladder,
                &cfg,
            )
            .map_err(|err| format!("{name}: {err}"))?;
            if !rep.strictly_decreasing {
                return Err(format!("{name}: deviations {:?} not strictly decreasing", rep.deviations));
            }
            if rep.fitted_order < 0.8 {
                return Err(format!("{name}: fitted order {:.3} < 0.8", rep.fitted_order));
            }
            if rep.final_deviation >= 1e-3 {
                return Err(format!(
                    "{name}: final deviation {:.3e} >= 1e-3",
                    rep.final_deviation
                ));
            }
            detail.push(format!(
                "{name} order {:.2}, final {:.1e}",
                rep.fitted_order, rep.final_deviation
            ));
        }
        Ok(detail.join("; "))
    })());
}

// ---------------------------------------------------------------------------
// 7. Fixed-step integration converges to the event-driven solution at order 1.
// ---------------------------------------------------------------------------

#[test]
fn c07_fixed_step_runs_converge_at_first_order() {
    criterion(7, "fixed-step consistency", (|| {
        let e = entry("kink1d");
        let model = e.model();
        let z0 = e.reference_state();
        let tspan = (0.0, 1.0);
        let cfg = IntegratorConfig::default();
        let reference =
            integrate_filippov(&model, &z0, tspan, &cfg).map_err(|err| err.to_string())?;

        let steps = [1e-2, 1e-3, 1e-4];
        let mut errs = Vec::new();
        for &h in &steps {
            let traj = integrate_caratheodory(&model, &z0, tspan, h)
                .map_err(|err| format!("step {h:.0e}: {err}"))?;
            let mut worst = 0.0_f64;
            for t in linspace(0.2, 1.0, 5) {
                let (a, b) = (
                    traj.state_at(t).ok_or("fixed-step dense gap")?,
                    reference.state_at(t).ok_or("reference dense gap")?,
                );
                let err: f64 = a
                    .x
                    .iter()
                    .chain(&a.v)
                    .zip(b.x.iter().chain(&b.v))
                    .map(|(p, q)| (p - q).abs())
                    .sum();
                worst = worst.max(err);
            }
            errs.push(worst);
        }
        let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let order = fit_slope(&xs, &ys);
        if !(0.8..=1.2).contains(&order) {
            return Err(format!("fitted order {order:.3} outside [0.8, 1.2]; errors {errs:?}"));
        }
        Ok(format!("order {order:.3} over steps 1e-2..1e-4"))
    })());
}

// ---------------------------------------------------------------------------
// 8. Kinetic energy is conserved through transversal crossings.
// ---------------------------------------------------------------------------

#[test]
fn c08_energy_is_conserved_through_crossings() {
    criterion(8, "energy conservation", (|| {
        const TOL: f64 = 1e-8;
        let cfg = IntegratorConfig::default();
        let mut detail = Vec::new();
        for e in default_entries() {
            let model = e.model();
            let traj = integrate_filippov(&model, &e.reference_state(), e.reference_tspan(), &cfg)
                .map_err(|err| format!("{}: {err}", e.name()))?;
            let drift = energy_drift(&traj, &model).map_err(|err| format!("{}: {err}", e.name()))?;
            if drift >= TOL {
                return Err(format!("{}: drift {drift:.3e} >= {TOL:.0e}", e.name()));
            }
            detail.push(format!("{} {:.1e}", e.name(), drift));
        }
        Ok(detail.join(", "))
    })());
}

// ---------------------------------------------------------------------------
// 9. Velocity error scales across events with the predicted exponent.
// ---------------------------------------------------------------------------

#[test]
fn c09_event_scaling_exponent_is_one_for_lipschitz_metrics() {
    criterion(9, "scaling exponent fit", (|| {
        let cfg = IntegratorConfig::default();
        let mut detail = Vec::new();
        // Every catalog metric with a switching surface is Lipschitz in its
        // chart, so the predicted exponent is 1 for all three. The wave entry
        // needs a start that crosses the front away from the span ends.
        for name in ["kink1d", "conformal2d", "rosen"] {
            let e = entry(name);
            let (z0, span) = if name == "rosen" {
                (GeodesicState::new(vec![-0.45, 0.0, 0.1, 0.2], vec![1.0, 0.2, 0.4, 0.3]), (0.0, 0.9))
            } else {
                (e.reference_state(), (0.0, 2.0))
            };
            let traj = integrate_filippov(&e.model(), &z0, span, &cfg)
                .map_err(|err| format!("{name}: {err}"))?;
            if traj.events.is_empty() {
                return Err(format!("{name}: no event to fit around"));
            }
            let fit = holder_fit(&traj, 0, 1.0, 0.05).map_err(|err| format!("{name}: {err}"))?;
            // alpha / (2 - alpha) at alpha = 1 must be exactly 1, no rounding.
            if fit.beta_predicted != 1.0 {
                return Err(format!("{name}: predicted exponent {} != 1", fit.beta_predicted));
            }
            if !(0.9..=1.1).contains(&fit.beta_fit) {
                return Err(format!("{name}: fitted exponent {:.3} outside [0.9, 1.1]", fit.beta_fit));
            }
            if fit.r_squared <= 0.99 {
                return Err(format!("{name}: r^2 = {:.4} <= 0.99", fit.r_squared));
            }
            detail.push(format!("{name} beta {:.3} (r^2 {:.4})", fit.beta_fit, fit.r_squared));
        }
        Ok(detail.join("; "))
    })());
}

// ---------------------------------------------------------------------------
// 10. Shooting geodesics and discrete length minimization agree.
// ---------------------------------------------------------------------------

#[test]
fn c10_geodesic_and_minimizer_lengths_agree() {
    criterion(10, "variational cross-check", (|| {
        const TOL: f64 = 1e-4;
        let e = entry("conformal2d");
        let model = e.model();
        let cfg = IntegratorConfig::default();
        let pairs: [([f64; 2], [f64; 2]); 5] = [
            ([-1.0, 0.0], [1.0, 0.0]),
            ([-0.7, -0.4], [0.8, 0.3]),
            ([-0.5, 0.2], [0.6, -0.3]),
            ([-0.9, 0.5], [0.4, 0.4]),
            ([-0.6, -0.2], [0.9, -0.5]),
        ];
        let mut worst = 0.0_f64;
        for (p, q) in &pairs {
            let curve = shortest_curve_oracle(&e, p, q, 384)
                .map_err(|err| format!("{p:?} -> {q:?}: {err}"))?;
            let shot = shoot_between(&model, p, q, &cfg)
                .map_err(|err| format!("{p:?} -> {q:?}: {err}"))?;
            let gap = (curve.length - shot.length).abs();
            if gap >= TOL {
                return Err(format!(
                    "{p:?} -> {q:?}: lengths {:.8} vs {:.8} differ by {gap:.2e}",
                    curve.length, shot.length
                ));
            }
            worst = worst.max(gap);
        }
        Ok(format!("5 endpoint pairs, worst length gap {worst:.2e}"))
    })());
}

// ---------------------------------------------------------------------------
// 11. The sliding selection: tangential motion along an attracting surface.
// ---------------------------------------------------------------------------

#[test]
fn c11_sliding_follows_the_surface() {
    criterion(11, "sliding selection", (|| {
        let sys = geofil::demo::sliding_demo();
        let cfg = IntegratorConfig::default();
        let traj = integrate_switched(&sys, &geofil::demo::sliding_start(), (0.0, 2.0), &cfg)
            .map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for t in linspace(1.0, 2.0, 21) {
            let z = traj.state_at(t).ok_or("dense output gap")?;
            worst = worst.max(z.x[0].abs()).max((z.x[1] - (t - 1.0)).abs());
        }
        if worst >= 1e-8 {
            return Err(format!("post-contact path off (0, t-1) by {worst:.3e}"));
        }

        // The combined field must be exactly tangential on the surface.
        let surf = SwitchingSurface::coordinate("x1", 0, 2);
        let s = sliding_field(&surf, &[0.0, 0.5], &[1.0, 1.0], &[-1.0, 1.0], 1e-10)
            .map_err(|e| e.to_string())?;
        let normal_rate = s.field[0];
        if normal_rate.abs() > 1e-12 {
            return Err(format!("normal component of the sliding field: {normal_rate:.3e}"));
        }
        Ok(format!(
            "path within {worst:.1e} of (0, t-1); sliding weight {}, normal rate {normal_rate:.1e}",
            s.alpha
        ))
    })());
}

// ---------------------------------------------------------------------------
// 12. Reproducibility: byte-identical reruns and config round-trips.
// ---------------------------------------------------------------------------

#[test]
fn c12_runs_and_configs_are_reproducible() {
    criterion(12, "reproducibility", (|| {
        // Identical invocation twice: identical bytes, trajectory and log.
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let bin = env!("CARGO_BIN_EXE_geofil");
        let mut outputs = Vec::new();
        for tag in ["a", "b"] {
            let out = dir.path().join(format!("{tag}.csv"));
            let status = Command::new(bin)
                .args([
                    "integrate", "--metric", "kink1d", "--param", "c=1", "--x0", "-1", "--v0",
                    "1", "--tspan", "0", "2", "--seed", "42",
                ])
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("integrate exited with {status}"));
            }
            let csv = std::fs::read(&out).map_err(|e| e.to_string())?;
            let log = std::fs::read(out.with_extension("events.json")).map_err(|e| e.to_string())?;
            outputs.push((csv, log));
        }
        if outputs[0] != outputs[1] {
            return Err("identical invocations produced different bytes".to_string());
        }

        // Round-trip: serializing a resolved config and loading it back is
        // the identity, over a thousand randomly drawn valid configs.
        use proptest::prelude::*;
        use proptest::test_runner::{Config as PropConfig, TestError, TestRunner};

        let strategy = (
            prop_oneof![Just("flat"), Just("kink1d"), Just("conformal2d"), Just("rosen")],
            0.25_f64..3.0,
            proptest::collection::vec(-2.0_f64..2.0, 4),
            proptest::collection::vec(-2.0_f64..2.0, 4),
            -1.0_f64..1.0,
            0.1_f64..2.0,
            0_u8..3,
            proptest::option::of(1e-4_f64..1e-2),
            proptest::option::of(1e-4_f64..1e-1),
            any::<u64>(),
        )
            .prop_map(|(metric, c, xs, vs, t0, dt, method, step, epsilon, seed)| {
                use geofil_cli::config::{Method, RunConfig, SolverSpec, StateSpec, Tolerances};
                let dim = match metric {
                    "kink1d" => 1,
                    "rosen" => 4,
                    _ => 2,
                };
                let mut x: Vec<f64> = xs[..dim].to_vec();
                if metric == "rosen" {
                    x[0] = x[0].clamp(-0.5, 0.5);
                }
                let mut params = BTreeMap::new();
                if matches!(metric, "kink1d" | "conformal2d") {
                    params.insert("c".to_string(), c);
                }
                RunConfig {
                    metric: metric.to_string(),
                    params,
                    initial_state: StateSpec { x, v: vs[..dim].to_vec() },
                    tspan: [t0, t0 + dt],
                    solver: SolverSpec {
                        method: match method {
                            0 => Method::Filippov,
                            1 => Method::Caratheodory,
                            _ => Method::Regularized,
                        },
                        step,
                        epsilon,
                    },
                    tolerances: Tolerances::default(),
                    seed,
                }
            });

        let mut runner = TestRunner::new(PropConfig {
            cases: 1000,
            ..PropConfig::default()
        });
        let outcome = runner.run(&strategy, |raw| {
            let resolved = raw
                .validate()
                .map_err(|e| TestCaseError::fail(format!("rejected a valid config: {e}")))?;
            let text = serde_json::to_string(&resolved.config)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let reloaded = geofil_cli::config::RunConfig::from_json(&text)
                .map_err(|e| TestCaseError::fail(format!("round-trip load failed: {e}")))?;
            prop_assert_eq!(&reloaded.config, &resolved.config);
            let again = serde_json::to_string(&reloaded.config)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(again, text);
            Ok(())
        });
        match outcome {
            Ok(()) => {}
            Err(TestError::Fail(reason, value)) => {
                return Err(format!("round-trip failed: {reason}; config {value:?}"))
            }
            Err(TestError::Abort(reason)) => return Err(format!("round-trip aborted: {reason}")),
        }
        Ok("byte-identical rerun; 1000 config round-trips".to_string())
    })());
}
