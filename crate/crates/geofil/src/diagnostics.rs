//! The verification battery: quantitative checks that integrated trajectories
//! behave the way Filippov geodesics of a Lipschitz metric must.
//!
//! Each check answers one question with a number and a threshold:
//!
//! * [`velocity_jump`] — is the curve C^1? Velocity jumps across logged events
//!   should sit at the integration-error floor.
//! * [`holder_fit`] — how regular is the velocity near a crossing? For a
//!   Lipschitz (`alpha = 1`) metric the increment `|v(t* + d) - v(t*)|` scales
//!   like `d^1`.
//! * [`inclusion_residual`] — does the curve satisfy its differential
//!   inclusion pointwise, with the admissible set being the Filippov segment
//!   inside a surface band and the single field value elsewhere?
//! * [`energy_drift`] — is `g(v, v)` conserved? It must be, kinks included.
//! * [`regularization_convergence`] — do geodesics of mollified metrics
//!   approach the nonsmooth run as the mollification width shrinks?
//! * [`uniqueness_funnel`] — do perturbed initial conditions stay together
//!   (uniqueness in practice) or tear apart (a repulsive surface)?
//! * [`shortest_curve_oracle`] / [`shoot_between`] — two solver-free and
//!   solver-based routes to the same two-point geodesic, whose lengths must
//!   agree.
//!
//! [`verify_entry`] bundles the lot into a pass/fail report per catalog entry.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::catalog::CatalogEntry;
use crate::filippov::{ConvexSet, Side, SURFACE_TOL};
use crate::geometry::{GeodesicState, MetricModel};
use crate::linalg;
use crate::rng;
use crate::solver::{
    integrate_filippov, integrate_regularized, integrate_switched, GeodesicSwitched,
    IntegratorConfig, SwitchedSystem, Trajectory,
};
use crate::{Error, Result};

/// Velocity jumps above this flag a C^1 violation.
pub const JUMP_TOL: f64 = 1e-6;

/// Inclusion residuals above this flag a curve that does not solve its
/// inclusion.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Energy drift above this flags a conservation failure.
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;

/// Spread amplification beyond which a funnel is reported as splitting.
pub const SPLITTING_RATIO: f64 = 1e3;

/// Scale of the time step used to difference dense output:
/// `h = FD_TIME_SCALE * (1 + |t|)`.
const FD_TIME_SCALE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// C^1 verification
// ---------------------------------------------------------------------------

/// Velocity continuity across the events of one trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct C1Report {
    /// Largest velocity jump over all events; zero when there are none.
    pub max_velocity_jump: f64,
    /// `(t, |v(t^+) - v(t^-)|)` per event, in time order.
    pub per_event_jumps: Vec<(f64, f64)>,
    /// Optional velocity-regularity fit near one event; see [`holder_fit`].
    pub holder: Option<HolderFit>,
}

/// Measure `|v(t^+) - v(t^-)|` at every logged event of a trajectory.
///
/// One-sided limits come from the dense interpolants on either side of the
/// event when both exist; events pinned to the ends of the span fall back to
/// the states stored in the event record. Filippov geodesics of a Lipschitz
/// metric are C^1, so every jump should sit at the integration-error floor;
/// genuine corners (as the demo fields produce in their derivatives) surface
/// here immediately.
pub fn velocity_jump(traj: &Trajectory) -> C1Report {
    let cd = traj.coord_dim;
    let mut per_event_jumps = Vec::with_capacity(traj.events.len());
    for ev in &traj.events {
        let before = traj.dense.eval_before(ev.t);
        let after = traj.dense.eval_after(ev.t);
        let jump = match (before, after) {
            (Some(b), Some(a)) if b.len() > cd => linalg::dist(&b[cd..], &a[cd..]),
            // No two-sided interpolant (event at a span end, or a first-order
            // field with no velocity block): use the logged restart states.
            _ => linalg::dist(&ev.state_before.v, &ev.state_after.v),
        };
        per_event_jumps.push((ev.t, jump));
    }
    let max_velocity_jump = per_event_jumps.iter().fold(0.0_f64, |m, &(_, j)| m.max(j));
    C1Report { max_velocity_jump, per_event_jumps, holder: None }
}

/// Power-law fit of the velocity increment near one event.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HolderFit {
    /// Assumed Hölder class of the metric coefficients, in (0, 1].
    pub alpha_assumed: f64,
    /// Exponent the scaling heuristic predicts: `alpha / (2 - alpha)`.
    pub beta_predicted: f64,
    /// Fitted exponent of `|v(t* + s d) - v(t*)| ~ d^beta`.
    pub beta_fit: f64,
    pub fit_window: (f64, f64),
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fit the scaling exponent of the velocity increment near event
/// `event_index`: a least-squares regression of `log |v(t* + s d) - v(t*)|`
/// on `log d`, pooled over both sides `s = ±1`, with offsets `d` log-spaced
/// across two decades below `half_width`.
///
/// `alpha_assumed` is the Hölder class of the metric itself; it only sets the
/// predicted exponent `alpha / (2 - alpha)` and does not enter the fit. For a
/// Lipschitz metric both exponents are 1: the velocity has a bounded, jumping
/// derivative at the crossing, so its increments are linear in `d` on each
/// side.
///
/// The window `[t* - half_width, t* + half_width]` must lie inside the
/// integrated span and contain no other event, and the usable sample count
/// must reach 20; violations return [`Error::BadWindow`].
pub fn holder_fit(
    traj: &Trajectory,
    event_index: usize,
    alpha_assumed: f64,
    half_width: f64,
) -> Result<HolderFit> {
    if !(alpha_assumed > 0.0 && alpha_assumed <= 1.0) {
        return Err(Error::BadParameter {
            name: "alpha_assumed".to_string(),
            reason: format!("must lie in (0, 1], got {alpha_assumed}"),
        });
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::BadWindow(format!(
            "half_width must be positive and finite, got {half_width}"
        )));
    }
    let n_events = traj.events.len();
    let ev = traj
        .events
        .get(event_index)
        .ok_or_else(|| Error::BadWindow(format!("event index {event_index} out of range ({n_events} events)")))?;
    let cd = traj.coord_dim;
    if traj.dim() == cd {
        return Err(Error::BadWindow("trajectory carries no velocity block".to_string()));
    }
    let t_star = ev.t;
    let window = (t_star - half_width, t_star + half_width);
    if window.0 < traj.dense.t_start() || window.1 > traj.dense.t_end() {
        return Err(Error::BadWindow(format!(
            "window [{:.6e}, {:.6e}] leaves the integrated span [{:.6e}, {:.6e}]",
            window.0,
            window.1,
            traj.dense.t_start(),
            traj.dense.t_end()
        )));
    }
    for (i, other) in traj.events.iter().enumerate() {
        if i != event_index && (other.t - t_star).abs() <= half_width {
            return Err(Error::BadWindow(format!("window contains another event at t = {:.6e}", other.t)));
        }
    }

    // The velocity at the event itself: average of the one-sided limits
    // (which agree to solver accuracy for a C^1 curve).
    let v_star: Vec<f64> = match (traj.dense.eval_before(t_star), traj.dense.eval_after(t_star)) {
        (Some(b), Some(a)) => b[cd..].iter().zip(&a[cd..]).map(|(x, y)| 0.5 * (x + y)).collect(),
        (Some(b), None) => b[cd..].to_vec(),
        (None, Some(a)) => a[cd..].to_vec(),
        (None, None) => return Err(Error::BadWindow("event time outside dense output".to_string())),
    };

    // Deviations at the rounding floor carry no exponent information; a side
    // on which the velocity is exactly constant (say, the flat region ahead
    // of a wave front) contributes nothing, and the fit falls back to the
    // other side alone.
    const PER_SIDE: usize = 24;
    const DECADES: f64 = 2.0;
    let floor = 1e-12 * (1.0 + linalg::norm(&v_star));
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * PER_SIDE);
    for side in [-1.0, 1.0] {
        for j in 0..PER_SIDE {
            let frac = j as f64 / (PER_SIDE - 1) as f64;
            let d = half_width * 10.0_f64.powf(-DECADES * (1.0 - frac));
            let t = t_star + side * d;
            let y = if side < 0.0 { traj.dense.eval_before(t) } else { traj.dense.eval_after(t) };
            let Some(y) = y else { continue };
            let dv = linalg::dist(&y[cd..], &v_star);
            if dv > floor {
                pts.push((d.ln(), dv.ln()));
            }
        }
    }
    if pts.len() < 20 {
        return Err(Error::BadWindow(format!("only {} usable fit points (need 20)", pts.len())));
    }
    let (beta_fit, r_squared) = linear_fit(&pts);
    Ok(HolderFit {
        alpha_assumed,
        beta_predicted: alpha_assumed / (2.0 - alpha_assumed),
        beta_fit,
        fit_window: window,
        r_squared,
        n_points: pts.len(),
    })
}

/// Least-squares slope and coefficient of determination of `y` against `x`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

// ---------------------------------------------------------------------------
// Inclusion residual
// ---------------------------------------------------------------------------

/// Pointwise inclusion-residual statistics over random probe times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualReport {
    /// Largest distance from the differenced derivative to the admissible set.
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Probe times actually evaluated.
    pub n_samples: usize,
    /// Draws discarded for sitting too close to an event or a span end.
    pub n_rejected: usize,
}

/// Check that a geodesic trajectory solves its differential inclusion
/// pointwise. See [`inclusion_residual_system`].
pub fn inclusion_residual(
    traj: &Trajectory,
    model: &MetricModel,
    n_samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    let sys = GeodesicSwitched::new(model);
    inclusion_residual_system(traj, &sys, n_samples, seed)
}

/// Check that a trajectory solves its differential inclusion pointwise.
///
/// At `n_samples` seeded-random times, the derivative of the dense output is
/// formed by a central difference with step `1e-6 (1 + |t|)` and compared with
/// the admissible set at the interpolated state: away from every switching
/// surface that set is the single pointwise field value, inside a surface band
/// it is the segment joining the two one-sided values. Draws closer than ten
/// difference steps to an event are redrawn (and counted in `n_rejected`) so
/// the stencil never straddles a derivative corner.
pub fn inclusion_residual_system(
    traj: &Trajectory,
    sys: &dyn SwitchedSystem,
    n_samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be positive".to_string()));
    }
    let (t0, t1) = (traj.dense.t_start(), traj.dense.t_end());
    if !(t1 > t0) {
        return Err(Error::BadWindow("trajectory spans no time".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_surf = sys.n_surfaces();
    let mut max_residual = 0.0_f64;
    let mut sum = 0.0_f64;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let budget = 64 * n_samples + 1024;
    let mut draws = 0usize;
    while accepted < n_samples && draws < budget {
        draws += 1;
        let t = rng::uniform_in(&mut rng, t0, t1);
        let h = FD_TIME_SCALE * (1.0 + t.abs());
        if t - 2.0 * h <= t0 || t + 2.0 * h >= t1 {
            rejected += 1;
            continue;
        }
        if traj.events.iter().any(|ev| (t - ev.t).abs() <= 10.0 * h) {
            rejected += 1;
            continue;
        }
        let (Some(z), Some(zp), Some(zm)) =
            (traj.dense.eval(t), traj.dense.eval(t + h), traj.dense.eval(t - h))
        else {
            rejected += 1;
            continue;
        };
        let zdot: Vec<f64> = zp.iter().zip(&zm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        let mut band: Option<usize> = None;
        let mut sides: Vec<Side> = Vec::with_capacity(n_surf);
        for k in 0..n_surf {
            let s = sys.sigma(k, &z);
            if s.abs() <= SURFACE_TOL {
                band = Some(k);
            }
            sides.push(Side::of(s));
        }
        let residual = match band {
            None => {
                let f = sys.rhs(&z, &sides)?;
                linalg::dist(&zdot, &f)
            }
            Some(k) => {
                let mut lo = sides.clone();
                lo[k] = Side::Minus;
                let mut hi = sides;
                hi[k] = Side::Plus;
                let fm = sys.rhs(&z, &lo)?;
                let fp = sys.rhs(&z, &hi)?;
                ConvexSet::from_points(&[fm, fp])?.distance(&zdot)
            }
        };
        max_residual = max_residual.max(residual);
        sum += residual;
        accepted += 1;
    }
    if accepted == 0 {
        return Err(Error::BadWindow("no admissible probe times away from events".to_string()));
    }
    Ok(ResidualReport {
        max_residual,
        mean_residual: sum / accepted as f64,
        n_samples: accepted,
        n_rejected: rejected,
    })
}

// ---------------------------------------------------------------------------
// Energy conservation
// ---------------------------------------------------------------------------

/// Largest deviation of the kinetic energy `g(v, v)` from its initial value
/// over the accepted-step samples of a trajectory.
///
/// The geodesic flow conserves `g(v, v)` exactly, including across metric
/// kinks — the energy is continuous even where the Christoffel symbols jump —
/// so any drift is pure integration error.
pub fn energy_drift(traj: &Trajectory, model: &MetricModel) -> Result<f64> {
    let cd = traj.coord_dim;
    if traj.dim() != 2 * cd || model.dim() != cd {
        return Err(Error::DimensionMismatch { expected: 2 * model.dim(), got: traj.dim() });
    }
    let mut e0 = None;
    let mut worst = 0.0_f64;
    for s in &traj.samples {
        let (x, v) = s.y.split_at(cd);
        let e = model.metric(x)?.inner(v, v);
        match e0 {
            None => e0 = Some(e),
            Some(first) => worst = worst.max((e - first).abs()),
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Mollification convergence
// ---------------------------------------------------------------------------

/// How fast mollified-metric geodesics approach the nonsmooth reference run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    /// Max position deviation from the reference run, one per epsilon.
    pub deviations: Vec<f64>,
    /// Least-squares slope of `log deviation` against `log epsilon`; infinite
    /// when every deviation sits at the floor (a smooth entry).
    pub fitted_order: f64,
    pub final_deviation: f64,
    pub strictly_decreasing: bool,
}

/// Integrate a catalog entry once with the event-driven solver and once per
/// mollification width, and measure the approach of the smoothed runs to the
/// nonsmooth one.
///
/// `epsilons` must be strictly decreasing and positive. Deviations are the
/// max position distance over 201 uniform probe times; every run must
/// complete the span or the comparison is refused.
pub fn regularization_convergence(
    entry: &CatalogEntry,
    z0: &GeodesicState,
    tspan: (f64, f64),
    epsilons: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    if epsilons.is_empty() {
        return Err(Error::InvalidConfig("need at least one epsilon".to_string()));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidConfig("epsilons must be positive and finite".to_string()));
    }
    for w in epsilons.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidConfig("epsilons must be strictly decreasing".to_string()));
        }
    }
    let model = entry.model();
    let cd = model.dim();
    let reference = integrate_filippov(&model, z0, tspan, cfg)?;
    if !reference.completed() {
        return Err(Error::BadWindow(format!("reference run stopped early: {:?}", reference.stop)));
    }
    const PROBES: usize = 201;
    let mut deviations = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let smooth = integrate_regularized(entry, eps, z0, tspan, cfg)?;
        if !smooth.completed() {
            return Err(Error::BadWindow(format!(
                "mollified run (epsilon = {eps:.3e}) stopped early: {:?}",
                smooth.stop
            )));
        }
        let mut dev = 0.0_f64;
        for i in 0..PROBES {
            let t = tspan.0 + (tspan.1 - tspan.0) * i as f64 / (PROBES - 1) as f64;
            let (Some(a), Some(b)) = (reference.dense.eval(t), smooth.dense.eval(t)) else {
                continue;
            };
            dev = dev.max(linalg::dist(&a[..cd], &b[..cd]));
        }
        deviations.push(dev);
    }
    let floor = 1e-12;
    let fitted_order = if deviations.iter().all(|d| *d <= floor) {
        f64::INFINITY
    } else {
        let pts: Vec<(f64, f64)> =
            epsilons.iter().zip(&deviations).map(|(e, d)| (e.ln(), d.max(floor).ln())).collect();
        linear_fit(&pts).0
    };
    let strictly_decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        final_deviation: *deviations.last().expect("nonempty by validation"),
        deviations,
        fitted_order,
        strictly_decreasing,
    })
}

// ---------------------------------------------------------------------------
// Uniqueness funnel
// ---------------------------------------------------------------------------

/// Qualitative outcome of a funnel experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum UniquenessFlag {
    /// Final spread strictly below the initial spread: perturbations die out.
    Contracting,
    /// Spread stays within a moderate factor of the initial spread.
    Bounded,
    /// Spread amplified past [`SPLITTING_RATIO`]: solutions through nearby
    /// points genuinely separate, as at a repulsive surface where the
    /// inclusion is non-unique.
    Splitting,
}

/// Spread of a bundle of trajectories started in a ball around one state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FunnelReport {
    pub initial_radius: f64,
    /// Max pairwise distance at the initial time (at most twice the radius).
    pub initial_spread: f64,
    /// `(t, max pairwise state distance)` at uniform report times.
    pub spread_over_time: Vec<(f64, f64)>,
    /// Largest spread amplification over the span.
    pub max_ratio: f64,
    pub uniqueness_flag: UniquenessFlag,
}

/// Funnel experiment for the geodesic flow of a metric model.
/// See [`uniqueness_funnel_system`].
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_funnel(
    model: &MetricModel,
    z0: &GeodesicState,
    radius: f64,
    n_curves: usize,
    tspan: (f64, f64),
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<FunnelReport> {
    let sys = GeodesicSwitched::new(model);
    uniqueness_funnel_system(&sys, z0, radius, n_curves, tspan, seed, cfg)
}

/// Integrate `n_curves` trajectories started uniformly in the ball of the
/// given radius around `z0` and track the max pairwise distance at uniform
/// report times.
///
/// A run that stops early (chart exit, budget) contributes its final state
/// frozen in place, keeping the spread curve total. The flag is
/// [`UniquenessFlag::Splitting`] when the spread amplifies past
/// [`SPLITTING_RATIO`], [`UniquenessFlag::Contracting`] when the final spread
/// drops below the initial one, and [`UniquenessFlag::Bounded`] otherwise.
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_funnel_system(
    sys: &dyn SwitchedSystem,
    z0: &GeodesicState,
    radius: f64,
    n_curves: usize,
    tspan: (f64, f64),
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<FunnelReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "funnel radius must be positive and finite, got {radius}"
        )));
    }
    if n_curves < 2 {
        return Err(Error::InvalidConfig("need at least two funnel curves".to_string()));
    }
    let center = z0.flat();
    if center.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: center.len() });
    }
    let cd = sys.coord_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundle: Vec<Trajectory> = Vec::with_capacity(n_curves);
    for _ in 0..n_curves {
        let start = rng::sample_ball(&mut rng, &center, radius);
        let z = GeodesicState::from_flat(&start, cd);
        bundle.push(integrate_switched(sys, &z, tspan, cfg)?);
    }
    const REPORT: usize = 33;
    let mut spread_over_time = Vec::with_capacity(REPORT);
    let mut initial_spread = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    for i in 0..REPORT {
        let t = tspan.0 + (tspan.1 - tspan.0) * i as f64 / (REPORT - 1) as f64;
        let states: Vec<Vec<f64>> = bundle
            .iter()
            .map(|tr| {
                tr.dense
                    .eval(t)
                    .or_else(|| tr.samples.last().map(|s| s.y.clone()))
                    .unwrap_or_else(|| center.clone())
            })
            .collect();
        let mut spread = 0.0_f64;
        for a in 0..states.len() {
            for b in a + 1..states.len() {
                spread = spread.max(linalg::dist(&states[a], &states[b]));
            }
        }
        if i == 0 {
            initial_spread = spread;
        }
        max_ratio = max_ratio.max(spread / initial_spread.max(f64::MIN_POSITIVE));
        spread_over_time.push((t, spread));
    }
    let final_spread = spread_over_time.last().expect("REPORT > 0").1;
    let uniqueness_flag = if max_ratio > SPLITTING_RATIO {
        UniquenessFlag::Splitting
    } else if final_spread <= 0.99 * initial_spread {
        UniquenessFlag::Contracting
    } else {
        UniquenessFlag::Bounded
    };
    Ok(FunnelReport { initial_radius: radius, initial_spread, spread_over_time, max_ratio, uniqueness_flag })
}

// ---------------------------------------------------------------------------
// Variational cross-check: discrete energy descent
// ---------------------------------------------------------------------------

/// A polygonal curve between fixed endpoints after energy minimization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CurveReport {
    /// Node positions, endpoints included.
    pub nodes: Vec<Vec<f64>>,
    /// Trapezoid-rule length of the polyline in the metric.
    pub length: f64,
    /// Final discrete Dirichlet energy.
    pub energy: f64,
    pub iterations: usize,
    /// Whether the gradient norm reached the tolerance (as opposed to the
    /// descent stalling at the arithmetic floor).
    pub converged: bool,
    pub grad_norm: f64,
}

const GD_MAX_ITERS: usize = 20_000;
// Below ~1e-7 the Armijo decrease drowns in the rounding floor of the energy
// sum; 1e-6 keeps the induced length error near 1e-8 (the excess is quadratic
// in the gradient), far under what the comparisons here resolve.
const GD_GRAD_TOL: f64 = 1e-6;

/// Shortest curve between `p` and `q` for a Riemannian catalog entry, found
/// by minimizing the discrete Dirichlet energy of an `n_nodes`-point
/// polygonal curve — a route to two-point geodesics that never touches the
/// ODE solver.
///
/// The energy is `sum_i g(m_i)(d_i, d_i) / (2h)` with `d_i` the node
/// differences and `m_i` the segment midpoints. Its exact gradient (metric
/// derivatives enter through the midpoint terms) is driven down by
/// Barzilai-Borwein steps under an Armijo backtracking guard, starting from
/// the straight segment. Energy minimizers are constant-speed geodesics, so
/// the resulting polyline length can be compared against integrated runs.
pub fn shortest_curve_oracle(
    entry: &CatalogEntry,
    p: &[f64],
    q: &[f64],
    n_nodes: usize,
) -> Result<CurveReport> {
    if !entry.is_riemannian() {
        return Err(Error::NotRiemannian { entry: entry.name().to_string() });
    }
    minimize_curve(&entry.model(), p, q, n_nodes)
}

fn minimize_curve(model: &MetricModel, p: &[f64], q: &[f64], n_nodes: usize) -> Result<CurveReport> {
    let d = model.dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    if q.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.len() });
    }
    model.chart().check(p)?;
    model.chart().check(q)?;
    if n_nodes < 3 {
        return Err(Error::InvalidConfig("need at least three curve nodes".to_string()));
    }
    let h = 1.0 / (n_nodes - 1) as f64;
    let mut nodes: Vec<Vec<f64>> = (0..n_nodes)
        .map(|i| {
            let s = i as f64 * h;
            p.iter().zip(q).map(|(a, b)| a + s * (b - a)).collect()
        })
        .collect();
    let mut energy = curve_energy(model, &nodes, h)?;
    let mut grad = curve_gradient(model, &nodes, h)?;
    let mut gnorm = grad_inf(&grad);
    let mut step = h;
    let mut prev: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    let mut iterations = 0usize;
    while gnorm >= GD_GRAD_TOL && iterations < GD_MAX_ITERS {
        iterations += 1;
        // Barzilai-Borwein trial step from the previous move; fall back to
        // the last accepted step when the curvature estimate is unusable.
        if let Some((px, pg)) = &prev {
            let mut sts = 0.0;
            let mut sty = 0.0;
            for ((row, prow), (grow, pgrow)) in nodes.iter().zip(px).zip(grad.iter().zip(pg)) {
                for ((x, xp), (g, gp)) in row.iter().zip(prow).zip(grow.iter().zip(pgrow)) {
                    let s = x - xp;
                    sts += s * s;
                    sty += s * (g - gp);
                }
            }
            if sty > 1e-300 {
                let bb = sts / sty;
                if bb.is_finite() && bb > 0.0 {
                    step = bb;
                }
            }
        }
        let gsq: f64 = grad.iter().flatten().map(|g| g * g).sum();
        let mut s = step;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<Vec<f64>> = nodes
                .iter()
                .zip(&grad)
                .map(|(row, grow)| row.iter().zip(grow).map(|(x, g)| x - s * g).collect())
                .collect();
            // A trial that wanders off the chart shows up as an energy error
            // and is treated like an insufficient decrease: halve and retry.
            match curve_energy(model, &trial, h) {
                Ok(et) if et <= energy - 1e-4 * s * gsq => {
                    let gt = curve_gradient(model, &trial, h)?;
                    prev = Some((
                        core::mem::replace(&mut nodes, trial),
                        core::mem::replace(&mut grad, gt),
                    ));
                    energy = et;
                    step = s;
                    accepted = true;
                    break;
                }
                _ => s *= 0.5,
            }
        }
        if !accepted {
            break; // stalled at the arithmetic floor
        }
        gnorm = grad_inf(&grad);
    }
    let length = polyline_length(model, &nodes, h)?;
    Ok(CurveReport { nodes, length, energy, iterations, converged: gnorm < GD_GRAD_TOL, grad_norm: gnorm })
}

fn curve_energy(model: &MetricModel, nodes: &[Vec<f64>], h: f64) -> Result<f64> {
    let mut e = 0.0;
    for w in nodes.windows(2) {
        let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
        let diff: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
        e += model.metric(&mid)?.inner(&diff, &diff);
    }
    Ok(e / (2.0 * h))
}

/// Exact gradient of [`curve_energy`] in the interior nodes:
/// `grad_j = (2 (g d)_{j-1} - 2 (g d)_j + D_{j-1}/2 + D_j/2) / (2h)` with
/// `(g d)_i` the metric-weighted difference and `D_i[a] = d_a g_bc d^b d^c`
/// the derivative quadratic form, both at the segment midpoint.
fn curve_gradient(model: &MetricModel, nodes: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
    let n = nodes.len();
    let d = model.dim();
    let mut gd: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut dq: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for w in nodes.windows(2) {
        let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
        let diff: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
        let g = model.metric(&mid)?;
        let mut gdi = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                gdi[i] += g.get(i, j) * diff[j];
            }
        }
        let scale = FD_TIME_SCALE * (1.0 + mid.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        let parts = model.metric_partials_unguarded(&mid, scale)?;
        let mut dqi = vec![0.0; d];
        for (a, pa) in parts.iter().enumerate() {
            let mut s = 0.0;
            for b in 0..d {
                for c in 0..d {
                    s += pa[b * d + c] * diff[b] * diff[c];
                }
            }
            dqi[a] = s;
        }
        gd.push(gdi);
        dq.push(dqi);
    }
    let mut grad = vec![vec![0.0; d]; n];
    for j in 1..n - 1 {
        for a in 0..d {
            grad[j][a] =
                (2.0 * (gd[j - 1][a] - gd[j][a]) + 0.5 * (dq[j - 1][a] + dq[j][a])) / (2.0 * h);
        }
    }
    Ok(grad)
}

fn grad_inf(grad: &[Vec<f64>]) -> f64 {
    grad.iter().flatten().fold(0.0_f64, |m, g| m.max(g.abs()))
}

/// Trapezoid-rule length of a polygonal curve in the metric, with node
/// velocities from central (one-sided at the ends) differences.
fn polyline_length(model: &MetricModel, nodes: &[Vec<f64>], h: f64) -> Result<f64> {
    let n = nodes.len();
    let mut total = 0.0;
    for i in 0..n {
        let v: Vec<f64> = if i == 0 {
            nodes[1].iter().zip(&nodes[0]).map(|(a, b)| (a - b) / h).collect()
        } else if i == n - 1 {
            nodes[n - 1].iter().zip(&nodes[n - 2]).map(|(a, b)| (a - b) / h).collect()
        } else {
            nodes[i + 1].iter().zip(&nodes[i - 1]).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        let speed = model.metric(&nodes[i])?.inner(&v, &v).max(0.0).sqrt();
        let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += weight * speed;
    }
    Ok(total * h)
}

// ---------------------------------------------------------------------------
// Two-point geodesics by shooting
// ---------------------------------------------------------------------------

/// A two-point geodesic found by angle shooting.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShootReport {
    /// Launch angle of the initial velocity in the chart plane.
    pub angle: f64,
    /// Arclength from source to closest approach; for the converged shot this
    /// is the geodesic distance, since launches are at unit metric speed.
    pub length: f64,
    /// Distance between the target and the curve at closest approach.
    pub endpoint_miss: f64,
    /// The winning geodesic, over its full integration horizon.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub trajectory: Trajectory,
}

/// Two-point geodesic between `p` and `q` by shooting, for two-dimensional
/// models with a positive-definite metric.
///
/// Unit-metric-speed geodesics are launched from `p`; each shot is scored by
/// its signed lateral miss at the point of closest approach to `q` (positive
/// when the target lies to the left of the heading). A fan of launch angles
/// around the straight-line direction brackets a sign change, bisection
/// refines it, and the result is accepted when the miss distance falls below
/// `1e-6`; otherwise an error reports the stall.
pub fn shoot_between(
    model: &MetricModel,
    p: &[f64],
    q: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ShootReport> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    model.chart().check(p)?;
    model.chart().check(q)?;
    if linalg::dist(p, q) < 1e-12 {
        return Err(Error::InvalidConfig("shooting endpoints coincide".to_string()));
    }
    // Horizon: a unit-speed geodesic needs exactly its arclength, and the
    // minimizer is no longer than the straight polyline between the points.
    let straight: Vec<Vec<f64>> = (0..33)
        .map(|i| {
            let s = i as f64 / 32.0;
            p.iter().zip(q).map(|(a, b)| a + s * (b - a)).collect()
        })
        .collect();
    let horizon = 1.6 * polyline_length(model, &straight, 1.0 / 32.0)? + 0.5;

    let launch = |theta: f64| -> Result<GeodesicState> {
        let dir = [theta.cos(), theta.sin()];
        let speed_sq = model.metric(p)?.inner(&dir, &dir);
        if !(speed_sq > 0.0) {
            return Err(Error::InvalidConfig(
                "metric is not positive along the launch direction".to_string(),
            ));
        }
        let s = 1.0 / speed_sq.sqrt();
        Ok(GeodesicState::new(p.to_vec(), vec![s * dir[0], s * dir[1]]))
    };
    // Signed lateral miss, miss distance, closest-approach parameter.
    let miss_of = |theta: f64| -> Result<(f64, f64, f64, Trajectory)> {
        let traj = integrate_filippov(model, &launch(theta)?, (0.0, horizon), cfg)?;
        let (t_c, aim) = closest_approach(&traj, q);
        let state = traj
            .state_at(t_c)
            .unwrap_or_else(|| traj.sample_state(traj.samples.len() - 1));
        let signed = state.v[0] * aim[1] - state.v[1] * aim[0];
        Ok((signed, linalg::norm(&aim), t_c, traj))
    };

    let theta0 = (q[1] - p[1]).atan2(q[0] - p[0]);
    const FAN: usize = 17;
    const FAN_HALF: f64 = 0.8;
    let mut fan: Vec<(f64, f64)> = Vec::with_capacity(FAN); // (theta, signed miss)
    let mut best: Option<(f64, f64, f64, Trajectory)> = None; // (theta, miss, t_c, traj)
    for i in 0..FAN {
        let theta = theta0 - FAN_HALF + 2.0 * FAN_HALF * i as f64 / (FAN - 1) as f64;
        let (signed, miss, t_c, traj) = miss_of(theta)?;
        if best.as_ref().is_none_or(|b| miss < b.1) {
            best = Some((theta, miss, t_c, traj));
        }
        fan.push((theta, signed));
    }
    // Bracket the sign change nearest the best angle (wild shots can flip
    // sign too; the best-scored bracket is the physical one).
    let best_theta = best.as_ref().expect("fan is nonempty").0;
    let mut bracket: Option<(f64, f64, f64)> = None; // (theta_a, signed_a, theta_b)
    for w in fan.windows(2) {
        let ((ta, sa), (tb, _)) = (w[0], w[1]);
        if sa * w[1].1 < 0.0 {
            let score = (0.5 * (ta + tb) - best_theta).abs();
            if bracket.is_none_or(|(ba, _, bb)| (0.5 * (ba + bb) - best_theta).abs() > score) {
                bracket = Some((ta, sa, tb));
            }
        }
    }
    match bracket {
        Some((mut ta, mut sa, mut tb)) => {
            for _ in 0..80 {
                let tm = 0.5 * (ta + tb);
                let (sm, miss, t_c, traj) = miss_of(tm)?;
                if best.as_ref().is_none_or(|b| miss < b.1) {
                    best = Some((tm, miss, t_c, traj));
                }
                if sm == 0.0 || (tb - ta).abs() < 1e-15 {
                    break;
                }
                if sm * sa > 0.0 {
                    ta = tm;
                    sa = sm;
                } else {
                    tb = tm;
                }
            }
        }
        None => {
            // No sign change: only acceptable when a fan shot already hits.
            let miss = best.as_ref().expect("fan is nonempty").1;
            if miss > 1e-6 {
                return Err(Error::InvalidConfig(format!(
                    "shooting could not bracket the target (best miss {miss:.3e})"
                )));
            }
        }
    }
    let (angle, endpoint_miss, length, trajectory) = best.expect("fan is nonempty");
    if endpoint_miss > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "shooting stalled with endpoint miss {endpoint_miss:.3e}"
        )));
    }
    Ok(ShootReport { angle, length, endpoint_miss, trajectory })
}

/// Parameter of closest approach to `q` along a trajectory, and the vector
/// from the curve point to the target there.
fn closest_approach(traj: &Trajectory, q: &[f64]) -> (f64, Vec<f64>) {
    let cd = traj.coord_dim;
    let f = |t: f64| -> f64 {
        match traj.dense.eval(t) {
            Some(y) => linalg::dist(&y[..cd], q),
            None => f64::INFINITY,
        }
    };
    let mut best_i = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, s) in traj.samples.iter().enumerate() {
        let d = linalg::dist(&s.y[..cd], q);
        if d < best_d {
            best_d = d;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { traj.samples[0].t } else { traj.samples[best_i - 1].t };
    let hi = if best_i + 1 < traj.samples.len() {
        traj.samples[best_i + 1].t
    } else {
        traj.samples[best_i].t
    };
    let t_c = golden_scalar(&f, lo, hi);
    let aim = match traj.dense.eval(t_c) {
        Some(y) => y[..cd].iter().zip(q).map(|(a, b)| b - a).collect(),
        None => traj.samples[best_i].y[..cd].iter().zip(q).map(|(a, b)| b - a).collect(),
    };
    (t_c, aim)
}

/// Golden-section minimizer of a scalar function on `[a, b]`.
fn golden_scalar(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if b < a {
        core::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// Random-start robustness
// ---------------------------------------------------------------------------

/// Outcome of integrating a batch of random initial conditions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TotalityReport {
    pub n_runs: usize,
    /// Runs that returned an error instead of a trajectory with a declared
    /// stop; must be zero for a total solver.
    pub n_errors: usize,
    /// Runs that reached the end of the span.
    pub n_completed: usize,
    pub first_error: Option<String>,
}

/// Integrate `n` random starts — positions uniform in the entry's reference
/// box, velocity components uniform in [-1, 1] — and count hard errors.
///
/// Every run must come back `Ok`: leaving the chart, metric degeneracy, and
/// budget exhaustion are declared stops on the trajectory, never errors.
pub fn totality_sample(entry: &CatalogEntry, n: usize, tspan: (f64, f64), seed: u64) -> TotalityReport {
    let model = entry.model();
    let (lo, hi) = entry.reference_box();
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = IntegratorConfig { rel_tol: 1e-8, abs_tol: 1e-10, ..IntegratorConfig::default() };
    let mut n_errors = 0usize;
    let mut n_completed = 0usize;
    let mut first_error = None;
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|i| rng::uniform_in(&mut rng, lo[i], hi[i])).collect();
        let v: Vec<f64> = (0..d).map(|_| rng::uniform_in(&mut rng, -1.0, 1.0)).collect();
        match integrate_filippov(&model, &GeodesicState::new(x, v), tspan, &cfg) {
            Ok(traj) => {
                if traj.completed() {
                    n_completed += 1;
                }
            }
            Err(e) => {
                n_errors += 1;
                if first_error.is_none() {
                    first_error = Some(format!("{e}"));
                }
            }
        }
    }
    TotalityReport { n_runs: n, n_errors, n_completed, first_error }
}

/// Sampled Lipschitz quotient of the metric coefficients over a box:
/// `max_ij |g_ij(x) - g_ij(y)| / |x - y|` maximized over seeded-random pairs.
/// Compared against a model's declared bound, this catches coefficient bugs
/// that leave individual evaluations plausible.
pub fn lipschitz_quotient(
    model: &MetricModel,
    lo: &[f64],
    hi: &[f64],
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let d = model.dim();
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: lo.len().min(hi.len()) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup = 0.0_f64;
    for _ in 0..n_pairs {
        let x: Vec<f64> = (0..d).map(|i| rng::uniform_in(&mut rng, lo[i], hi[i])).collect();
        let y: Vec<f64> = (0..d).map(|i| rng::uniform_in(&mut rng, lo[i], hi[i])).collect();
        let sep = linalg::dist(&x, &y);
        if sep < 1e-12 {
            continue;
        }
        let gx = model.metric(&x)?;
        let gy = model.metric(&y)?;
        let mut diff = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                diff = diff.max((gx.get(i, j) - gy.get(i, j)).abs());
            }
        }
        sup = sup.max(diff / sep);
    }
    Ok(sup)
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

/// One named check with its measured value and verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// The number the check compared; NaN when the check errored out.
    pub measured: f64,
    /// The bound it was compared against; NaN when not applicable.
    pub threshold: f64,
    pub detail: String,
}

/// All checks for one catalog entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SuiteReport {
    pub entry: String,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn outcome(name: &str, measured: f64, threshold: f64, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name: name.to_string(), passed, measured, threshold, detail }
}

fn errored(name: &str, err: &Error) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed: false,
        measured: f64::NAN,
        threshold: f64::NAN,
        detail: format!("error: {err}"),
    }
}

/// Run the verification battery on one catalog entry.
///
/// The core checks — a completed reference run, oracle agreement, velocity
/// continuity, inclusion residual, energy drift, mollification convergence,
/// sampled Lipschitz bound, signature stability, and random-start totality —
/// run on every entry they apply to; the variational comparison runs on the
/// conformal entry and the funnel on the kink entry, where they are sharp.
pub fn verify_entry(entry: &CatalogEntry) -> SuiteReport {
    let model = entry.model();
    let cfg = IntegratorConfig::default();
    let z0 = entry.reference_state();
    let tspan = entry.reference_tspan();
    let mut checks: Vec<CheckOutcome> = Vec::new();

    let reference = integrate_filippov(&model, &z0, tspan, &cfg);
    match &reference {
        Ok(traj) => checks.push(outcome(
            "reference_run",
            if traj.completed() { 1.0 } else { 0.0 },
            1.0,
            traj.completed(),
            format!("stop: {:?}, {} event(s)", traj.stop, traj.events.len()),
        )),
        Err(e) => checks.push(errored("reference_run", e)),
    }

    if let Ok(traj) = &reference {
        if entry.has_oracle() {
            let mut worst = 0.0_f64;
            let mut err: Option<Error> = None;
            for i in 1..=16 {
                let t = tspan.0 + (tspan.1 - tspan.0) * i as f64 / 16.0;
                match (entry.oracle_state(&z0, t), traj.state_at(t)) {
                    (Ok(exact), Some(got)) => worst = worst.max(linalg::dist(&exact.x, &got.x)),
                    (Err(e), _) => {
                        err = Some(e);
                        break;
                    }
                    (_, None) => {}
                }
            }
            checks.push(match err {
                None => outcome("oracle_agreement", worst, JUMP_TOL, worst < JUMP_TOL, String::new()),
                Some(e) => errored("oracle_agreement", &e),
            });
        }

        let c1 = velocity_jump(traj);
        checks.push(outcome(
            "velocity_jumps",
            c1.max_velocity_jump,
            JUMP_TOL,
            c1.max_velocity_jump < JUMP_TOL,
            format!("{} event(s)", c1.per_event_jumps.len()),
        ));

        // The residual probes differentiate the dense interpolant, whose
        // derivative error scales like h^4 times the solution's fifth
        // derivative — near a chart edge (the impulsive-wave entry at
        // u -> 0.9) that sits around 1e-5 for default tolerances. Measure
        // the inclusion property on a run resolved well below the threshold.
        let tight = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..cfg.clone() };
        checks.push(
            match integrate_filippov(&model, &z0, tspan, &tight)
                .and_then(|t| inclusion_residual(&t, &model, 1000, 0x1f2e_3d4c))
            {
                Ok(r) => outcome(
                    "inclusion_residual",
                    r.max_residual,
                    RESIDUAL_TOL,
                    r.max_residual < RESIDUAL_TOL,
                    format!("{} probe(s)", r.n_samples),
                ),
                Err(e) => errored("inclusion_residual", &e),
            },
        );

        checks.push(match energy_drift(traj, &model) {
            Ok(d) => outcome("energy_drift", d, ENERGY_DRIFT_TOL, d < ENERGY_DRIFT_TOL, String::new()),
            Err(e) => errored("energy_drift", &e),
        });
    }

    checks.push(
        match regularization_convergence(entry, &z0, tspan, &[1e-1, 1e-2, 1e-3], &cfg) {
            Ok(rep) => {
                if model.surfaces().is_empty() {
                    // Mollification is the identity on a smooth metric.
                    outcome(
                        "regularization",
                        rep.final_deviation,
                        1e-10,
                        rep.final_deviation <= 1e-10,
                        "smooth entry: mollified runs must match the reference".to_string(),
                    )
                } else if entry.has_oracle() {
                    let passed =
                        rep.strictly_decreasing && rep.fitted_order >= 0.8 && rep.final_deviation < 1e-3;
                    outcome(
                        "regularization",
                        rep.fitted_order,
                        0.8,
                        passed,
                        format!(
                            "deviations {:?}, final {:.3e}, decreasing: {}",
                            rep.deviations, rep.final_deviation, rep.strictly_decreasing
                        ),
                    )
                } else {
                    outcome(
                        "regularization",
                        rep.fitted_order,
                        f64::NAN,
                        rep.strictly_decreasing,
                        format!("monotone approach only; deviations {:?}", rep.deviations),
                    )
                }
            }
            Err(e) => errored("regularization", &e),
        },
    );

    if !model.surfaces().is_empty() {
        // A run guaranteed to log a transversal crossing away from the span
        // ends; the entry starting on its surface gets a shifted start.
        let (hz0, hspan) = if entry.name() == "rosen" {
            (GeodesicState::new(vec![-0.45, 0.0, 0.1, 0.2], vec![1.0, 0.2, 0.4, 0.3]), (0.0, 0.9))
        } else {
            (z0.clone(), (0.0, 2.0))
        };
        let hw = 0.05;
        checks.push(match integrate_filippov(&model, &hz0, hspan, &cfg) {
            Ok(ht) if !ht.events.is_empty() => match holder_fit(&ht, 0, 1.0, hw) {
                Ok(fit) => {
                    let passed =
                        fit.beta_fit >= 0.9 && fit.beta_fit <= 1.1 && fit.r_squared > 0.99;
                    outcome(
                        "holder_beta",
                        fit.beta_fit,
                        1.0,
                        passed,
                        format!("r^2 = {:.6}, n = {}", fit.r_squared, fit.n_points),
                    )
                }
                Err(e) => errored("holder_beta", &e),
            },
            Ok(_) => outcome("holder_beta", f64::NAN, 1.0, false, "probe run logged no event".to_string()),
            Err(e) => errored("holder_beta", &e),
        });
    }

    let (lo, hi) = entry.reference_box();
    checks.push(match lipschitz_quotient(&model, &lo, &hi, 10_000, 0xb0b) {
        Ok(q) => match model.lipschitz_bound() {
            Some(bound) => outcome("lipschitz_quotient", q, bound, q <= bound, String::new()),
            None => outcome("lipschitz_quotient", q, f64::NAN, true, "no declared bound".to_string()),
        },
        Err(e) => errored("lipschitz_quotient", &e),
    });

    {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51);
        let mut bad = 0usize;
        let mut detail = String::new();
        for _ in 0..100 {
            let x: Vec<f64> =
                lo.iter().zip(&hi).map(|(a, b)| rng::uniform_in(&mut rng, *a, *b)).collect();
            if let Err(e) = model.metric_checked(&x) {
                bad += 1;
                if detail.is_empty() {
                    detail = format!("first failure: {e}");
                }
            }
        }
        checks.push(outcome("signature", bad as f64, 0.0, bad == 0, detail));
    }

    {
        let rep = totality_sample(entry, 200, (0.0, 0.4), 0x70);
        let detail = match &rep.first_error {
            Some(e) => format!("first error: {e}"),
            None => format!("{} of {} completed", rep.n_completed, rep.n_runs),
        };
        checks.push(outcome("totality", rep.n_errors as f64, 0.0, rep.n_errors == 0, detail));
    }

    if entry.name() == "conformal2d" {
        let pairs: [([f64; 2], [f64; 2]); 2] = [([-1.0, 0.0], [1.0, 0.0]), ([-0.7, -0.4], [0.8, 0.3])];
        let mut worst = 0.0_f64;
        let mut err: Option<Error> = None;
        for (p, q) in &pairs {
            match (shortest_curve_oracle(entry, p, q, 384), shoot_between(&model, p, q, &cfg)) {
                (Ok(curve), Ok(shot)) => worst = worst.max((curve.length - shot.length).abs()),
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    break;
                }
            }
        }
        checks.push(match err {
            None => outcome(
                "variational",
                worst,
                1e-4,
                worst < 1e-4,
                "length: energy descent vs shooting".to_string(),
            ),
            Some(e) => errored("variational", &e),
        });
    }

    if entry.name() == "kink1d" {
        checks.push(match uniqueness_funnel(&model, &z0, 1e-3, 20, tspan, 0xfa, &cfg) {
            Ok(rep) => outcome(
                "funnel",
                rep.max_ratio,
                SPLITTING_RATIO,
                rep.uniqueness_flag != UniquenessFlag::Splitting,
                format!("flag: {:?}", rep.uniqueness_flag),
            ),
            Err(e) => errored("funnel", &e),
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    SuiteReport { entry: entry.name().to_string(), checks, passed }
}

/// [`verify_entry`] over the whole default catalog.
pub fn verify_all() -> Vec<SuiteReport> {
    crate::catalog::default_entries().iter().map(verify_entry).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::filippov::ContactKind;
    use crate::solver::{DenseOutput, DenseSegment, Event, Sample, SolverKind, StopReason};
    use approx::assert_abs_diff_eq;
    use alloc::collections::BTreeMap;

    fn entry(name: &str) -> CatalogEntry {
        CatalogEntry::by_name(name, &BTreeMap::new()).unwrap()
    }

    fn make_jump_trajectory(dv: f64) -> Trajectory {
        // States (x, v): constant v = 1 until t = 1, then v = 1 + dv.
        let seg1 = DenseSegment::linear(0.0, 1.0, vec![0.0, 1.0], vec![1.0, 1.0]);
        let seg2 = DenseSegment::linear(1.0, 2.0, vec![1.0, 1.0 + dv], vec![2.0 + dv, 1.0 + dv]);
        let ev = Event {
            t: 1.0,
            surface: "s".to_string(),
            kind: ContactKind::CrossingUp,
            state_before: GeodesicState::new(vec![1.0], vec![1.0]),
            state_after: GeodesicState::new(vec![1.0], vec![1.0 + dv]),
            velocity_jump: dv,
            flagged: false,
        };
        Trajectory {
            tspan: (0.0, 2.0),
            coord_dim: 1,
            samples: vec![
                Sample { t: 0.0, y: vec![0.0, 1.0] },
                Sample { t: 1.0, y: vec![1.0, 1.0 + dv] },
                Sample { t: 2.0, y: vec![2.0 + dv, 1.0 + dv] },
            ],
            events: vec![ev],
            dense: DenseOutput::from_segments(vec![seg1, seg2], 2, 1),
            stop: StopReason::Completed,
            solver: SolverKind::EventDriven,
        }
    }

    #[test]
    fn injected_velocity_jump_is_reported_exactly() {
        let traj = make_jump_trajectory(0.1);
        let rep = velocity_jump(&traj);
        assert_eq!(rep.per_event_jumps.len(), 1);
        assert_abs_diff_eq!(rep.max_velocity_jump, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.per_event_jumps[0].0, 1.0, epsilon = 0.0);
        assert!(rep.holder.is_none());
    }

    #[test]
    fn kink_crossing_is_c1_to_solver_accuracy() {
        let e = entry("kink1d");
        let traj = integrate_filippov(
            &e.model(),
            &e.reference_state(),
            e.reference_tspan(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(!traj.events.is_empty());
        let rep = velocity_jump(&traj);
        assert!(rep.max_velocity_jump < 1e-8, "jump {}", rep.max_velocity_jump);
    }

    #[test]
    fn holder_exponent_is_one_for_lipschitz_kink() {
        let e = entry("kink1d");
        let traj = integrate_filippov(
            &e.model(),
            &e.reference_state(),
            (0.0, 2.0),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let fit = holder_fit(&traj, 0, 1.0, 0.05).unwrap();
        assert_abs_diff_eq!(fit.beta_predicted, 1.0, epsilon = 0.0);
        assert!((fit.beta_fit - 1.0).abs() < 0.05, "beta {}", fit.beta_fit);
        assert!(fit.r_squared > 0.995, "r^2 {}", fit.r_squared);
        assert!(fit.n_points >= 20);
    }

    #[test]
    fn holder_fit_rejects_bad_windows_and_parameters() {
        let e = entry("kink1d");
        let traj = integrate_filippov(
            &e.model(),
            &e.reference_state(),
            (0.0, 2.0),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(matches!(holder_fit(&traj, 5, 1.0, 0.05), Err(Error::BadWindow(_))));
        assert!(matches!(holder_fit(&traj, 0, 1.0, 1.0), Err(Error::BadWindow(_))));
        assert!(matches!(holder_fit(&traj, 0, 0.0, 0.05), Err(Error::BadParameter { .. })));
        assert!(matches!(holder_fit(&traj, 0, 1.5, 0.05), Err(Error::BadParameter { .. })));
    }

    #[test]
    fn inclusion_residual_is_small_on_kink_reference() {
        let e = entry("kink1d");
        let model = e.model();
        let traj = integrate_filippov(
            &model,
            &e.reference_state(),
            e.reference_tspan(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let rep = inclusion_residual(&traj, &model, 400, 7).unwrap();
        assert_eq!(rep.n_samples, 400);
        assert!(rep.max_residual < RESIDUAL_TOL, "residual {}", rep.max_residual);
    }

    #[test]
    fn inclusion_residual_accepts_the_sliding_demo() {
        let sys = demo::sliding_demo();
        let traj =
            integrate_switched(&sys, &demo::sliding_start(), (0.0, 3.0), &IntegratorConfig::default())
                .unwrap();
        let rep = inclusion_residual_system(&traj, &sys, 300, 11).unwrap();
        assert!(rep.max_residual < RESIDUAL_TOL, "residual {}", rep.max_residual);
    }

    #[test]
    fn energy_is_conserved_across_the_kink() {
        let e = entry("kink1d");
        let model = e.model();
        let traj = integrate_filippov(
            &model,
            &e.reference_state(),
            e.reference_tspan(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let drift = energy_drift(&traj, &model).unwrap();
        assert!(drift < 1e-9, "drift {drift}");
    }

    #[test]
    fn mollified_runs_approach_the_kink_run_at_first_order() {
        let e = entry("kink1d");
        let rep = regularization_convergence(
            &e,
            &e.reference_state(),
            e.reference_tspan(),
            &[1e-1, 1e-2, 1e-3],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.strictly_decreasing, "deviations {:?}", rep.deviations);
        assert!(rep.fitted_order >= 0.8, "order {}", rep.fitted_order);
        assert!(rep.final_deviation < 1e-3, "final {}", rep.final_deviation);
    }

    #[test]
    fn mollification_is_the_identity_on_the_smooth_entry() {
        let e = entry("flat");
        let rep = regularization_convergence(
            &e,
            &e.reference_state(),
            e.reference_tspan(),
            &[1e-1, 1e-2],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.deviations.iter().all(|d| *d <= 1e-12), "deviations {:?}", rep.deviations);
        assert!(rep.fitted_order.is_infinite());
    }

    #[test]
    fn rejects_unsorted_epsilon_ladders() {
        let e = entry("kink1d");
        let r = regularization_convergence(
            &e,
            &e.reference_state(),
            e.reference_tspan(),
            &[1e-2, 1e-1],
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn funnel_through_the_kink_stays_together() {
        let e = entry("kink1d");
        let rep = uniqueness_funnel(
            &e.model(),
            &e.reference_state(),
            1e-3,
            16,
            (0.0, 2.0),
            13,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(rep.initial_spread <= 2.0 * rep.initial_radius + 1e-15);
        assert_ne!(rep.uniqueness_flag, UniquenessFlag::Splitting);
        assert!(rep.max_ratio < 50.0, "ratio {}", rep.max_ratio);
        assert_eq!(rep.spread_over_time.len(), 33);
    }

    #[test]
    fn funnel_splits_at_the_repulsive_surface() {
        let sys = demo::repulsive_demo();
        let rep = uniqueness_funnel_system(
            &sys,
            &GeodesicState::new(vec![0.0, 0.0], vec![]),
            1e-6,
            16,
            (0.0, 2.0),
            29,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.uniqueness_flag, UniquenessFlag::Splitting);
        assert!(rep.max_ratio > SPLITTING_RATIO);
    }

    #[test]
    fn curve_gradient_matches_finite_differences() {
        let model = entry("conformal2d").model();
        let n_nodes = 8;
        let h = 1.0 / (n_nodes - 1) as f64;
        let p = [-0.8, -0.3];
        let q = [0.7, 0.4];
        let nodes: Vec<Vec<f64>> = (0..n_nodes)
            .map(|i| {
                let s = i as f64 * h;
                // Bend the test curve so no gradient component vanishes.
                vec![p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]) + 0.2 * s * (1.0 - s)]
            })
            .collect();
        let grad = curve_gradient(&model, &nodes, h).unwrap();
        let delta = 1e-6;
        for j in 1..n_nodes - 1 {
            for a in 0..2 {
                let mut plus = nodes.clone();
                plus[j][a] += delta;
                let mut minus = nodes.clone();
                minus[j][a] -= delta;
                let fd = (curve_energy(&model, &plus, h).unwrap()
                    - curve_energy(&model, &minus, h).unwrap())
                    / (2.0 * delta);
                assert_abs_diff_eq!(grad[j][a], fd, epsilon = 1e-5 * (1.0 + fd.abs()));
            }
        }
        // Endpoints are pinned.
        assert_eq!(grad[0], vec![0.0, 0.0]);
        assert_eq!(grad[n_nodes - 1], vec![0.0, 0.0]);
    }

    #[test]
    fn straight_conformal_curve_matches_the_closed_form_length() {
        // Along y = 0 the metric is e^{2|x|} (dx^2 + dy^2), so the geodesic
        // from (-1, 0) to (1, 0) runs straight with length 2 (e - 1).
        let rep = shortest_curve_oracle(&entry("conformal2d"), &[-1.0, 0.0], &[1.0, 0.0], 512).unwrap();
        assert!(rep.converged, "gradient stalled at {}", rep.grad_norm);
        let exact = 3.436_563_656_918_090_6_f64;
        assert!((rep.length - exact).abs() < 1e-4, "length {} vs {}", rep.length, exact);
        // The minimizer stays on the symmetry axis.
        let max_y = rep.nodes.iter().map(|n| n[1].abs()).fold(0.0_f64, f64::max);
        assert!(max_y < 1e-12, "curve bowed to |y| = {max_y}");
    }

    #[test]
    fn variational_oracle_requires_a_riemannian_entry() {
        let e = entry("rosen");
        let r = shortest_curve_oracle(&e, &[0.0; 4], &[0.5, 0.0, 0.1, 0.1], 16);
        assert!(matches!(r, Err(Error::NotRiemannian { .. })));
    }

    #[test]
    fn shooting_reaches_a_target_across_the_kink_line() {
        let e = entry("conformal2d");
        let rep =
            shoot_between(&e.model(), &[-1.0, 0.0], &[1.0, 0.0], &IntegratorConfig::default()).unwrap();
        assert!(rep.endpoint_miss <= 1e-6, "miss {}", rep.endpoint_miss);
        let exact = 3.436_563_656_918_090_6_f64;
        assert!((rep.length - exact).abs() < 1e-6, "length {} vs {}", rep.length, exact);
        assert!(rep.angle.abs() < 1e-6, "angle {}", rep.angle);
    }

    #[test]
    fn shooting_agrees_with_energy_descent_off_axis() {
        let e = entry("conformal2d");
        let p = [-0.7, -0.4];
        let q = [0.8, 0.3];
        let shot = shoot_between(&e.model(), &p, &q, &IntegratorConfig::default()).unwrap();
        let curve = shortest_curve_oracle(&e, &p, &q, 384).unwrap();
        assert!(
            (shot.length - curve.length).abs() < 1e-4,
            "shoot {} vs descent {}",
            shot.length,
            curve.length
        );
    }

    #[test]
    fn totality_sample_is_clean_on_flat() {
        let rep = totality_sample(&entry("flat"), 100, (0.0, 0.4), 3);
        assert_eq!(rep.n_errors, 0);
        assert_eq!(rep.n_completed, 100);
        assert!(rep.first_error.is_none());
    }

    #[test]
    fn sampled_lipschitz_quotient_respects_the_declared_bound() {
        let e = entry("kink1d");
        let model = e.model();
        let (lo, hi) = e.reference_box();
        let q = lipschitz_quotient(&model, &lo, &hi, 10_000, 17).unwrap();
        let bound = model.lipschitz_bound().unwrap();
        assert!(q <= bound, "quotient {q} above declared bound {bound}");
        assert!(q > 10.0, "quotient {q} suspiciously small for e^{{2|x|}} on [-2, 2]");
    }

    #[test]
    fn verify_entry_passes_on_flat() {
        let rep = verify_entry(&entry("flat"));
        assert!(rep.passed, "failed checks: {:?}", rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }
}
