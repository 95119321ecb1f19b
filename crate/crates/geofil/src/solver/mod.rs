//! Trajectory integration for piecewise-smooth systems.
//!
//! The primary scheme is event-driven: integrate the smooth extension of the
//! active region with an adaptive Dormand-Prince 5(4) pair, watch the
//! switching functions along every accepted step via dense output, and at a
//! detected contact classify it from the one-sided field limits — cross,
//! slide, or continue flagged. Sliding segments integrate the tangential
//! convex combination with a projection back onto the surface after each
//! step. Two deliberately cruder schemes ride along for cross-validation: a
//! fixed-step Euler method on the pointwise field (first-order convergent,
//! chattering near attracting surfaces) and smooth integration of a mollified
//! metric.
//!
//! Terminal outcomes that are properties of the trajectory rather than of the
//! inputs — leaving the chart, reaching a degenerate metric region, exhausting
//! the event budget — are reported as a [`StopReason`] on the returned
//! [`Trajectory`], never as a panic and never silently.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::CatalogEntry;
use crate::filippov::{classify_rates, Contact, ContactKind, Side, SwitchingSurface, GRADIENT_FLOOR};
use crate::geometry::{GeodesicState, MetricModel};
use crate::linalg;
use crate::{Error, Result};

mod dopri5;

/// Hard cap on accepted steps per integration, a safety valve against
/// pathological step collapse.
const MAX_STEPS: usize = 2_000_000;

/// Interior probe nodes per accepted step when scanning for events.
const SCAN_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; infinity disables the bound.
    pub max_step: f64,
    /// Resolution of event times along the dense solution.
    pub event_tol: f64,
    /// Event budget; exceeding it stops the run with a declared reason.
    pub max_events: usize,
    /// Hysteresis on the sliding coefficient: sliding ends when alpha leaves
    /// [0, 1] by more than this.
    pub sliding_exit_tol: f64,
    /// Half-thickness of the on-surface band.
    pub surface_tol: f64,
    /// Normal rates below this are tangential.
    pub tangency_tol: f64,
    /// Continuation side for repulsive contacts (flagged in the event log).
    pub tie_break: Side,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            event_tol: 1e-12,
            max_events: 10_000,
            sliding_exit_tol: 1e-10,
            surface_tol: crate::filippov::SURFACE_TOL,
            tangency_tol: crate::filippov::TANGENCY_TOL,
            tie_break: Side::Plus,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("event_tol", self.event_tol),
            ("sliding_exit_tol", self.sliding_exit_tol),
            ("surface_tol", self.surface_tol),
            ("tangency_tol", self.tangency_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(alloc::format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("max_step must be positive, got {}", self.max_step)));
        }
        if self.max_events == 0 {
            return Err(Error::InvalidConfig("max_events must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "reason", rename_all = "snake_case"))]
pub enum StopReason {
    /// Reached the end of the requested time span.
    Completed,
    /// The trajectory left the chart domain.
    LeftChart { t: f64 },
    /// |det g| fell to the degeneracy floor.
    DegenerateMetric { t: f64 },
    /// More events than the configured budget (Zeno guard).
    EventBudgetExhausted { t: f64 },
    /// The step size collapsed below resolution.
    StepUnderflow { t: f64 },
    /// Safety cap on total steps.
    StepBudgetExhausted { t: f64 },
    /// A state component stopped being finite.
    NonFiniteState { t: f64 },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

/// Which integration scheme produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum SolverKind {
    /// Adaptive smooth integration, no switching logic.
    Smooth,
    /// Event-driven integration across switching surfaces.
    EventDriven,
    /// Fixed-step Euler on the pointwise field.
    PointwiseEuler { step: f64 },
    /// Smooth integration of the mollified metric.
    Mollified { epsilon: f64 },
}

/// A logged surface interaction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub t: f64,
    pub surface: String,
    pub kind: ContactKind,
    pub state_before: GeodesicState,
    pub state_after: GeodesicState,
    /// |v_after - v_before| across the event. Zero for clean transversal
    /// crossings, where continuation reuses the crossing state verbatim.
    pub velocity_jump: f64,
    /// Set on repulsive tie-breaks and tangential touches.
    pub flagged: bool,
}

/// Root or graze of a switching function along a dense solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCandidate {
    pub t: f64,
    /// True when sigma attains a near-zero minimum without changing sign.
    pub grazing: bool,
}

// ---------------------------------------------------------------------------
// Dense output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum SegData {
    Poly([Vec<f64>; 5]),
    Line { y0: Vec<f64>, y1: Vec<f64> },
}

/// One step's interpolant; `t_end` may sit short of `t0 + h` after event
/// truncation, but evaluation always uses the step the coefficients were
/// built on.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub t_end: f64,
    h: f64,
    data: SegData,
}

impl DenseSegment {
    fn poly(t0: f64, h: f64, t_end: f64, cont: [Vec<f64>; 5]) -> Self {
        Self { t0, t_end, h, data: SegData::Poly(cont) }
    }

    /// Straight segment between two states; the interpolant of a synthetic
    /// or fixed-step trajectory.
    pub fn linear(t0: f64, t_end: f64, y0: Vec<f64>, y1: Vec<f64>) -> Self {
        Self { t0, t_end, h: t_end - t0, data: SegData::Line { y0, y1 } }
    }

    fn line(t0: f64, t_end: f64, y0: Vec<f64>, y1: Vec<f64>) -> Self {
        Self::linear(t0, t_end, y0, y1)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        match &self.data {
            SegData::Poly(cont) => dopri5::eval_dense(cont, theta),
            SegData::Line { y0, y1 } => y0.iter().zip(y1).map(|(a, b)| a + theta * (b - a)).collect(),
        }
    }

    fn truncate(&mut self, t: f64) {
        self.t_end = t;
    }
}

/// Piecewise-polynomial interpolant of a whole trajectory.
#[derive(Debug, Clone)]
pub struct DenseOutput {
    segments: Vec<DenseSegment>,
    dim: usize,
    coord_dim: usize,
}

impl DenseOutput {
    /// Assemble dense output from explicit segments, which must be sorted by
    /// start time and contiguous.  Intended for synthetic trajectories built
    /// in tests and diagnostics.
    pub fn from_segments(segments: Vec<DenseSegment>, dim: usize, coord_dim: usize) -> Self {
        Self { segments, dim, coord_dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord_dim(&self) -> usize {
        self.coord_dim
    }

    pub fn segments(&self) -> &[DenseSegment] {
        &self.segments
    }

    pub fn t_start(&self) -> f64 {
        self.segments.first().map_or(f64::NAN, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(f64::NAN, |s| s.t_end)
    }

    fn locate(&self, t: f64, prefer_before: bool) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let slack = 1e-12 * (1.0 + t.abs());
        if t < self.t_start() - slack || t > self.t_end() + slack {
            return None;
        }
        let mut idx = self.segments.partition_point(|s| s.t0 <= t);
        idx = idx.saturating_sub(1);
        if prefer_before && idx > 0 && self.segments[idx].t0 >= t - slack {
            idx -= 1;
        }
        Some(idx)
    }

    /// State at `t`; at an event time this is the right (continuation) limit.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        self.locate(t, false).map(|i| self.segments[i].eval(t))
    }

    /// Left limit at `t` (the segment ending there, when one does).
    pub fn eval_before(&self, t: f64) -> Option<Vec<f64>> {
        self.locate(t, true).map(|i| self.segments[i].eval(t))
    }

    /// Right limit at `t`; alias of [`Self::eval`] spelled for symmetry.
    pub fn eval_after(&self, t: f64) -> Option<Vec<f64>> {
        self.eval(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Result of an integration: accepted-step samples, the event log, dense
/// output, and how the run ended.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tspan: (f64, f64),
    pub coord_dim: usize,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub dense: DenseOutput,
    pub stop: StopReason,
    pub solver: SolverKind,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dense.dim
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(self.tspan.0, |s| s.t)
    }

    pub fn completed(&self) -> bool {
        self.stop.is_completed()
    }

    pub fn state_at(&self, t: f64) -> Option<GeodesicState> {
        self.dense.eval(t).map(|y| GeodesicState::from_flat(&y, self.coord_dim))
    }

    pub fn sample_state(&self, i: usize) -> GeodesicState {
        GeodesicState::from_flat(&self.samples[i].y, self.coord_dim)
    }
}

// ---------------------------------------------------------------------------
// Switched systems
// ---------------------------------------------------------------------------

/// A flow with switching surfaces, seen by the integrator: a sided right-hand
/// side, the switching functions lifted to state space, and a domain check.
pub trait SwitchedSystem {
    /// Full state dimension.
    fn dim(&self) -> usize;
    /// Leading coordinates treated as position; the rest are velocity.
    fn coord_dim(&self) -> usize;
    fn n_surfaces(&self) -> usize;
    fn surface_label(&self, k: usize) -> &str;
    /// Switching function on the full state.
    fn sigma(&self, k: usize, y: &[f64]) -> f64;
    /// Gradient of sigma with respect to the full state.
    fn sigma_gradient(&self, k: usize, y: &[f64]) -> Vec<f64>;
    /// Smooth extension selected by one side per surface.
    fn rhs(&self, y: &[f64], sides: &[Side]) -> Result<Vec<f64>>;
    fn check_domain(&self, y: &[f64]) -> Result<()>;
}

/// The first-order geodesic system `(x, v) -> (v, a)` of a metric model.
///
/// Switching functions act on the position block; their gradients are lifted
/// with zero velocity components, so `grad sigma . zdot = grad_x sigma . v`.
pub struct GeodesicSwitched<'a> {
    model: &'a MetricModel,
}

impl<'a> GeodesicSwitched<'a> {
    pub fn new(model: &'a MetricModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &MetricModel {
        self.model
    }
}

impl SwitchedSystem for GeodesicSwitched<'_> {
    fn dim(&self) -> usize {
        2 * self.model.dim()
    }

    fn coord_dim(&self) -> usize {
        self.model.dim()
    }

    fn n_surfaces(&self) -> usize {
        self.model.surfaces().len()
    }

    fn surface_label(&self, k: usize) -> &str {
        self.model.surfaces()[k].label()
    }

    fn sigma(&self, k: usize, y: &[f64]) -> f64 {
        self.model.surfaces()[k].sigma(&y[..self.model.dim()])
    }

    fn sigma_gradient(&self, k: usize, y: &[f64]) -> Vec<f64> {
        let n = self.model.dim();
        let mut g = self.model.surfaces()[k].gradient(&y[..n]);
        g.resize(2 * n, 0.0);
        g
    }

    fn rhs(&self, y: &[f64], sides: &[Side]) -> Result<Vec<f64>> {
        self.model.geodesic_rhs_sided(y, sides)
    }

    fn check_domain(&self, y: &[f64]) -> Result<()> {
        self.model.chart().check(&y[..self.model.dim()])
    }
}

/// A hand-written piecewise field on coordinates alone (no velocity block);
/// the demo fields use this.
pub struct PiecewiseField {
    dim: usize,
    surfaces: Vec<SwitchingSurface>,
    field: alloc::boxed::Box<dyn Fn(&[f64], &[Side]) -> Vec<f64> + Send + Sync>,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl PiecewiseField {
    pub fn new(
        dim: usize,
        surfaces: Vec<SwitchingSurface>,
        field: impl Fn(&[f64], &[Side]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, surfaces, field: alloc::boxed::Box::new(field), bounds: None }
    }

    pub fn with_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.bounds = Some((lower, upper));
        self
    }

    pub fn value(&self, x: &[f64], sides: &[Side]) -> Vec<f64> {
        (self.field)(x, sides)
    }

    pub fn surfaces(&self) -> &[SwitchingSurface] {
        &self.surfaces
    }
}

impl SwitchedSystem for PiecewiseField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn coord_dim(&self) -> usize {
        self.dim
    }

    fn n_surfaces(&self) -> usize {
        self.surfaces.len()
    }

    fn surface_label(&self, k: usize) -> &str {
        self.surfaces[k].label()
    }

    fn sigma(&self, k: usize, y: &[f64]) -> f64 {
        self.surfaces[k].sigma(y)
    }

    fn sigma_gradient(&self, k: usize, y: &[f64]) -> Vec<f64> {
        self.surfaces[k].gradient(y)
    }

    fn rhs(&self, y: &[f64], sides: &[Side]) -> Result<Vec<f64>> {
        Ok((self.field)(y, sides))
    }

    fn check_domain(&self, y: &[f64]) -> Result<()> {
        if let Some((lo, hi)) = &self.bounds {
            for (i, v) in y.iter().enumerate() {
                if *v < lo[i] || *v > hi[i] {
                    return Err(Error::OutsideChart { axis: i, value: *v, lo: lo[i], hi: hi[i] });
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Adaptive driver
// ---------------------------------------------------------------------------

enum Advance {
    Step(DenseSegment),
    Finished,
    Halt(StopReason),
}

struct Driver {
    t: f64,
    y: Vec<f64>,
    k1: Option<Vec<f64>>,
    h: f64,
    t_final: f64,
    steps_left: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::OutsideChart { .. } | Error::DegenerateMetric { .. })
}

fn halt_reason(e: &Error, t: f64) -> StopReason {
    match e {
        Error::OutsideChart { .. } => StopReason::LeftChart { t },
        Error::DegenerateMetric { .. } => StopReason::DegenerateMetric { t },
        _ => StopReason::StepUnderflow { t },
    }
}

fn snap(t: f64, t_final: f64) -> f64 {
    if (t_final - t).abs() <= 1e-14 * (1.0 + t_final.abs()) {
        t_final
    } else {
        t
    }
}

impl Driver {
    fn new(t0: f64, y0: Vec<f64>, t_final: f64, cfg: &IntegratorConfig) -> Self {
        Self {
            t: t0,
            y: y0,
            k1: None,
            h: 0.0,
            t_final,
            steps_left: MAX_STEPS,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_step: cfg.max_step,
        }
    }

    fn done(&self) -> bool {
        self.t >= self.t_final - 1e-14 * (1.0 + self.t_final.abs())
    }

    /// Invalidate the cached derivative (the right-hand side changed).
    fn reset_rhs(&mut self) {
        self.k1 = None;
    }

    /// One accepted step, or a declared halt. Stage evaluation failures
    /// (chart exit, degeneracy) shrink the step; if they persist down to the
    /// resolution floor the failure becomes the stop reason — that cascade is
    /// how boundary stops are located.
    fn advance(&mut self, rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>, cap: Option<f64>) -> Result<Advance> {
        if self.done() {
            return Ok(Advance::Finished);
        }
        if self.steps_left == 0 {
            return Ok(Advance::Halt(StopReason::StepBudgetExhausted { t: self.t }));
        }
        if self.k1.is_none() {
            match rhs(&self.y) {
                Ok(f) => {
                    if self.h == 0.0 {
                        self.h = dopri5::initial_step(
                            &self.y,
                            &f,
                            self.rel_tol,
                            self.abs_tol,
                            self.t_final - self.t,
                            self.max_step,
                        );
                    }
                    self.k1 = Some(f);
                }
                Err(e) if recoverable(&e) => return Ok(Advance::Halt(halt_reason(&e, self.t))),
                Err(e) => return Err(e),
            }
        }
        let hmin = 1e-14 * (1.0 + self.t.abs());
        let mut h = self.h;
        let mut last_err: Option<Error> = None;
        loop {
            h = h.min(self.max_step).min(self.t_final - self.t);
            if let Some(c) = cap {
                h = h.min(c.max(4.0 * hmin));
            }
            if h < hmin || !h.is_finite() {
                let reason = last_err
                    .map(|e| halt_reason(&e, self.t))
                    .unwrap_or(StopReason::StepUnderflow { t: self.t });
                return Ok(Advance::Halt(reason));
            }
            let k1 = self.k1.as_ref().unwrap();
            match dopri5::try_step(rhs, &self.y, k1, h, self.rel_tol, self.abs_tol) {
                Err(e) if recoverable(&e) => {
                    last_err = Some(e);
                    h *= 0.5;
                }
                Err(e) => return Err(e),
                Ok(att) => {
                    if !att.err_norm.is_finite() {
                        h *= 0.5;
                        continue;
                    }
                    if att.err_norm <= 1.0 {
                        let t_new = snap(self.t + h, self.t_final);
                        let seg = DenseSegment::poly(self.t, h, t_new, att.cont);
                        self.t = t_new;
                        self.y = att.y_new;
                        self.k1 = Some(att.k_new);
                        let fac = (0.9 * att.err_norm.powf(-0.2)).clamp(0.2, 5.0);
                        self.h = h * fac;
                        self.steps_left -= 1;
                        return Ok(Advance::Step(seg));
                    }
                    h *= (0.9 * att.err_norm.powf(-0.2)).clamp(0.2, 0.9);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Root helpers
// ---------------------------------------------------------------------------

/// Bisect the first down-crossing of `phi` on [lo, hi], with phi(lo) >= 0 >
/// phi(hi); returns the endpoint on the crossed side, so the caller restarts
/// strictly past the root.
fn bisect_downcross(phi: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Golden-section minimum of `phi` on [a, b].
fn golden_min(phi: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..200 {
        if b - a <= tol * (1.0 + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = phi(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, phi(t))
}

// ---------------------------------------------------------------------------
// Event scanning
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Pending {
    t: f64,
    surface: usize,
    crossing: bool,
}

/// Earliest surface interaction inside one accepted step, judged relative to
/// the active region sign: a crossing when sigma leaves the region side, a
/// graze when it dips to the surface band and returns.
fn scan_events(
    sys: &dyn SwitchedSystem,
    seg: &DenseSegment,
    sides: &[Side],
    skip: Option<usize>,
    cfg: &IntegratorConfig,
) -> Option<Pending> {
    let (t0, t1) = (seg.t0, seg.t_end);
    if !(t1 > t0) {
        return None;
    }
    let mut best: Option<Pending> = None;
    for k in 0..sys.n_surfaces() {
        if skip == Some(k) {
            continue;
        }
        let s = sides[k].sign();
        let phi = |t: f64| s * sys.sigma(k, &seg.eval(t));
        let ts: Vec<f64> = (0..=SCAN_NODES)
            .map(|i| t0 + (t1 - t0) * i as f64 / SCAN_NODES as f64)
            .collect();
        let vals: Vec<f64> = ts.iter().map(|t| phi(*t)).collect();

        let mut found: Option<Pending> = None;
        for i in 1..=SCAN_NODES {
            if vals[i] < 0.0 && vals[i - 1] >= 0.0 {
                let t_star = bisect_downcross(&phi, ts[i - 1], ts[i], cfg.event_tol);
                found = Some(Pending { t: t_star, surface: k, crossing: true });
                break;
            }
        }
        if found.is_none() {
            let mut mi = 0;
            for i in 0..=SCAN_NODES {
                if vals[i] < vals[mi] {
                    mi = i;
                }
            }
            if mi > 0 && mi < SCAN_NODES {
                let (tg, vg) = golden_min(&phi, ts[mi - 1], ts[mi + 1], cfg.event_tol);
                if vg < 0.0 {
                    // Dipped through between probe nodes: take the entry root;
                    // the return leg is rediscovered after the restart.
                    let t_star = bisect_downcross(&phi, ts[mi - 1], tg, cfg.event_tol);
                    found = Some(Pending { t: t_star, surface: k, crossing: true });
                } else if vg <= cfg.surface_tol {
                    found = Some(Pending { t: tg, surface: k, crossing: false });
                }
            }
        }
        if let Some(p) = found {
            if best.is_none_or(|b| p.t < b.t) {
                best = Some(p);
            }
        }
    }
    best
}

fn contact_at(
    sys: &dyn SwitchedSystem,
    y: &[f64],
    sides: &[Side],
    k: usize,
    tangency_tol: f64,
) -> Result<Contact> {
    let mut forced = sides.to_vec();
    forced[k] = Side::Minus;
    let f_minus = sys.rhs(y, &forced)?;
    forced[k] = Side::Plus;
    let f_plus = sys.rhs(y, &forced)?;
    let grad = sys.sigma_gradient(k, y);
    if linalg::norm(&grad) <= GRADIENT_FLOOR {
        return Err(Error::DegenerateSurface {
            surface: sys.surface_label(k).to_string(),
            norm: linalg::norm(&grad),
        });
    }
    let a = linalg::dot(&grad, &f_minus);
    let b = linalg::dot(&grad, &f_plus);
    Ok(Contact { kind: classify_rates(a, b, tangency_tol), a, b })
}

/// Sliding coefficient alpha at a state (region sides apart from surface `k`).
fn sliding_alpha(sys: &dyn SwitchedSystem, y: &[f64], sides: &[Side], k: usize) -> Result<f64> {
    let mut forced = sides.to_vec();
    forced[k] = Side::Minus;
    let f_minus = sys.rhs(y, &forced)?;
    forced[k] = Side::Plus;
    let f_plus = sys.rhs(y, &forced)?;
    let grad = sys.sigma_gradient(k, y);
    let a = linalg::dot(&grad, &f_minus);
    let b = linalg::dot(&grad, &f_plus);
    let denom = a - b;
    if denom == 0.0 {
        return Err(Error::SlidingNoSolution { rate: a });
    }
    Ok(a / denom)
}

/// First time alpha leaves the hysteresis band [-tol, 1 + tol] on a sliding
/// segment, with the side the flow exits to.
fn scan_sliding_exit(
    sys: &dyn SwitchedSystem,
    seg: &DenseSegment,
    sides: &[Side],
    k: usize,
    cfg: &IntegratorConfig,
) -> Result<Option<(f64, Side)>> {
    let (t0, t1) = (seg.t0, seg.t_end);
    if !(t1 > t0) {
        return Ok(None);
    }
    let tol = cfg.sliding_exit_tol;
    let alpha = |t: f64| sliding_alpha(sys, &seg.eval(t), sides, k);
    let ts: Vec<f64> = (0..=SCAN_NODES)
        .map(|i| t0 + (t1 - t0) * i as f64 / SCAN_NODES as f64)
        .collect();
    let mut prev = alpha(ts[0])?;
    for i in 1..=SCAN_NODES {
        let cur = alpha(ts[i])?;
        if cur > 1.0 + tol {
            // Root of (1 + tol) - alpha, falling: reuse the down-crossing
            // bisection on that margin.
            let phi = |t: f64| (1.0 + tol) - alpha(t).unwrap_or(f64::NAN);
            let t_x = bisect_downcross(&phi, ts[i - 1], ts[i], cfg.event_tol);
            return Ok(Some((t_x, Side::Plus)));
        }
        if cur < -tol {
            let phi = |t: f64| alpha(t).unwrap_or(f64::NAN) + tol;
            let t_x = bisect_downcross(&phi, ts[i - 1], ts[i], cfg.event_tol);
            return Ok(Some((t_x, Side::Minus)));
        }
        prev = cur;
    }
    let _ = prev;
    Ok(None)
}

/// Step cap when approaching a surface: twice the linear time-to-surface
/// estimate, so the step lands past the crossing and the scan can see it.
fn approach_cap(sys: &dyn SwitchedSystem, y: &[f64], f: &[f64], skip: Option<usize>) -> Option<f64> {
    let mut cap: Option<f64> = None;
    for k in 0..sys.n_surfaces() {
        if skip == Some(k) {
            continue;
        }
        let sigma = sys.sigma(k, y);
        let grad = sys.sigma_gradient(k, y);
        let rate = linalg::dot(&grad, f);
        if sigma * rate < 0.0 {
            let eta = 2.0 * (sigma / rate).abs();
            cap = Some(cap.map_or(eta, |c: f64| c.min(eta)));
        }
    }
    cap
}

/// Move `y` first-order along the surface gradient until sigma has the target
/// sign (magnitude stays inside the surface band). Applied after grazes and
/// tie-breaks, where the located state may sit a rounding error on the wrong
/// side of the surface it is supposed to leave behind.
fn ensure_side(sys: &dyn SwitchedSystem, k: usize, y: &[f64], target: Side, cfg: &IntegratorConfig) -> Vec<f64> {
    let s = sys.sigma(k, y);
    if s * target.sign() > 0.0 {
        return y.to_vec();
    }
    let g = sys.sigma_gradient(k, y);
    let g2 = linalg::dot(&g, &g);
    if g2 <= 0.0 {
        return y.to_vec();
    }
    let target_sigma = target.sign() * (100.0 * cfg.event_tol).min(cfg.surface_tol);
    y.iter().zip(&g).map(|(yi, gi)| yi + (target_sigma - s) / g2 * gi).collect()
}

fn project_to_surface(sys: &dyn SwitchedSystem, k: usize, y: &[f64]) -> Vec<f64> {
    let s = sys.sigma(k, y);
    let g = sys.sigma_gradient(k, y);
    let g2 = linalg::dot(&g, &g);
    if g2 <= 0.0 {
        return y.to_vec();
    }
    y.iter().zip(&g).map(|(yi, gi)| yi - s / g2 * gi).collect()
}

fn velocity_distance(a: &[f64], b: &[f64], coord_dim: usize) -> f64 {
    linalg::dist(&a[coord_dim..], &b[coord_dim..])
}

// ---------------------------------------------------------------------------
// Public integrators
// ---------------------------------------------------------------------------

fn validate_tspan(tspan: (f64, f64)) -> Result<()> {
    if !tspan.0.is_finite() || !tspan.1.is_finite() || !(tspan.1 > tspan.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "tspan must be a finite increasing interval, got ({}, {})",
            tspan.0, tspan.1
        )));
    }
    Ok(())
}

/// Adaptive integration of a smooth autonomous right-hand side, no switching
/// logic. Chart exits and degeneracies surface as declared stop reasons via
/// the step-shrink cascade.
pub fn integrate_smooth(
    rhs: impl Fn(&[f64]) -> Result<Vec<f64>>,
    z0: &GeodesicState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    smooth_core(&rhs, z0, tspan, cfg, SolverKind::Smooth)
}

fn smooth_core(
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    z0: &GeodesicState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
    kind: SolverKind,
) -> Result<Trajectory> {
    cfg.validate()?;
    validate_tspan(tspan)?;
    let y0 = z0.flat();
    if y0.is_empty() {
        return Err(Error::InvalidConfig("empty initial state".to_string()));
    }
    rhs(&y0)?; // initial-state validation is a hard error, not a stop reason
    let coord_dim = z0.x.len();
    let dim = y0.len();
    let mut driver = Driver::new(tspan.0, y0.clone(), tspan.1, cfg);
    let mut samples = vec![Sample { t: tspan.0, y: y0 }];
    let mut segments: Vec<DenseSegment> = Vec::new();
    let stop = loop {
        match driver.advance(rhs, None)? {
            Advance::Finished => break StopReason::Completed,
            Advance::Halt(r) => break r,
            Advance::Step(seg) => {
                segments.push(seg);
                samples.push(Sample { t: driver.t, y: driver.y.clone() });
            }
        }
    };
    Ok(Trajectory {
        tspan,
        coord_dim,
        samples,
        events: Vec::new(),
        dense: DenseOutput { segments, dim, coord_dim },
        stop,
        solver: kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Region,
    Sliding(usize),
}

/// Event-driven integration of any switched system.
pub fn integrate_switched(
    sys: &dyn SwitchedSystem,
    z0: &GeodesicState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    validate_tspan(tspan)?;
    let mut y_start = z0.flat();
    if y_start.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: y_start.len() });
    }
    if z0.x.len() != sys.coord_dim() {
        return Err(Error::DimensionMismatch { expected: sys.coord_dim(), got: z0.x.len() });
    }
    sys.check_domain(&y_start)?;
    let coord_dim = sys.coord_dim();
    let dim = sys.dim();
    let nsurf = sys.n_surfaces();
    let (t0, t1) = tspan;

    let mut events: Vec<Event> = Vec::new();
    let mut mode = Mode::Region;
    let mut sides: Vec<Side> = (0..nsurf).map(|k| Side::of(sys.sigma(k, &y_start))).collect();

    // Initial contacts: a start inside the surface band must be classified
    // before any step is taken.
    for k in 0..nsurf {
        if sys.sigma(k, &y_start).abs() > cfg.surface_tol {
            continue;
        }
        let contact = contact_at(sys, &y_start, &sides, k, cfg.tangency_tol)?;
        let state0 = GeodesicState::from_flat(&y_start, coord_dim);
        match contact.kind {
            ContactKind::Tangential => {
                return Err(Error::TangentialStart { surface: sys.surface_label(k).to_string() })
            }
            ContactKind::CrossingUp => sides[k] = Side::Plus,
            ContactKind::CrossingDown => sides[k] = Side::Minus,
            ContactKind::Sliding => {
                mode = Mode::Sliding(k);
                events.push(Event {
                    t: t0,
                    surface: sys.surface_label(k).to_string(),
                    kind: ContactKind::Sliding,
                    state_before: state0.clone(),
                    state_after: state0,
                    velocity_jump: 0.0,
                    flagged: false,
                });
            }
            ContactKind::Repulsive => {
                sides[k] = cfg.tie_break;
                let adjusted = ensure_side(sys, k, &y_start, cfg.tie_break, cfg);
                events.push(Event {
                    t: t0,
                    surface: sys.surface_label(k).to_string(),
                    kind: ContactKind::Repulsive,
                    state_before: state0,
                    state_after: GeodesicState::from_flat(&adjusted, coord_dim),
                    velocity_jump: velocity_distance(&y_start, &adjusted, coord_dim),
                    flagged: true,
                });
                y_start = adjusted;
            }
        }
    }

    let mut driver = Driver::new(t0, y_start.clone(), t1, cfg);
    let mut samples = vec![Sample { t: t0, y: y_start }];
    let mut segments: Vec<DenseSegment> = Vec::new();

    let stop = loop {
        if events.len() >= cfg.max_events {
            break StopReason::EventBudgetExhausted { t: driver.t };
        }
        match mode {
            Mode::Region => {
                let sides_now = sides.clone();
                let rhs = |y: &[f64]| {
                    sys.check_domain(y)?;
                    sys.rhs(y, &sides_now)
                };
                let cap = driver.k1.as_ref().and_then(|f| approach_cap(sys, &driver.y, f, None));
                match driver.advance(&rhs, cap)? {
                    Advance::Finished => break StopReason::Completed,
                    Advance::Halt(r) => break r,
                    Advance::Step(mut seg) => {
                        if let Some(p) = scan_events(sys, &seg, &sides, None, cfg) {
                            let y_star = seg.eval(p.t);
                            seg.truncate(p.t);
                            segments.push(seg);
                            let (event, y_next, new_mode) = process_contact(
                                sys, &y_star, p, &mut sides, cfg, coord_dim,
                            )?;
                            mode = new_mode.unwrap_or(Mode::Region);
                            samples.push(Sample { t: p.t, y: y_next.clone() });
                            events.push(event);
                            driver.t = p.t;
                            driver.y = y_next;
                            driver.reset_rhs();
                        } else {
                            segments.push(seg);
                            samples.push(Sample { t: driver.t, y: driver.y.clone() });
                        }
                    }
                }
            }
            Mode::Sliding(k) => {
                let sides_now = sides.clone();
                let rhs = |y: &[f64]| -> Result<Vec<f64>> {
                    sys.check_domain(y)?;
                    let mut forced = sides_now.clone();
                    forced[k] = Side::Minus;
                    let f_minus = sys.rhs(y, &forced)?;
                    forced[k] = Side::Plus;
                    let f_plus = sys.rhs(y, &forced)?;
                    let grad = sys.sigma_gradient(k, y);
                    let a = linalg::dot(&grad, &f_minus);
                    let b = linalg::dot(&grad, &f_plus);
                    let sf = crate::filippov::sliding_from_rates(a, b, &f_minus, &f_plus)?;
                    Ok(sf.field)
                };
                let cap = driver.k1.as_ref().and_then(|f| approach_cap(sys, &driver.y, f, Some(k)));
                match driver.advance(&rhs, cap)? {
                    Advance::Finished => break StopReason::Completed,
                    Advance::Halt(r) => break r,
                    Advance::Step(mut seg) => {
                        let other = scan_events(sys, &seg, &sides, Some(k), cfg);
                        let exit = scan_sliding_exit(sys, &seg, &sides, k, cfg)?;
                        let exit_first = match (&other, &exit) {
                            (Some(o), Some((tx, _))) => *tx <= o.t,
                            (None, Some(_)) => true,
                            _ => false,
                        };
                        if exit_first {
                            let (t_x, exit_side) = exit.unwrap();
                            let y_raw = seg.eval(t_x);
                            seg.truncate(t_x);
                            segments.push(seg);
                            let on_surface = project_to_surface(sys, k, &y_raw);
                            let y_next = ensure_side(sys, k, &on_surface, exit_side, cfg);
                            sides[k] = exit_side;
                            mode = Mode::Region;
                            events.push(Event {
                                t: t_x,
                                surface: sys.surface_label(k).to_string(),
                                kind: match exit_side {
                                    Side::Plus => ContactKind::CrossingUp,
                                    Side::Minus => ContactKind::CrossingDown,
                                },
                                state_before: GeodesicState::from_flat(&y_raw, coord_dim),
                                state_after: GeodesicState::from_flat(&y_next, coord_dim),
                                velocity_jump: velocity_distance(&y_raw, &y_next, coord_dim),
                                flagged: false,
                            });
                            samples.push(Sample { t: t_x, y: y_next.clone() });
                            driver.t = t_x;
                            driver.y = y_next;
                            driver.reset_rhs();
                        } else if let Some(p) = other {
                            let y_star = seg.eval(p.t);
                            seg.truncate(p.t);
                            segments.push(seg);
                            let (event, y_next, new_mode) = process_contact(
                                sys, &y_star, p, &mut sides, cfg, coord_dim,
                            )?;
                            // A crossing of another surface keeps us sliding on k.
                            mode = new_mode.unwrap_or(Mode::Sliding(k));
                            samples.push(Sample { t: p.t, y: y_next.clone() });
                            events.push(event);
                            driver.t = p.t;
                            driver.y = y_next;
                            driver.reset_rhs();
                        } else {
                            let projected = project_to_surface(sys, k, &driver.y);
                            driver.y = projected.clone();
                            driver.reset_rhs();
                            segments.push(seg);
                            samples.push(Sample { t: driver.t, y: projected });
                        }
                    }
                }
            }
        }
    };

    Ok(Trajectory {
        tspan,
        coord_dim,
        samples,
        events,
        dense: DenseOutput { segments, dim, coord_dim },
        stop,
        solver: SolverKind::EventDriven,
    })
}

/// Classify and apply one detected contact; returns the event, the (possibly
/// nudged) continuation state, and a mode override when sliding begins.
fn process_contact(
    sys: &dyn SwitchedSystem,
    y_star: &[f64],
    p: Pending,
    sides: &mut [Side],
    cfg: &IntegratorConfig,
    coord_dim: usize,
) -> Result<(Event, Vec<f64>, Option<Mode>)> {
    let k = p.surface;
    let state_before = GeodesicState::from_flat(y_star, coord_dim);
    if !p.crossing {
        // Grazing touch: stay in the region, flag it, and make sure the
        // restart state sits on the region side.
        let y_next = ensure_side(sys, k, y_star, sides[k], cfg);
        let event = Event {
            t: p.t,
            surface: sys.surface_label(k).to_string(),
            kind: ContactKind::Tangential,
            state_before,
            state_after: GeodesicState::from_flat(&y_next, coord_dim),
            velocity_jump: velocity_distance(y_star, &y_next, coord_dim),
            flagged: true,
        };
        return Ok((event, y_next, None));
    }
    let contact = contact_at(sys, y_star, sides, k, cfg.tangency_tol)?;
    let mut flagged = false;
    let mut new_mode = None;
    match contact.kind {
        ContactKind::CrossingUp => sides[k] = Side::Plus,
        ContactKind::CrossingDown => sides[k] = Side::Minus,
        ContactKind::Sliding => new_mode = Some(Mode::Sliding(k)),
        ContactKind::Repulsive => {
            // Dynamically unreachable on arrival; kept for robustness.
            sides[k] = cfg.tie_break;
            flagged = true;
        }
        ContactKind::Tangential => {
            // Transversal in the large but tangential within tolerance:
            // continue on whichever side sigma actually has.
            sides[k] = Side::of(sys.sigma(k, y_star));
            flagged = true;
        }
    }
    let y_next = if new_mode.is_none() {
        ensure_side(sys, k, y_star, sides[k], cfg)
    } else {
        y_star.to_vec()
    };
    let event = Event {
        t: p.t,
        surface: sys.surface_label(k).to_string(),
        kind: contact.kind,
        state_before,
        state_after: GeodesicState::from_flat(&y_next, coord_dim),
        velocity_jump: velocity_distance(y_star, &y_next, coord_dim),
        flagged,
    };
    Ok((event, y_next, new_mode))
}

/// Event-driven geodesic integration of a metric model.
pub fn integrate_filippov(
    model: &MetricModel,
    z0: &GeodesicState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let sys = GeodesicSwitched::new(model);
    integrate_switched(&sys, z0, tspan, cfg)
}

/// Fixed-step explicit Euler on the pointwise field of a metric model.
pub fn integrate_caratheodory(
    model: &MetricModel,
    z0: &GeodesicState,
    tspan: (f64, f64),
    step: f64,
) -> Result<Trajectory> {
    let sys = GeodesicSwitched::new(model);
    integrate_caratheodory_system(&sys, z0, tspan, step, Side::Plus)
}

/// Euler integration of any switched system, evaluating the field pointwise
/// almost everywhere; exactly on a surface the tie-break side is used.
pub fn integrate_caratheodory_system(
    sys: &dyn SwitchedSystem,
    z0: &GeodesicState,
    tspan: (f64, f64),
    step: f64,
    tie_break: Side,
) -> Result<Trajectory> {
    validate_tspan(tspan)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!("step must be positive and finite, got {step}")));
    }
    let span = tspan.1 - tspan.0;
    if span / step > 5e7 {
        return Err(Error::InvalidConfig(alloc::format!(
            "step {step} over span {span} exceeds the 5e7 node budget"
        )));
    }
    let mut y = z0.flat();
    if y.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: y.len() });
    }
    sys.check_domain(&y)?;
    let coord_dim = sys.coord_dim();
    let dim = y.len();
    let mut t = tspan.0;
    let mut samples = vec![Sample { t, y: y.clone() }];
    let mut segments: Vec<DenseSegment> = Vec::new();
    let stop = loop {
        if t >= tspan.1 - 1e-14 * (1.0 + tspan.1.abs()) {
            break StopReason::Completed;
        }
        let h = step.min(tspan.1 - t);
        let sides: Vec<Side> = (0..sys.n_surfaces())
            .map(|k| {
                let s = sys.sigma(k, &y);
                if s == 0.0 {
                    tie_break
                } else {
                    Side::of(s)
                }
            })
            .collect();
        let f = match sys.rhs(&y, &sides) {
            Ok(f) => f,
            Err(e) if recoverable(&e) => break halt_reason(&e, t),
            Err(e) => return Err(e),
        };
        let y_new: Vec<f64> = y.iter().zip(&f).map(|(yi, fi)| yi + h * fi).collect();
        if y_new.iter().any(|v| !v.is_finite()) {
            break StopReason::NonFiniteState { t };
        }
        let t_new = snap(t + h, tspan.1);
        if let Err(e) = sys.check_domain(&y_new) {
            if recoverable(&e) {
                break halt_reason(&e, t);
            }
            return Err(e);
        }
        segments.push(DenseSegment::line(t, t_new, y.clone(), y_new.clone()));
        samples.push(Sample { t: t_new, y: y_new.clone() });
        y = y_new;
        t = t_new;
    };
    Ok(Trajectory {
        tspan,
        coord_dim,
        samples,
        events: Vec::new(),
        dense: DenseOutput { segments, dim, coord_dim },
        stop,
        solver: SolverKind::PointwiseEuler { step },
    })
}

/// Smooth geodesic integration of the mollified metric of a catalog entry.
pub fn integrate_regularized(
    entry: &CatalogEntry,
    epsilon: f64,
    z0: &GeodesicState,
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "mollification scale must be positive and finite, got {epsilon}"
        )));
    }
    let model = entry.mollified(epsilon)?;
    let rhs = move |y: &[f64]| model.geodesic_rhs(y);
    smooth_core(&rhs, z0, tspan, cfg, SolverKind::Mollified { epsilon })
}

/// First root of a switching function along a dense solution inside a window,
/// or a grazing candidate when sigma dips to the surface band without a sign
/// change. Roots are resolved to `event_tol * (1 + |t|)`.
pub fn locate_event(
    dense: &DenseOutput,
    surface: &SwitchingSurface,
    window: (f64, f64),
    event_tol: f64,
) -> Option<EventCandidate> {
    if dense.segments.is_empty() || !(window.1 > window.0) {
        return None;
    }
    let lo = window.0.max(dense.t_start());
    let hi = window.1.min(dense.t_end());
    if !(hi > lo) {
        return None;
    }
    let cd = dense.coord_dim;
    let phi = |t: f64| {
        let y = dense.eval(t).unwrap_or_else(|| dense.segments.last().unwrap().eval(t));
        surface.sigma(&y[..cd])
    };
    // Probe nodes: segment boundaries plus a fixed subdivision of each
    // overlapping segment.
    let mut ts: Vec<f64> = Vec::new();
    for seg in &dense.segments {
        if seg.t_end < lo || seg.t0 > hi {
            continue;
        }
        let a = seg.t0.max(lo);
        let b = seg.t_end.min(hi);
        for i in 0..16 {
            ts.push(a + (b - a) * i as f64 / 16.0);
        }
    }
    ts.push(hi);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + a.abs()));
    if ts.len() < 2 {
        return None;
    }
    let vals: Vec<f64> = ts.iter().map(|t| phi(*t)).collect();
    for i in 0..ts.len() {
        if vals[i] == 0.0 {
            // An exact zero at a probe node: grazing when both neighbours sit
            // on the same side.
            let before = if i > 0 { vals[i - 1] } else { 0.0 };
            let after = if i + 1 < vals.len() { vals[i + 1] } else { 0.0 };
            return Some(EventCandidate { t: ts[i], grazing: before * after > 0.0 });
        }
        if i > 0 && vals[i - 1] * vals[i] < 0.0 {
            let sign0 = vals[i - 1].signum();
            let signed = |t: f64| sign0 * phi(t);
            let t_root = bisect_downcross(&signed, ts[i - 1], ts[i], event_tol);
            return Some(EventCandidate { t: t_root, grazing: false });
        }
    }
    // No sign change: refine the best interior dip of |sigma|.
    let mut mi = 0;
    for i in 0..ts.len() {
        if vals[i].abs() < vals[mi].abs() {
            mi = i;
        }
    }
    if mi == 0 || mi == ts.len() - 1 {
        return None;
    }
    let abs_phi = |t: f64| phi(t).abs();
    let (tg, vg) = golden_min(&abs_phi, ts[mi - 1], ts[mi + 1], event_tol);
    (vg <= crate::filippov::SURFACE_TOL).then_some(EventCandidate { t: tg, grazing: true })
}
