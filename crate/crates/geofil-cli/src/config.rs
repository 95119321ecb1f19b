//! Run configuration: the JSON schema shared by all subcommands, its
//! validation, and the translation into solver settings.
//!
//! A config is rejected before any computation starts: unknown keys, reversed
//! time spans, dimension mismatches and non-positive tolerances all surface
//! as [`Failure::Validation`] with the offending field named. Validation also
//! resolves defaults, and the resolved config is echoed into every output
//! file so a run can be reproduced from its artifacts alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use geofil::catalog::CatalogEntry;
use geofil::filippov::Side;
use geofil::geometry::GeodesicState;
use geofil::solver::IntegratorConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Bumped on breaking changes to any output layout.
pub const FORMAT_VERSION: u32 = 1;

fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_event_tol() -> f64 {
    1e-12
}
fn default_max_events() -> usize {
    10_000
}
fn default_sliding_exit_tol() -> f64 {
    1e-10
}
fn default_surface_tol() -> f64 {
    1e-9
}
fn default_tangency_tol() -> f64 {
    1e-10
}

/// Continuation side for ambiguous (repulsive) contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Plus,
    Minus,
}

impl TieBreak {
    pub fn side(self) -> Side {
        match self {
            TieBreak::Plus => Side::Plus,
            TieBreak::Minus => Side::Minus,
        }
    }
}

/// Which solution notion the `integrate` subcommand produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Event-driven integration of the differential inclusion.
    #[default]
    Filippov,
    /// Fixed-step Euler on the pointwise (almost-everywhere) field.
    Caratheodory,
    /// Smooth integration of the mollified metric.
    Regularized,
}

/// Initial position and velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Method selection plus the knobs that only some methods read.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub method: Method,
    /// Step size for the fixed-step method; resolved to 1e-3 when needed.
    #[serde(default)]
    pub step: Option<f64>,
    /// Mollification scale; resolved to 1e-3 when needed.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

/// Solver tolerances; every field has a default, so a config may set any
/// subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_event_tol")]
    pub event_tol: f64,
    /// `null` (the default) leaves the step size unbounded.
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "default_max_events")]
    pub max_events: usize,
    #[serde(default = "default_sliding_exit_tol")]
    pub sliding_exit_tol: f64,
    #[serde(default = "default_surface_tol")]
    pub surface_tol: f64,
    #[serde(default = "default_tangency_tol")]
    pub tangency_tol: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            event_tol: default_event_tol(),
            max_step: None,
            max_events: default_max_events(),
            sliding_exit_tol: default_sliding_exit_tol(),
            surface_tol: default_surface_tol(),
            tangency_tol: default_tangency_tol(),
            tie_break: TieBreak::default(),
        }
    }
}

impl Tolerances {
    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            event_tol: self.event_tol,
            max_events: self.max_events,
            sliding_exit_tol: self.sliding_exit_tol,
            surface_tol: self.surface_tol,
            tangency_tol: self.tangency_tol,
            tie_break: self.tie_break.side(),
        }
    }
}

/// One complete run description. This is the schema accepted by
/// `--config` and echoed, with defaults resolved, into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog entry name (`flat`, `kink1d`, `conformal2d`, `rosen`).
    pub metric: String,
    /// Entry parameters; missing ones take the entry's defaults.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub initial_state: StateSpec,
    /// `[t0, t1]` with `t0 < t1`.
    pub tspan: [f64; 2],
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

/// A config that passed validation, with the handles derived from it.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    /// The input config with every default materialized.
    pub config: RunConfig,
    pub entry: CatalogEntry,
    pub z0: GeodesicState,
    pub cfg: IntegratorConfig,
}

impl RunConfig {
    /// Read and validate a config file.
    pub fn load(path: &Path) -> Result<ResolvedRun, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parse and validate a JSON config. Parse errors carry the field path.
    pub fn from_json(text: &str) -> Result<ResolvedRun, Failure> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = single_line(&e.into_inner().to_string());
            if path == "." {
                Failure::Validation(format!("config: {inner}"))
            } else {
                Failure::Validation(format!("config at {path}: {inner}"))
            }
        })?;
        config.validate()
    }

    /// Check every field, resolve defaults, and build the solver inputs.
    pub fn validate(mut self) -> Result<ResolvedRun, Failure> {
        let entry = CatalogEntry::by_name(&self.metric, &self.params)
            .map_err(|e| Failure::Validation(e.to_string()))?;
        // Echo the entry's full parameter set so the output names the
        // defaults the run actually used.
        self.params = entry.params();
        let dim = entry.dim();

        let st = &self.initial_state;
        if st.x.len() != dim || st.v.len() != dim {
            return Err(Failure::Validation(format!(
                "initial_state: {} needs {dim} coordinates, got x: {}, v: {}",
                self.metric,
                st.x.len(),
                st.v.len()
            )));
        }
        if st.x.iter().chain(&st.v).any(|c| !c.is_finite()) {
            return Err(Failure::Validation("initial_state: components must be finite".into()));
        }
        let model = entry.model();
        model.chart().check(&st.x).map_err(|e| Failure::Validation(format!("initial_state: {e}")))?;

        let [t0, t1] = self.tspan;
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(Failure::Validation(format!(
                "tspan: need t0 < t1 with both finite, got [{t0}, {t1}]"
            )));
        }

        let cfg = self.tolerances.integrator_config();
        cfg.validate().map_err(|e| Failure::Validation(format!("tolerances: {e}")))?;

        if let Some(step) = self.solver.step {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Failure::Validation(format!(
                    "solver.step: must be positive and finite, got {step}"
                )));
            }
        }
        if let Some(eps) = self.solver.epsilon {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Failure::Validation(format!(
                    "solver.epsilon: must be positive and finite, got {eps}"
                )));
            }
        }
        // Materialize the knob the chosen method will read.
        match self.solver.method {
            Method::Caratheodory => self.solver.step = Some(self.solver.step.unwrap_or(1e-3)),
            Method::Regularized => self.solver.epsilon = Some(self.solver.epsilon.unwrap_or(1e-3)),
            Method::Filippov => {}
        }

        let z0 = GeodesicState::new(st.x.clone(), st.v.clone());
        Ok(ResolvedRun { config: self, entry, z0, cfg })
    }
}

/// Collapse a message to one line for the error stream.
pub fn single_line(msg: &str) -> String {
    msg.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(metric: &str, x: &[f64], v: &[f64], tspan: [f64; 2]) -> RunConfig {
        RunConfig {
            metric: metric.into(),
            params: BTreeMap::new(),
            initial_state: StateSpec { x: x.to_vec(), v: v.to_vec() },
            tspan,
            solver: SolverSpec::default(),
            tolerances: Tolerances::default(),
            seed: 0,
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let run = RunConfig::from_json(
            r#"{"metric": "flat", "initial_state": {"x": [0, 0], "v": [1, 0]}, "tspan": [0, 1]}"#,
        )
        .unwrap();
        assert_eq!(run.config.tolerances.rel_tol, 1e-10);
        assert_eq!(run.config.tolerances.abs_tol, 1e-12);
        assert_eq!(run.config.tolerances.max_events, 10_000);
        assert_eq!(run.config.solver.method, Method::Filippov);
        assert_eq!(run.config.seed, 0);
        // Defaulted entry parameters are echoed explicitly.
        assert_eq!(run.config.params.get("dim"), Some(&2.0));
        assert_eq!(run.config.params.get("time_axes"), Some(&0.0));
        assert_eq!(run.cfg.max_step, f64::INFINITY);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = RunConfig::from_json(
            r#"{"metrc": "flat", "initial_state": {"x": [0], "v": [1]}, "tspan": [0, 1]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("metrc"), "{err}");

        let err = RunConfig::from_json(
            r#"{"metric": "flat", "initial_state": {"x": [0, 0], "v": [1, 0], "y": 1}, "tspan": [0, 1]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains('y'), "{err}");
    }

    #[test]
    fn nested_type_errors_name_the_field_path() {
        let err = RunConfig::from_json(
            r#"{"metric": "flat", "initial_state": {"x": [0, 0], "v": [1, 0]}, "tspan": [0, 1],
                "tolerances": {"rel_tol": "tight"}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tolerances.rel_tol"), "{msg}");
    }

    #[test]
    fn reversed_and_degenerate_spans_are_rejected() {
        for tspan in [[1.0, 0.0], [0.5, 0.5], [0.0, f64::INFINITY]] {
            let err = minimal("flat", &[0.0, 0.0], &[1.0, 0.0], tspan).validate().unwrap_err();
            assert!(matches!(err, Failure::Validation(_)), "{err}");
            assert!(err.to_string().contains("tspan"), "{err}");
        }
    }

    #[test]
    fn unknown_metric_and_bad_params_are_validation_errors() {
        let err = minimal("klein", &[0.0], &[1.0], [0.0, 1.0]).validate().unwrap_err();
        assert!(err.to_string().contains("klein"), "{err}");

        let mut cfg = minimal("kink1d", &[-1.0], &[1.0], [0.0, 2.0]);
        cfg.params.insert("c".into(), -2.0);
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Failure::Validation(_)), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = minimal("flat", &[0.0], &[1.0], [0.0, 1.0]).validate().unwrap_err();
        assert!(err.to_string().contains("2 coordinates"), "{err}");
    }

    #[test]
    fn method_knobs_are_resolved_on_demand() {
        let mut cfg = minimal("flat", &[0.0, 0.0], &[1.0, 0.0], [0.0, 1.0]);
        cfg.solver.method = Method::Caratheodory;
        let run = cfg.validate().unwrap();
        assert_eq!(run.config.solver.step, Some(1e-3));
        assert_eq!(run.config.solver.epsilon, None);

        let mut cfg = minimal("kink1d", &[-1.0], &[1.0], [0.0, 1.0]);
        cfg.solver.method = Method::Regularized;
        cfg.solver.epsilon = Some(1e-2);
        let run = cfg.validate().unwrap();
        assert_eq!(run.config.solver.epsilon, Some(1e-2));
    }

    #[test]
    fn out_of_chart_start_is_a_validation_error() {
        let err = minimal("rosen", &[1.5, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], [0.0, 1.0])
            .validate()
            .unwrap_err();
        assert!(matches!(err, Failure::Validation(_)), "{err}");
    }

    #[test]
    fn serialization_round_trips() {
        let mut cfg = minimal("kink1d", &[-1.0], &[1.0], [0.0, 2.0]);
        cfg.params.insert("c".into(), 1.5);
        cfg.tolerances.max_step = Some(0.25);
        cfg.tolerances.tie_break = TieBreak::Minus;
        cfg.solver.method = Method::Caratheodory;
        cfg.solver.step = Some(5e-4);
        cfg.seed = 42;
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
