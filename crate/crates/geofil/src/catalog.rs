//! Built-in metric models.
//!
//! Four families, each buildable by name with a small parameter map:
//!
//! * `flat` — constant diagonal metric of any signature; geodesics are
//!   straight lines.
//! * `kink1d` — the line with `g = exp(2c|x|)`: the simplest metric that is
//!   Lipschitz but not C^1. The conserved quantity `v exp(c|x|)` gives a
//!   closed-form geodesic through the kink.
//! * `conformal2d` — the plane with `g = exp(2c|x_1|) (dx_1^2 + dx_2^2)`,
//!   a two-dimensional Riemannian model with a switching line; no closed
//!   form, used for variational cross-checks.
//! * `rosen` — a plane-wave metric `-du dv + (1+u_+)^2 dX^2 + (1-u_+)^2 dY^2`
//!   in Rosen-type coordinates, Lorentzian with a kink along `u = 0` and a
//!   coordinate degeneracy at `u = 1`. Fully solvable piecewise.
//!
//! Every entry exposes the model, a mollified (smooth) approximation at scale
//! `epsilon`, and — where one exists — an exact geodesic oracle used to pin
//! integration accuracy in tests.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::filippov::{Side, SwitchingSurface};
use crate::geometry::{ChartSpec, Christoffel, GeodesicState, MetricModel, MetricTensor};
use crate::{Error, Result};

/// Margin below the `u = 1` coordinate degeneracy of the wave metric; the
/// chart ends there, though the determinant floor triggers slightly earlier.
const ROSEN_CHART_MARGIN: f64 = 1e-6;

/// The oracle refuses within this distance of the degeneracy.
const ROSEN_ORACLE_MARGIN: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Flat { dim: usize, time_axes: usize },
    Kink1d { c: f64 },
    Conformal2d { c: f64 },
    Rosen,
}

/// A named, parameterized metric from the built-in catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    kind: Kind,
}

/// Canonical entry names accepted by [`CatalogEntry::by_name`].
pub fn names() -> &'static [&'static str] {
    &["flat", "kink1d", "conformal2d", "rosen"]
}

/// One default-parameter entry per catalog family.
pub fn default_entries() -> Vec<CatalogEntry> {
    names()
        .iter()
        .map(|n| CatalogEntry::by_name(n, &BTreeMap::new()).expect("defaults are valid"))
        .collect()
}

fn integer_param(params: &BTreeMap<String, f64>, name: &str, default: usize) -> Result<usize> {
    match params.get(name) {
        None => Ok(default),
        Some(&v) => {
            if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
                return Err(Error::BadParameter {
                    name: name.to_string(),
                    reason: alloc::format!("must be a non-negative integer, got {v}"),
                });
            }
            Ok(v as usize)
        }
    }
}

fn reject_unknown(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::BadParameter {
                name: key.clone(),
                reason: alloc::format!("not a parameter of this entry (allowed: {allowed:?})"),
            });
        }
    }
    Ok(())
}

impl CatalogEntry {
    /// Build an entry from its name and a parameter map; missing parameters
    /// take their defaults, unknown ones are rejected.
    pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let kind = match name {
            "flat" => {
                reject_unknown(params, &["dim", "time_axes"])?;
                let dim = integer_param(params, "dim", 2)?;
                let time_axes = integer_param(params, "time_axes", 0)?;
                if dim == 0 || dim > 8 {
                    return Err(Error::BadParameter {
                        name: "dim".to_string(),
                        reason: alloc::format!("must be in 1..=8, got {dim}"),
                    });
                }
                if time_axes > dim {
                    return Err(Error::BadParameter {
                        name: "time_axes".to_string(),
                        reason: alloc::format!("must not exceed dim = {dim}, got {time_axes}"),
                    });
                }
                Kind::Flat { dim, time_axes }
            }
            "kink1d" => {
                reject_unknown(params, &["c"])?;
                let c = params.get("c").copied().unwrap_or(1.0);
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::BadParameter {
                        name: "c".to_string(),
                        reason: alloc::format!("kink strength must be positive and finite, got {c}"),
                    });
                }
                Kind::Kink1d { c }
            }
            "conformal2d" => {
                reject_unknown(params, &["c"])?;
                let c = params.get("c").copied().unwrap_or(1.0);
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::BadParameter {
                        name: "c".to_string(),
                        reason: alloc::format!("kink strength must be positive and finite, got {c}"),
                    });
                }
                Kind::Conformal2d { c }
            }
            "rosen" => {
                reject_unknown(params, &[])?;
                Kind::Rosen
            }
            other => return Err(Error::UnknownMetric(other.to_string())),
        };
        Ok(Self { kind })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Flat { .. } => "flat",
            Kind::Kink1d { .. } => "kink1d",
            Kind::Conformal2d { .. } => "conformal2d",
            Kind::Rosen => "rosen",
        }
    }

    pub fn description(&self) -> &'static str {
        match self.kind {
            Kind::Flat { .. } => "constant metric; straight-line geodesics",
            Kind::Kink1d { .. } => "line with g = exp(2c|x|); Lipschitz kink at x = 0, exact solution",
            Kind::Conformal2d { .. } => "plane with conformal factor exp(2c|x1|); kink line, no closed form",
            Kind::Rosen => "plane wave -du dv + (1+u+)^2 dX^2 + (1-u+)^2 dY^2; Lorentzian, exact solution",
        }
    }

    /// Resolved parameters, defaults included.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        match self.kind {
            Kind::Flat { dim, time_axes } => {
                map.insert("dim".to_string(), dim as f64);
                map.insert("time_axes".to_string(), time_axes as f64);
            }
            Kind::Kink1d { c } | Kind::Conformal2d { c } => {
                map.insert("c".to_string(), c);
            }
            Kind::Rosen => {}
        }
        map
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::Flat { dim, .. } => dim,
            Kind::Kink1d { .. } => 1,
            Kind::Conformal2d { .. } => 2,
            Kind::Rosen => 4,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        match self.kind {
            Kind::Flat { time_axes, .. } => time_axes == 0,
            Kind::Kink1d { .. } | Kind::Conformal2d { .. } => true,
            Kind::Rosen => false,
        }
    }

    pub fn has_oracle(&self) -> bool {
        !matches!(self.kind, Kind::Conformal2d { .. })
    }

    /// The metric model with its switching surfaces and closed-form
    /// Christoffel symbols.
    pub fn model(&self) -> MetricModel {
        match self.kind {
            Kind::Flat { dim, time_axes } => {
                let signature: Vec<i8> = (0..dim).map(|i| if i < time_axes { -1 } else { 1 }).collect();
                let entries: Vec<f64> = signature.iter().map(|&s| s as f64).collect();
                let chart = ChartSpec::unbounded(&signature).expect("valid signature");
                MetricModel::smooth(chart, move |_x| MetricTensor::diagonal(&entries))
                    .with_christoffel(move |_x, _s| Christoffel::zeros(dim))
                    .with_lipschitz_bound(0.0)
            }
            Kind::Kink1d { c } => {
                let chart = ChartSpec::unbounded(&[1]).expect("valid signature");
                let surfaces = vec![SwitchingSurface::coordinate("kink", 0, 1)];
                let model = MetricModel::piecewise(chart, surfaces, move |x, sides| {
                    // Sided extension of |x|: x on the plus side, -x on minus.
                    let a = sides[0].sign() * x[0];
                    MetricTensor::diagonal(&[(2.0 * c * a).exp()])
                });
                model
                    .with_christoffel(move |_x, sides| {
                        let d = c * sides[0].sign();
                        Christoffel::from_fn(1, move |_, _, _| d)
                    })
                    // sup |dg/dx| over |x| <= 2.
                    .with_lipschitz_bound(2.0 * c * (4.0 * c).exp())
            }
            Kind::Conformal2d { c } => {
                let chart = ChartSpec::unbounded(&[1, 1]).expect("valid signature");
                let surfaces = vec![SwitchingSurface::coordinate("kink", 0, 2)];
                let model = MetricModel::piecewise(chart, surfaces, move |x, sides| {
                    let a = sides[0].sign() * x[0];
                    let e = (2.0 * c * a).exp();
                    MetricTensor::diagonal(&[e, e])
                });
                model
                    .with_christoffel(move |_x, sides| {
                        // Conformal metric exp(2 phi) delta with phi = c|x1|:
                        // the only derivative is d1 phi = c * side.
                        let d = c * sides[0].sign();
                        Christoffel::from_fn(2, move |i, j, k| match (i, j, k) {
                            (0, 0, 0) => d,
                            (0, 1, 1) => -d,
                            (1, 0, 1) | (1, 1, 0) => d,
                            _ => 0.0,
                        })
                    })
                    .with_lipschitz_bound(2.0 * c * (4.0 * c).exp())
            }
            Kind::Rosen => {
                let chart = ChartSpec::with_bounds(
                    &[-1, 1, 1, 1],
                    &[f64::NEG_INFINITY; 4],
                    &[1.0 - ROSEN_CHART_MARGIN, f64::INFINITY, f64::INFINITY, f64::INFINITY],
                )
                .expect("valid chart");
                let surfaces = vec![SwitchingSurface::coordinate("wavefront", 0, 4)];
                let model = MetricModel::piecewise(chart, surfaces, move |x, sides| {
                    // Sided extension of u_+ = max(u, 0).
                    let up = if sides[0] == Side::Plus { x[0] } else { 0.0 };
                    let p = 1.0 + up;
                    let q = 1.0 - up;
                    #[rustfmt::skip]
                    let rows = [
                        0.0, -0.5, 0.0, 0.0,
                        -0.5, 0.0, 0.0, 0.0,
                        0.0, 0.0, p * p, 0.0,
                        0.0, 0.0, 0.0, q * q,
                    ];
                    MetricTensor::from_rows(4, &rows).expect("square")
                });
                model
                    .with_christoffel(move |x, sides| {
                        let (up, dup) = if sides[0] == Side::Plus { (x[0], 1.0) } else { (0.0, 0.0) };
                        let p = 1.0 + up;
                        let q = 1.0 - up;
                        let pp = dup;
                        let qp = -dup;
                        // Coordinates ordered (u, v, X, Y).
                        Christoffel::from_fn(4, move |i, j, k| match (i, j, k) {
                            (1, 2, 2) => 2.0 * p * pp,
                            (1, 3, 3) => 2.0 * q * qp,
                            (2, 0, 2) | (2, 2, 0) => pp / p,
                            (3, 0, 3) | (3, 3, 0) => qp / q,
                            _ => 0.0,
                        })
                    })
                    // sup |dg/du| = max(2p, 2q) <= 4 for u <= 1.
                    .with_lipschitz_bound(4.0)
            }
        }
    }

    /// Smooth approximation of the model at mollification scale `epsilon`:
    /// `|x|` becomes `sqrt(x^2 + eps^2)` and `u_+` becomes
    /// `(u + sqrt(u^2 + eps^2)) / 2`. No switching surfaces remain.
    pub fn mollified(&self, epsilon: f64) -> Result<MetricModel> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::BadParameter {
                name: "epsilon".to_string(),
                reason: alloc::format!("mollification scale must be positive and finite, got {epsilon}"),
            });
        }
        let eps2 = epsilon * epsilon;
        Ok(match self.kind {
            Kind::Flat { .. } => self.model(), // already smooth; mollification is the identity
            Kind::Kink1d { c } => {
                let chart = ChartSpec::unbounded(&[1]).expect("valid signature");
                MetricModel::smooth(chart, move |x| {
                    let a = (x[0] * x[0] + eps2).sqrt();
                    MetricTensor::diagonal(&[(2.0 * c * a).exp()])
                })
                .with_christoffel(move |x, _s| {
                    let d = c * x[0] / (x[0] * x[0] + eps2).sqrt();
                    Christoffel::from_fn(1, move |_, _, _| d)
                })
            }
            Kind::Conformal2d { c } => {
                let chart = ChartSpec::unbounded(&[1, 1]).expect("valid signature");
                MetricModel::smooth(chart, move |x| {
                    let a = (x[0] * x[0] + eps2).sqrt();
                    let e = (2.0 * c * a).exp();
                    MetricTensor::diagonal(&[e, e])
                })
                .with_christoffel(move |x, _s| {
                    let d = c * x[0] / (x[0] * x[0] + eps2).sqrt();
                    Christoffel::from_fn(2, move |i, j, k| match (i, j, k) {
                        (0, 0, 0) => d,
                        (0, 1, 1) => -d,
                        (1, 0, 1) | (1, 1, 0) => d,
                        _ => 0.0,
                    })
                })
            }
            Kind::Rosen => {
                let chart = ChartSpec::with_bounds(
                    &[-1, 1, 1, 1],
                    &[f64::NEG_INFINITY; 4],
                    &[1.0 - ROSEN_CHART_MARGIN, f64::INFINITY, f64::INFINITY, f64::INFINITY],
                )
                .expect("valid chart");
                MetricModel::smooth(chart, move |x| {
                    let m = 0.5 * (x[0] + (x[0] * x[0] + eps2).sqrt());
                    let p = 1.0 + m;
                    let q = 1.0 - m;
                    #[rustfmt::skip]
                    let rows = [
                        0.0, -0.5, 0.0, 0.0,
                        -0.5, 0.0, 0.0, 0.0,
                        0.0, 0.0, p * p, 0.0,
                        0.0, 0.0, 0.0, q * q,
                    ];
                    MetricTensor::from_rows(4, &rows).expect("square")
                })
                .with_christoffel(move |x, _s| {
                    let r = (x[0] * x[0] + eps2).sqrt();
                    let m = 0.5 * (x[0] + r);
                    let dm = 0.5 * (1.0 + x[0] / r);
                    let p = 1.0 + m;
                    let q = 1.0 - m;
                    Christoffel::from_fn(4, move |i, j, k| match (i, j, k) {
                        (1, 2, 2) => 2.0 * p * dm,
                        (1, 3, 3) => -2.0 * q * dm,
                        (2, 0, 2) | (2, 2, 0) => dm / p,
                        (3, 0, 3) | (3, 3, 0) => -dm / q,
                        _ => 0.0,
                    })
                })
            }
        })
    }

    /// Canonical initial condition used by the built-in scenarios and checks.
    pub fn reference_state(&self) -> GeodesicState {
        match self.kind {
            Kind::Flat { dim, .. } => {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                GeodesicState::new(vec![0.0; dim], v)
            }
            Kind::Kink1d { .. } => GeodesicState::new(vec![-1.0], vec![1.0]),
            Kind::Conformal2d { .. } => GeodesicState::new(vec![-1.0, 0.0], vec![1.0, 0.25]),
            // Transverse momenta sized so the squeezed polarization stays
            // mild up to u = 0.9 (zdot grows like 1/(1-u)^2) and the
            // mollified runs close to about 5e-4 at the smallest scale.
            Kind::Rosen => GeodesicState::new(vec![0.0; 4], vec![1.0, 0.1, 0.25, 0.05]),
        }
    }

    /// Time span paired with [`Self::reference_state`]. The wave entry stops
    /// at `t = 0.9`, before the `u = 1` degeneracy.
    pub fn reference_tspan(&self) -> (f64, f64) {
        match self.kind {
            Kind::Rosen => (0.0, 0.9),
            _ => (0.0, 1.0),
        }
    }

    /// Coordinate box on which sampled checks (Lipschitz quotients, hull
    /// probes) operate. A sampling region, not a chart bound.
    pub fn reference_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self.kind {
            Kind::Flat { dim, .. } => (vec![-1.0; dim], vec![1.0; dim]),
            Kind::Kink1d { .. } => (vec![-2.0], vec![2.0]),
            Kind::Conformal2d { .. } => (vec![-2.0, -2.0], vec![2.0, 2.0]),
            Kind::Rosen => (vec![-0.5, -2.0, -2.0, -2.0], vec![0.9, 2.0, 2.0, 2.0]),
        }
    }

    /// Exact geodesic state at time `t` from initial state `z0`, where a
    /// closed form exists.
    pub fn oracle_state(&self, z0: &GeodesicState, t: f64) -> Result<GeodesicState> {
        if z0.x.len() != self.dim() || z0.v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z0.x.len() });
        }
        match self.kind {
            Kind::Flat { .. } => {
                let x = z0.x.iter().zip(&z0.v).map(|(xi, vi)| xi + vi * t).collect();
                Ok(GeodesicState::new(x, z0.v.clone()))
            }
            Kind::Kink1d { c } => {
                let (x, v) = kink_oracle(c, z0.x[0], z0.v[0], t);
                Ok(GeodesicState::new(vec![x], vec![v]))
            }
            Kind::Conformal2d { .. } => Err(Error::NoOracle { entry: "conformal2d".to_string() }),
            Kind::Rosen => rosen_oracle(z0, t),
        }
    }
}

/// Closed-form geodesic of `g = exp(2c|x|)` on the line.
///
/// `w = v exp(c|x|)` is conserved; each monotone leg integrates to an
/// exponential in closed form, and a moving solution crosses the kink at most
/// once. Total on all of `(x0, v0, t)`.
fn kink_oracle(c: f64, x0: f64, v0: f64, t: f64) -> (f64, f64) {
    if t < 0.0 {
        // Time reversal flips the velocity.
        let (x, v) = kink_oracle(c, x0, -v0, -t);
        return (x, -v);
    }
    let w0 = v0 * (c * x0.abs()).exp();
    if w0 == 0.0 {
        return (x0, 0.0);
    }
    if w0 < 0.0 {
        // Spatial reflection x -> -x maps the metric to itself.
        let (x, v) = kink_oracle(c, -x0, -v0, t);
        return (-x, -v);
    }
    // Rightward motion from here on.
    if x0 >= 0.0 {
        let x = ((c * x0).exp() + c * w0 * t).ln() / c;
        return (x, w0 * (-c * x).exp());
    }
    let t_star = ((-c * x0).exp() - 1.0) / (c * w0);
    if t <= t_star {
        let x = -((-c * x0).exp() - c * w0 * t).ln() / c;
        (x, w0 * (c * x).exp())
    } else {
        let x = (1.0 + c * w0 * (t - t_star)).ln() / c;
        (x, w0 * (-c * x).exp())
    }
}

/// Continuous antiderivative of `1/p(u)^2` with `p = 1 + u_+`.
fn rosen_i1(u: f64) -> f64 {
    if u <= 0.0 {
        u
    } else {
        u / (1.0 + u)
    }
}

/// Continuous antiderivative of `1/q(u)^2` with `q = 1 - u_+`.
fn rosen_i2(u: f64) -> f64 {
    if u <= 0.0 {
        u
    } else {
        u / (1.0 - u)
    }
}

/// Closed-form geodesic of the wave metric.
///
/// `u` is affine; `p^2 X'` and `q^2 Y'` are conserved (both factors of each
/// product are continuous across the kink, so the constants hold globally);
/// `v` comes from the conserved line element `g(z', z') = L0`.
fn rosen_oracle(z0: &GeodesicState, t: f64) -> Result<GeodesicState> {
    let (u0, w0, x0, y0) = (z0.x[0], z0.x[1], z0.x[2], z0.x[3]);
    let (du, dw0, dx0, dy0) = (z0.v[0], z0.v[1], z0.v[2], z0.v[3]);
    let up0 = u0.max(0.0);
    let (p0, q0) = (1.0 + up0, 1.0 - up0);
    let u1 = u0 + du * t;
    let u_max = u0.max(u1);
    if u_max >= 1.0 - ROSEN_ORACLE_MARGIN {
        return Err(Error::OracleDomain {
            entry: "rosen".to_string(),
            reason: alloc::format!("path reaches u = {u_max:.6}, inside the degenerate zone near u = 1"),
        });
    }
    if du == 0.0 {
        if u0 == 0.0 {
            return Err(Error::OracleDomain {
                entry: "rosen".to_string(),
                reason: "motion along the kink u = 0 has no single-valued acceleration".to_string(),
            });
        }
        // Frozen wave profile: X and Y are affine, v picks up a quadratic
        // term from the (constant) profile slopes.
        let (pp, qp) = if u0 > 0.0 { (1.0, -1.0) } else { (0.0, 0.0) };
        let curv = -2.0 * (p0 * pp * dx0 * dx0 + q0 * qp * dy0 * dy0);
        return Ok(GeodesicState::new(
            vec![u0, w0 + dw0 * t + 0.5 * curv * t * t, x0 + dx0 * t, y0 + dy0 * t],
            vec![0.0, dw0 + curv * t, dx0, dy0],
        ));
    }
    let big_a = p0 * p0 * dx0;
    let big_b = q0 * q0 * dy0;
    let l0 = -du * dw0 + p0 * p0 * dx0 * dx0 + q0 * q0 * dy0 * dy0;
    let di1 = rosen_i1(u1) - rosen_i1(u0);
    let di2 = rosen_i2(u1) - rosen_i2(u0);
    let up1 = u1.max(0.0);
    let (p1, q1) = (1.0 + up1, 1.0 - up1);
    let x1 = x0 + big_a / du * di1;
    let y1 = y0 + big_b / du * di2;
    let w1 = w0 + (big_a * big_a * di1 + big_b * big_b * di2) / (du * du) - l0 * t / du;
    let dx1 = big_a / (p1 * p1);
    let dy1 = big_b / (q1 * q1);
    let dw1 = (big_a * big_a / (p1 * p1) + big_b * big_b / (q1 * q1) - l0) / du;
    Ok(GeodesicState::new(vec![u1, w1, x1, y1], vec![du, dw1, dx1, dy1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DerivativeMode;
    use approx::assert_abs_diff_eq;

    fn entry(name: &str) -> CatalogEntry {
        CatalogEntry::by_name(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn kink_reference_run_matches_frozen_constants() {
        let e = entry("kink1d");
        let z0 = e.reference_state();
        // Crossing time, crossing speed, and the state at t = 1, all from the
        // conserved quantity w = v exp(c|x|).
        let t_star = 0.632_120_558_828_557_7;
        let at_cross = e.oracle_state(&z0, t_star).unwrap();
        assert_abs_diff_eq!(at_cross.x[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at_cross.v[0], 2.718_281_828_459_045, epsilon = 1e-14);
        let at_one = e.oracle_state(&z0, 1.0).unwrap();
        assert_abs_diff_eq!(at_one.x[0], 0.693_147_180_559_945_3, epsilon = 1e-15);
        assert_abs_diff_eq!(at_one.v[0], 1.359_140_914_229_522_5, epsilon = 1e-15);
    }

    #[test]
    fn kink_oracle_conserves_w_and_is_continuously_differentiable() {
        let c = 1.7;
        let (x0, v0) = (-0.8, 1.3);
        let w0 = v0 * (c * x0.abs()).exp();
        for i in 0..60 {
            let t = -1.0 + 0.05 * i as f64;
            let (x, v) = kink_oracle(c, x0, v0, t);
            assert_abs_diff_eq!(v * (c * x.abs()).exp(), w0, epsilon = 1e-12 * w0.abs());
            // Reported velocity matches the finite-difference slope.
            let h = 1e-6;
            let (xp, _) = kink_oracle(c, x0, v0, t + h);
            let (xm, _) = kink_oracle(c, x0, v0, t - h);
            assert_abs_diff_eq!((xp - xm) / (2.0 * h), v, epsilon = 1e-5);
        }
    }

    #[test]
    fn kink_oracle_leftward_and_reversed_runs_are_reflections() {
        let c = 0.9;
        let (x, v) = kink_oracle(c, 0.4, -1.1, 0.8);
        let (xr, vr) = kink_oracle(c, -0.4, 1.1, 0.8);
        assert_abs_diff_eq!(x, -xr, epsilon = 1e-15);
        assert_abs_diff_eq!(v, -vr, epsilon = 1e-15);
        let (xb, vb) = kink_oracle(c, 0.4, -1.1, -0.8);
        let (xf, vf) = kink_oracle(c, 0.4, 1.1, 0.8);
        assert_abs_diff_eq!(xb, xf, epsilon = 1e-15);
        assert_abs_diff_eq!(vb, -vf, epsilon = 1e-15);
    }

    #[test]
    fn rosen_reference_run_matches_frozen_constants() {
        let e = entry("rosen");
        let z = e.oracle_state(&e.reference_state(), 0.9).unwrap();
        assert_abs_diff_eq!(z.x[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[1], 0.083_605_263_157_894_74, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[2], 0.118_421_052_631_578_94, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[3], 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(z.v[2], 0.069_252_077_562_326_88, epsilon = 1e-15);
        assert_abs_diff_eq!(z.v[3], 5.0, epsilon = 1e-13);
        assert_abs_diff_eq!(z.v[1], 0.302_313_019_390_581_7, epsilon = 1e-14);
    }

    #[test]
    fn rosen_oracle_crossing_run_matches_frozen_constants() {
        let e = entry("rosen");
        let z0 = GeodesicState::new(vec![-0.5, 0.0, 0.0, 0.0], vec![1.0, 0.2, 0.4, 0.3]);
        let z = e.oracle_state(&z0, 1.2).unwrap();
        assert_abs_diff_eq!(z.x[0], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[2], 0.364_705_882_352_941_16, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[3], 0.85, epsilon = 1e-14);
        assert_abs_diff_eq!(z.x[1], 0.340_882_352_941_176_47, epsilon = 1e-14);
    }

    #[test]
    fn rosen_oracle_conserves_momenta_and_line_element() {
        let e = entry("rosen");
        let model = e.model();
        let z0 = GeodesicState::new(vec![-0.4, 0.1, 0.2, -0.3], vec![0.8, -0.2, 0.5, 0.35]);
        let p0sq = 1.0; // u0 < 0
        let a = p0sq * z0.v[2];
        let b = p0sq * z0.v[3];
        let g0 = model.metric(&z0.x).unwrap();
        let l0 = g0.inner(&z0.v, &z0.v);
        for i in 1..=10 {
            let t = 0.12 * i as f64;
            let z = e.oracle_state(&z0, t).unwrap();
            let up = z.x[0].max(0.0);
            let (p, q) = (1.0 + up, 1.0 - up);
            assert_abs_diff_eq!(p * p * z.v[2], a, epsilon = 1e-12);
            assert_abs_diff_eq!(q * q * z.v[3], b, epsilon = 1e-12);
            let g = model.metric(&z.x).unwrap();
            assert_abs_diff_eq!(g.inner(&z.v, &z.v), l0, epsilon = 1e-11);
        }
    }

    #[test]
    fn rosen_oracle_position_is_continuously_differentiable_at_the_kink() {
        let e = entry("rosen");
        let z0 = GeodesicState::new(vec![-0.5, 0.0, 0.0, 0.0], vec![1.0, 0.2, 0.4, 0.3]);
        let t_cross = 0.5;
        let h = 1e-7;
        let before = e.oracle_state(&z0, t_cross - h).unwrap();
        let after = e.oracle_state(&z0, t_cross + h).unwrap();
        for i in 0..4 {
            // Positions meet and velocities match to first order in h.
            assert_abs_diff_eq!(before.x[i], after.x[i], epsilon = 1e-6);
            assert_abs_diff_eq!(before.v[i], after.v[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn rosen_frozen_profile_run_has_quadratic_v() {
        let e = entry("rosen");
        // du = 0 on the plus side: v curves, X and Y stay affine.
        let z0 = GeodesicState::new(vec![0.5, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]);
        let z = e.oracle_state(&z0, 2.0).unwrap();
        assert_abs_diff_eq!(z.x[2], 2.0, epsilon = 1e-15);
        // curv = -2 p p' dX^2 = -3; v = 0.5 * curv * t^2 = -6.
        assert_abs_diff_eq!(z.x[1], -6.0, epsilon = 1e-13);
        let on_kink = GeodesicState::new(vec![0.0; 4], vec![0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            e.oracle_state(&on_kink, 1.0),
            Err(Error::OracleDomain { .. })
        ));
    }

    #[test]
    fn rosen_oracle_refuses_the_degenerate_zone() {
        let e = entry("rosen");
        let z0 = GeodesicState::new(vec![0.5, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.1, 0.1]);
        assert!(matches!(e.oracle_state(&z0, 1.0), Err(Error::OracleDomain { .. })));
    }

    #[test]
    fn rosen_metric_frozen_values_at_half() {
        let model = entry("rosen").model();
        let g = model.metric(&[0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g.get(2, 2), 2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(3, 3), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g.get(0, 1), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.det(), -0.140_625, epsilon = 1e-15);
        let (neg, zero, pos) = g.eigenvalue_signs();
        assert_eq!((neg, zero, pos), (1, 0, 3));
        let gamma = model
            .christoffel(&[0.5, 0.0, 0.0, 0.0], DerivativeMode::Analytic)
            .unwrap();
        assert_abs_diff_eq!(gamma.get(2, 0, 2), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma.get(1, 2, 2), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma.get(1, 3, 3), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_christoffels_agree_with_finite_differences() {
        // Probe points safely off every switching surface.
        let cases: [(&str, Vec<f64>); 5] = [
            ("flat", vec![0.3, -0.4]),
            ("kink1d", vec![0.7]),
            ("kink1d", vec![-0.6]),
            ("conformal2d", vec![0.5, -0.2]),
            ("rosen", vec![0.45, 0.1, -0.2, 0.3]),
        ];
        for (name, x) in cases {
            let model = entry(name).model();
            let exact = model.christoffel(&x, DerivativeMode::Analytic).unwrap();
            let fd = model
                .christoffel(&x, DerivativeMode::FiniteDifference { step: None })
                .unwrap();
            let n = model.dim();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert_abs_diff_eq!(exact.get(i, j, k), fd.get(i, j, k), epsilon = 2e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn mollified_christoffels_agree_with_finite_differences() {
        for name in ["kink1d", "conformal2d", "rosen"] {
            let model = entry(name).mollified(0.05).unwrap();
            let x: Vec<f64> = (0..model.dim()).map(|i| 0.01 + 0.07 * i as f64).collect();
            let exact = model.christoffel(&x, DerivativeMode::Analytic).unwrap();
            let fd = model
                .christoffel(&x, DerivativeMode::FiniteDifference { step: None })
                .unwrap();
            let n = model.dim();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert_abs_diff_eq!(exact.get(i, j, k), fd.get(i, j, k), epsilon = 2e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn mollifier_deviation_at_the_kink_matches_frozen_values() {
        let e = entry("kink1d");
        let model = e.model();
        let g0 = model.metric(&[0.0]).unwrap().get(0, 0);
        for (eps, frozen) in [
            (0.1, 0.221_402_758_160_169_83),
            (0.01, 0.020_201_340_026_755_81),
            (0.001, 0.002_002_001_334_000_267),
        ] {
            let gm = e.mollified(eps).unwrap().metric(&[0.0]).unwrap().get(0, 0);
            assert_abs_diff_eq!(gm - g0, frozen, epsilon = 1e-15);
        }
    }

    #[test]
    fn parameter_validation_rejects_bad_inputs() {
        let mut params = BTreeMap::new();
        params.insert("c".to_string(), 0.0);
        assert!(matches!(
            CatalogEntry::by_name("kink1d", &params),
            Err(Error::BadParameter { .. })
        ));
        let mut params = BTreeMap::new();
        params.insert("slope".to_string(), 1.0);
        assert!(matches!(
            CatalogEntry::by_name("kink1d", &params),
            Err(Error::BadParameter { .. })
        ));
        let mut params = BTreeMap::new();
        params.insert("c".to_string(), 1.0);
        assert!(matches!(
            CatalogEntry::by_name("rosen", &params),
            Err(Error::BadParameter { .. })
        ));
        let mut params = BTreeMap::new();
        params.insert("dim".to_string(), 2.5);
        assert!(matches!(
            CatalogEntry::by_name("flat", &params),
            Err(Error::BadParameter { .. })
        ));
        assert!(matches!(
            CatalogEntry::by_name("torus", &BTreeMap::new()),
            Err(Error::UnknownMetric(_))
        ));
    }

    #[test]
    fn riemannian_flags_and_oracles_are_as_declared() {
        assert!(entry("flat").is_riemannian());
        assert!(entry("kink1d").is_riemannian());
        assert!(entry("conformal2d").is_riemannian());
        assert!(!entry("rosen").is_riemannian());
        let mut params = BTreeMap::new();
        params.insert("dim".to_string(), 3.0);
        params.insert("time_axes".to_string(), 1.0);
        let lorentz = CatalogEntry::by_name("flat", &params).unwrap();
        assert!(!lorentz.is_riemannian());
        assert!(matches!(
            entry("conformal2d").oracle_state(&entry("conformal2d").reference_state(), 0.5),
            Err(Error::NoOracle { .. })
        ));
    }

    #[test]
    fn flat_oracle_translates_uniformly() {
        let e = entry("flat");
        let z0 = GeodesicState::new(vec![0.3, -1.0], vec![0.7, 0.2]);
        let z = e.oracle_state(&z0, 2.0).unwrap();
        assert_abs_diff_eq!(z.x[0], 1.7, epsilon = 1e-15);
        assert_abs_diff_eq!(z.x[1], -0.6, epsilon = 1e-15);
        assert_eq!(z.v, z0.v);
    }

    #[test]
    fn every_entry_builds_and_evaluates_at_its_reference_state() {
        for e in default_entries() {
            let model = e.model();
            let z0 = e.reference_state();
            let g = model.metric(&z0.x).unwrap();
            assert_eq!(g.dim(), e.dim());
            assert!(model.has_christoffel());
            let rhs = model.geodesic_rhs(&z0.flat());
            assert!(rhs.is_ok(), "{}: {:?}", e.name(), rhs);
        }
    }
}
