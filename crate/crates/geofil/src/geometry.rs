//! Charts, metric tensors, Christoffel symbols, and the metric model that ties
//! them to switching surfaces.
//!
//! Everything lives in a single chart: the metrics we care about are globally
//! defined piecewise expressions, and one chart keeps the switching-surface
//! bookkeeping honest (no transition maps to smear out the kink). A
//! [`MetricModel`] evaluates the metric either pointwise or as the smooth
//! extension from a prescribed side of each surface; the sided form is what
//! the event-driven integrator and the one-sided field limits are built on.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::filippov::{Side, SwitchingSurface};
use crate::linalg;
use crate::{Error, Result};

/// Default floor on |det g|; below it the metric counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-10;

/// Default finite-difference step scale: `h = FD_STEP_SCALE * (1 + |x|)`.
pub const FD_STEP_SCALE: f64 = 1e-6;

/// Coordinate box with a declared metric signature, one chart per model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    signature: Vec<i8>,
}

impl ChartSpec {
    /// Unbounded chart of the signature's dimension.
    pub fn unbounded(signature: &[i8]) -> Result<Self> {
        let n = signature.len();
        Self::with_bounds(signature, &vec![f64::NEG_INFINITY; n], &vec![f64::INFINITY; n])
    }

    pub fn with_bounds(signature: &[i8], lower: &[f64], upper: &[f64]) -> Result<Self> {
        if signature.is_empty() {
            return Err(Error::InvalidConfig("chart must have dimension >= 1".into()));
        }
        if signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidConfig("signature entries must be +1 or -1".into()));
        }
        if lower.len() != signature.len() || upper.len() != signature.len() {
            return Err(Error::DimensionMismatch { expected: signature.len(), got: lower.len().min(upper.len()) });
        }
        for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "chart bounds on axis {i} are not an interval: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower: lower.to_vec(), upper: upper.to_vec(), signature: signature.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn negative_count(&self) -> usize {
        self.signature.iter().filter(|s| **s < 0).count()
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        for (i, xi) in x.iter().enumerate() {
            if xi.is_nan() || *xi < self.lower[i] || *xi > self.upper[i] {
                return Err(Error::OutsideChart { axis: i, value: *xi, lo: self.lower[i], hi: self.upper[i] });
            }
        }
        Ok(())
    }
}

/// Symmetric bilinear form, dense row-major storage. Construction symmetrises,
/// so `get(i, j) == get(j, i)` holds exactly for stored data.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    dim: usize,
    data: Vec<f64>,
}

impl MetricTensor {
    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let mut data = entries.to_vec();
        for i in 0..dim {
            for j in 0..i {
                let s = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = s;
                data[j * dim + i] = s;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, e) in entries.iter().enumerate() {
            data[i * dim + i] = *e;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn det(&self) -> f64 {
        linalg::det(self.dim, &self.data)
    }

    pub fn inverse(&self) -> Option<MetricTensor> {
        linalg::inverse(self.dim, &self.data).map(|data| MetricTensor { dim: self.dim, data })
    }

    /// g(v, w).
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j) * v[i] * w[j];
            }
        }
        s
    }

    /// (negative, zero, positive) eigenvalue counts; "zero" means
    /// `|lambda| <= 1e-10 * max |lambda|`.
    pub fn eigenvalue_signs(&self) -> (usize, usize, usize) {
        let ev = linalg::sym_eigenvalues(self.dim, &self.data);
        let top = ev.iter().map(|l| l.abs()).fold(0.0_f64, f64::max);
        let tol = 1e-10 * top.max(1e-300);
        let mut counts = (0usize, 0usize, 0usize);
        for l in ev {
            if l.abs() <= tol {
                counts.1 += 1;
            } else if l < 0.0 {
                counts.0 += 1;
            } else {
                counts.2 += 1;
            }
        }
        counts
    }
}

/// Connection coefficients `Gamma^i_{jk}`, symmetrised in the lower pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>, // [i][j][k] flattened
}

impl Christoffel {
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..=j {
                    let s = 0.5 * (f(i, j, k) + f(i, k, j));
                    data[(i * dim + j) * dim + k] = s;
                    data[(i * dim + k) * dim + j] = s;
                }
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    /// Geodesic acceleration `a^i = -Gamma^i_{jk} v^j v^k`.
    pub fn acceleration(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += self.get(i, j, k) * v[j] * v[k];
                }
            }
            a[i] = -s;
        }
        a
    }
}

/// Position and velocity of a geodesic, `z = (x, v)` flattened when the solver
/// needs a plain vector. First-order fields reuse the type with an empty `v`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl GeodesicState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Self { x, v }
    }

    /// Split a flat state vector at `coord_dim`.
    pub fn from_flat(z: &[f64], coord_dim: usize) -> Self {
        Self { x: z[..coord_dim].to_vec(), v: z[coord_dim..].to_vec() }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut z = self.x.clone();
        z.extend_from_slice(&self.v);
        z
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// How to obtain Christoffel symbols from a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Closed-form symbols attached to the model (valid off the surfaces; at
    /// `sigma = 0` the plus-side extension is returned).
    Analytic,
    /// Central differences of the pointwise metric; `None` uses
    /// `FD_STEP_SCALE * (1 + |x|)`.
    FiniteDifference { step: Option<f64> },
}

type MetricFn = Box<dyn Fn(&[f64], &[Side]) -> MetricTensor + Send + Sync>;
type ChristoffelFn = Box<dyn Fn(&[f64], &[Side]) -> Christoffel + Send + Sync>;

/// A semi-Riemannian metric on a chart, possibly only Lipschitz across a set
/// of switching surfaces.
///
/// The metric closure receives, alongside the point, one [`Side`] per surface
/// selecting which smooth extension to evaluate; models without surfaces
/// ignore the slice. Pointwise evaluation resolves sides from the signs of
/// sigma (zero counting as plus), which reproduces the continuous metric
/// everywhere — the sides only matter once derivatives are taken.
pub struct MetricModel {
    chart: ChartSpec,
    surfaces: Vec<SwitchingSurface>,
    metric_fn: MetricFn,
    christoffel_fn: Option<ChristoffelFn>,
    lipschitz_bound: Option<f64>,
    degeneracy_floor: f64,
}

impl MetricModel {
    /// Model with no switching surfaces.
    pub fn smooth(chart: ChartSpec, metric: impl Fn(&[f64]) -> MetricTensor + Send + Sync + 'static) -> Self {
        Self {
            chart,
            surfaces: Vec::new(),
            metric_fn: Box::new(move |x, _| metric(x)),
            christoffel_fn: None,
            lipschitz_bound: None,
            degeneracy_floor: DEGENERACY_FLOOR,
        }
    }

    /// Model whose metric is smooth on each side of the given surfaces.
    pub fn piecewise(
        chart: ChartSpec,
        surfaces: Vec<SwitchingSurface>,
        metric: impl Fn(&[f64], &[Side]) -> MetricTensor + Send + Sync + 'static,
    ) -> Self {
        Self {
            chart,
            surfaces,
            metric_fn: Box::new(metric),
            christoffel_fn: None,
            lipschitz_bound: None,
            degeneracy_floor: DEGENERACY_FLOOR,
        }
    }

    pub fn with_christoffel(
        mut self,
        f: impl Fn(&[f64], &[Side]) -> Christoffel + Send + Sync + 'static,
    ) -> Self {
        self.christoffel_fn = Some(Box::new(f));
        self
    }

    pub fn with_lipschitz_bound(mut self, bound: f64) -> Self {
        self.lipschitz_bound = Some(bound);
        self
    }

    pub fn with_degeneracy_floor(mut self, floor: f64) -> Self {
        self.degeneracy_floor = floor;
        self
    }

    pub fn chart(&self) -> &ChartSpec {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn surfaces(&self) -> &[SwitchingSurface] {
        &self.surfaces
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz_bound
    }

    pub fn degeneracy_floor(&self) -> f64 {
        self.degeneracy_floor
    }

    pub fn has_christoffel(&self) -> bool {
        self.christoffel_fn.is_some()
    }

    /// Sides of every surface at `x`, = signs of sigma with zero as plus.
    pub fn sides_at(&self, x: &[f64]) -> Vec<Side> {
        self.surfaces.iter().map(|s| s.side(x)).collect()
    }

    /// Pointwise metric at `x`: chart membership and the degeneracy floor are
    /// enforced, the signature is not (see [`Self::metric_checked`]).
    pub fn metric(&self, x: &[f64]) -> Result<MetricTensor> {
        let sides = self.sides_at(x);
        self.metric_sided(x, &sides)
    }

    /// Metric of the prescribed smooth extension at `x`.
    pub fn metric_sided(&self, x: &[f64], sides: &[Side]) -> Result<MetricTensor> {
        self.chart.check(x)?;
        if sides.len() != self.surfaces.len() {
            return Err(Error::DimensionMismatch { expected: self.surfaces.len(), got: sides.len() });
        }
        let g = (self.metric_fn)(x, sides);
        let det = g.det();
        if det.abs() <= self.degeneracy_floor {
            return Err(Error::DegenerateMetric { det, floor: self.degeneracy_floor });
        }
        Ok(g)
    }

    /// Pointwise metric with the eigenvalue sign pattern verified against the
    /// chart signature.
    pub fn metric_checked(&self, x: &[f64]) -> Result<MetricTensor> {
        let g = self.metric(x)?;
        let (neg, zero, _pos) = g.eigenvalue_signs();
        let expected = self.chart.negative_count();
        if zero > 0 || neg != expected {
            return Err(Error::SignatureMismatch { expected_negative: expected, found_negative: neg });
        }
        Ok(g)
    }

    /// Christoffel symbols at `x` with sides resolved pointwise.
    ///
    /// In finite-difference mode the probe stencil must not straddle a
    /// surface: if the estimated distance `|sigma| / |grad sigma|` to any
    /// surface is within the step, the call is rejected.
    pub fn christoffel(&self, x: &[f64], mode: DerivativeMode) -> Result<Christoffel> {
        match mode {
            DerivativeMode::Analytic => {
                let sides = self.sides_at(x);
                self.christoffel_analytic(x, &sides)
            }
            DerivativeMode::FiniteDifference { step } => {
                let h = step.unwrap_or(FD_STEP_SCALE * (1.0 + linalg::norm(x)));
                self.guard_surface_distance(x, h)?;
                self.christoffel_fd_pointwise(x, h)
            }
        }
    }

    /// Christoffel symbols of the prescribed smooth extension.
    pub fn christoffel_sided(&self, x: &[f64], sides: &[Side], mode: DerivativeMode) -> Result<Christoffel> {
        match mode {
            DerivativeMode::Analytic => self.christoffel_analytic(x, sides),
            DerivativeMode::FiniteDifference { step } => {
                let h = step.unwrap_or(FD_STEP_SCALE * (1.0 + linalg::norm(x)));
                self.christoffel_fd(x, h, |p| self.metric_sided(p, sides))
            }
        }
    }

    fn christoffel_analytic(&self, x: &[f64], sides: &[Side]) -> Result<Christoffel> {
        let f = self.christoffel_fn.as_ref().ok_or(Error::NoAnalyticChristoffel)?;
        self.chart.check(x)?;
        if sides.len() != self.surfaces.len() {
            return Err(Error::DimensionMismatch { expected: self.surfaces.len(), got: sides.len() });
        }
        Ok(f(x, sides))
    }

    fn guard_surface_distance(&self, x: &[f64], h: f64) -> Result<()> {
        for s in &self.surfaces {
            let sigma = s.sigma(x);
            let g = s.checked_gradient(x)?;
            let dist = sigma.abs() / linalg::norm(&g);
            if dist <= h {
                return Err(Error::SurfaceTooClose {
                    surface: s.label().into(),
                    distance: dist,
                    step: h,
                });
            }
        }
        Ok(())
    }

    fn christoffel_fd_pointwise(&self, x: &[f64], h: f64) -> Result<Christoffel> {
        self.christoffel_fd(x, h, |p| self.metric(p))
    }

    /// Levi-Civita symbols from central differences of `eval`, then
    /// symmetrised over the lower index pair.
    fn christoffel_fd(
        &self,
        x: &[f64],
        h: f64,
        eval: impl Fn(&[f64]) -> Result<MetricTensor>,
    ) -> Result<Christoffel> {
        let n = self.dim();
        let g0 = eval(x)?;
        let ginv = g0.inverse().ok_or(Error::DegenerateMetric {
            det: g0.det(),
            floor: self.degeneracy_floor,
        })?;
        // dg[m] = d g / d x^m as a flat n*n block
        let mut dg: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut probe = x.to_vec();
        for m in 0..n {
            probe[m] = x[m] + h;
            let gp = eval(&probe)?;
            probe[m] = x[m] - h;
            let gm = eval(&probe)?;
            probe[m] = x[m];
            dg.push(
                gp.as_slice()
                    .iter()
                    .zip(gm.as_slice())
                    .map(|(p, q)| (p - q) / (2.0 * h))
                    .collect(),
            );
        }
        Ok(Christoffel::from_fn(n, |i, j, k| {
            let mut s = 0.0;
            for l in 0..n {
                s += ginv.get(i, l) * (dg[j][l * n + k] + dg[k][j * n + l] - dg[l][j * n + k]);
            }
            0.5 * s
        }))
    }

    /// Right-hand side of the first-order geodesic system at `z = (x, v)`,
    /// sides resolved pointwise. Prefers analytic symbols when attached.
    pub fn geodesic_rhs(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if z.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: z.len() });
        }
        let sides = self.sides_at(&z[..n]);
        self.geodesic_rhs_sided(z, &sides)
    }

    /// Geodesic right-hand side of the prescribed smooth extension; this is
    /// the one-sided limit the Filippov construction needs on a surface.
    pub fn geodesic_rhs_sided(&self, z: &[f64], sides: &[Side]) -> Result<Vec<f64>> {
        let n = self.dim();
        if z.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: z.len() });
        }
        let (x, v) = z.split_at(n);
        let gamma = if self.christoffel_fn.is_some() {
            self.christoffel_sided(x, sides, DerivativeMode::Analytic)?
        } else {
            self.christoffel_sided(x, sides, DerivativeMode::FiniteDifference { step: None })?
        };
        let mut rhs = v.to_vec();
        rhs.extend(gamma.acceleration(v));
        Ok(rhs)
    }

    /// Central-difference partials of the pointwise metric without the
    /// surface-proximity guard. Used by the variational diagnostics, where an
    /// occasional straddled stencil only perturbs a descent direction.
    pub(crate) fn metric_partials_unguarded(&self, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut probe = x.to_vec();
        let mut out = Vec::with_capacity(n);
        for m in 0..n {
            probe[m] = x[m] + h;
            let gp = self.metric(&probe)?;
            probe[m] = x[m] - h;
            let gm = self.metric(&probe)?;
            probe[m] = x[m];
            out.push(
                gp.as_slice()
                    .iter()
                    .zip(gm.as_slice())
                    .map(|(p, q)| (p - q) / (2.0 * h))
                    .collect(),
            );
        }
        Ok(out)
    }
}

impl core::fmt::Debug for MetricModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MetricModel")
            .field("dim", &self.dim())
            .field("surfaces", &self.surfaces.len())
            .field("analytic_christoffel", &self.christoffel_fn.is_some())
            .finish()
    }
}
