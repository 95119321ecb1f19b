//! Convex-hull closures of discontinuous fields and the bookkeeping around a
//! switching surface: which side a point is on, how a trajectory meets the
//! surface, and what the sliding vector field is when neither side lets go.
//!
//! The set-valued closure of a field `F` at `x` is the intersection over
//! `delta` and over null sets `S` of the convex hulls of `F(B(x, delta) \ S)`.
//! Two computable faces of that definition live here: [`piecewise_hull`]
//! evaluates it exactly for a field with one-sided limits across a single
//! surface (singleton off the surface, a segment on it), and [`sampled_hull`]
//! estimates it for a black-box field by Monte-Carlo sampling over a shrinking
//! ladder of balls. Continuous sampling realises the null-set exclusion: a
//! measure-zero set is hit with probability zero, so an isolated spike in the
//! field simply never shows up.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::linalg;
use crate::rng::sample_ball;
use crate::{Error, Result};

/// Default half-thickness of the numerical surface band: |sigma| below this is
/// "on the surface".
pub const SURFACE_TOL: f64 = 1e-9;

/// Normal rates with magnitude below this are treated as tangential.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Surface gradients with norm below this are considered degenerate.
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// Which side of a switching surface (sign of sigma) a smooth extension
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    /// Side of a sigma value; exact zero counts as `Plus`.
    pub fn of(sigma: f64) -> Self {
        if sigma >= 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

/// A codimension-one switching surface `{sigma = 0}` with its gradient.
///
/// The gradient must not vanish on the surface; this is spot-checked at query
/// points rather than proved.
pub struct SwitchingSurface {
    label: String,
    sigma: alloc::boxed::Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad: alloc::boxed::Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl SwitchingSurface {
    pub fn new(
        label: impl Into<String>,
        sigma: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), sigma: alloc::boxed::Box::new(sigma), grad: alloc::boxed::Box::new(grad) }
    }

    /// The coordinate hyperplane `{x[axis] = 0}`.
    pub fn coordinate(label: impl Into<String>, axis: usize, dim: usize) -> Self {
        Self::new(
            label,
            move |x: &[f64]| x[axis],
            move |_x: &[f64]| {
                let mut g = vec![0.0; dim];
                g[axis] = 1.0;
                g
            },
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sigma(&self, x: &[f64]) -> f64 {
        (self.sigma)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    /// Gradient with the degeneracy spot-check applied.
    pub fn checked_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.gradient(x);
        let n = linalg::norm(&g);
        if n <= GRADIENT_FLOOR {
            return Err(Error::DegenerateSurface { surface: self.label.clone(), norm: n });
        }
        Ok(g)
    }

    pub fn side(&self, x: &[f64]) -> Side {
        Side::of(self.sigma(x))
    }
}

impl core::fmt::Debug for SwitchingSurface {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SwitchingSurface").field("label", &self.label).finish()
    }
}

/// How a trajectory meets a surface, read off the one-sided normal rates
/// `a = grad sigma . f_minus` and `b = grad sigma . f_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ContactKind {
    /// Both rates positive: the flow pushes through from minus to plus.
    CrossingUp,
    /// Both rates negative: through from plus to minus.
    CrossingDown,
    /// Both sides push toward the surface (a > 0 > b): the flow is trapped.
    Sliding,
    /// Both sides push away (a < 0 < b): solutions leave on either side.
    Repulsive,
    /// At least one rate within the tangency tolerance of zero.
    Tangential,
}

/// Classification together with the rates it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub kind: ContactKind,
    pub a: f64,
    pub b: f64,
}

/// Classify from the raw normal rates. Tangency is checked first so the
/// tolerance band wins over a bare sign reading.
pub fn classify_rates(a: f64, b: f64, tangency_tol: f64) -> ContactKind {
    if a.abs() <= tangency_tol || b.abs() <= tangency_tol {
        ContactKind::Tangential
    } else if a > 0.0 && b > 0.0 {
        ContactKind::CrossingUp
    } else if a < 0.0 && b < 0.0 {
        ContactKind::CrossingDown
    } else if a > 0.0 && b < 0.0 {
        ContactKind::Sliding
    } else {
        ContactKind::Repulsive
    }
}

/// Classify the contact of a field with `surface` at `x`, given the one-sided
/// field limits there.
pub fn classify_contact(
    surface: &SwitchingSurface,
    x: &[f64],
    f_minus: &[f64],
    f_plus: &[f64],
    tangency_tol: f64,
) -> Result<Contact> {
    let g = surface.checked_gradient(x)?;
    if g.len() != f_minus.len() || g.len() != f_plus.len() {
        return Err(Error::DimensionMismatch { expected: g.len(), got: f_minus.len().max(f_plus.len()) });
    }
    let a = linalg::dot(&g, f_minus);
    let b = linalg::dot(&g, f_plus);
    Ok(Contact { kind: classify_rates(a, b, tangency_tol), a, b })
}

/// The convex combination of the one-sided limits that is tangent to the
/// surface, defined on sliding contacts only.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingField {
    /// Weight of the plus-side limit; in [0, 1] on a sliding contact.
    pub alpha: f64,
    pub field: Vec<f64>,
}

/// Solve `grad sigma . (alpha f_plus + (1 - alpha) f_minus) = 0`.
///
/// Precondition: the contact is sliding. On a genuine sliding contact
/// `a > 0 > b`, so the denominator `a - b` is positive and `alpha` lands
/// strictly inside (0, 1).
pub fn sliding_field(
    surface: &SwitchingSurface,
    x: &[f64],
    f_minus: &[f64],
    f_plus: &[f64],
    tangency_tol: f64,
) -> Result<SlidingField> {
    let contact = classify_contact(surface, x, f_minus, f_plus, tangency_tol)?;
    if contact.kind != ContactKind::Sliding {
        return Err(Error::NotSliding { found: contact.kind });
    }
    sliding_from_rates(contact.a, contact.b, f_minus, f_plus)
}

/// Same combination from precomputed rates; used by the integrator where the
/// gradient has already been lifted to state space.
pub fn sliding_from_rates(a: f64, b: f64, f_minus: &[f64], f_plus: &[f64]) -> Result<SlidingField> {
    let denom = a - b;
    if denom == 0.0 {
        return Err(Error::SlidingNoSolution { rate: a });
    }
    let alpha = a / denom;
    let field = f_minus
        .iter()
        .zip(f_plus)
        .map(|(m, p)| alpha * p + (1.0 - alpha) * m)
        .collect();
    Ok(SlidingField { alpha, field })
}

// ---------------------------------------------------------------------------
// Convex sets
// ---------------------------------------------------------------------------

/// A compact convex set stored by its extreme points.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Singleton(Vec<f64>),
    Segment { a: Vec<f64>, b: Vec<f64> },
    /// Hull-extreme vertices; in two dimensions they are ordered
    /// counter-clockwise.
    Polytope { vertices: Vec<Vec<f64>> },
}

impl ConvexSet {
    /// Convex hull of a point cloud, collapsed to the simplest kind that
    /// represents it. Points closer than `1e-12 * (1 + scale)` are merged.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("convex hull of an empty point set".to_string()));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim.max(1), got: 0 });
        }
        let scale = points
            .iter()
            .map(|p| linalg::norm(p))
            .fold(0.0_f64, f64::max);
        let tol = 1e-12 * (1.0 + scale);

        let mut unique: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !unique.iter().any(|q| linalg::dist(p, q) <= tol) {
                unique.push(p.clone());
            }
        }
        if unique.len() == 1 {
            return Ok(ConvexSet::Singleton(unique.pop().unwrap()));
        }

        if dim == 1 {
            let lo = unique.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = unique.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            return Ok(ConvexSet::Segment { a: vec![lo], b: vec![hi] });
        }

        // Collinear clouds collapse to the segment between the two points
        // farthest apart.
        if let Some(seg) = collinear_segment(&unique, tol) {
            return Ok(seg);
        }

        if dim == 2 {
            let hull = monotone_chain(&unique);
            return Ok(match hull.len() {
                1 => ConvexSet::Singleton(hull.into_iter().next().unwrap()),
                2 => {
                    let mut it = hull.into_iter();
                    ConvexSet::Segment { a: it.next().unwrap(), b: it.next().unwrap() }
                }
                _ => ConvexSet::Polytope { vertices: hull },
            });
        }

        // Higher dimensions: keep points that are support-maximal in some
        // probe direction, then drop any that sit in the hull of the others.
        let candidates = directional_support(&unique, dim);
        let vertices = extreme_filter(candidates, tol);
        Ok(match vertices.len() {
            1 => ConvexSet::Singleton(vertices.into_iter().next().unwrap()),
            2 => {
                let mut it = vertices.into_iter();
                ConvexSet::Segment { a: it.next().unwrap(), b: it.next().unwrap() }
            }
            _ => ConvexSet::Polytope { vertices },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Singleton(p) => p.len(),
            ConvexSet::Segment { a, .. } => a.len(),
            ConvexSet::Polytope { vertices } => vertices[0].len(),
        }
    }

    pub fn vertices(&self) -> Vec<&[f64]> {
        match self {
            ConvexSet::Singleton(p) => vec![p.as_slice()],
            ConvexSet::Segment { a, b } => vec![a.as_slice(), b.as_slice()],
            ConvexSet::Polytope { vertices } => vertices.iter().map(|v| v.as_slice()).collect(),
        }
    }

    /// Euclidean distance from `p` to the set. Exact for singletons, segments
    /// and planar polytopes; iterative (Gilbert projection, tolerance about
    /// 1e-12 relative) for higher-dimensional polytopes.
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            ConvexSet::Singleton(a) => linalg::dist(p, a),
            ConvexSet::Segment { a, b } => point_segment_distance(p, a, b),
            ConvexSet::Polytope { vertices } => {
                if self.dim() == 2 {
                    polygon_distance(p, vertices)
                } else {
                    gilbert_distance(p, vertices)
                }
            }
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Largest pairwise distance between extreme points.
    pub fn diameter(&self) -> f64 {
        let vs = self.vertices();
        let mut d = 0.0_f64;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d = d.max(linalg::dist(vs[i], vs[j]));
            }
        }
        d
    }

    /// Hausdorff distance between two convex sets. The supremum over each set
    /// is attained at an extreme point, so scanning vertices is exact (up to
    /// the per-point distance accuracy).
    pub fn hausdorff(&self, other: &ConvexSet) -> f64 {
        let fwd = self
            .vertices()
            .iter()
            .map(|v| other.distance(v))
            .fold(0.0_f64, f64::max);
        let back = other
            .vertices()
            .iter()
            .map(|v| self.distance(v))
            .fold(0.0_f64, f64::max);
        fwd.max(back)
    }
}

fn collinear_segment(points: &[Vec<f64>], tol: f64) -> Option<ConvexSet> {
    let (mut pi, mut pj, mut best) = (0, 0, 0.0_f64);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = linalg::dist(&points[i], &points[j]);
            if d > best {
                best = d;
                pi = i;
                pj = j;
            }
        }
    }
    if best <= tol {
        return Some(ConvexSet::Singleton(points[0].clone()));
    }
    let (a, b) = (&points[pi], &points[pj]);
    let on_line = points
        .iter()
        .all(|p| point_segment_distance(p, a, b) <= 10.0 * tol);
    on_line.then(|| ConvexSet::Segment { a: a.clone(), b: b.clone() })
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns CCW hull vertices without the duplicated
/// starting point.
fn monotone_chain(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap().then(p[1].partial_cmp(&q[1]).unwrap()));
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn directional_support(points: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1ec7);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for axis in 0..dim {
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        dirs.push(e.clone());
        e[axis] = -1.0;
        dirs.push(e);
    }
    for _ in 0..16 * dim {
        let mut d: Vec<f64> = (0..dim).map(|_| crate::rng::std_normal(&mut rng)).collect();
        let n = linalg::norm(&d);
        if n > 0.0 {
            d.iter_mut().for_each(|x| *x /= n);
            dirs.push(d);
        }
    }
    let mut picked: Vec<Vec<f64>> = Vec::new();
    for d in &dirs {
        let best = points
            .iter()
            .max_by(|p, q| linalg::dot(p, d).partial_cmp(&linalg::dot(q, d)).unwrap())
            .unwrap();
        if !picked.iter().any(|p| p == best) {
            picked.push(best.clone());
        }
    }
    picked
}

/// Drop candidates that lie (numerically) inside the hull of the remaining
/// ones, so stored polytope vertices are genuinely extreme.
fn extreme_filter(mut candidates: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut i = 0;
    while i < candidates.len() && candidates.len() > 2 {
        let v = candidates[i].clone();
        let rest: Vec<Vec<f64>> = candidates
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        if gilbert_distance(&v, &rest) <= 10.0 * tol {
            candidates.remove(i);
        } else {
            i += 1;
        }
    }
    candidates
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = linalg::sub(b, a);
    let ap = linalg::sub(p, a);
    let denom = linalg::dot(&ab, &ab);
    if denom == 0.0 {
        return linalg::norm(&ap);
    }
    let t = (linalg::dot(&ap, &ab) / denom).clamp(0.0, 1.0);
    let closest: Vec<f64> = a.iter().zip(&ab).map(|(ai, d)| ai + t * d).collect();
    linalg::dist(p, &closest)
}

/// Distance to a CCW polygon: zero inside, else nearest edge.
fn polygon_distance(p: &[f64], vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    let inside = (0..n).all(|i| cross2(&vertices[i], &vertices[(i + 1) % n], p) >= -1e-300);
    if inside {
        return 0.0;
    }
    (0..n)
        .map(|i| point_segment_distance(p, &vertices[i], &vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Gilbert's alternating projection toward the hull of `vertices`.
fn gilbert_distance(p: &[f64], vertices: &[Vec<f64>]) -> f64 {
    let scale = 1.0
        + linalg::norm(p)
        + vertices.iter().map(|v| linalg::norm(v)).fold(0.0_f64, f64::max);
    let mut z = vertices
        .iter()
        .min_by(|a, b| linalg::dist(p, a).partial_cmp(&linalg::dist(p, b)).unwrap())
        .unwrap()
        .clone();
    for _ in 0..20_000 {
        let to_p = linalg::sub(p, &z);
        let d = linalg::norm(&to_p);
        if d <= 1e-14 * scale {
            return 0.0;
        }
        // Support vertex in the direction of p.
        let s = vertices
            .iter()
            .max_by(|a, b| linalg::dot(a, &to_p).partial_cmp(&linalg::dot(b, &to_p)).unwrap())
            .unwrap();
        // No vertex improves on z in this direction: z is the projection.
        let gap = linalg::dot(&linalg::sub(s, &z), &to_p);
        if gap <= 1e-14 * scale * scale {
            return d;
        }
        // Exact minimiser of |p - (z + t (s - z))| over t in [0, 1].
        let sz = linalg::sub(s, &z);
        let t = (linalg::dot(&to_p, &sz) / linalg::dot(&sz, &sz)).clamp(0.0, 1.0);
        z = z.iter().zip(&sz).map(|(zi, d)| zi + t * d).collect();
    }
    linalg::dist(p, &z)
}

// ---------------------------------------------------------------------------
// Field closures
// ---------------------------------------------------------------------------

/// Exact closure for a field with one-sided limits across a single surface:
/// the singleton of the active side off the surface, the segment between the
/// limits on it (collapsed if they coincide).
pub fn piecewise_hull(
    surface: &SwitchingSurface,
    x: &[f64],
    f_minus: &[f64],
    f_plus: &[f64],
    surface_tol: f64,
) -> ConvexSet {
    let s = surface.sigma(x);
    if s > surface_tol {
        ConvexSet::Singleton(f_plus.to_vec())
    } else if s < -surface_tol {
        ConvexSet::Singleton(f_minus.to_vec())
    } else {
        let scale = 1.0 + linalg::norm(f_minus).max(linalg::norm(f_plus));
        if linalg::dist(f_minus, f_plus) <= 1e-12 * scale {
            ConvexSet::Singleton(f_minus.to_vec())
        } else {
            ConvexSet::Segment { a: f_minus.to_vec(), b: f_plus.to_vec() }
        }
    }
}

/// Ladder of shrinking sampling radii for [`sampled_hull`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilippovConfig {
    /// Strictly decreasing, all positive.
    pub delta_ladder: Vec<f64>,
    pub samples_per_ball: usize,
    pub seed: u64,
}

impl Default for FilippovConfig {
    fn default() -> Self {
        Self { delta_ladder: vec![1e-2, 1e-3, 1e-4], samples_per_ball: 1000, seed: 0xf111 }
    }
}

impl FilippovConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta_ladder.is_empty() {
            return Err(Error::InvalidConfig("delta ladder is empty".to_string()));
        }
        for w in self.delta_ladder.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "delta ladder not strictly decreasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.delta_ladder.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidConfig("delta ladder entries must be positive and finite".to_string()));
        }
        if self.samples_per_ball < 10 {
            return Err(Error::InvalidConfig(format!(
                "samples_per_ball = {} is below the minimum of 10",
                self.samples_per_ball
            )));
        }
        Ok(())
    }
}

/// One radius of the sampling ladder.
#[derive(Debug, Clone)]
pub struct HullRung {
    pub delta: f64,
    pub hull: ConvexSet,
    /// Fraction of probe points where the field was undefined.
    pub undefined_fraction: f64,
}

/// Monte-Carlo estimate of the field closure at `x` over the whole ladder.
#[derive(Debug, Clone)]
pub struct SampledHull {
    pub rungs: Vec<HullRung>,
}

impl SampledHull {
    /// Hull at the smallest radius — the working estimate of the closure.
    pub fn hull(&self) -> &ConvexSet {
        &self.rungs.last().unwrap().hull
    }

    pub fn diameters(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.hull.diameter()).collect()
    }

    /// Hausdorff distance between consecutive rungs, coarse to fine.
    pub fn rung_drift(&self) -> Vec<f64> {
        self.rungs
            .windows(2)
            .map(|w| w[0].hull.hausdorff(&w[1].hull))
            .collect()
    }
}

/// Sample the field uniformly over `B(x, delta)` for each ladder radius and
/// hull the observed values.
///
/// The field may return `None` where it is undefined; those probes are skipped
/// (they form the excluded null set). More than half undefined at any rung is
/// an error — the field is then not defined almost everywhere near `x`.
pub fn sampled_hull(
    field: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    x: &[f64],
    config: &FilippovConfig,
) -> Result<SampledHull> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rungs = Vec::with_capacity(config.delta_ladder.len());
    for &delta in &config.delta_ladder {
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(config.samples_per_ball);
        let mut undefined = 0usize;
        for _ in 0..config.samples_per_ball {
            let p = sample_ball(&mut rng, x, delta);
            match field(&p) {
                Some(v) => values.push(v),
                None => undefined += 1,
            }
        }
        if 2 * undefined > config.samples_per_ball {
            return Err(Error::FieldMostlyUndefined { undefined, total: config.samples_per_ball });
        }
        let hull = ConvexSet::from_points(&values)?;
        rungs.push(HullRung {
            delta,
            hull,
            undefined_fraction: undefined as f64 / config.samples_per_ball as f64,
        });
    }
    Ok(SampledHull { rungs })
}
