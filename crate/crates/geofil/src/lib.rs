//! Geodesic flows of semi-Riemannian metrics that are only locally Lipschitz,
//! integrated as solutions of a Filippov differential inclusion.
//!
//! A metric whose coefficients have kinks along a hypersurface (an `x -> |x|`
//! profile, an impulsive wave front, ...) has Christoffel symbols that jump
//! across that surface, so the geodesic equation has a discontinuous right-hand
//! side and classical ODE theory stops short. The standard repair is Filippov's:
//! replace the field at each point by the essential convex hull of its nearby
//! values and look for absolutely continuous curves solving the resulting
//! inclusion. For geodesic fields this regularisation is benign — solutions
//! exist, are C^1 in time, and coincide with limits of solutions of mollified
//! metrics — and this crate makes those statements executable.
//!
//! The pieces:
//!
//! * [`geometry`] — charts, metric tensors, Christoffel symbols (analytic or
//!   finite-difference), and the first-order geodesic field on states `(x, v)`.
//! * [`filippov`] — switching surfaces, contact classification, sliding
//!   fields, and convex-hull closures of a field near a point (both the exact
//!   two-sided rule and a sampled Monte-Carlo estimate).
//! * [`solver`] — an event-driven adaptive Runge-Kutta integrator with dense
//!   output that detects surface crossings, grazes, and sliding segments, plus
//!   fixed-step pointwise (Caratheodory) and mollified-metric integrators for
//!   cross-checks.
//! * [`catalog`] — a small family of piecewise-smooth metrics with closed-form
//!   geodesics derived from their conservation laws, used as oracles.
//! * [`diagnostics`] — the verification battery: velocity continuity across
//!   events, inclusion residuals, energy drift, mollification convergence,
//!   Hölder exponents of the velocity near a crossing, uniqueness funnels, and
//!   a variational shortest-curve cross-check.
//! * [`demo`] — tiny non-geodesic piecewise fields (sign field, sliding ramp,
//!   repulsive wedge) exercising the same machinery.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion CLI crate
//! carries file formats and IO.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod catalog;
pub mod demo;
pub mod diagnostics;
mod error;
pub mod filippov;
pub mod geometry;
mod linalg;
mod rng;
pub mod solver;

pub use error::{Error, Result};
