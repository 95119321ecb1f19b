//! Hand-built discontinuous flows with known behaviour.
//!
//! Geodesic fields of continuous metrics never slide — the velocity is shared
//! by both one-sided limits, so the normal rates agree and every genuine
//! contact is a crossing. These first-order fields are deliberately
//! discontinuous in the state itself and exercise the remaining contact
//! kinds: attracting surfaces (sliding), repulsive surfaces (tie-break), and
//! sticking equilibria.

use alloc::vec;

use crate::filippov::{Side, SwitchingSurface};
use crate::geometry::GeodesicState;
use crate::solver::PiecewiseField;

/// Planar field `(-sgn(x1), 1)` with the switching line `x1 = 0`.
///
/// Both sides push toward the line; once a trajectory reaches it, the unique
/// tangential combination is `(0, 1)` with coefficient 1/2, so motion
/// continues straight up the line.
pub fn sliding_demo() -> PiecewiseField {
    PiecewiseField::new(
        2,
        vec![SwitchingSurface::coordinate("x1", 0, 2)],
        |_x: &[f64], sides: &[Side]| vec![-sides[0].sign(), 1.0],
    )
}

/// Start state for [`sliding_demo`] that reaches the line at `(0, 0)` at
/// `t = 1` and then follows `x(t) = (0, t - 1)`.
pub fn sliding_start() -> GeodesicState {
    GeodesicState::new(vec![1.0, -1.0], vec![])
}

/// Planar field `(sgn(x1), 1)`: both sides point away from `x1 = 0`.
///
/// From the line itself the continuation is genuinely ambiguous; the
/// integrator picks the configured tie-break side and flags the event.
pub fn repulsive_demo() -> PiecewiseField {
    PiecewiseField::new(
        2,
        vec![SwitchingSurface::coordinate("x1", 0, 2)],
        |_x: &[f64], sides: &[Side]| vec![sides[0].sign(), 1.0],
    )
}

/// The line field `-sgn(x)`: every trajectory reaches the origin in finite
/// time and sticks there (the sliding combination is the zero field).
pub fn stick_demo() -> PiecewiseField {
    PiecewiseField::new(
        1,
        vec![SwitchingSurface::coordinate("origin", 0, 1)],
        |_x: &[f64], sides: &[Side]| vec![-sides[0].sign()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filippov::{sliding_field, ContactKind};
    use crate::solver::{
        integrate_caratheodory_system, integrate_switched, IntegratorConfig, StopReason,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn sliding_demo_follows_the_line_after_contact() {
        let sys = sliding_demo();
        let traj =
            integrate_switched(&sys, &sliding_start(), (0.0, 3.0), &IntegratorConfig::default())
                .unwrap();
        assert!(traj.completed());
        assert_eq!(traj.events.len(), 1);
        let ev = &traj.events[0];
        assert_eq!(ev.kind, ContactKind::Sliding);
        assert_abs_diff_eq!(ev.t, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ev.state_before.x[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ev.state_before.x[1], 0.0, epsilon = 1e-9);
        for t in [1.5, 2.0, 3.0] {
            let z = traj.state_at(t).unwrap();
            assert_abs_diff_eq!(z.x[0], 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(z.x[1], t - 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn sliding_selection_is_tangent_with_coefficient_half() {
        let sys = sliding_demo();
        let surf = &sys.surfaces()[0];
        let f_minus = sys.value(&[0.0, 0.0], &[Side::Minus]);
        let f_plus = sys.value(&[0.0, 0.0], &[Side::Plus]);
        let sf = sliding_field(surf, &[0.0, 0.0], &f_minus, &f_plus, 1e-10).unwrap();
        assert_abs_diff_eq!(sf.alpha, 0.5, epsilon = 1e-15);
        // Tangency of the selection: grad sigma . f_s = 0 exactly.
        assert_eq!(sf.field[0], 0.0);
        assert_abs_diff_eq!(sf.field[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn repulsive_start_is_flagged_and_takes_the_tie_break_side() {
        let sys = repulsive_demo();
        let z0 = GeodesicState::new(vec![0.0, 0.0], vec![]);
        let traj =
            integrate_switched(&sys, &z0, (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        assert!(traj.completed());
        assert_eq!(traj.events[0].kind, ContactKind::Repulsive);
        assert!(traj.events[0].flagged);
        let end = traj.state_at(2.0).unwrap();
        // Tie-break defaults to the plus side.
        assert_abs_diff_eq!(end.x[0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(end.x[1], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn stick_demo_reaches_the_origin_and_stays() {
        let sys = stick_demo();
        let z0 = GeodesicState::new(vec![0.7], vec![]);
        let traj =
            integrate_switched(&sys, &z0, (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        assert!(traj.completed());
        assert_eq!(traj.events[0].kind, ContactKind::Sliding);
        assert_abs_diff_eq!(traj.events[0].t, 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(traj.state_at(2.0).unwrap().x[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn pointwise_euler_chatters_within_one_step_of_the_surface() {
        let sys = sliding_demo();
        let step = 1e-3;
        let traj = integrate_caratheodory_system(&sys, &sliding_start(), (0.0, 3.0), step, Side::Plus)
            .unwrap();
        assert!(matches!(traj.stop, StopReason::Completed));
        let mut worst = 0.0_f64;
        for s in &traj.samples {
            if s.t >= 1.0 + step {
                worst = worst.max(s.y[0].abs());
            }
        }
        assert!(worst <= step * (1.0 + 1e-9), "chattering amplitude {worst} exceeds the step {step}");
        // The drift component still tracks the sliding solution to O(step).
        let end = traj.samples.last().unwrap();
        assert_abs_diff_eq!(end.y[1], 2.0, epsilon = 5.0 * step);
    }
}
