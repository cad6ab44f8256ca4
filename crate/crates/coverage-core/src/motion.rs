//! Proportional attraction, pairwise Gaussian repulsion, and the explicit
//! Euler step with norm saturation and region clamping.

use crate::geom::{distance, Region, Vec2};

/// The velocity command for one agent in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Attraction toward the reference.
    pub u: Vec2,
    /// Repulsion away from close agents.
    pub du: Vec2,
    /// Post-saturation velocity, norm bounded by `v_max`.
    pub applied: Vec2,
}

impl ControlInput {
    pub fn new(u: Vec2, du: Vec2, v_max: f64) -> Self {
        ControlInput {
            u,
            du,
            applied: saturate(u + du, v_max),
        }
    }
}

fn saturate(v: Vec2, v_max: f64) -> Vec2 {
    let speed = v.norm();
    if speed > v_max {
        v * (v_max / speed)
    } else {
        v
    }
}

/// Proportional pull toward the reference position; zero when holding.
pub fn attraction(x: Vec2, reference: Option<Vec2>, k_gain: f64) -> Vec2 {
    match reference {
        Some(r) => (r - x) * k_gain,
        None => Vec2::ZERO,
    }
}

/// Sum of Gaussian-decay repulsion from every other agent within `d_k`.
/// Agents without an assigned target push with the reduced gain `k_s * k_d`
/// so they can slip past crowds instead of deadlocking.
pub fn repulsion(
    i: usize,
    positions: &[Vec2],
    has_assigned: bool,
    k_d: f64,
    k_s: f64,
    d_k: f64,
) -> Vec2 {
    let gain = if has_assigned { k_d } else { k_s * k_d };
    let xi = positions[i];
    let mut out = Vec2::ZERO;
    for (j, &xj) in positions.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = distance(xi, xj);
        if d > d_k {
            continue;
        }
        if d == 0.0 {
            // Coincident agents have no defined direction; split them along
            // the x axis deterministically by id.
            let dir = if i < j { Vec2::new(1.0, 0.0) } else { Vec2::new(-1.0, 0.0) };
            out = out + dir * gain;
        } else {
            out = out + (xi - xj) * (gain * (-d * d).exp() / d);
        }
    }
    out
}

/// One Euler step: saturate the summed velocity to `v_max`, advance by `dt`,
/// clamp into the region.
pub fn integrate(x: Vec2, u: Vec2, du: Vec2, dt: f64, v_max: f64, region: &Region) -> Vec2 {
    let v = saturate(u + du, v_max);
    region.clamp(x + v * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn region() -> Region {
        Region::new(-10.0, 10.0, -10.0, 10.0)
    }

    #[test]
    fn attraction_is_proportional() {
        let u = attraction(Vec2::ZERO, Some(Vec2::new(1.0, 0.0)), 5.0);
        assert_eq!(u, Vec2::new(5.0, 0.0));
    }

    #[test]
    fn attraction_zero_at_reference() {
        let p = Vec2::new(2.0, -1.0);
        assert_eq!(attraction(p, Some(p), 5.0), Vec2::ZERO);
    }

    #[test]
    fn attraction_zero_when_holding() {
        assert_eq!(attraction(Vec2::new(3.0, 3.0), None, 5.0), Vec2::ZERO);
    }

    #[test]
    fn repulsion_matches_formula() {
        let positions = vec![Vec2::new(0.3, 0.0), Vec2::new(0.0, 0.0)];
        let du = repulsion(0, &positions, true, 800.0, 0.35, 0.55);
        let expected = 800.0 * (-0.09f64).exp();
        assert!((du.x - expected).abs() < 1e-9, "du.x = {}", du.x);
        assert_eq!(du.y, 0.0);
    }

    #[test]
    fn repulsion_inactive_outside_radius() {
        let positions = vec![Vec2::new(0.6, 0.0), Vec2::new(0.0, 0.0)];
        let du = repulsion(0, &positions, true, 800.0, 0.35, 0.55);
        assert_eq!(du, Vec2::ZERO);
    }

    #[test]
    fn unassigned_gain_is_scaled() {
        let positions = vec![Vec2::new(0.3, 0.0), Vec2::new(0.0, 0.0)];
        let assigned = repulsion(0, &positions, true, 800.0, 0.35, 0.55);
        let unassigned = repulsion(0, &positions, false, 800.0, 0.35, 0.55);
        assert!((unassigned.x - 0.35 * assigned.x).abs() < 1e-9);
    }

    #[test]
    fn coincident_agents_split_deterministically() {
        let positions = vec![Vec2::ZERO, Vec2::ZERO];
        let a = repulsion(0, &positions, true, 10.0, 0.35, 0.55);
        let b = repulsion(1, &positions, true, 10.0, 0.35, 0.55);
        assert_eq!(a, Vec2::new(10.0, 0.0));
        assert_eq!(b, Vec2::new(-10.0, 0.0));
        assert!(a.is_finite() && b.is_finite());
    }

    #[test]
    fn euler_step_at_speed_limit() {
        let x = integrate(Vec2::ZERO, Vec2::new(5.0, 0.0), Vec2::ZERO, 0.02, 5.0, &region());
        assert_eq!(x, Vec2::new(0.1, 0.0));
    }

    #[test]
    fn far_reference_saturates() {
        let x = integrate(Vec2::ZERO, Vec2::new(50.0, 0.0), Vec2::ZERO, 0.02, 5.0, &region());
        assert_eq!(x, Vec2::new(0.1, 0.0));
    }

    #[test]
    fn step_clamps_at_region_boundary() {
        let x = integrate(
            Vec2::new(9.99, 0.0),
            Vec2::new(5.0, 0.0),
            Vec2::ZERO,
            0.02,
            5.0,
            &region(),
        );
        assert_eq!(x, Vec2::new(10.0, 0.0));
    }

    #[test]
    fn per_step_decay_is_exact_when_unsaturated() {
        let k = 5.0;
        let dt = 0.02;
        let factor = 1.0 - k * dt;
        let target = Vec2::new(1.0, 2.0);
        let mut x = Vec2::new(0.4, 1.6);
        for _ in 0..60 {
            let err_before = distance(x, target);
            if err_before < 1e-12 {
                break;
            }
            let u = attraction(x, Some(target), k);
            x = integrate(x, u, Vec2::ZERO, dt, 5.0, &region());
            let err_after = distance(x, target);
            let ratio = err_after / err_before;
            assert!(
                (ratio - factor).abs() <= 1e-12 * factor,
                "ratio {ratio} vs {factor}"
            );
        }
    }

    fn point() -> impl Strategy<Value = Vec2> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn pairwise_repulsion_is_antisymmetric(a in point(), b in point()) {
            let positions = vec![a, b];
            let ra = repulsion(0, &positions, true, 800.0, 0.35, 2.0);
            let rb = repulsion(1, &positions, true, 800.0, 0.35, 2.0);
            prop_assert!((ra.x + rb.x).abs() < 1e-9);
            prop_assert!((ra.y + rb.y).abs() < 1e-9);
        }

        #[test]
        fn repulsion_ignores_far_agents(a in point(), b in point(), far in (20.0..40.0f64, 20.0..40.0f64)) {
            let near = vec![a, b];
            let with_far = vec![a, b, Vec2::new(far.0, far.1)];
            let r1 = repulsion(0, &near, true, 800.0, 0.35, 2.0);
            let r2 = repulsion(0, &with_far, true, 800.0, 0.35, 2.0);
            prop_assert_eq!(r1, r2);
        }

        #[test]
        fn applied_speed_never_exceeds_limit(u in point(), du in point(), v_max in 0.1..5.0f64) {
            let input = ControlInput::new(u * 10.0, du * 10.0, v_max);
            prop_assert!(input.applied.norm() <= v_max * (1.0 + 1e-12));
        }
    }
}
