mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use reactive_nav::controller::{
    decompose_and_discretize, solve_tracking_control, tracking_cost, TrackingConfig,
};
use reactive_nav::dynamics::{ControlBounds, Unicycle};
use reactive_nav::geometry::{enlarge, ConvexRegion, Frame, Point2};
use reactive_nav::output::{parse_trajectory_csv, trajectory_csv};
use reactive_nav::planner::{blocking_set, local_modification, PlannerConfig};
use reactive_nav::sim::{run_episode, sense_update, Environment, KnownSet, LogRow};
use reactive_nav::trajectory::{initial_trajectory, solve_hermite_cubic};

fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

fn disc_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (4.0..16.0f64, -1.5..1.5f64, 0.3..1.2f64)
}

proptest! {
    #[test]
    fn hermite_matches_boundary_data(
        x0 in -100.0..100.0f64,
        dx in 0.1..30.0f64,
        flip in any::<bool>(),
        y0 in -10.0..10.0f64,
        y1 in -10.0..10.0f64,
        s0 in -5.0..5.0f64,
        s1 in -5.0..5.0f64,
    ) {
        let x1 = if flip { x0 - dx } else { x0 + dx };
        let c = solve_hermite_cubic(p(x0, y0), p(x1, y1), s0, s1).unwrap();
        prop_assert!((c.eval(x0) - y0).abs() <= 1e-9);
        prop_assert!((c.eval(x1) - y1).abs() <= 1e-9);
        prop_assert!((c.slope(x0) - s0).abs() <= 1e-9);
        prop_assert!((c.slope(x1) - s1).abs() <= 1e-9);
    }

    #[test]
    fn hermite_single_precision(
        x0 in -10.0..10.0f32,
        dx in 0.5..10.0f32,
        y0 in -5.0..5.0f32,
        y1 in -5.0..5.0f32,
        s0 in -2.0..2.0f32,
        s1 in -2.0..2.0f32,
    ) {
        let x1 = x0 + dx;
        let c = solve_hermite_cubic(Point2::new(x0, y0), Point2::new(x1, y1), s0, s1).unwrap();
        prop_assert!((c.eval(x1) - y1).abs() <= 1e-3);
        prop_assert!((c.slope(x1) - s1).abs() <= 1e-3);
    }

    #[test]
    fn frame_round_trip(
        ox in -50.0..50.0f64, oy in -50.0..50.0f64,
        angle in -3.1..3.1f64,
        px in -50.0..50.0f64, py in -50.0..50.0f64,
    ) {
        let f = Frame::new(p(ox, oy), angle);
        let back = f.to_global(f.to_local(p(px, py)));
        prop_assert!(back.distance(p(px, py)) <= 1e-9);
    }

    #[test]
    fn enlarged_region_covers_robot_positions(
        (cx, cy, rad) in disc_strategy(),
        r in 0.1..1.5f64,
        px in 0.0..20.0f64, py in -5.0..5.0f64,
        square in any::<bool>(),
    ) {
        let region = if square {
            ConvexRegion::polygon(vec![
                p(cx - rad, cy - rad), p(cx + rad, cy - rad), p(cx + rad, cy + rad), p(cx - rad, cy + rad),
            ]).unwrap()
        } else {
            ConvexRegion::disc(p(cx, cy), rad).unwrap()
        };
        let e = enlarge(&region, r).unwrap();
        if region.distance(p(px, py)) <= r {
            prop_assert!(e.contains(p(px, py)));
        }
    }

    #[test]
    fn modification_clears_and_orders_anchors(
        discs in prop::collection::vec(disc_strategy(), 1..4),
        r in 0.3..0.8f64,
    ) {
        // Keep obstacles apart so a route between them always exists.
        let mut kept: Vec<(f64, f64, f64)> = Vec::new();
        for d in discs {
            if kept.iter().all(|k| ((k.0 - d.0).powi(2) + (k.1 - d.1).powi(2)).sqrt() > k.2 + d.2 + 2.0 * r + 1.0) {
                kept.push(d);
            }
        }
        let traj = initial_trajectory(20.0).unwrap();
        let regions: BTreeMap<_, _> = kept
            .iter()
            .enumerate()
            .map(|(i, &(x, y, rad))| (i + 1, enlarge(&ConvexRegion::disc(p(x, y), rad).unwrap(), r).unwrap()))
            .collect();
        let cfg = PlannerConfig::for_robot(r);
        let mut registry = BTreeMap::new();
        let m = local_modification(&traj, &regions, p(0.0, 0.0), &cfg, &mut registry).unwrap();
        prop_assert!(blocking_set(&m.trajectory, &regions).is_empty());
        for e in &m.events {
            let xs: Vec<f64> = e.anchors.iter().map(|a| a[0]).collect();
            prop_assert!(xs.windows(2).all(|w| w[0] <= w[1]), "anchors out of order: {:?}", xs);
        }
    }

    #[test]
    fn waypoints_are_spaced_and_end_at_goal(len in 0.5..40.0f64, alpha in 0.5..1.5f64, frac in 0.1..0.9f64) {
        let traj = initial_trajectory(len).unwrap();
        let plan = decompose_and_discretize(&traj, alpha, alpha * frac).unwrap();
        let xs: Vec<f64> = plan.waypoints.iter().map(|w| w.point.x).collect();
        prop_assert_eq!(*xs.last().unwrap(), len);
        prop_assert!(xs[0] > 0.0 && xs[0] <= alpha + 1e-12);
        prop_assert!(xs.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= alpha + 1e-12));
    }

    #[test]
    fn tracking_control_is_bounded_and_beats_the_grid(
        x in -3.0..3.0f64, y in -3.0..3.0f64, theta in -3.1..3.1f64,
        tx in -3.0..3.0f64, ty in -3.0..3.0f64,
    ) {
        let cfg = TrackingConfig { mu: 0.05, dt: 0.05, horizon_steps: 5, grid: [7, 5], refine_levels: 2 };
        let bounds = ControlBounds::<f64, 2>::unicycle_default();
        let state = [x, y, theta];
        let target = p(tx, ty);
        let u = solve_tracking_control(&Unicycle, &state, target, &cfg, &bounds);
        prop_assert!(bounds.contains(&u));
        let best = tracking_cost(&Unicycle, &state, &u, target, &cfg);
        for i in 0..7 {
            for j in 0..5 {
                let c = [-7.0 + 14.0 * i as f64 / 6.0, -5.0 + 10.0 * j as f64 / 4.0];
                prop_assert!(best <= tracking_cost(&Unicycle, &state, &c, target, &cfg));
            }
        }
    }

    #[test]
    fn known_set_only_grows(path in prop::collection::vec((-10.0..30.0f64, -10.0..10.0f64), 1..30)) {
        let env = Environment {
            obstacles: BTreeMap::from([
                (1, ConvexRegion::disc(p(5.0, 0.0), 1.0).unwrap()),
                (2, ConvexRegion::disc(p(15.0, 2.0), 0.8).unwrap()),
            ]),
            robot_radius: 0.5,
            sensing_radius: 6.0,
        };
        let mut known = KnownSet::default();
        let mut before = Vec::new();
        for (i, &(x, y)) in path.iter().enumerate() {
            sense_update(&env, p(x, y), &mut known, i as f64);
            let now: Vec<usize> = known.ids().collect();
            prop_assert!(before.iter().all(|id| now.contains(id)));
            before = now;
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(
        (any::<f64>(), any::<f64>(), any::<f64>(), any::<u32>()).prop_filter("finite", |r| r.0.is_finite() && r.1.is_finite() && r.2.is_finite()),
        0..20,
    )) {
        let rows: Vec<LogRow> = rows
            .iter()
            .enumerate()
            .map(|(i, &(a, b, c, k))| LogRow { t: i as f64 * 0.05, x: a, y: b, theta: c, v: b, w: a, cursor: k as usize })
            .collect();
        let back = parse_trajectory_csv(&trajectory_csv(&rows), std::path::Path::new("t.csv")).unwrap();
        prop_assert_eq!(back, rows);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn episodes_are_deterministic_and_continuous(seed in 100u64..10_000) {
        let s = common::random_scenario(seed).validate().unwrap();
        let a = run_episode(&s).unwrap();
        let b = run_episode(&s).unwrap();
        prop_assert_eq!(&a.rows, &b.rows);
        let step = 7.0 * s.dt;
        for w in a.rows.windows(2) {
            prop_assert!(p(w[0].x, w[0].y).distance(p(w[1].x, w[1].y)) <= step + 1e-12);
            prop_assert!((w[1].theta - w[0].theta).abs() <= 5.0 * s.dt + 1e-12);
            prop_assert!(w[0].v.abs() <= 7.0 && w[0].w.abs() <= 5.0);
        }
    }
}
