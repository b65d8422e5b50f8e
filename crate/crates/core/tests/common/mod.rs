//! Seeded random scenarios shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactive_nav::scenario::{
    ControllerSection, ObstacleSpec, PlannerSection, RobotSection, ScenarioFile, SimSection,
};

/// Circumradius of an obstacle about its placement point.
struct Placed {
    center: [f64; 2],
    radius: f64,
}

/// A scenario with 2 to 8 discs and convex polygons scattered near the
/// straight line from start to goal.
///
/// Obstacles keep a passage of at least one robot diameter plus margin
/// between each other and stay clear of start and goal, so every
/// scenario has a collision-free route.
pub fn random_scenario(seed: u64) -> ScenarioFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let robot = rng.gen_range(0.4..=0.8);
    let margin = 0.3;
    let length = rng.gen_range(20.0..35.0);
    let start = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
    let heading = rng.gen_range(0.0..TAU);
    let (sin, cos) = heading.sin_cos();
    let goal = [start[0] + length * cos, start[1] + length * sin];
    let at = |t: f64, n: f64| [start[0] + t * cos - n * sin, start[1] + t * sin + n * cos];

    let wanted = rng.gen_range(2..=8);
    let mut placed: Vec<Placed> = Vec::new();
    let mut obstacles = Vec::new();
    for _ in 0..2000 {
        if obstacles.len() == wanted {
            break;
        }
        let radius = rng.gen_range(0.5..1.2);
        let center = at(rng.gen_range(6.0..length - 6.0), rng.gen_range(-2.0..2.0));
        let dist =
            |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let clear_ends =
            dist(center, start) > radius + robot + 3.0 && dist(center, goal) > radius + robot + 3.0;
        let passage = 2.0 * (robot + margin) + 0.6;
        let clear_others = placed
            .iter()
            .all(|o| dist(o.center, center) > o.radius + radius + passage);
        if !(clear_ends && clear_others) {
            continue;
        }
        let spec = if rng.gen_bool(0.5) {
            ObstacleSpec::Disc { center, radius }
        } else {
            let n = rng.gen_range(3..=6);
            let phase = rng.gen_range(0.0..TAU);
            // Jittered angles stay sorted, so the vertices are in convex CCW order.
            let vertices = (0..n)
                .map(|i| {
                    let a = phase + TAU * (i as f64 + rng.gen_range(-0.25..0.25)) / n as f64;
                    [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                })
                .collect();
            ObstacleSpec::Polygon { vertices }
        };
        placed.push(Placed { center, radius });
        obstacles.push(spec);
    }

    ScenarioFile {
        name: Some(format!("random-{seed}")),
        robot: RobotSection {
            radius: robot,
            sensing_radius: 6.0,
            v_bounds: [-7.0, 7.0],
            w_bounds: [-5.0, 5.0],
            dt: 0.05,
            heading: None,
        },
        start,
        goal,
        obstacles,
        planner: PlannerSection {
            clearance_margin: margin,
            ..PlannerSection::default()
        },
        controller: ControllerSection::default(),
        sim: SimSection::default(),
    }
}
