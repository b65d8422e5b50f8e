//! Scenario files: TOML documents describing the robot, start, goal,
//! obstacles and the planner, controller and simulation settings.
//!
//! ```toml
//! start = [2.0, 10.0]
//! goal = [46.5, 10.0]
//!
//! [robot]
//! radius = 1.0
//! sensing_radius = 6.0
//!
//! [[obstacles]]
//! kind = "disc"
//! center = [10.0, 10.5]
//! radius = 1.5
//!
//! [[obstacles]]
//! kind = "polygon"
//! vertices = [[20.0, 9.0], [22.0, 9.0], [21.0, 11.5]]
//! ```
//!
//! Every other field has a default; see the section structs below.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::TrackingConfig;
use crate::dynamics::ControlBounds;
use crate::error::{Error, Result};
use crate::geometry::{ConvexRegion, Point2, DEFAULT_ARC_POINTS};
use crate::planner::{FixedParameter, PlannerConfig, SearchGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    /// Robot radius.
    pub radius: f64,
    pub sensing_radius: f64,
    #[serde(default = "default_v_bounds")]
    pub v_bounds: [f64; 2],
    #[serde(default = "default_w_bounds")]
    pub w_bounds: [f64; 2],
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Initial heading in radians; defaults to facing the goal.
    #[serde(default)]
    pub heading: Option<f64>,
}

fn default_v_bounds() -> [f64; 2] {
    [-7.0, 7.0]
}
fn default_w_bounds() -> [f64; 2] {
    [-5.0, 5.0]
}
fn default_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleSpec {
    Disc { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ObstacleSpec {
    pub fn to_region(&self) -> Result<ConvexRegion<f64>> {
        match self {
            ObstacleSpec::Disc { center, radius } => {
                ConvexRegion::disc(Point2::new(center[0], center[1]), *radius)
            }
            ObstacleSpec::Polygon { vertices } => {
                ConvexRegion::polygon(vertices.iter().map(|v| Point2::new(v[0], v[1])).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub fixed: FixedParameter,
    /// Value of the fixed parameter; defaults to twice the robot radius.
    pub fixed_value: Option<f64>,
    pub grid_step: f64,
    /// Largest value tried for the free parameter; defaults to ten times the
    /// fixed value.
    pub grid_max: Option<f64>,
    pub refine_tol: f64,
    pub clearance_margin: f64,
    /// Defaults to ten times the number of obstacles.
    pub max_iterations: Option<usize>,
    pub arc_points: usize,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            fixed: FixedParameter::Rho,
            fixed_value: None,
            grid_step: 0.05,
            grid_max: None,
            refine_tol: 1e-3,
            clearance_margin: 0.0,
            max_iterations: None,
            arc_points: DEFAULT_ARC_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    /// Waypoint spacing along the trajectory abscissa.
    pub alpha: f64,
    /// Arrival threshold for a waypoint.
    pub epsilon: f64,
    /// Control penalty weight.
    pub mu: f64,
    pub grid: [usize; 2],
    pub refine_levels: usize,
    /// Rollout length of each candidate control, in control steps.
    pub horizon_steps: usize,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            epsilon: 0.4,
            mu: 0.05,
            grid: [29, 21],
            refine_levels: 3,
            horizon_steps: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub t_max: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { t_max: 200.0 }
    }
}

/// Scenario as written in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub robot: RobotSection,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub sim: SimSection,
}

/// Validated scenario with defaults resolved. Obstacle ids are 1-based in
/// file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub robot_radius: f64,
    pub sensing_radius: f64,
    pub bounds: ControlBounds<f64, 2>,
    pub dt: f64,
    pub heading: f64,
    pub start: Point2<f64>,
    pub goal: Point2<f64>,
    pub obstacles: Vec<(usize, ConvexRegion<f64>)>,
    pub arc_points: usize,
    pub planner: PlannerConfig<f64>,
    pub tracking: TrackingConfig<f64, 2>,
    pub alpha: f64,
    pub epsilon: f64,
    pub t_max: f64,
    pub file: ScenarioFile,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn point(name: &str, v: [f64; 2]) -> Result<Point2<f64>> {
    let p = Point2::new(v[0], v[1]);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Config(format!("{name} must be finite, got {v:?}")))
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<Scenario> {
        let r = &self.robot;
        positive("robot radius", r.radius)?;
        positive("sensing radius", r.sensing_radius)?;
        positive("control step dt", r.dt)?;
        let bounds = ControlBounds::new(
            [r.v_bounds[0], r.w_bounds[0]],
            [r.v_bounds[1], r.w_bounds[1]],
        )?;
        let start = point("start", self.start)?;
        let goal = point("goal", self.goal)?;
        if start == goal {
            return Err(Error::Config("start and goal must differ".into()));
        }

        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (i, spec) in self.obstacles.iter().enumerate() {
            let region = spec
                .to_region()
                .map_err(|e| Error::Config(format!("obstacle {}: {e}", i + 1)))?;
            obstacles.push((i + 1, region));
        }
        let largest = obstacles
            .iter()
            .map(|(_, o)| o.diameter())
            .fold(0.0, f64::max);
        if !(r.sensing_radius > r.radius + largest) {
            return Err(Error::Config(format!(
                "sensing radius must exceed robot size plus largest obstacle size: gamma={} <= r + max r_k = {}",
                r.sensing_radius,
                r.radius + largest
            )));
        }
        for (id, o) in &obstacles {
            let d = o.distance(start);
            if d < r.radius {
                return Err(Error::Config(format!(
                    "start lies within robot radius of obstacle {id} (distance {d})"
                )));
            }
        }

        let c = &self.controller;
        if !(c.epsilon > 0.0 && c.epsilon < c.alpha && c.alpha < r.sensing_radius) {
            return Err(Error::Config(format!(
                "need 0 < epsilon < alpha < sensing radius, got epsilon={} alpha={} gamma={}",
                c.epsilon, c.alpha, r.sensing_radius
            )));
        }
        let tracking = TrackingConfig {
            mu: c.mu,
            dt: r.dt,
            horizon_steps: c.horizon_steps,
            grid: c.grid,
            refine_levels: c.refine_levels,
        };
        tracking.validate()?;

        let p = &self.planner;
        let fixed_value = p.fixed_value.unwrap_or(2.0 * r.radius);
        let planner = PlannerConfig {
            fixed: p.fixed,
            fixed_value,
            grid: SearchGrid {
                step: p.grid_step,
                max: p.grid_max.unwrap_or(10.0 * fixed_value),
                refine_tol: p.refine_tol,
            },
            clearance_margin: p.clearance_margin,
            max_iterations: p.max_iterations,
        };
        planner.validate()?;
        if p.arc_points == 0 {
            return Err(Error::Config("arc_points must be at least 1".into()));
        }
        positive("t_max", self.sim.t_max)?;

        let d = goal - start;
        let heading = r.heading.unwrap_or(d.y.atan2(d.x));
        if !heading.is_finite() {
            return Err(Error::Config("heading must be finite".into()));
        }
        Ok(Scenario {
            name: self.name.clone().unwrap_or_default(),
            robot_radius: r.radius,
            sensing_radius: r.sensing_radius,
            bounds,
            dt: r.dt,
            heading,
            start,
            goal,
            obstacles,
            arc_points: p.arc_points,
            planner,
            tracking,
            alpha: c.alpha,
            epsilon: c.epsilon,
            t_max: self.sim.t_max,
            file: self.clone(),
        })
    }
}

/// Reads, parses and validates a scenario file.
pub fn parse_and_validate(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut scenario = ScenarioFile::parse(&text, path)?.validate()?;
    if scenario.name.is_empty() {
        scenario.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(scenario)
}
