//! Closed-loop episodes: sensing, replanning, waypoint tracking and unicycle
//! integration, with collision checks against the true obstacles.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::controller::{
    controller_step, decompose_and_discretize, solve_tracking_control, StepOutcome,
};
use crate::dynamics::{rk4_step, Unicycle};
use crate::error::{Error, Result};
use crate::geometry::{enlarge_with, ConvexRegion, EnlargedRegion, Frame, Point2};
use crate::planner::{blocking_set, local_modification, ReplanEvent};
use crate::scenario::Scenario;
use crate::trajectory::{initial_trajectory, RefTrajectory, TrajectoryRecord, TurnDirection};

/// Unicycle state in the global frame. The heading is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub p: Point2<f64>,
    pub theta: f64,
}

impl RobotState {
    pub fn to_array(self) -> [f64; 3] {
        [self.p.x, self.p.y, self.theta]
    }

    pub fn from_array(s: [f64; 3]) -> Self {
        Self {
            p: Point2::new(s[0], s[1]),
            theta: s[2],
        }
    }
}

/// One RK4 step of the unicycle under constant `(v, w)`.
pub fn integrate_step(state: RobotState, u: [f64; 2], dt: f64) -> RobotState {
    RobotState::from_array(rk4_step(&Unicycle, &state.to_array(), &u, dt))
}

/// True obstacles in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub obstacles: BTreeMap<usize, ConvexRegion<f64>>,
    pub robot_radius: f64,
    pub sensing_radius: f64,
}

impl Environment {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            obstacles: s.obstacles.iter().cloned().collect(),
            robot_radius: s.robot_radius,
            sensing_radius: s.sensing_radius,
        }
    }

    /// Distance from `p` to the nearest obstacle, if any.
    pub fn nearest_distance(&self, p: Point2<f64>) -> Option<f64> {
        self.obstacles
            .values()
            .map(|o| o.distance(p))
            .reduce(f64::min)
    }
}

/// Obstacles seen so far. Never shrinks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnownSet {
    pub first_seen: BTreeMap<usize, f64>,
}

impl KnownSet {
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.first_seen.keys().copied()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.first_seen.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.first_seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_seen.is_empty()
    }
}

/// Adds every obstacle lying entirely inside the closed sensing disc about
/// `p`. Returns the newly added ids.
pub fn sense_update(env: &Environment, p: Point2<f64>, known: &mut KnownSet, t: f64) -> Vec<usize> {
    let mut added = Vec::new();
    for (&id, region) in &env.obstacles {
        if !known.contains(id) && region.farthest_distance(p) <= env.sensing_radius {
            known.first_seen.insert(id, t);
            added.push(id);
        }
    }
    added
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub w: f64,
    pub cursor: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    PlannerInfeasible,
    PlannerError,
    Timeout,
    Collision,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::PlannerInfeasible => "planner-infeasible",
            FailureReason::PlannerError => "planner-error",
            FailureReason::Timeout => "timeout",
            FailureReason::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    Sensed {
        t: f64,
        ids: Vec<usize>,
    },
    Replan {
        t: f64,
        #[serde(flatten)]
        turn: ReplanEvent,
    },
    Failure {
        t: f64,
        reason: FailureReason,
        message: String,
    },
    Success {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub dt: f64,
    pub rows: Vec<LogRow>,
    pub events: Vec<Event>,
    pub success: bool,
    pub failure: Option<FailureReason>,
    pub planning_time_s: f64,
    pub total_time_s: f64,
    /// Final reference trajectory in the local frame.
    pub reference: TrajectoryRecord,
    pub frame: Frame<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub control_effort: f64,
    pub trajectory_length: f64,
    pub planning_time_s: f64,
    pub total_time_s: f64,
    pub success: bool,
    pub completion_time_s: Option<f64>,
    pub steps: usize,
}

/// Effort `sum |u|^2 dt` and path length `sum |dp|` over the logged rows.
pub fn compute_metrics(log: &EpisodeLog) -> Result<Metrics> {
    let first = log.rows.first().ok_or(Error::EmptyLog)?;
    let mut effort = 0.0;
    let mut length = 0.0;
    let mut prev = Point2::new(first.x, first.y);
    for row in &log.rows {
        effort += (row.v * row.v + row.w * row.w) * log.dt;
        let p = Point2::new(row.x, row.y);
        length += p.distance(prev);
        prev = p;
    }
    Ok(Metrics {
        control_effort: effort,
        trajectory_length: length,
        planning_time_s: log.planning_time_s,
        total_time_s: log.total_time_s,
        success: log.success,
        completion_time_s: log.success.then(|| log.rows.last().map(|r| r.t)).flatten(),
        steps: log.rows.len(),
    })
}

struct Tracker {
    traj: RefTrajectory<f64>,
    plan: crate::controller::WaypointPlan<f64>,
    cursor: usize,
}

/// Runs one episode to success, timeout, collision or planner failure.
pub fn run_episode(s: &Scenario) -> Result<EpisodeLog> {
    let clock = Instant::now();
    let env = Environment::from_scenario(s);
    let frame = Frame::from_endpoints(s.start, s.goal)?;
    let x_g = s.start.distance(s.goal);
    let traj = initial_trajectory(x_g)?;
    let plan = decompose_and_discretize(&traj, s.alpha, s.epsilon)?;
    let mut tracker = Tracker {
        traj,
        plan,
        cursor: 0,
    };

    let mut state = RobotState {
        p: s.start,
        theta: s.heading,
    };
    let mut known = KnownSet::default();
    let mut enlarged: BTreeMap<usize, EnlargedRegion<f64>> = BTreeMap::new();
    let mut registry: BTreeMap<usize, TurnDirection> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut events = Vec::new();
    let mut planning = 0.0;
    let mut failure = None;
    let mut success = false;

    let mut step = 0usize;
    loop {
        let t = step as f64 * s.dt;
        let record = |rows: &mut Vec<LogRow>, u: [f64; 2], cursor: usize| {
            rows.push(LogRow {
                t,
                x: state.p.x,
                y: state.p.y,
                theta: state.theta,
                v: u[0],
                w: u[1],
                cursor,
            })
        };
        let fail = |events: &mut Vec<Event>, reason: FailureReason, message: String| {
            events.push(Event::Failure { t, reason, message });
            Some(reason)
        };

        if let Some(d) = env.nearest_distance(state.p) {
            if d < s.robot_radius {
                record(&mut rows, [0.0; 2], tracker.cursor);
                failure = fail(
                    &mut events,
                    FailureReason::Collision,
                    format!("distance {d} to an obstacle is below the robot radius"),
                );
                break;
            }
        }
        if state.p.distance(s.goal) <= s.epsilon {
            record(&mut rows, [0.0; 2], tracker.cursor);
            events.push(Event::Success { t });
            success = true;
            break;
        }
        if t >= s.t_max {
            record(&mut rows, [0.0; 2], tracker.cursor);
            failure = fail(
                &mut events,
                FailureReason::Timeout,
                format!("goal not reached within {} s", s.t_max),
            );
            break;
        }

        let added = sense_update(&env, state.p, &mut known, t);
        for &id in &added {
            let local = frame.region_to_local(&env.obstacles[&id]);
            enlarged.insert(id, enlarge_with(&local, s.robot_radius, s.arc_points)?);
        }
        if !added.is_empty() {
            events.push(Event::Sensed {
                t,
                ids: added.clone(),
            });
        }
        if !added.is_empty() || !blocking_set(&tracker.traj, &enlarged).is_empty() {
            let p_local = frame.to_local(state.p);
            let started = Instant::now();
            let result =
                local_modification(&tracker.traj, &enlarged, p_local, &s.planner, &mut registry);
            planning += started.elapsed().as_secs_f64();
            match result {
                Ok(m) => {
                    if !m.events.is_empty() {
                        tracker.traj = m.trajectory;
                        tracker.plan = decompose_and_discretize(&tracker.traj, s.alpha, s.epsilon)?;
                        tracker.cursor = 0;
                    }
                    events.extend(m.events.into_iter().map(|turn| Event::Replan { t, turn }));
                }
                Err(e) => {
                    let reason = match e {
                        Error::Infeasible { .. } => FailureReason::PlannerInfeasible,
                        _ => FailureReason::PlannerError,
                    };
                    record(&mut rows, [0.0; 2], tracker.cursor);
                    failure = fail(&mut events, reason, e.to_string());
                    break;
                }
            }
        }

        let x = state.to_array();
        let u = match controller_step(
            &Unicycle,
            &tracker.plan,
            &frame,
            tracker.cursor,
            &x,
            &s.tracking,
            &s.bounds,
        ) {
            StepOutcome::Control { u, cursor } => {
                if cursor > tracker.cursor {
                    let passed = tracker.plan.waypoints[cursor - 1].position;
                    tracker.traj.advance(passed);
                }
                tracker.cursor = cursor;
                u
            }
            StepOutcome::Exhausted => {
                tracker.cursor = tracker.plan.len();
                solve_tracking_control(&Unicycle, &x, s.goal, &s.tracking, &s.bounds)
            }
        };
        record(&mut rows, u, tracker.cursor);
        state = integrate_step(state, u, s.dt);
        step += 1;
    }

    Ok(EpisodeLog {
        dt: s.dt,
        rows,
        events,
        success,
        failure,
        planning_time_s: planning,
        total_time_s: clock.elapsed().as_secs_f64(),
        reference: tracker.traj.record(),
        frame,
    })
}

/// Smallest distance from any logged position to any true obstacle.
pub fn min_obstacle_distance(env: &Environment, log: &EpisodeLog) -> Option<f64> {
    log.rows
        .iter()
        .filter_map(|r| env.nearest_distance(Point2::new(r.x, r.y)))
        .reduce(f64::min)
}
