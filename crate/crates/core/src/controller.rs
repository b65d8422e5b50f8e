//! Waypoint tracking: the remaining trajectory is cut into parts, each part
//! is sampled every `alpha` along x, and each control step minimizes the
//! distance to the current waypoint plus a control penalty.

use std::ops::Range;

use crate::dynamics::{rk4_step, ControlBounds, Dynamics};
use crate::error::{Error, Result};
use crate::geometry::{Frame, Point2};
use crate::scalar::Scalar;
use crate::trajectory::{PathPosition, RefTrajectory, Segment, TrajectoryPiece};

/// Role of a plan part, in traversal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartKind {
    /// Forward along the old trajectory up to the turn start.
    Approach,
    /// Backward along the entry connector.
    EntryConnector,
    /// Forward along the turn.
    Turn,
    /// Forward along the old trajectory after the turn.
    Rejoin,
    /// Backward along the exit connector to the goal.
    ExitConnector,
}

impl PartKind {
    pub fn is_backward(self) -> bool {
        matches!(self, PartKind::EntryConnector | PartKind::ExitConnector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<T> {
    /// Local frame.
    pub point: Point2<T>,
    pub position: PathPosition<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanPart<T> {
    pub kind: PartKind,
    /// Point where traversal of the part begins.
    pub start: Point2<T>,
    /// Indices of this part's waypoints in the plan.
    pub waypoints: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPlan<T> {
    pub waypoints: Vec<Waypoint<T>>,
    pub parts: Vec<PlanPart<T>>,
    pub alpha: T,
    pub epsilon: T,
}

impl<T: Scalar> WaypointPlan<T> {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingConfig<T, const M: usize> {
    /// Weight of the control penalty.
    pub mu: T,
    pub dt: T,
    /// Number of RK4 steps of `dt` in each constant-control rollout.
    pub horizon_steps: usize,
    /// Points per input dimension of the coarse grid over the control box.
    pub grid: [usize; M],
    pub refine_levels: usize,
}

impl<T: Scalar, const M: usize> TrackingConfig<T, M> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero() && self.mu.is_finite()) {
            return Err(Error::Config(format!(
                "control weight must be positive, got {}",
                self.mu
            )));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "control step must be positive, got {}",
                self.dt
            )));
        }
        if self.horizon_steps == 0 {
            return Err(Error::Config("horizon must be at least one step".into()));
        }
        if self.grid.iter().any(|&n| n < 2) {
            return Err(Error::Config(
                "control grid needs at least 2 points per input".into(),
            ));
        }
        Ok(())
    }
}

/// Points per dimension of each refinement grid, centred on the incumbent
/// and spanning one spacing of the previous level on either side.
const REFINE_POINTS: usize = 9;

struct Part<T> {
    kind: PartKind,
    segment: Segment,
    lo: T,
    hi: T,
    pieces: Vec<TrajectoryPiece<T>>,
}

impl<T: Scalar> Part<T> {
    fn eval(&self, x: T) -> T {
        let p = self
            .pieces
            .iter()
            .rev()
            .find(|p| p.lo <= x)
            .unwrap_or(&self.pieces[0]);
        p.eval(x)
    }
}

fn split_parts<T: Scalar>(traj: &RefTrajectory<T>) -> Vec<Part<T>> {
    let remaining = traj.remaining();
    let collect = |seg: Segment, lo: T, hi: T| -> Vec<TrajectoryPiece<T>> {
        remaining
            .iter()
            .filter(|(s, _)| *s == seg)
            .filter_map(|(_, p)| p.restricted(lo, hi))
            .collect()
    };
    let span = |pieces: &[TrajectoryPiece<T>]| {
        pieces
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(a, b), p| {
                (a.min(p.lo), b.max(p.hi))
            })
    };
    let mut parts = Vec::new();
    let mut push = |kind, segment, pieces: Vec<TrajectoryPiece<T>>| {
        if !pieces.is_empty() {
            let (lo, hi) = span(&pieces);
            parts.push(Part {
                kind,
                segment,
                lo,
                hi,
                pieces,
            });
        }
    };

    let inf = T::infinity();
    let entry = collect(Segment::Entry, -inf, inf);
    let has_entry = !entry.is_empty();
    let (xa, xd) = traj.turn_window().unwrap_or((-inf, -inf));
    if !has_entry {
        push(
            PartKind::Approach,
            Segment::Graph,
            collect(Segment::Graph, -inf, xa),
        );
    }
    push(PartKind::EntryConnector, Segment::Entry, entry);
    push(
        PartKind::Turn,
        Segment::Graph,
        collect(Segment::Graph, xa, xd),
    );
    push(
        PartKind::Rejoin,
        Segment::Graph,
        collect(Segment::Graph, xd, inf),
    );
    push(
        PartKind::ExitConnector,
        Segment::Exit,
        collect(Segment::Exit, -inf, inf),
    );
    parts
}

/// Waypoints of the untracked trajectory: every part sampled every `alpha`
/// along x, with the final waypoint of a part pinned to its end.
pub fn decompose_and_discretize<T: Scalar>(
    traj: &RefTrajectory<T>,
    alpha: T,
    epsilon: T,
) -> Result<WaypointPlan<T>> {
    if !(alpha > T::zero()) || !(epsilon > T::zero() && epsilon < alpha) {
        return Err(Error::Config(format!(
            "waypoint spacing and arrival threshold need 0 < epsilon < alpha, got {epsilon} and {alpha}"
        )));
    }
    let mut waypoints = Vec::new();
    let mut parts = Vec::new();
    for part in split_parts(traj) {
        let backward = part.kind.is_backward();
        let len = part.hi - part.lo;
        let (from, sign) = if backward {
            (part.hi, -T::one())
        } else {
            (part.lo, T::one())
        };
        let to = if backward { part.lo } else { part.hi };
        let count = (len / alpha - T::tolerance())
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let first = waypoints.len();
        for l in 1..=count {
            let x = if l == count {
                to
            } else {
                from + sign * alpha * T::lit(l as f64)
            };
            waypoints.push(Waypoint {
                point: Point2::new(x, part.eval(x)),
                position: PathPosition {
                    segment: part.segment,
                    x,
                },
            });
        }
        parts.push(PlanPart {
            kind: part.kind,
            start: Point2::new(from, part.eval(from)),
            waypoints: first..waypoints.len(),
        });
    }
    Ok(WaypointPlan {
        waypoints,
        parts,
        alpha,
        epsilon,
    })
}

/// Moves to the next waypoint once the robot is within `epsilon` of the
/// current one. Advances at most one waypoint per call.
pub fn waypoint_advance<T: Scalar>(
    plan: &WaypointPlan<T>,
    p_local: Point2<T>,
    cursor: usize,
    epsilon: T,
) -> usize {
    match plan.waypoints.get(cursor) {
        Some(w) if p_local.distance(w.point) <= epsilon => cursor + 1,
        _ => cursor,
    }
}

/// Cost of holding `u` for the rollout horizon from `state`.
pub fn tracking_cost<T: Scalar, D: Dynamics<T, N, M>, const N: usize, const M: usize>(
    model: &D,
    state: &[T; N],
    u: &[T; M],
    target: Point2<T>,
    cfg: &TrackingConfig<T, M>,
) -> T {
    let mut s = *state;
    for _ in 0..cfg.horizon_steps {
        s = rk4_step(model, &s, u, cfg.dt);
    }
    let e = model.position(&s) - target;
    let penalty: T = u.iter().map(|&c| c * c).sum();
    e.dot(e) + cfg.mu * penalty
}

fn lex_less<T: Scalar, const M: usize>(a: &[T; M], b: &[T; M]) -> bool {
    for i in 0..M {
        if a[i] < b[i] {
            return true;
        }
        if a[i] > b[i] {
            return false;
        }
    }
    false
}

/// Calls `f` on every point of the tensor grid `axes[0] x ... x axes[M-1]`.
fn for_each_grid_point<T: Scalar, const M: usize>(axes: &[Vec<T>; M], mut f: impl FnMut([T; M])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = [0usize; M];
    loop {
        f(std::array::from_fn(|i| axes[i][idx[i]]));
        let mut d = M;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Control in `bounds` minimizing [`tracking_cost`] by exhaustive search on
/// a coarse grid followed by `refine_levels` finer grids around the
/// incumbent. Ties go to the lexicographically smallest control.
pub fn solve_tracking_control<T: Scalar, D: Dynamics<T, N, M>, const N: usize, const M: usize>(
    model: &D,
    state: &[T; N],
    target: Point2<T>,
    cfg: &TrackingConfig<T, M>,
    bounds: &ControlBounds<T, M>,
) -> [T; M] {
    let mut best: Option<([T; M], T)> = None;
    let consider = |best: &mut Option<([T; M], T)>, u: [T; M]| {
        let c = tracking_cost(model, state, &u, target, cfg);
        let better = match best {
            None => true,
            Some((bu, bc)) => c < *bc || (c == *bc && lex_less(&u, bu)),
        };
        if better {
            *best = Some((u, c));
        }
    };

    let mut spacing: [T; M] = std::array::from_fn(|i| {
        (bounds.hi[i] - bounds.lo[i]) / T::lit((cfg.grid[i].max(2) - 1) as f64)
    });
    let coarse: [Vec<T>; M] = std::array::from_fn(|i| {
        let n = cfg.grid[i].max(2);
        (0..n)
            .map(|j| {
                if j == n - 1 {
                    bounds.hi[i]
                } else {
                    bounds.lo[i] + spacing[i] * T::lit(j as f64)
                }
            })
            .collect()
    });
    for_each_grid_point(&coarse, |u| consider(&mut best, u));

    let half = (REFINE_POINTS / 2) as f64;
    for _ in 0..cfg.refine_levels {
        let (center, _) = best.expect("grid is non-empty");
        let axes: [Vec<T>; M] = std::array::from_fn(|i| {
            let mut v: Vec<T> = (0..REFINE_POINTS)
                .map(|j| {
                    let off = spacing[i] * T::lit((j as f64 - half) / half);
                    (center[i] + off).max(bounds.lo[i]).min(bounds.hi[i])
                })
                .collect();
            v.dedup();
            v
        });
        for_each_grid_point(&axes, |u| consider(&mut best, u));
        spacing = std::array::from_fn(|i| spacing[i] / T::lit(half));
    }
    best.expect("grid is non-empty").0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome<T, const M: usize> {
    Control {
        u: [T; M],
        cursor: usize,
    },
    /// The cursor moved past the final waypoint.
    Exhausted,
}

/// Advances the cursor, then solves for the control toward the current
/// waypoint mapped into the global frame.
pub fn controller_step<T: Scalar, D: Dynamics<T, N, M>, const N: usize, const M: usize>(
    model: &D,
    plan: &WaypointPlan<T>,
    frame: &Frame<T>,
    cursor: usize,
    state: &[T; N],
    cfg: &TrackingConfig<T, M>,
    bounds: &ControlBounds<T, M>,
) -> StepOutcome<T, M> {
    let p_local = frame.to_local(model.position(state));
    let cursor = waypoint_advance(plan, p_local, cursor, plan.epsilon);
    match plan.waypoints.get(cursor) {
        Some(w) => StepOutcome::Control {
            u: solve_tracking_control(model, state, frame.to_global(w.point), cfg, bounds),
            cursor,
        },
        None => StepOutcome::Exhausted,
    }
}
