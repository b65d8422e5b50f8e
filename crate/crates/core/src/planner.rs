//! Reactive local modification of the reference trajectory.
//!
//! Each iteration picks the nearest obstacle that still blocks the remaining
//! path, decides on which side to pass it, and splices in the smallest
//! feasible turning trajectory. Iteration stops when no known obstacle
//! blocks the path.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    curve_region_intersect, enlarge, region_extremes, ConvexRegion, EnlargedRegion, Point2, Side,
    SideFilter,
};
use crate::scalar::{sgn, Scalar};
use crate::trajectory::{
    assemble_modified, build_turning_trajectory, PieceKind, RefTrajectory, TurnDirection, TurnTag,
    TurningTrajectory,
};

/// Which turn parameter is held fixed; the other one is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedParameter {
    /// Longitudinal margin fixed, lateral offset searched.
    Rho,
    /// Lateral offset fixed, longitudinal margin searched.
    Delta,
}

/// Ascending scan for the smallest feasible value of the free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchGrid<T> {
    pub step: T,
    pub max: T,
    pub refine_tol: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig<T> {
    pub fixed: FixedParameter,
    pub fixed_value: T,
    pub grid: SearchGrid<T>,
    /// Extra clearance kept from every enlarged region.
    pub clearance_margin: T,
    /// Defaults to ten times the number of known obstacles.
    pub max_iterations: Option<usize>,
}

impl<T: Scalar> PlannerConfig<T> {
    /// Longitudinal margin fixed at twice the robot size.
    pub fn for_robot(r: T) -> Self {
        let fixed_value = T::lit(2.0) * r;
        Self {
            fixed: FixedParameter::Rho,
            fixed_value,
            grid: SearchGrid {
                step: T::lit(0.05),
                max: T::lit(10.0) * fixed_value.max(T::one()),
                refine_tol: T::lit(1e-3),
            },
            clearance_margin: T::zero(),
            max_iterations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !pos(self.fixed_value) {
            return Err(Error::Config(format!(
                "fixed turn parameter must be positive, got {}",
                self.fixed_value
            )));
        }
        if !pos(self.grid.step) || !pos(self.grid.refine_tol) || !(self.grid.max >= self.grid.step)
        {
            return Err(Error::Config(
                "search grid needs positive step and tolerance and max >= step".into(),
            ));
        }
        if !(self.clearance_margin >= T::zero()) {
            return Err(Error::Config(
                "clearance margin must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Where on the trajectory a collision endpoint lies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    /// Initial line or a connector.
    Initial,
    Turn(TurnTag),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint<T> {
    pub point: Point2<T>,
    pub provenance: Provenance,
}

/// Bypass geometry of one obstacle relative to the current trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BypassGeometry<T> {
    pub obstacle: usize,
    pub entry: Endpoint<T>,
    pub exit: Endpoint<T>,
    pub direction: TurnDirection,
    pub x_min: T,
    pub x_max: T,
    pub x_near: T,
    pub x_far: T,
    pub y_extreme: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchors<T> {
    pub points: [Point2<T>; 4],
    pub slopes: [T; 4],
}

/// One accepted turn, for logging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanEvent {
    pub obstacle: usize,
    pub direction: i8,
    pub rho: f64,
    pub delta: f64,
    /// Anchors `a`, `b`, `c`, `d` in the local frame.
    pub anchors: [[f64; 2]; 4],
    /// Forward pieces of the trajectory after this turn was spliced in.
    pub pieces: usize,
}

impl ReplanEvent {
    fn from_turn<T: Scalar>(turn: &TurningTrajectory<T>, pieces: usize) -> Self {
        Self {
            obstacle: turn.tag.obstacle,
            direction: turn.tag.direction.as_i8(),
            rho: turn.rho.to_f64_lossy(),
            delta: turn.delta.to_f64_lossy(),
            anchors: turn
                .anchors
                .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy()]),
            pieces,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modification<T> {
    pub trajectory: RefTrajectory<T>,
    pub events: Vec<ReplanEvent>,
}

/// Ids of the regions that intersect the part of `traj` not yet tracked.
pub fn blocking_set<T: Scalar>(
    traj: &RefTrajectory<T>,
    regions: &BTreeMap<usize, EnlargedRegion<T>>,
) -> BTreeSet<usize> {
    let remaining = traj.remaining();
    regions
        .iter()
        .filter(|(_, e)| {
            remaining
                .iter()
                .any(|(_, p)| !curve_region_intersect(p, &e.boundary).is_empty())
        })
        .map(|(&k, _)| k)
        .collect()
}

/// Nearest blocking region to `p_now`, smallest id on ties.
pub fn select_bypass_obstacle<T: Scalar>(
    blocking: &BTreeSet<usize>,
    p_now: Point2<T>,
    regions: &BTreeMap<usize, EnlargedRegion<T>>,
) -> Result<usize> {
    let mut best: Option<(usize, T)> = None;
    for &k in blocking {
        let d = regions[&k].distance(p_now);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k).ok_or(Error::EmptyBlockingSet)
}

fn provenance(kind: PieceKind, tag: Option<TurnTag>) -> Provenance {
    match (kind.is_turn(), tag) {
        (true, Some(t)) => Provenance::Turn(t),
        _ => Provenance::Initial,
    }
}

/// First and last points, by abscissa, where the remaining path lies in the
/// region.
pub fn collision_endpoints<T: Scalar>(
    traj: &RefTrajectory<T>,
    region: &ConvexRegion<T>,
) -> Result<(Endpoint<T>, Endpoint<T>)> {
    let mut first: Option<Endpoint<T>> = None;
    let mut last: Option<Endpoint<T>> = None;
    for (_, piece) in traj.remaining() {
        for (lo, hi) in curve_region_intersect(&piece, region) {
            let prov = provenance(piece.kind, piece.turn);
            if first.is_none_or(|e| lo < e.point.x) {
                first = Some(Endpoint {
                    point: Point2::new(lo, piece.eval(lo)),
                    provenance: prov,
                });
            }
            if last.is_none_or(|e| hi > e.point.x) {
                last = Some(Endpoint {
                    point: Point2::new(hi, piece.eval(hi)),
                    provenance: prov,
                });
            }
        }
    }
    match (first, last) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::NoIntersection),
    }
}

/// Turn direction: inherited from a prior turn the collision lies on,
/// otherwise towards the side of the axis where the region protrudes less.
pub fn turning_direction<T: Scalar>(
    endpoints: (&Endpoint<T>, &Endpoint<T>),
    region: &ConvexRegion<T>,
    prior: Option<TurnDirection>,
) -> Result<TurnDirection> {
    let on_turn = [endpoints.0, endpoints.1]
        .into_iter()
        .find_map(|e| match e.provenance {
            Provenance::Turn(t) => Some(t),
            Provenance::Initial => None,
        });
    match on_turn {
        Some(tag) => prior.ok_or(Error::MissingTurnDirection(tag.obstacle)),
        None => {
            let (_, _, y0, y1) = region.bounds();
            Ok(TurnDirection::from_sign(sgn(y0.abs() - y1.abs())))
        }
    }
}

/// Extremes of the part of `region` on the `direction` side of the
/// trajectory. Outside its domain the trajectory is continued at its end
/// values.
pub fn bypass_extremes<T: Scalar>(
    obstacle: usize,
    region: &ConvexRegion<T>,
    traj: &RefTrajectory<T>,
    endpoints: (Endpoint<T>, Endpoint<T>),
    direction: TurnDirection,
) -> Result<BypassGeometry<T>> {
    let boundary = |x: T| traj.eval_clamped(x);
    let filter = SideFilter {
        boundary: &boundary,
        side: Side::from_direction(direction.sign::<T>()),
    };
    let ext = region_extremes(region, Some(&filter))?;
    Ok(BypassGeometry {
        obstacle,
        entry: endpoints.0,
        exit: endpoints.1,
        direction,
        x_min: ext.min_x,
        x_max: ext.max_x,
        x_near: ext.near_x,
        x_far: ext.far_x,
        y_extreme: ext.extreme_y,
    })
}

/// Anchor points and slopes of a turn for the parameters `rho`, `delta`.
pub fn choose_anchors<T: Scalar>(
    geom: &BypassGeometry<T>,
    traj: &RefTrajectory<T>,
    x_now: T,
    y_now: T,
    rho: T,
    delta: T,
) -> Result<Anchors<T>> {
    let (lo, hi) = traj.domain();
    let xa = if x_now >= geom.x_min {
        geom.x_min - rho
    } else {
        x_now.min(geom.x_min - rho)
    };
    let (ya, eta_a) = if xa < lo {
        (y_now, T::zero())
    } else {
        let (y, s) = traj.eval_and_slope(xa)?;
        (y, if xa <= lo { T::zero() } else { s })
    };
    let yb = geom.y_extreme + geom.direction.sign::<T>() * delta;
    let xd = geom.x_max + rho;
    let (yd, eta_d) = if xd <= hi {
        traj.eval_and_slope(xd)?
    } else {
        (T::zero(), T::zero())
    };
    Ok(Anchors {
        points: [
            Point2::new(xa, ya),
            Point2::new(geom.x_near, yb),
            Point2::new(geom.x_far, yb),
            Point2::new(xd, yd),
        ],
        slopes: [eta_a, T::zero(), T::zero(), eta_d],
    })
}

/// Region a turn must avoid: optionally only its part on one side of the
/// trajectory being replaced.
pub struct Constraint<'a, T> {
    pub region: &'a ConvexRegion<T>,
    pub side: Option<Side>,
}

fn turn_is_feasible<T: Scalar>(
    turn: &TurningTrajectory<T>,
    old: &RefTrajectory<T>,
    constraints: &[Constraint<'_, T>],
) -> bool {
    let hit = |q: Point2<T>| {
        constraints.iter().any(|c| {
            c.region.contains(q)
                && match c.side {
                    None => true,
                    Some(side) => {
                        let f = old.eval_clamped(q.x);
                        match side {
                            Side::Above => q.y > f,
                            Side::AtOrBelow => q.y <= f,
                        }
                    }
                }
        })
    };
    for piece in turn.pieces() {
        let len = piece.len();
        let n = if len > T::zero() {
            (len / T::lit(0.01).min(len / T::lit(100.0)))
                .ceil()
                .to_usize()
                .unwrap_or(100)
        } else {
            0
        };
        for i in 0..=n {
            let x = if i == n {
                piece.hi
            } else {
                piece.lo + len * T::lit(i as f64 / n.max(1) as f64)
            };
            if hit(Point2::new(x, piece.eval(x))) {
                return false;
            }
        }
    }
    true
}

/// Smallest value on the ascending grid `step, 2 step, ..., max` for which
/// `feasible` holds, refined by bisection against the previous grid point.
pub fn scan_smallest_feasible<T: Scalar>(
    grid: &SearchGrid<T>,
    mut feasible: impl FnMut(T) -> bool,
) -> Option<T> {
    let n = (grid.max / grid.step + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0);
    let mut prev: Option<T> = None;
    for i in 1..=n {
        let v = grid.step * T::lit(i as f64);
        if feasible(v) {
            let Some(mut lo) = prev else { return Some(v) };
            let mut hi = v;
            while hi - lo > grid.refine_tol {
                let mid = (lo + hi) / T::lit(2.0);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = Some(v);
    }
    None
}

/// Smallest free parameter whose turn avoids every constraint, returned as
/// the turn built with it.
#[allow(clippy::too_many_arguments)]
pub fn optimize_turn_parameter<T: Scalar>(
    config: &PlannerConfig<T>,
    geom: &BypassGeometry<T>,
    traj: &RefTrajectory<T>,
    x_now: T,
    y_now: T,
    constraints: &[Constraint<'_, T>],
) -> Result<TurningTrajectory<T>> {
    let tag = TurnTag {
        obstacle: geom.obstacle,
        direction: geom.direction,
    };
    let params = |v: T| match config.fixed {
        FixedParameter::Rho => (config.fixed_value, v),
        FixedParameter::Delta => (v, config.fixed_value),
    };
    let build = |v: T| -> Option<TurningTrajectory<T>> {
        let (rho, delta) = params(v);
        let anchors = choose_anchors(geom, traj, x_now, y_now, rho, delta).ok()?;
        build_turning_trajectory(anchors.points, anchors.slopes, tag, rho, delta).ok()
    };
    let best = scan_smallest_feasible(&config.grid, |v| {
        build(v).is_some_and(|t| turn_is_feasible(&t, traj, constraints))
    });
    best.and_then(build).ok_or(Error::Infeasible {
        obstacle: geom.obstacle,
        max: config.grid.max.to_f64_lossy(),
    })
}

/// Repeatedly bypasses the nearest blocking region until none remains.
///
/// `registry` records the latest turn direction per obstacle id.
pub fn local_modification<T: Scalar>(
    traj: &RefTrajectory<T>,
    regions: &BTreeMap<usize, EnlargedRegion<T>>,
    p_now: Point2<T>,
    config: &PlannerConfig<T>,
    registry: &mut BTreeMap<usize, TurnDirection>,
) -> Result<Modification<T>> {
    let guards: BTreeMap<usize, EnlargedRegion<T>> = if config.clearance_margin > T::zero() {
        regions
            .iter()
            .map(|(&k, e)| Ok((k, enlarge(&e.boundary, config.clearance_margin)?)))
            .collect::<Result<_>>()?
    } else {
        regions.clone()
    };
    let limit = config.max_iterations.unwrap_or(10 * regions.len().max(1));
    // Every trajectory ends at the goal, so no turn can clear a region
    // containing it.
    let goal = Point2::new(traj.goal_x(), T::zero());
    if let Some((&k, _)) = guards.iter().find(|(_, g)| g.contains(goal)) {
        return Err(Error::Infeasible {
            obstacle: k,
            max: config.grid.max.to_f64_lossy(),
        });
    }

    let mut traj = traj.clone();
    let mut events = Vec::new();
    for _ in 0..limit {
        let blocking = blocking_set(&traj, &guards);
        if blocking.is_empty() {
            return Ok(Modification {
                trajectory: traj,
                events,
            });
        }
        let k = select_bypass_obstacle(&blocking, p_now, &guards)?;
        let region = &guards[&k].boundary;
        let (e1, e2) = collision_endpoints(&traj, region)?;
        let prior_tags: Vec<TurnTag> = [e1, e2]
            .iter()
            .filter_map(|e| match e.provenance {
                Provenance::Turn(t) => Some(t),
                Provenance::Initial => None,
            })
            .collect();
        let prior = prior_tags.first().map(|t| t.direction);
        let beta = turning_direction((&e1, &e2), region, prior)?;

        let mut last_err = None;
        let mut accepted = None;
        for dir in [beta, beta.flipped()] {
            let geom = match bypass_extremes(k, region, &traj, (e1, e2), dir) {
                Ok(g) => g,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let mut constraints = vec![Constraint {
                region,
                side: Some(Side::from_direction(dir.sign::<T>())),
            }];
            for tag in &prior_tags {
                if tag.obstacle != k {
                    if let Some(g) = guards.get(&tag.obstacle) {
                        constraints.push(Constraint {
                            region: &g.boundary,
                            side: None,
                        });
                    }
                }
            }
            match optimize_turn_parameter(config, &geom, &traj, p_now.x, p_now.y, &constraints) {
                Ok(turn) => {
                    accepted = Some(turn);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let turn = match accepted {
            Some(t) => t,
            None => return Err(last_err.unwrap_or(Error::EmptyRegion)),
        };
        traj = assemble_modified(&traj, &turn, p_now.x, p_now.y)?;
        registry.insert(k, turn.tag.direction);
        events.push(ReplanEvent::from_turn(&turn, traj.pieces().len()));
    }
    if blocking_set(&traj, &guards).is_empty() {
        Ok(Modification {
            trajectory: traj,
            events,
        })
    } else {
        Err(Error::IterationLimit(limit))
    }
}
