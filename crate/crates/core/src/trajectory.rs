//! Piecewise-cubic reference trajectory `y = l(x)` in the local frame, the
//! Hermite solve behind every turning part, and assembly of a modified
//! trajectory around a new turn.
//!
//! A trajectory is a forward *graph* (contiguous pieces ordered by x) plus
//! two optional connectors that the robot traverses in the negative x
//! direction: an entry connector from the robot back to the start of the
//! latest turn, and an exit connector from past the goal back to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Curve, Point2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceKind {
    InitialLine,
    Connection,
    /// Cubic from the turn start to the bypass entry.
    #[serde(rename = "turn-1")]
    TurnI,
    /// Horizontal bypass segment.
    #[serde(rename = "turn-2")]
    TurnII,
    /// Cubic from the bypass exit back to the trajectory.
    #[serde(rename = "turn-3")]
    TurnIII,
}

impl PieceKind {
    pub fn is_turn(self) -> bool {
        matches!(
            self,
            PieceKind::TurnI | PieceKind::TurnII | PieceKind::TurnIII
        )
    }
}

/// Left (+1) or right (-1) bypass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            TurnDirection::Left => T::one(),
            TurnDirection::Right => -T::one(),
        }
    }

    /// Maps through `sgn`, so zero selects `Right`.
    pub fn from_sign<T: Scalar>(value: T) -> Self {
        if value > T::zero() {
            TurnDirection::Left
        } else {
            TurnDirection::Right
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            TurnDirection::Left => 1,
            TurnDirection::Right => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            TurnDirection::Left => TurnDirection::Right,
            TurnDirection::Right => TurnDirection::Left,
        }
    }
}

/// Provenance of a turn piece: which obstacle it bypasses and on which side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnTag {
    pub obstacle: usize,
    pub direction: TurnDirection,
}

/// Cubic in powers of `x - origin`, highest degree first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic<T> {
    pub origin: T,
    pub coeffs: [T; 4],
}

impl<T: Scalar> Cubic<T> {
    pub fn constant(y: T) -> Self {
        Self {
            origin: T::zero(),
            coeffs: [T::zero(), T::zero(), T::zero(), y],
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        let u = x - self.origin;
        let [a, b, c, d] = self.coeffs;
        ((a * u + b) * u + c) * u + d
    }

    #[inline]
    pub fn slope(&self, x: T) -> T {
        let u = x - self.origin;
        let [a, b, c, _] = self.coeffs;
        (T::lit(3.0) * a * u + T::lit(2.0) * b) * u + c
    }

    /// Coefficients of `a x^3 + b x^2 + c x + d` in absolute abscissa.
    pub fn absolute(&self) -> [T; 4] {
        let x0 = self.origin;
        let [a, b, c, d] = self.coeffs;
        let three = T::lit(3.0);
        let two = T::lit(2.0);
        [
            a,
            b - three * a * x0,
            c - two * b * x0 + three * a * x0 * x0,
            d - c * x0 + b * x0 * x0 - a * x0 * x0 * x0,
        ]
    }
}

/// Cubic through `p0`, `p1` with end slopes `slope0`, `slope1`.
///
/// Solved in coordinates shifted to `p0.x`, which keeps the fit well
/// conditioned far from the origin; [`Cubic::absolute`] recovers the
/// absolute-abscissa coefficients.
pub fn solve_hermite_cubic<T: Scalar>(
    p0: Point2<T>,
    p1: Point2<T>,
    slope0: T,
    slope1: T,
) -> Result<Cubic<T>> {
    let len = p1.x - p0.x;
    if len == T::zero() {
        return Err(Error::SingularHermite(p0.x.to_f64_lossy()));
    }
    let secant = (p1.y - p0.y) / len;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let b = (three * secant - two * slope0 - slope1) / len;
    let a = (slope0 + slope1 - two * secant) / (len * len);
    Ok(Cubic {
        origin: p0.x,
        coeffs: [a, b, slope0, p0.y],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPiece<T> {
    pub lo: T,
    pub hi: T,
    pub cubic: Cubic<T>,
    pub kind: PieceKind,
    pub turn: Option<TurnTag>,
}

impl<T: Scalar> TrajectoryPiece<T> {
    pub fn new(lo: T, hi: T, cubic: Cubic<T>, kind: PieceKind, turn: Option<TurnTag>) -> Self {
        debug_assert!(lo <= hi);
        Self {
            lo,
            hi,
            cubic,
            kind,
            turn,
        }
    }

    pub fn horizontal(lo: T, hi: T, y: T, kind: PieceKind) -> Self {
        Self::new(lo, hi, Cubic::constant(y), kind, None)
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        self.cubic.eval(x)
    }

    #[inline]
    pub fn slope(&self, x: T) -> T {
        self.cubic.slope(x)
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn start_point(&self) -> Point2<T> {
        Point2::new(self.lo, self.eval(self.lo))
    }

    pub fn end_point(&self) -> Point2<T> {
        Point2::new(self.hi, self.eval(self.hi))
    }

    /// Copy restricted to `[lo, hi] ∩ domain`, or `None` when that is empty
    /// or a single point.
    pub fn restricted(&self, lo: T, hi: T) -> Option<Self> {
        let lo = lo.max(self.lo);
        let hi = hi.min(self.hi);
        (lo < hi).then_some(Self { lo, hi, ..*self })
    }
}

impl<T: Scalar> Curve<T> for TrajectoryPiece<T> {
    fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }
    fn eval(&self, x: T) -> T {
        self.cubic.eval(x)
    }
}

/// Which part of the traversal a position belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Entry,
    Graph,
    Exit,
}

impl Segment {
    /// Whether the robot moves toward decreasing x along this segment.
    pub fn is_backward(self) -> bool {
        !matches!(self, Segment::Graph)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPosition<T> {
    pub segment: Segment,
    pub x: T,
}

/// The three-part detour around one obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct TurningTrajectory<T> {
    pub part_i: TrajectoryPiece<T>,
    /// Horizontal part; zero length when the bypass entry and exit coincide.
    pub part_ii: TrajectoryPiece<T>,
    pub part_iii: TrajectoryPiece<T>,
    /// Anchors `a`, `b`, `c`, `d` in traversal order.
    pub anchors: [Point2<T>; 4],
    pub slopes: [T; 4],
    pub tag: TurnTag,
    pub rho: T,
    pub delta: T,
}

impl<T: Scalar> TurningTrajectory<T> {
    pub fn start(&self) -> Point2<T> {
        self.anchors[0]
    }

    pub fn end(&self) -> Point2<T> {
        self.anchors[3]
    }

    pub fn pieces(&self) -> impl Iterator<Item = &TrajectoryPiece<T>> {
        [&self.part_i, &self.part_ii, &self.part_iii].into_iter()
    }

    /// Evaluates `h(x)` over `[a.x, d.x]`, using the later part at shared
    /// abscissae.
    pub fn eval(&self, x: T) -> T {
        if x >= self.part_iii.lo {
            self.part_iii.eval(x)
        } else if x >= self.part_ii.lo {
            self.part_ii.eval(x)
        } else {
            self.part_i.eval(x)
        }
    }
}

/// Builds the turn from its anchors and slopes: Hermite cubic `a -> b`,
/// horizontal segment `b -> c`, Hermite cubic `c -> d`.
pub fn build_turning_trajectory<T: Scalar>(
    anchors: [Point2<T>; 4],
    slopes: [T; 4],
    tag: TurnTag,
    rho: T,
    delta: T,
) -> Result<TurningTrajectory<T>> {
    let [a, b, c, d] = anchors;
    if !(a.x <= b.x && b.x <= c.x && c.x <= d.x) {
        return Err(Error::AnchorOrder(format!(
            "expected a.x <= b.x <= c.x <= d.x, got {}, {}, {}, {}",
            a.x, b.x, c.x, d.x
        )));
    }
    let tol = T::tolerance() * b.y.abs().max(T::one());
    if (b.y - c.y).abs() > tol {
        return Err(Error::AnchorOrder(format!(
            "bypass segment must be horizontal, got b.y = {} and c.y = {}",
            b.y, c.y
        )));
    }
    let first = solve_hermite_cubic(a, b, slopes[0], slopes[1])?;
    let third = solve_hermite_cubic(c, d, slopes[2], slopes[3])?;
    Ok(TurningTrajectory {
        part_i: TrajectoryPiece::new(a.x, b.x, first, PieceKind::TurnI, Some(tag)),
        part_ii: TrajectoryPiece::new(b.x, c.x, Cubic::constant(b.y), PieceKind::TurnII, Some(tag)),
        part_iii: TrajectoryPiece::new(c.x, d.x, third, PieceKind::TurnIII, Some(tag)),
        anchors,
        slopes,
        tag,
        rho,
        delta,
    })
}

/// Reference trajectory in the local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RefTrajectory<T> {
    graph: Vec<TrajectoryPiece<T>>,
    /// Ascending in x, traversed from high x down to `start`.
    entry: Vec<TrajectoryPiece<T>>,
    /// Traversed from its high end down to the goal abscissa.
    exit: Option<TrajectoryPiece<T>>,
    /// Abscissa at which forward traversal of the graph begins.
    start: T,
    goal_x: T,
    turn_window: Option<(T, T)>,
}

/// Straight segment from the local start to the local goal.
pub fn initial_trajectory<T: Scalar>(x_g: T) -> Result<RefTrajectory<T>> {
    if !(x_g > T::zero()) || !x_g.is_finite() {
        return Err(Error::NonPositiveLength(x_g.to_f64_lossy()));
    }
    Ok(RefTrajectory {
        graph: vec![TrajectoryPiece::horizontal(
            T::zero(),
            x_g,
            T::zero(),
            PieceKind::InitialLine,
        )],
        entry: Vec::new(),
        exit: None,
        start: T::zero(),
        goal_x: x_g,
        turn_window: None,
    })
}

impl<T: Scalar> RefTrajectory<T> {
    /// Forward graph pieces, ordered by x.
    pub fn pieces(&self) -> &[TrajectoryPiece<T>] {
        &self.graph
    }

    pub fn entry(&self) -> &[TrajectoryPiece<T>] {
        &self.entry
    }

    pub fn exit(&self) -> Option<&TrajectoryPiece<T>> {
        self.exit.as_ref()
    }

    pub fn domain(&self) -> (T, T) {
        (self.graph[0].lo, self.graph[self.graph.len() - 1].hi)
    }

    pub fn goal_x(&self) -> T {
        self.goal_x
    }

    pub fn start(&self) -> T {
        self.start
    }

    /// `[a.x, d.x]` of the most recent turn.
    pub fn turn_window(&self) -> Option<(T, T)> {
        self.turn_window
    }

    fn piece_at(&self, x: T) -> Result<&TrajectoryPiece<T>> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain {
                x: x.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        // Right-hand piece at shared abscissae; zero-length pieces never win.
        let idx = self
            .graph
            .iter()
            .rposition(|p| p.lo <= x && (p.lo < p.hi || p.hi == hi))
            .unwrap_or(0);
        Ok(&self.graph[idx])
    }

    /// `(l(x), l'(x))` on the forward graph.
    pub fn eval_and_slope(&self, x: T) -> Result<(T, T)> {
        let p = self.piece_at(x)?;
        Ok((p.eval(x), p.slope(x)))
    }

    pub fn eval(&self, x: T) -> Result<T> {
        Ok(self.piece_at(x)?.eval(x))
    }

    /// `l(x)` with the abscissa clamped into the graph domain.
    pub fn eval_clamped(&self, x: T) -> T {
        let (lo, hi) = self.domain();
        let xc = x.max(lo).min(hi);
        self.piece_at(xc).map(|p| p.eval(xc)).unwrap_or(T::zero())
    }

    /// Pieces still to be traversed, in traversal order, with their
    /// segments. Backward segments list pieces from high x to low x.
    pub fn remaining(&self) -> Vec<(Segment, TrajectoryPiece<T>)> {
        let mut out = Vec::new();
        for p in self.entry.iter().rev() {
            out.push((Segment::Entry, *p));
        }
        let (_, hi) = self.domain();
        for p in &self.graph {
            if let Some(r) = p.restricted(self.start, hi) {
                out.push((Segment::Graph, r));
            }
        }
        if self.graph.len() == 1 || out.iter().all(|(s, _)| *s != Segment::Graph) {
            // Keep the final point reachable even when the graph is exhausted.
            if self.start >= hi && self.exit.is_none() && self.entry.is_empty() {
                let last = self.graph[self.graph.len() - 1];
                out.push((Segment::Graph, TrajectoryPiece { lo: hi, hi, ..last }));
            }
        }
        if let Some(e) = self.exit {
            out.push((Segment::Exit, e));
        }
        out
    }

    /// Marks everything before `pos` as tracked.
    pub fn advance(&mut self, pos: PathPosition<T>) {
        match pos.segment {
            Segment::Entry => {
                self.entry.retain(|p| p.lo < pos.x);
                if let Some(last) = self.entry.last_mut() {
                    last.hi = last.hi.min(pos.x);
                }
            }
            Segment::Graph => {
                self.entry.clear();
                let (_, hi) = self.domain();
                self.start = self.start.max(pos.x).min(hi);
            }
            Segment::Exit => {
                self.entry.clear();
                self.start = self.domain().1;
                if let Some(e) = self.exit.as_mut() {
                    e.hi = e.hi.min(pos.x).max(e.lo);
                }
            }
        }
    }

    /// Largest positional gap between consecutive pieces in traversal order
    /// and in the graph, with the abscissa where it occurs.
    pub fn max_gap(&self) -> (T, T) {
        let mut worst = (T::zero(), T::zero());
        let mut note = |x: T, gap: T| {
            if gap > worst.1 {
                worst = (x, gap);
            }
        };
        for w in self.graph.windows(2) {
            note(w[1].lo, (w[0].eval(w[0].hi) - w[1].eval(w[1].lo)).abs());
            note(w[1].lo, (w[0].hi - w[1].lo).abs());
        }
        for w in self.entry.windows(2) {
            note(w[1].lo, (w[0].eval(w[0].hi) - w[1].eval(w[1].lo)).abs());
        }
        if let Some(first) = self.entry.first() {
            let g = self.eval_clamped(first.lo);
            note(first.lo, (first.eval(first.lo) - g).abs());
        }
        if let Some(e) = &self.exit {
            let (_, hi) = self.domain();
            note(e.hi, (e.eval(e.hi) - self.eval_clamped(hi)).abs());
        }
        worst
    }

    fn check_continuity(&self) -> Result<()> {
        let (at, gap) = self.max_gap();
        let scale = self.graph.iter().fold(T::one(), |m, p| {
            m.max(p.eval(p.lo).abs()).max(p.eval(p.hi).abs())
        });
        if gap > T::tolerance() * scale {
            return Err(Error::Discontinuity {
                at: at.to_f64_lossy(),
                gap: gap.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Serializable piece list.
    pub fn record(&self) -> TrajectoryRecord {
        let piece = |segment: Segment, p: &TrajectoryPiece<T>| PieceRecord {
            segment,
            kind: p.kind,
            domain: [p.lo.to_f64_lossy(), p.hi.to_f64_lossy()],
            coeffs: p.cubic.absolute().map(|c| c.to_f64_lossy()),
            obstacle: p.turn.map(|t| t.obstacle),
            direction: p.turn.map(|t| t.direction.as_i8()),
        };
        let mut pieces: Vec<PieceRecord> = self
            .entry
            .iter()
            .map(|p| piece(Segment::Entry, p))
            .collect();
        pieces.extend(self.graph.iter().map(|p| piece(Segment::Graph, p)));
        pieces.extend(self.exit.iter().map(|p| piece(Segment::Exit, p)));
        TrajectoryRecord {
            goal_x: self.goal_x.to_f64_lossy(),
            start: self.start.to_f64_lossy(),
            pieces,
        }
    }
}

/// Splices `turn` into `traj`.
///
/// The graph becomes: the old graph up to `a.x`, the turn, and the old graph
/// beyond `d.x`. When `d.x` lies past the end of the graph the turn ends on
/// the axis and an exit connector runs back to the goal. When `a.x` lies
/// behind the robot an entry connector leads from `x_now` back to `a.x`,
/// horizontal at `y_now` if `a.x` precedes the graph, a copy of the old
/// graph otherwise.
pub fn assemble_modified<T: Scalar>(
    traj: &RefTrajectory<T>,
    turn: &TurningTrajectory<T>,
    x_now: T,
    y_now: T,
) -> Result<RefTrajectory<T>> {
    let (lo, hi) = traj.domain();
    let xa = turn.start().x;
    let xd = turn.end().x;

    let mut graph = Vec::new();
    graph.extend(traj.graph.iter().filter_map(|p| p.restricted(lo, xa)));
    graph.extend(turn.pieces().filter(|p| !p.is_degenerate()).copied());
    let exit = if xd < hi {
        graph.extend(traj.graph.iter().filter_map(|p| p.restricted(xd, hi)));
        traj.exit
    } else if xd == hi {
        traj.exit
    } else if xd > traj.goal_x {
        Some(TrajectoryPiece::horizontal(
            traj.goal_x,
            xd,
            T::zero(),
            PieceKind::Connection,
        ))
    } else {
        None
    };

    let mut entry = Vec::new();
    let start = if xa < x_now {
        if xa < lo {
            entry.push(TrajectoryPiece::horizontal(
                xa,
                x_now,
                y_now,
                PieceKind::Connection,
            ));
        } else {
            entry.extend(traj.graph.iter().filter_map(|p| {
                p.restricted(xa, x_now).map(|r| TrajectoryPiece {
                    kind: PieceKind::Connection,
                    turn: None,
                    ..r
                })
            }));
            let covered = entry.last().map(|p| p.hi).unwrap_or(xa);
            if covered < x_now {
                // Robot ahead of the graph end: continue level from there.
                let y = traj.eval_clamped(covered);
                entry.push(TrajectoryPiece::horizontal(
                    covered,
                    x_now,
                    y,
                    PieceKind::Connection,
                ));
            }
        }
        xa
    } else {
        x_now.max(xa.min(lo)).min(xd.max(hi))
    };

    let out = RefTrajectory {
        graph,
        entry,
        exit,
        start,
        goal_x: traj.goal_x,
        turn_window: Some((xa, xd)),
    };
    out.check_continuity()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceRecord {
    pub segment: Segment,
    pub kind: PieceKind,
    pub domain: [f64; 2],
    /// `[a, b, c, d]` of `a x^3 + b x^2 + c x + d`.
    pub coeffs: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub obstacle: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub goal_x: f64,
    pub start: f64,
    pub pieces: Vec<PieceRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    const TAG: TurnTag = TurnTag {
        obstacle: 1,
        direction: TurnDirection::Left,
    };

    #[test]
    fn initial_examples() {
        let t = initial_trajectory(44.5).unwrap();
        assert_eq!(t.pieces().len(), 1);
        assert_eq!(t.domain(), (0.0, 44.5));
        assert_eq!(t.eval_and_slope(0.5).unwrap(), (0.0, 0.0));
        let t = initial_trajectory(10.0).unwrap();
        for x in [0.0, 3.3, 10.0] {
            assert_eq!(t.eval_and_slope(x).unwrap().1, 0.0);
        }
        assert!(matches!(
            initial_trajectory(0.0),
            Err(Error::NonPositiveLength(_))
        ));
        assert!(matches!(
            initial_trajectory(-1.0),
            Err(Error::NonPositiveLength(_))
        ));
    }

    #[test]
    fn out_of_domain() {
        let t = initial_trajectory(1.0).unwrap();
        assert!(matches!(
            t.eval_and_slope(1.5),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            t.eval_and_slope(-0.1),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn hermite_examples() {
        let c = solve_hermite_cubic(p(0.0, 0.0), p(1.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(c.absolute(), [-2.0, 3.0, 0.0, 0.0]);
        let c = solve_hermite_cubic(p(0.0, 0.0), p(2.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(c.absolute(), [-0.25, 0.75, 0.0, 0.0]);
        let c = solve_hermite_cubic(p(0.0, 0.0), p(1.0, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(c.absolute(), [0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            solve_hermite_cubic(p(2.0, 0.0), p(2.0, 1.0), 0.0, 0.0),
            Err(Error::SingularHermite(2.0))
        );
    }

    #[test]
    fn hermite_in_f32() {
        let c = solve_hermite_cubic::<f32>(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 0.0, 0.0)
            .unwrap();
        assert_eq!(c.absolute(), [-2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn piece_eval_example() {
        let piece = TrajectoryPiece::new(
            0.0,
            1.0,
            Cubic {
                origin: 0.0,
                coeffs: [-2.0, 3.0, 0.0, 0.0],
            },
            PieceKind::TurnI,
            None,
        );
        assert_eq!(piece.eval(0.5), 0.5);
        assert_eq!(piece.slope(0.5), 1.5);
    }

    #[test]
    fn turning_trajectory_examples() {
        let t = build_turning_trajectory(
            [p(0.0, 0.0), p(1.0, 1.0), p(3.0, 1.0), p(4.0, 0.0)],
            [0.0; 4],
            TAG,
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(t.part_i.cubic.absolute(), [-2.0, 3.0, 0.0, 0.0]);
        assert_eq!((t.part_ii.lo, t.part_ii.hi), (1.0, 3.0));
        assert_eq!(t.part_ii.eval(2.0), 1.0);
        // Part III mirrors part I about x = 2.
        for x in [3.0, 3.25, 3.5, 3.9, 4.0] {
            assert!((t.part_iii.eval(x) - t.part_i.eval(4.0 - x)).abs() < 1e-12);
        }

        let t = build_turning_trajectory(
            [p(0.0, 0.0), p(5.0, 5.0), p(5.0, 5.0), p(9.0, 0.0)],
            [0.0; 4],
            TAG,
            2.0,
            1.0,
        )
        .unwrap();
        assert!(t.part_ii.is_degenerate());
        assert_eq!(t.eval(5.0), 5.0);
        assert!(t.part_i.slope(5.0).abs() < 1e-12 && t.part_iii.slope(5.0).abs() < 1e-12);
    }

    #[test]
    fn turning_trajectory_rejects_bad_anchors() {
        let bad_order = build_turning_trajectory(
            [p(2.0, 0.0), p(1.0, 1.0), p(3.0, 1.0), p(4.0, 0.0)],
            [0.0; 4],
            TAG,
            1.0,
            1.0,
        );
        assert!(matches!(bad_order, Err(Error::AnchorOrder(_))));
        let tilted = build_turning_trajectory(
            [p(0.0, 0.0), p(1.0, 1.0), p(3.0, 1.5), p(4.0, 0.0)],
            [0.0; 4],
            TAG,
            1.0,
            1.0,
        );
        assert!(matches!(tilted, Err(Error::AnchorOrder(_))));
    }

    fn simple_turn(a: Point2<f64>, d: Point2<f64>, height: f64) -> TurningTrajectory<f64> {
        let mid = (a.x + d.x) / 2.0;
        build_turning_trajectory(
            [a, p(mid - 1.0, height), p(mid + 1.0, height), d],
            [0.0; 4],
            TAG,
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn assemble_turn_inside_domain() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(1.0, 0.0), p(9.0, 0.0), 3.0);
        let out = assemble_modified(&base, &turn, 0.0, 0.0).unwrap();
        let kinds: Vec<_> = out.pieces().iter().map(|p| (p.kind, p.lo, p.hi)).collect();
        assert_eq!(
            kinds,
            vec![
                (PieceKind::InitialLine, 0.0, 1.0),
                (PieceKind::TurnI, 1.0, 4.0),
                (PieceKind::TurnII, 4.0, 6.0),
                (PieceKind::TurnIII, 6.0, 9.0),
                (PieceKind::InitialLine, 9.0, 10.0),
            ]
        );
        assert!(out.entry().is_empty() && out.exit().is_none());
        assert_eq!(out.turn_window(), Some((1.0, 9.0)));
    }

    #[test]
    fn assemble_turn_ending_at_goal() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(2.0, 0.0), p(10.0, 0.0), 2.0);
        let out = assemble_modified(&base, &turn, 0.0, 0.0).unwrap();
        assert_eq!(out.domain(), (0.0, 10.0));
        assert!(out.exit().is_none());
        assert_eq!(out.pieces().last().unwrap().kind, PieceKind::TurnIII);
    }

    #[test]
    fn assemble_turn_behind_start() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(-1.0, 2.0), p(7.0, 0.0), 4.0);
        let out = assemble_modified(&base, &turn, 0.5, 2.0).unwrap();
        assert_eq!(out.entry().len(), 1);
        let c1 = out.entry()[0];
        assert_eq!((c1.lo, c1.hi, c1.eval(0.0)), (-1.0, 0.5, 2.0));
        assert_eq!(c1.kind, PieceKind::Connection);
        assert_eq!(out.domain().0, -1.0);
        assert_eq!(out.start(), -1.0);
    }

    #[test]
    fn assemble_turn_past_goal_adds_exit() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(4.0, 0.0), p(12.0, 0.0), 2.0);
        let out = assemble_modified(&base, &turn, 0.0, 0.0).unwrap();
        let exit = out.exit().unwrap();
        assert_eq!((exit.lo, exit.hi, exit.eval(11.0)), (10.0, 12.0, 0.0));
        assert_eq!(out.domain(), (0.0, 12.0));
    }

    #[test]
    fn assemble_backtrack_copies_graph() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(2.0, 0.0), p(8.0, 0.0), 2.0);
        let out = assemble_modified(&base, &turn, 3.0, 0.4).unwrap();
        assert_eq!(out.entry().len(), 1);
        let c1 = out.entry()[0];
        assert_eq!((c1.lo, c1.hi, c1.eval(2.5)), (2.0, 3.0, 0.0));
        let rem = out.remaining();
        assert_eq!(rem[0].0, Segment::Entry);
        assert_eq!(rem[1].0, Segment::Graph);
        assert_eq!(rem[1].1.kind, PieceKind::TurnI);
    }

    #[test]
    fn advance_trims_remaining() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(2.0, 0.0), p(8.0, 0.0), 2.0);
        let mut out = assemble_modified(&base, &turn, 3.0, 0.0).unwrap();
        out.advance(PathPosition {
            segment: Segment::Entry,
            x: 2.5,
        });
        assert_eq!(out.entry()[0].hi, 2.5);
        out.advance(PathPosition {
            segment: Segment::Graph,
            x: 5.0,
        });
        assert!(out.entry().is_empty());
        let rem = out.remaining();
        assert_eq!(rem[0].1.lo, 5.0);
    }

    #[test]
    fn record_lists_absolute_coefficients() {
        let base = initial_trajectory(10.0).unwrap();
        let turn = simple_turn(p(1.0, 0.0), p(9.0, 0.0), 3.0);
        let out = assemble_modified(&base, &turn, 0.0, 0.0).unwrap();
        let rec = out.record();
        assert_eq!(rec.pieces.len(), 5);
        let json = serde_json::to_string(&rec).unwrap();
        let back: TrajectoryRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        let turn_i = &rec.pieces[1];
        let [a, b, c, d] = turn_i.coeffs;
        let y = |x: f64| ((a * x + b) * x + c) * x + d;
        assert!(y(1.0).abs() < 1e-12 && (y(4.0) - 3.0).abs() < 1e-12);
        assert_eq!(turn_i.direction, Some(1));
    }
}
