//! Run artifacts: trajectory log, events, metrics, reference pieces, plot
//! data and an optional SVG render. Every file is written to a temporary
//! sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{enlarge_with, ConvexRegion, Frame, Point2};
use crate::scenario::Scenario;
use crate::sim::{compute_metrics, EpisodeLog, LogRow, Metrics};
use crate::trajectory::{Segment, TrajectoryRecord};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const REFERENCE_FILE: &str = "reference.json";
pub const PLOT_FILE: &str = "plot.json";
pub const RENDER_FILE: &str = "render.svg";

const CSV_HEADER: &str = "t,x,y,theta,v,w,cursor";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: PathBuf,
    pub events: PathBuf,
    pub metrics: PathBuf,
    pub reference: PathBuf,
    pub plot: PathBuf,
    pub render: Option<PathBuf>,
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Log rows as CSV. Floats use the shortest representation that parses back
/// to the same value.
pub fn trajectory_csv(rows: &[LogRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.x, r.y, r.theta, r.v, r.w, r.cursor
        );
    }
    out
}

pub fn parse_trajectory_csv(text: &str, path: &Path) -> Result<Vec<LogRow>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(err(1, format!("expected header {CSV_HEADER}"))),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                return Err(err(i + 1, format!("expected 7 fields, got {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(i + 1, e.to_string()));
            Ok(LogRow {
                t: num(f[0])?,
                x: num(f[1])?,
                y: num(f[2])?,
                theta: num(f[3])?,
                v: num(f[4])?,
                w: num(f[5])?,
                cursor: f[6].parse().map_err(|e| err(i + 1, format!("{e}")))?,
            })
        })
        .collect()
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<LogRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text, path)
}

fn events_jsonl(log: &EpisodeLog) -> String {
    let mut out = String::new();
    for e in &log.events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ReferenceFile<'a> {
    frame_origin: [f64; 2],
    frame_angle: f64,
    #[serde(flatten)]
    trajectory: &'a TrajectoryRecord,
}

#[derive(Serialize)]
struct PlotObstacle {
    id: usize,
    outline: Vec<[f64; 2]>,
    enlarged: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct PlotData {
    start: [f64; 2],
    goal: [f64; 2],
    robot_radius: f64,
    obstacles: Vec<PlotObstacle>,
    reference: Vec<[f64; 2]>,
    path: Vec<[f64; 2]>,
}

const DISC_OUTLINE_POINTS: usize = 64;

fn outline(region: &ConvexRegion<f64>) -> Vec<[f64; 2]> {
    match region {
        ConvexRegion::Disc { center, radius } => (0..DISC_OUTLINE_POINTS)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / DISC_OUTLINE_POINTS as f64;
                [center.x + radius * a.cos(), center.y + radius * a.sin()]
            })
            .collect(),
        ConvexRegion::Polygon { vertices } => vertices.iter().map(|v| [v.x, v.y]).collect(),
    }
}

/// Reference trajectory as a global polyline in traversal order of the
/// forward pieces, followed by the exit connector if any.
fn reference_polyline(rec: &TrajectoryRecord, frame: &Frame<f64>) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for piece in rec.pieces.iter().filter(|p| p.segment != Segment::Entry) {
        let [lo, hi] = piece.domain;
        let [a, b, c, d] = piece.coeffs;
        let n = ((hi - lo) / 0.1).ceil().max(1.0) as usize;
        for i in 0..=n {
            let x = if piece.segment == Segment::Exit {
                hi - (hi - lo) * i as f64 / n as f64
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            };
            let y = ((a * x + b) * x + c) * x + d;
            let g = frame.to_global(Point2::new(x, y));
            out.push([g.x, g.y]);
        }
    }
    out
}

fn plot_data(s: &Scenario, log: &EpisodeLog) -> Result<PlotData> {
    let mut obstacles = Vec::new();
    for (id, o) in &s.obstacles {
        let e = enlarge_with(o, s.robot_radius, s.arc_points)?;
        obstacles.push(PlotObstacle {
            id: *id,
            outline: outline(o),
            enlarged: outline(&e.boundary),
        });
    }
    Ok(PlotData {
        start: [s.start.x, s.start.y],
        goal: [s.goal.x, s.goal.y],
        robot_radius: s.robot_radius,
        obstacles,
        reference: reference_polyline(&log.reference, &log.frame),
        path: log.rows.iter().map(|r| [r.x, r.y]).collect(),
    })
}

fn render_svg(plot: &PlotData) -> String {
    let mut pts: Vec<[f64; 2]> = plot.path.clone();
    pts.extend(plot.reference.iter().copied());
    pts.push(plot.start);
    pts.push(plot.goal);
    for o in &plot.obstacles {
        pts.extend(o.enlarged.iter().copied());
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for [x, y] in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let pad = 1.0;
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let scale = 800.0 / w.max(h);
    let map = |p: &[f64; 2]| ((p[0] - x0 + pad) * scale, (y1 + pad - p[1]) * scale);
    let poly = |pts: &[[f64; 2]]| {
        pts.iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        w * scale,
        h * scale
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for o in &plot.obstacles {
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
            poly(&o.enlarged)
        );
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#555" stroke="black"/>"##,
            poly(&o.outline)
        );
    }
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        poly(&plot.reference)
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
        poly(&plot.path)
    );
    for (p, color) in [(plot.start, "green"), (plot.goal, "orange")] {
        let (x, y) = map(&p);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes all artifacts of one episode into `dir`, creating it if needed.
pub fn write_run(
    dir: &Path,
    s: &Scenario,
    log: &EpisodeLog,
    render: bool,
) -> Result<(RunOutput, Metrics)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let metrics = compute_metrics(log)?;
    let out = RunOutput {
        trajectory: dir.join(TRAJECTORY_FILE),
        events: dir.join(EVENTS_FILE),
        metrics: dir.join(METRICS_FILE),
        reference: dir.join(REFERENCE_FILE),
        plot: dir.join(PLOT_FILE),
        render: render.then(|| dir.join(RENDER_FILE)),
    };
    write_atomic(&out.trajectory, trajectory_csv(&log.rows).as_bytes())?;
    write_atomic(&out.events, events_jsonl(log).as_bytes())?;
    write_atomic(&out.metrics, pretty_json(&metrics).as_bytes())?;
    let reference = ReferenceFile {
        frame_origin: [log.frame.origin().x, log.frame.origin().y],
        frame_angle: log.frame.angle(),
        trajectory: &log.reference,
    };
    write_atomic(&out.reference, pretty_json(&reference).as_bytes())?;
    let plot = plot_data(s, log)?;
    write_atomic(&out.plot, pretty_json(&plot).as_bytes())?;
    if let Some(path) = &out.render {
        write_atomic(path, render_svg(&plot).as_bytes())?;
    }
    Ok((out, metrics))
}
