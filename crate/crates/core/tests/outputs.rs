use std::fs;
use std::path::Path;

use reactive_nav::output::{
    read_trajectory_csv, write_run, EVENTS_FILE, METRICS_FILE, TRAJECTORY_FILE,
};
use reactive_nav::scenario::parse_and_validate;
use reactive_nav::sim::{compute_metrics, run_episode, Event, Metrics};

fn committed(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

#[test]
fn metrics_recompute_from_the_logged_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["empty.toml", "single_disc.toml", "infeasible.toml"] {
        let s = parse_and_validate(&committed(name)).unwrap();
        let mut log = run_episode(&s).unwrap();
        let out = dir.path().join(&s.name);
        write_run(&out, &s, &log, false).unwrap();

        let written: Metrics =
            serde_json::from_str(&fs::read_to_string(out.join(METRICS_FILE)).unwrap()).unwrap();
        log.rows = read_trajectory_csv(&out.join(TRAJECTORY_FILE)).unwrap();
        let again = compute_metrics(&log).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        assert!(
            rel(again.trajectory_length, written.trajectory_length) <= 1e-9,
            "{name}"
        );
        assert!(
            rel(again.control_effort, written.control_effort) <= 1e-9,
            "{name}"
        );
        assert_eq!(again.steps, written.steps);
    }
}

#[test]
fn single_disc_replans_and_rerun_overwrites_identically() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_and_validate(&committed("single_disc.toml")).unwrap();
    let log = run_episode(&s).unwrap();
    assert!(log.success);
    assert!(log.events.iter().any(|e| matches!(e, Event::Replan { .. })));

    write_run(dir.path(), &s, &log, true).unwrap();
    let first = fs::read(dir.path().join(TRAJECTORY_FILE)).unwrap();
    let events = fs::read_to_string(dir.path().join(EVENTS_FILE)).unwrap();
    assert!(events.lines().any(|l| l.contains("\"type\":\"replan\"")));
    write_run(dir.path(), &s, &run_episode(&s).unwrap(), true).unwrap();
    assert_eq!(fs::read(dir.path().join(TRAJECTORY_FILE)).unwrap(), first);
}
