use std::path::Path;
use std::process::{Command, Output};

fn nearshore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearshore"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nearshore(&["simulate", "--scenario", "nope", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = nearshore(&["--config", "/nonexistent/cfg.toml", "simulate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(
        nearshore(&["track", "--map-variant", "fuzzy"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seeded_simulation_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        let o = nearshore(&[
            "simulate",
            "--scenario",
            "kayak_undock",
            "--seed",
            "7",
            "--out",
            s(d),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (fa, fb) = (read_dir_bytes(a.path()), read_dir_bytes(b.path()));
    assert!(!fa.is_empty());
    assert!(fa == fb);
}

#[test]
fn map_fails_on_a_sequence_shorter_than_the_window() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert!(
        nearshore(&["simulate", "--scenario", "kayak_undock", "--out", s(&data)])
            .status
            .success()
    );
    let mut spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("scenario.json")).unwrap())
            .unwrap();
    // 10 Hz: 2.9 s gives 30 frames
    spec["mapping_duration_s"] = 2.9.into();
    let spec_path = tmp.path().join("short.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    let short = tmp.path().join("short");
    let o = nearshore(&["simulate", "--spec", s(&spec_path), "--out", s(&short)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = nearshore(&[
        "map",
        "--data",
        s(&short),
        "--out",
        s(&tmp.path().join("out")),
    ]);
    assert!(!o.status.success());
    assert!(!tmp.path().join("out").join("map.pgm").exists());
}

#[test]
fn eval_without_truth_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(
        out.join("tracks.csv"),
        "timestamp_us,track_id,status,x,y,vx,vy,r,v,P_xx,P_xy,P_yy\n",
    )
    .unwrap();
    let o = nearshore(&[
        "eval",
        "--data",
        s(&tmp.path().join("empty")),
        "--out",
        s(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn pipeline_end_to_end_and_shuffled_tracks_score_the_same() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = nearshore(&["pipeline", "--scenario", "kayak_undock", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "map.pgm",
        "map_boundary.geojson",
        "detections.csv",
        "tracks.csv",
        "track_summary.json",
        "tracks.svg",
        "scores.json",
        "scores.csv",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let scores = std::fs::read_to_string(out.join("scores.csv")).unwrap();

    let tracks = std::fs::read_to_string(out.join("tracks.csv")).unwrap();
    let mut lines: Vec<&str> = tracks.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let shuffled = std::iter::once(header)
        .chain(lines)
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    std::fs::write(out.join("tracks.csv"), shuffled).unwrap();
    let o = nearshore(&["eval", "--data", s(&out.join("data")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read_to_string(out.join("scores.csv")).unwrap(),
        scores
    );
    assert_eq!(String::from_utf8_lossy(&o.stdout), scores);
}
