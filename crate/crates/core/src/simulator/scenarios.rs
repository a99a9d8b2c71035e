//! Built-in harbor scenarios.
//!
//! All share one harbor: a quay along the north, a breakwater to the west, a
//! floating dock and two mooring poles. Structure edges sit 0.15 m or more
//! from cell boundaries so range noise never moves a return into a
//! neighboring cell. The chart places the quay face 1 m inland and omits the
//! floating dock and poles.

use super::{rect, EgoWaypoint, LidarSpec, ScenarioSpec, TargetScript, Waypoint};
use crate::geometry::GridSpec;

const QUAY: [f64; 4] = [-30.35, 30.15, 30.35, 50.35];
const BREAKWATER: [f64; 4] = [-30.35, 18.15, -22.15, 21.35];
const FLOATING_DOCK: [f64; 4] = [-14.35, 22.15, -6.15, 24.35];
const POLE_EAST: [f64; 4] = [2.65, 25.65, 3.35, 26.35];
const POLE_WEST: [f64; 4] = [-2.35, 25.65, -1.65, 26.35];
const START_US: i64 = 1_700_000_000_000_000;

pub fn scenario_names() -> &'static [&'static str] {
    &[
        "kayak_undock",
        "docked_boats_mapping",
        "multi_pass",
        "maneuver",
    ]
}

fn r(b: [f64; 4]) -> Vec<[f64; 2]> {
    rect(b[0], b[1], b[2], b[3])
}

fn wp(t_s: f64, x: f64, y: f64) -> Waypoint {
    Waypoint { t_s, x, y }
}

fn harbor(name: &str, duration_s: f64) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        seed: 1,
        duration_s,
        start_us: START_US,
        lidar_rate_hz: 10.0,
        mask_rate_hz: 10.0,
        camera_fps: 30.0,
        camera_phase_s: 0.007,
        pose_rate_hz: 100.0,
        grid: GridSpec {
            origin_x: -50.0,
            origin_y: -20.0,
            cell_size: 0.5,
            n_cols: 200,
            n_rows: 160,
        },
        static_polygons: vec![
            r(QUAY),
            r(BREAKWATER),
            r(FLOATING_DOCK),
            r(POLE_EAST),
            r(POLE_WEST),
        ],
        enc_polygons: vec![r([QUAY[0], QUAY[1] + 1.0, QUAY[2], QUAY[3]]), r(BREAKWATER)],
        docked_vessels: Vec::new(),
        targets: Vec::new(),
        clutter_rate: 20.0,
        lidar: LidarSpec::default(),
        camera: super::CameraSpec::default(),
        // Stationary ego, LiDAR x axis pointing north at the quay.
        ego: vec![EgoWaypoint {
            t_s: 0.0,
            x: 0.0,
            y: 0.0,
            yaw_deg: 90.0,
        }],
        mapping_duration_s: 10.0,
    }
}

fn kayak(id: u32, waypoints: Vec<Waypoint>) -> TargetScript {
    TargetScript {
        id,
        shape: rect(-1.5, -0.4, 1.5, 0.4),
        waypoints,
        initial_heading_deg: 0.0,
        vessel: true,
    }
}

fn day_cruiser(id: u32, waypoints: Vec<Waypoint>, heading: f64) -> TargetScript {
    TargetScript {
        id,
        shape: rect(-4.5, -1.5, 4.5, 1.5),
        waypoints,
        initial_heading_deg: heading,
        vessel: true,
    }
}

/// Kayak leaves the quay face and heads into the channel while a day cruiser
/// crosses in front of it.
fn kayak_undock() -> ScenarioSpec {
    let mut s = harbor("kayak_undock", 20.0);
    s.targets = vec![
        kayak(
            1,
            vec![
                wp(0.0, 10.0, 29.0),
                wp(4.0, 12.0, 29.0),
                wp(6.0, 13.6, 28.2),
                wp(20.0, 13.6 - 0.85 * 14.0, 28.2 - 1.15 * 14.0),
            ],
        ),
        day_cruiser(2, vec![wp(0.0, 46.0, 12.0), wp(20.0, -44.0, 12.0)], 180.0),
    ];
    s
}

fn docked_boats_mapping() -> ScenarioSpec {
    let mut s = harbor("docked_boats_mapping", 60.0);
    s.docked_vessels = vec![
        rect(-20.35, 27.15, -14.15, 29.35),
        rect(-5.35, 27.15, 0.85, 29.35),
        rect(12.65, 27.15, 18.85, 29.35),
    ];
    s.mapping_duration_s = 60.0;
    s
}

/// Three vessels crossing the channel at different speeds.
fn multi_pass() -> ScenarioSpec {
    let mut s = harbor("multi_pass", 20.0);
    s.targets = vec![
        day_cruiser(1, vec![wp(0.0, -40.0, 8.0), wp(20.0, 40.0, 8.0)], 0.0),
        day_cruiser(2, vec![wp(0.0, 35.0, 15.0), wp(20.0, -35.0, 15.0)], 180.0),
        kayak(3, vec![wp(0.0, -20.0, -8.0), wp(20.0, 10.0, -8.0)]),
    ];
    s
}

/// A target that turns sharply twice, beyond what a constant-velocity model
/// predicts.
fn maneuver() -> ScenarioSpec {
    let mut s = harbor("maneuver", 20.0);
    s.targets = vec![day_cruiser(
        1,
        vec![
            wp(0.0, -25.0, 10.0),
            wp(8.0, -1.0, 10.0),
            wp(12.0, -1.0, 18.0),
            wp(20.0, -12.0, 18.0),
        ],
        0.0,
    )];
    s
}

pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    vec![
        kayak_undock(),
        docked_boats_mapping(),
        multi_pass(),
        maneuver(),
    ]
}

pub fn builtin_scenario(name: &str) -> Option<ScenarioSpec> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::super::{placed_shape, target_pose, to_polygon};
    use super::*;

    fn distance_to(poly: &crate::ingest::Polygon, p: (f64, f64)) -> f64 {
        if poly.contains(p.0, p.1) {
            return 0.0;
        }
        poly.edges()
            .map(|(a, b)| {
                let ab = (b.0 - a.0, b.1 - a.1);
                let t = (((p.0 - a.0) * ab.0 + (p.1 - a.1) * ab.1) / (ab.0 * ab.0 + ab.1 * ab.1))
                    .clamp(0.0, 1.0);
                ((p.0 - a.0 - t * ab.0).powi(2) + (p.1 - a.1 - t * ab.1).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn all_valid_and_named() {
        let all = builtin_scenarios();
        assert_eq!(
            all.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
            scenario_names()
        );
        for s in &all {
            s.validate().unwrap();
        }
        assert!(builtin_scenario("nope").is_none());
    }

    #[test]
    fn kayak_starts_next_to_the_quay() {
        let s = builtin_scenario("kayak_undock").unwrap();
        let quay = to_polygon(&s.static_polygons[0]).unwrap();
        let hull = placed_shape(&s.targets[0], 0.0).unwrap();
        let gap = hull
            .exterior
            .iter()
            .map(|&p| distance_to(&quay, p))
            .fold(f64::INFINITY, f64::min);
        assert!(gap > 0.0 && gap <= 1.0, "gap {gap}");
    }

    #[test]
    fn hulls_never_overlap_structure() {
        for s in builtin_scenarios() {
            let statics: Vec<_> = s
                .static_polygons
                .iter()
                .map(|p| to_polygon(p).unwrap())
                .collect();
            for t in &s.targets {
                for k in 0..=(s.duration_s * 10.0) as usize {
                    let hull = placed_shape(t, k as f64 * 0.1).unwrap();
                    for st in &statics {
                        assert!(
                            hull.exterior.iter().all(|&(x, y)| !st.contains(x, y)),
                            "{} target {}",
                            s.name,
                            t.id
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn docked_scene_has_no_moving_targets() {
        let s = builtin_scenario("docked_boats_mapping").unwrap();
        assert!(s.targets.is_empty());
        assert_eq!(s.docked_vessels.len(), 3);
    }

    #[test]
    fn maneuver_turns_ninety_degrees_within_two_seconds() {
        let s = builtin_scenario("maneuver").unwrap();
        let t = &s.targets[0];
        let heading = |x: f64| target_pose(t, x).2;
        let found = (0..200).any(|k| {
            let t0 = k as f64 * 0.1;
            let d = (heading(t0 + 2.0) - heading(t0)).abs();
            let d = d.min(std::f64::consts::TAU - d);
            d >= std::f64::consts::FRAC_PI_2 - 1e-9
        });
        assert!(found);
    }
}
