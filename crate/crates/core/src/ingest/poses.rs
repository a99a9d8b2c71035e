use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{Frame, RigidTransform, StampedPose, TimestampUs};

pub const POSE_HEADER: &str = "timestamp_us,x,y,z,qw,qx,qy,qz";
const UNIT_TOL: f64 = 1e-6;

/// World-from-LiDAR poses. Quaternions must be unit length to 1e-6.
pub fn load_poses(path: &Path) -> Result<Vec<StampedPose>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_poses(&text, path)
}

pub fn parse_poses(text: &str, path: &Path) -> Result<Vec<StampedPose>> {
    let mut poses: Vec<StampedPose> = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(poses),
        Some((_, h)) if h.trim() == POSE_HEADER => {}
        Some((_, h)) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {POSE_HEADER:?}, got {h:?}"),
            ))
        }
    }
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let t: TimestampUs = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line_no, "bad timestamp"))?;
        let mut v = [0.0f64; 7];
        for (k, f) in fields[1..].iter().enumerate() {
            v[k] = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(path, line_no, format!("bad number {f:?}")))?;
        }
        let q = Quaternion::new(v[3], v[4], v[5], v[6]);
        if (q.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::parse(
                path,
                line_no,
                format!("quaternion norm {} is not unit", q.norm()),
            ));
        }
        if let Some(prev) = poses.last() {
            if t <= prev.timestamp_us {
                return Err(Error::parse(
                    path,
                    line_no,
                    "pose timestamps must be strictly increasing",
                ));
            }
        }
        poses.push(StampedPose {
            timestamp_us: t,
            transform: RigidTransform::from_quaternion(
                UnitQuaternion::new_unchecked(q),
                Vector3::new(v[0], v[1], v[2]),
                Frame::Lidar,
                Frame::World,
            ),
        });
    }
    Ok(poses)
}

/// Quaternions are written as stored; call sites pass canonical (w >= 0) values.
pub fn serialize_poses(poses: &[(TimestampUs, [f64; 3], [f64; 4])]) -> String {
    let mut out = String::new();
    out.push_str(POSE_HEADER);
    out.push('\n');
    for (t, p, q) in poses {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t, p[0], p[1], p[2], q[0], q[1], q[2], q[3]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "timestamp_us,x,y,z,qw,qx,qy,qz\n0,1,2,3,1,0,0,0\n10000,1.5,2,3,0.7071067811865476,0,0,0.7071067811865476\n";
        let poses = parse_poses(text, Path::new("p.csv")).unwrap();
        assert_eq!(poses.len(), 2);
        assert_eq!(poses[1].transform.translation().x, 1.5);
        let raw: Vec<_> = poses
            .iter()
            .map(|p| {
                let q = p.transform.quaternion();
                let t = p.transform.translation();
                (p.timestamp_us, [t.x, t.y, t.z], [q.w, q.i, q.j, q.k])
            })
            .collect();
        let again = parse_poses(&serialize_poses(&raw), Path::new("p.csv")).unwrap();
        for (a, b) in poses.iter().zip(&again) {
            let d = a.transform.rotation().matrix() - b.transform.rotation().matrix();
            assert!(d.amax() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        let text = "timestamp_us,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0.01,0,0\n";
        assert!(matches!(
            parse_poses(text, Path::new("p.csv")),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_repeated_timestamp() {
        let text = "timestamp_us,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0,0,0,0,1,0,0,0\n";
        assert!(parse_poses(text, Path::new("p.csv")).is_err());
    }
}
