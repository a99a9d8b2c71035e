use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Point3, TimestampUs};

pub const LIDAR_HEADER: &str = "timestamp_us,x,y,z";

#[derive(Debug, Clone, PartialEq)]
pub struct LidarFrame {
    pub timestamp_us: TimestampUs,
    /// Points in the LiDAR frame.
    pub points: Vec<Point3>,
}

pub fn load_lidar_sequence(path: &Path) -> Result<Vec<LidarFrame>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lidar(&text, path)
}

/// Parses the point-cloud text format; frames are delimited by timestamp change.
pub fn parse_lidar(text: &str, path: &Path) -> Result<Vec<LidarFrame>> {
    let mut frames: Vec<LidarFrame> = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(frames),
        Some((_, header)) if header.trim() == LIDAR_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {LIDAR_HEADER:?}, got {header:?}"),
            ))
        }
    }
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let t: TimestampUs = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad timestamp {:?}", fields[0])))?;
        let mut xyz = [0.0f64; 3];
        for (k, f) in fields[1..].iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad coordinate {f:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("non-finite coordinate {f:?}"),
                ));
            }
            xyz[k] = v;
        }
        let point = Point3::new(xyz[0], xyz[1], xyz[2], Frame::Lidar);
        match frames.last_mut() {
            Some(frame) if frame.timestamp_us == t => frame.points.push(point),
            Some(frame) if frame.timestamp_us > t => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("non-monotonic timestamp {t} after {}", frame.timestamp_us),
                ))
            }
            _ => frames.push(LidarFrame {
                timestamp_us: t,
                points: vec![point],
            }),
        }
    }
    Ok(frames)
}

pub fn serialize_lidar(frames: &[LidarFrame]) -> String {
    let n: usize = frames.iter().map(|f| f.points.len()).sum();
    let mut out = String::with_capacity(32 * n + 32);
    out.push_str(LIDAR_HEADER);
    out.push('\n');
    for f in frames {
        for p in &f.points {
            let _ = writeln!(out, "{},{},{},{}", f.timestamp_us, p.x, p.y, p.z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "timestamp_us,x,y,z\n100,1,2,3\n100,4,5,6\n200,0.5,-1,2\n300,7,8,9\n";

    #[test]
    fn three_frames_in_order() {
        let frames = parse_lidar(THREE, Path::new("l.csv")).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[0].points.len(), 2);
        assert_eq!(
            frames.iter().map(|f| f.timestamp_us).collect::<Vec<_>>(),
            vec![100, 200, 300]
        );
        assert_eq!(serialize_lidar(&frames), THREE);
    }

    #[test]
    fn nan_names_line() {
        let text = "timestamp_us,x,y,z\n100,1,2,3\n100,NaN,2,3\n";
        match parse_lidar(text, Path::new("l.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_is_valid() {
        assert!(parse_lidar("", Path::new("l.csv")).unwrap().is_empty());
        assert!(parse_lidar("timestamp_us,x,y,z\n", Path::new("l.csv"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new("l.csv");
        assert!(parse_lidar("t,x,y,z\n", p).is_err());
        assert!(parse_lidar("timestamp_us,x,y,z\n200,1,2,3\n100,1,2,3\n", p).is_err());
        assert!(parse_lidar("timestamp_us,x,y,z\n100,1,2\n", p).is_err());
        assert!(parse_lidar("timestamp_us,x,y,z\n100,1,2,inf\n", p).is_err());
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_lidar_sequence(Path::new("/nonexistent/lidar.csv")),
            Err(Error::Io { .. })
        ));
    }
}
