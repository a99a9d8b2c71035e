//! 2D first-hit ray casting against polygon edges.

use crate::ingest::Polygon;

/// What a ray hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Static(usize),
    Docked(usize),
    Target(u32),
}

impl Owner {
    pub fn is_vessel(self) -> bool {
        !matches!(self, Owner::Static(_))
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: (f64, f64),
    b: (f64, f64),
    owner: Owner,
}

/// Edges of every polygon in the scene at one instant.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    segments: Vec<Segment>,
    shapes: Vec<(Owner, Polygon)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub range: f64,
    pub owner: Owner,
}

impl Scene {
    pub fn add(&mut self, owner: Owner, polygon: Polygon) {
        for (a, b) in polygon.edges() {
            self.segments.push(Segment { a, b, owner });
        }
        self.shapes.push((owner, polygon));
    }

    /// Drops edges that cannot be reached within `max_range` of `origin`.
    pub fn restrict(&self, origin: (f64, f64), max_range: f64) -> Scene {
        let segments = self
            .segments
            .iter()
            .filter(|s| segment_distance(origin, s.a, s.b) <= max_range)
            .copied()
            .collect();
        Scene {
            segments,
            shapes: self.shapes.clone(),
        }
    }

    /// Nearest intersection along the ray `origin + t·dir`, `0 < t <= max_range`.
    pub fn cast(&self, origin: (f64, f64), dir: (f64, f64), max_range: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for s in &self.segments {
            if let Some(t) = ray_segment(origin, dir, s.a, s.b) {
                if t <= max_range && best.is_none_or(|h| t < h.range) {
                    best = Some(Hit {
                        range: t,
                        owner: s.owner,
                    });
                }
            }
        }
        best
    }

    /// Whether `p` lies inside any polygon of the scene.
    pub fn inside_any(&self, p: (f64, f64)) -> bool {
        self.shapes.iter().any(|(_, poly)| poly.contains(p.0, p.1))
    }
}

/// Ray parameter of the intersection with segment `ab`, if any.
pub fn ray_segment(o: (f64, f64), d: (f64, f64), a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    let e = (b.0 - a.0, b.1 - a.1);
    let denom = cross(d, e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = (a.0 - o.0, a.1 - o.1);
    let t = cross(ao, e) / denom;
    let s = cross(ao, d) / denom;
    (t > 1e-9 && (0.0..=1.0).contains(&s)).then_some(t)
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * ab.0 + (p.1 - a.1) * ab.1) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = (a.0 + t * ab.0, a.1 + t * ab.1);
    ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_in_front() {
        let mut s = Scene::default();
        s.add(Owner::Static(0), Polygon::rect(-5.0, 10.0, 5.0, 11.0));
        let h = s.cast((0.0, 0.0), (0.0, 1.0), 100.0).unwrap();
        assert!((h.range - 10.0).abs() < 1e-12);
        assert_eq!(h.owner, Owner::Static(0));
        assert!(s.cast((0.0, 0.0), (0.0, -1.0), 100.0).is_none());
        assert!(s.cast((0.0, 0.0), (0.0, 1.0), 9.0).is_none());
    }

    #[test]
    fn target_occludes_wall() {
        let mut s = Scene::default();
        s.add(Owner::Static(0), Polygon::rect(-5.0, 10.0, 5.0, 11.0));
        s.add(Owner::Target(1), Polygon::rect(-1.0, 4.0, 1.0, 5.0));
        let h = s.cast((0.0, 0.0), (0.0, 1.0), 100.0).unwrap();
        assert_eq!(h.owner, Owner::Target(1));
        assert!((h.range - 4.0).abs() < 1e-12);
        let side = s
            .cast((0.0, 0.0), (0.3f64.sin(), 0.3f64.cos()), 100.0)
            .unwrap();
        assert_eq!(side.owner, Owner::Static(0));
    }

    #[test]
    fn restrict_keeps_reachable_edges() {
        let mut s = Scene::default();
        s.add(Owner::Static(0), Polygon::rect(50.0, -1.0, 51.0, 1.0));
        let r = s.restrict((0.0, 0.0), 40.0);
        assert!(r.cast((0.0, 0.0), (1.0, 0.0), 100.0).is_none());
        let r = s.restrict((0.0, 0.0), 60.0);
        assert!(r.cast((0.0, 0.0), (1.0, 0.0), 100.0).is_some());
    }
}
