//! Chart polygons (GeoJSON Polygon / MultiPolygon in the local metric frame)
//! and their rasterization onto the map grid.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{CellIndex, GridSpec};
use crate::map::BinaryMap;

pub type Ring = Vec<(f64, f64)>;

/// Closed exterior ring plus optional holes. Rings always repeat their first
/// vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

impl Polygon {
    pub fn new(exterior: Ring, holes: Vec<Ring>) -> Result<Self> {
        Ok(Self {
            exterior: close_ring(exterior)?,
            holes: holes.into_iter().map(close_ring).collect::<Result<_>>()?,
        })
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)], vec![]).expect("rectangle is valid")
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }

    /// Even-odd test across all rings, so holes subtract.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rings()
            .fold(false, |inside, r| inside ^ ring_crossings_odd(r, x, y))
    }

    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.exterior.iter().fold(
            (
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            ),
            |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
        )
    }

    /// Edges as vertex pairs, across every ring.
    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.rings()
            .flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
    }

    /// Shoelace area, holes subtracted.
    pub fn area(&self) -> f64 {
        let ring_area = |r: &Ring| {
            r.windows(2)
                .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
                .sum::<f64>()
                .abs()
                / 2.0
        };
        ring_area(&self.exterior) - self.holes.iter().map(ring_area).sum::<f64>()
    }
}

fn close_ring(mut ring: Ring) -> Result<Ring> {
    if ring.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegeneratePolygon("non-finite vertex".into()));
    }
    if ring.first() != ring.last() || ring.len() == 1 {
        if let Some(&first) = ring.first() {
            ring.push(first);
        }
    }
    let mut distinct: Vec<(f64, f64)> = ring.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegeneratePolygon(format!(
            "ring has {} distinct vertices, need at least 3",
            distinct.len()
        )));
    }
    Ok(ring)
}

fn ring_crossings_odd(ring: &Ring, px: f64, py: f64) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (ax, ay) = w[0];
        let (bx, by) = w[1];
        if (ay > py) != (by > py) {
            let x_cross = ax + (py - ay) * (bx - ax) / (by - ay);
            if px < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncPolygonSet {
    pub polygons: Vec<Polygon>,
}

impl EncPolygonSet {
    pub fn from_geojson(text: &str, path: &Path) -> Result<Self> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        let mut polygons = Vec::new();
        collect_geometry(&doc, &mut polygons).map_err(|m| Error::parse(path, 1, m))?;
        Ok(Self { polygons })
    }

    pub fn to_geojson(&self) -> String {
        let features: Vec<Value> = self
            .polygons
            .iter()
            .map(|p| {
                let rings: Vec<Value> = p
                    .rings()
                    .map(|r| Value::Array(r.iter().map(|&(x, y)| json!([x, y])).collect()))
                    .collect();
                json!({
                    "type": "Feature",
                    "properties": {},
                    "geometry": {"type": "Polygon", "coordinates": rings}
                })
            })
            .collect();
        serde_json::to_string(&json!({"type": "FeatureCollection", "features": features}))
            .expect("geojson serializes")
            + "\n"
    }
}

fn collect_geometry(v: &Value, out: &mut Vec<Polygon>) -> std::result::Result<(), String> {
    let kind = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or("missing \"type\"")?;
    match kind {
        "FeatureCollection" => {
            for f in v
                .get("features")
                .and_then(Value::as_array)
                .ok_or("missing features")?
            {
                collect_geometry(f, out)?;
            }
        }
        "Feature" => match v.get("geometry") {
            Some(Value::Null) | None => {}
            Some(g) => collect_geometry(g, out)?,
        },
        "GeometryCollection" => {
            for g in v
                .get("geometries")
                .and_then(Value::as_array)
                .ok_or("missing geometries")?
            {
                collect_geometry(g, out)?;
            }
        }
        "Polygon" => out.push(parse_polygon(
            v.get("coordinates").ok_or("missing coordinates")?,
        )?),
        "MultiPolygon" => {
            for p in v
                .get("coordinates")
                .and_then(Value::as_array)
                .ok_or("missing coordinates")?
            {
                out.push(parse_polygon(p)?);
            }
        }
        // Points and lines carry no area.
        "Point" | "MultiPoint" | "LineString" | "MultiLineString" => {}
        other => return Err(format!("unsupported geometry type {other:?}")),
    }
    Ok(())
}

fn parse_polygon(coords: &Value) -> std::result::Result<Polygon, String> {
    let rings = coords
        .as_array()
        .ok_or("polygon coordinates must be an array")?;
    let mut parsed = Vec::with_capacity(rings.len());
    for r in rings {
        let ring: Ring = r
            .as_array()
            .ok_or("ring must be an array")?
            .iter()
            .map(|p| {
                let xy = p
                    .as_array()
                    .filter(|a| a.len() >= 2)
                    .ok_or("position needs x, y")?;
                match (xy[0].as_f64(), xy[1].as_f64()) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err("non-numeric position"),
                }
            })
            .collect::<std::result::Result<_, _>>()?;
        parsed.push(ring);
    }
    let mut it = parsed.into_iter();
    let exterior = it.next().ok_or("polygon without rings")?;
    Polygon::new(exterior, it.collect()).map_err(|e| e.to_string())
}

pub fn load_enc(path: &Path) -> Result<EncPolygonSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EncPolygonSet::from_geojson(&text, path)
}

/// Land iff the cell center lies inside any polygon.
pub fn rasterize_polygons(polygons: &[Polygon], g: &GridSpec) -> BinaryMap {
    let mut map = BinaryMap::empty(*g);
    for poly in polygons {
        let (x0, y0, x1, y1) = poly.bbox();
        let col_lo = (((x0 - g.origin_x) / g.cell_size).floor() - 1.0).max(0.0) as usize;
        let row_lo = (((y0 - g.origin_y) / g.cell_size).floor() - 1.0).max(0.0) as usize;
        let col_hi =
            ((((x1 - g.origin_x) / g.cell_size).ceil() + 1.0).max(0.0) as usize).min(g.n_cols);
        let row_hi =
            ((((y1 - g.origin_y) / g.cell_size).ceil() + 1.0).max(0.0) as usize).min(g.n_rows);
        for row in row_lo..row_hi {
            for col in col_lo..col_hi {
                let c = CellIndex { col, row };
                let (cx, cy) = g.cell_center(c);
                if poly.contains(cx, cy) {
                    map.set(c, true);
                }
            }
        }
    }
    map
}

pub fn rasterize_enc(enc: &EncPolygonSet, g: &GridSpec) -> BinaryMap {
    rasterize_polygons(&enc.polygons, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(cell: f64, n: usize) -> GridSpec {
        GridSpec::new(0.0, 0.0, cell, n, n).unwrap()
    }

    /// Independent oracle: winding number over all rings, nonzero per ring and
    /// combined with XOR (equivalent to even-odd for simple rings).
    fn winding_inside(poly: &Polygon, x: f64, y: f64) -> bool {
        poly.rings().fold(false, |acc, ring| {
            let mut wn = 0i32;
            for w in ring.windows(2) {
                let ((ax, ay), (bx, by)) = (w[0], w[1]);
                let cross = (bx - ax) * (y - ay) - (x - ax) * (by - ay);
                if ay <= y && by > y && cross > 0.0 {
                    wn += 1;
                } else if ay > y && by <= y && cross < 0.0 {
                    wn -= 1;
                }
            }
            acc ^ (wn != 0)
        })
    }

    #[test]
    fn square_gives_block() {
        let enc = EncPolygonSet {
            polygons: vec![Polygon::rect(0.0, 0.0, 10.0, 10.0)],
        };
        let g = grid(0.5, 30);
        let m = rasterize_enc(&enc, &g);
        assert_eq!(m.count(), 400);
        for c in m.iter_static() {
            assert!(c.col < 20 && c.row < 20);
        }
        for row in 0..30 {
            for col in 0..30 {
                let c = CellIndex { col, row };
                let (x, y) = g.cell_center(c);
                assert_eq!(m.get(c), winding_inside(&enc.polygons[0], x, y));
            }
        }
    }

    #[test]
    fn empty_set_is_water() {
        assert_eq!(
            rasterize_enc(&EncPolygonSet::default(), &grid(0.5, 10)).count(),
            0
        );
    }

    #[test]
    fn hole_leaves_ring() {
        let poly = Polygon::new(
            vec![(0.0, 0.0), (5.0, 0.0), (5.0, 5.0), (0.0, 5.0)],
            vec![vec![(1.0, 1.0), (4.0, 1.0), (4.0, 4.0), (1.0, 4.0)]],
        )
        .unwrap();
        let g = grid(0.5, 12);
        let m = rasterize_polygons(std::slice::from_ref(&poly), &g);
        // 10x10 block minus 6x6 hole
        assert_eq!(m.count(), 64);
        for row in 0..12 {
            for col in 0..12 {
                let c = CellIndex { col, row };
                let (x, y) = g.cell_center(c);
                assert_eq!(m.get(c), winding_inside(&poly, x, y), "cell {c:?}");
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Polygon::new(vec![(0.0, 0.0), (1.0, 1.0)], vec![]).is_err());
        assert!(
            Polygon::new(vec![(0.0, 0.0), (1.0, 1.0), (0.0, 0.0), (1.0, 1.0)], vec![]).is_err()
        );
        let text = r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]}"#;
        assert!(EncPolygonSet::from_geojson(text, Path::new("e.geojson")).is_err());
    }

    #[test]
    fn geojson_variants() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"name":"quay"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]]]}},
            {"type":"Feature","properties":{},"geometry":{"type":"MultiPolygon","coordinates":[[[[10,10],[12,10],[12,12]]],[[[20,20],[21,20],[21,21],[20,21]]]]}},
            {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[1,1]}}]}"#;
        let enc = EncPolygonSet::from_geojson(text, Path::new("e.geojson")).unwrap();
        assert_eq!(enc.polygons.len(), 3);
        assert!(enc
            .polygons
            .iter()
            .all(|p| p.exterior.first() == p.exterior.last()));
        let again = EncPolygonSet::from_geojson(&enc.to_geojson(), Path::new("e.geojson")).unwrap();
        assert_eq!(again, enc);
        assert_eq!(again.to_geojson(), enc.to_geojson());
    }

    #[test]
    fn area_converges_with_resolution() {
        // Convex hexagon-ish polygon
        let poly = Polygon::new(
            vec![(2.0, 1.0), (8.3, 1.7), (9.1, 6.2), (5.2, 9.4), (1.3, 6.6)],
            vec![],
        )
        .unwrap();
        let area = poly.area();
        let err_at = |cell: f64| {
            let n = (12.0 / cell) as usize;
            let m = rasterize_polygons(std::slice::from_ref(&poly), &grid(cell, n));
            (m.count() as f64 * cell * cell - area).abs() / area
        };
        let fine = err_at(0.1);
        assert!(err_at(1.0).is_finite());
        assert!(fine < 0.10, "fine error {fine}");
    }

    proptest! {
        #[test]
        fn reversal_invariant(pts in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 3..9)) {
            let Ok(poly) = Polygon::new(pts.clone(), vec![]) else { return Ok(()); };
            let mut rev = pts;
            rev.reverse();
            let rpoly = Polygon::new(rev, vec![]).unwrap();
            let g = grid(0.5, 42);
            prop_assert_eq!(
                rasterize_polygons(&[poly], &g),
                rasterize_polygons(&[rpoly], &g)
            );
        }
    }
}
