//! Overview plot: map cells, detections and track polylines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::detector::Detection;
use crate::geometry::{CellIndex, GridSpec};
use crate::map::BinaryMap;
use crate::tracker::{TrackRow, TrackStatus};

const PX_PER_M: f64 = 6.0;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct View {
    g: GridSpec,
    w: f64,
    h: f64,
}

impl View {
    fn x(&self, x: f64) -> f64 {
        (x - self.g.origin_x) * PX_PER_M
    }

    fn y(&self, y: f64) -> f64 {
        self.h - (y - self.g.origin_y) * PX_PER_M
    }
}

/// Renders the grid extent with static cells in grey, detections as dots and
/// every track that reached confirmation as a labeled polyline.
pub fn overview_svg(
    grid: &GridSpec,
    map: Option<&BinaryMap>,
    detections: &[Detection],
    rows: &[TrackRow],
) -> String {
    let v = View {
        g: *grid,
        w: grid.n_cols as f64 * grid.cell_size * PX_PER_M,
        h: grid.n_rows as f64 * grid.cell_size * PX_PER_M,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
        w = v.w,
        h = v.h
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{:.0}" height="{:.0}" fill="#eaf2fa"/>"##,
        v.w, v.h
    );

    if let Some(m) = map {
        out.push_str("<g fill=\"#666666\">\n");
        let cs = grid.cell_size;
        for row in 0..grid.n_rows {
            let mut col = 0;
            while col < grid.n_cols {
                if !m.get(CellIndex { col, row }) {
                    col += 1;
                    continue;
                }
                let start = col;
                while col < grid.n_cols && m.get(CellIndex { col, row }) {
                    col += 1;
                }
                let x0 = grid.origin_x + start as f64 * cs;
                let y1 = grid.origin_y + (row + 1) as f64 * cs;
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                    v.x(x0),
                    v.y(y1),
                    (col - start) as f64 * cs * PX_PER_M,
                    cs * PX_PER_M
                );
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g fill=\"#000000\" fill-opacity=\"0.35\">\n");
    for d in detections {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
            v.x(d.x),
            v.y(d.y)
        );
    }
    out.push_str("</g>\n");

    let mut by_id: BTreeMap<u64, Vec<&TrackRow>> = BTreeMap::new();
    for r in rows {
        by_id.entry(r.track_id).or_default().push(r);
    }
    let mut k = 0;
    for (id, mut pts) in by_id {
        if !pts.iter().any(|r| r.status == TrackStatus::Confirmed) {
            continue;
        }
        pts.sort_by_key(|r| r.timestamp_us);
        let color = PALETTE[k % PALETTE.len()];
        k += 1;
        let path: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", v.x(r.x), v.y(r.y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let last = pts[pts.len() - 1];
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{id}</text>"#,
            v.x(last.x) + 4.0,
            v.y(last.y) - 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}
