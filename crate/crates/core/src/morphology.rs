//! Binary morphology with square structuring elements.
//!
//! Cells outside the grid are ignored by both operators, which keeps the
//! dilation/erosion pair adjoint on the finite grid: closing stays extensive,
//! opening anti-extensive, and both are idempotent.

use crate::map::BinaryMap;

/// Square dilation of radius `r` (window `(2r+1)²`).
pub fn dilate(m: &BinaryMap, r: usize) -> BinaryMap {
    if r == 0 {
        return m.clone();
    }
    square_filter(m, r, true)
}

/// Square erosion of radius `r`.
pub fn erode(m: &BinaryMap, r: usize) -> BinaryMap {
    if r == 0 {
        return m.clone();
    }
    square_filter(m, r, false)
}

pub fn close(m: &BinaryMap, r: usize) -> BinaryMap {
    erode(&dilate(m, r), r)
}

pub fn open(m: &BinaryMap, r: usize) -> BinaryMap {
    dilate(&erode(m, r), r)
}

/// Separable window test. With `any = true` a cell is set if any in-grid cell
/// of its window is set; otherwise only if all in-grid cells are set.
fn square_filter(m: &BinaryMap, r: usize, any: bool) -> BinaryMap {
    let g = *m.grid();
    let (w, h) = (g.n_cols, g.n_rows);
    let src = m.cells();
    let mut tmp = vec![false; w * h];
    let mut line = Vec::with_capacity(w.max(h));
    for row in 0..h {
        line.clear();
        line.extend((0..w).map(|c| src[row * w + c]));
        let out = window_1d(&line, r, any);
        tmp[row * w..row * w + w].copy_from_slice(&out);
    }
    let mut dst = vec![false; w * h];
    for col in 0..w {
        line.clear();
        line.extend((0..h).map(|row| tmp[row * w + col]));
        let out = window_1d(&line, r, any);
        for (row, v) in out.into_iter().enumerate() {
            dst[row * w + col] = v;
        }
    }
    BinaryMap::from_cells(g, dst).expect("same dimensions")
}

fn window_1d(line: &[bool], r: usize, any: bool) -> Vec<bool> {
    let n = line.len();
    let mut prefix = vec![0usize; n + 1];
    for (i, &v) in line.iter().enumerate() {
        prefix[i + 1] = prefix[i] + usize::from(v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(n);
            let set = prefix[hi] - prefix[lo];
            if any {
                set > 0
            } else {
                set == hi - lo
            }
        })
        .collect()
}
