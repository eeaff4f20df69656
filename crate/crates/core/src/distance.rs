//! Distance from grid nodes to a closed polyline.
//!
//! Every node carries the index of its closest segment. Indices are seeded in a
//! band around each segment and then propagated by raster sweeps in which a
//! node starts from the segment held by each neighbor and walks along the
//! polyline while the distance decreases.

use rayon::prelude::*;

use crate::contour::{Grid, ScalarField};
use crate::geometry::{segment_distance, Point};

fn seg_dist(p: Point, poly: &[Point], k: usize) -> f64 {
    segment_distance(p, poly[k], poly[(k + 1) % poly.len()])
}

/// Walks along the polyline from segment `k` while the distance keeps decreasing.
fn descend(p: Point, poly: &[Point], mut k: usize) -> (usize, f64) {
    let n = poly.len();
    let mut d = seg_dist(p, poly, k);
    for step in [1, n - 1] {
        loop {
            let next = (k + step) % n;
            let dn = seg_dist(p, poly, next);
            if dn < d {
                k = next;
                d = dn;
            } else {
                break;
            }
        }
    }
    (k, d)
}

/// Unsigned distance from every node of `grid` to the closed polyline `poly`.
pub fn polyline_distance_field(grid: &Grid, poly: &[Point]) -> ScalarField {
    let n = poly.len();
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut owner = vec![usize::MAX; grid.len()];
    let band = 2.0 * grid.step;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let lo = Point::new(a.x.min(b.x) - band, a.y.min(b.y) - band);
        let hi = Point::new(a.x.max(b.x) + band, a.y.max(b.y) + band);
        let (i0, j0) = grid.cell_of(lo);
        let (i1, j1) = grid.cell_of(hi);
        for j in j0..=(j1 + 1).min(grid.ny - 1) {
            for i in i0..=(i1 + 1).min(grid.nx - 1) {
                let idx = grid.index(i, j);
                let d = segment_distance(grid.point(i, j), a, b);
                if d < dist[idx] {
                    dist[idx] = d;
                    owner[idx] = k;
                }
            }
        }
    }
    let offsets_fwd: [(isize, isize); 4] = [(-1, 0), (-1, -1), (0, -1), (1, -1)];
    let offsets_bwd: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];
    let relax = |i: usize, j: usize, offsets: &[(isize, isize); 4], dist: &mut [f64], owner: &mut [usize]| {
        let idx = grid.index(i, j);
        let p = grid.point(i, j);
        for &(di, dj) in offsets {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                continue;
            }
            let o = owner[grid.index(ni as usize, nj as usize)];
            if o == usize::MAX || o == owner[idx] {
                continue;
            }
            let (k, d) = descend(p, poly, o);
            if d < dist[idx] {
                dist[idx] = d;
                owner[idx] = k;
            }
        }
    };
    for _ in 0..2 {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                relax(i, j, &offsets_fwd, &mut dist, &mut owner);
            }
        }
        for j in (0..grid.ny).rev() {
            for i in (0..grid.nx).rev() {
                relax(i, j, &offsets_bwd, &mut dist, &mut owner);
            }
        }
    }
    ScalarField { grid: *grid, values: dist }
}

/// Exhaustive reference used to validate the propagated field.
pub fn brute_force_distance_field(grid: &Grid, poly: &[Point]) -> ScalarField {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx % grid.nx, idx / grid.nx);
            (0..poly.len()).map(|k| seg_dist(p, poly, k)).fold(f64::INFINITY, f64::min)
        })
        .collect();
    ScalarField { grid: *grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StarBoundary;

    #[test]
    fn propagation_matches_brute_force() {
        let b = StarBoundary::with_resolution(Point::new(0.1, -0.2), 1.0, vec![0.15, 0.0, 0.05], vec![0.0, 0.1, 0.0], 0.0, 256)
            .unwrap();
        let g = Grid::covering(Point::new(-2.0, -2.0), Point::new(2.0, 2.0), 161);
        let fast = polyline_distance_field(&g, b.samples());
        let slow = brute_force_distance_field(&g, b.samples());
        let worst = fast
            .values
            .iter()
            .zip(&slow.values)
            .map(|(a, b)| a - b)
            .fold(0.0_f64, |m, d| m.max(d.abs()));
        assert!(worst < 1e-12, "max deviation {worst}");
    }
}
