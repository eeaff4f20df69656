//! Cartesian background grids, scalar fields on them, and marching squares.

use rayon::prelude::*;

use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: Point,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Square-celled grid covering `[lo, hi]` with `n` nodes along the longer side.
    pub fn covering(lo: Point, hi: Point, n: usize) -> Self {
        let w = (hi.x - lo.x).max(hi.y - lo.y);
        let step = w / (n - 1) as f64;
        let nx = ((hi.x - lo.x) / step).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / step).ceil() as usize + 1;
        Self {
            origin: lo,
            step,
            nx: nx.max(2),
            ny: ny.max(2),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.step,
            self.origin.y + j as f64 * self.step,
        )
    }

    /// Cell `(i, j)` containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.step).floor();
        let fy = ((p.y - self.origin.y) / self.step).floor();
        (
            (fx.max(0.0) as usize).min(self.nx - 2),
            (fy.max(0.0) as usize).min(self.ny - 2),
        )
    }

    /// Evaluates `f` at every node, in parallel over rows.
    pub fn sample<F: Fn(Point) -> f64 + Sync>(&self, f: F) -> ScalarField {
        let values = (0..self.ny)
            .into_par_iter()
            .flat_map_iter(|j| (0..self.nx).map(move |i| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| f(self.point(i, j)))
            .collect();
        ScalarField { grid: *self, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    /// Row-major node values.
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation.
    pub fn interpolate(&self, p: Point) -> f64 {
        let g = &self.grid;
        let (i, j) = g.cell_of(p);
        let s = ((p.x - g.origin.x) / g.step - i as f64).clamp(0.0, 1.0);
        let t = ((p.y - g.origin.y) / g.step - j as f64).clamp(0.0, 1.0);
        let (a, b, c, d) = (self.at(i, j), self.at(i + 1, j), self.at(i + 1, j + 1), self.at(i, j + 1));
        (1.0 - s) * (1.0 - t) * a + s * (1.0 - t) * b + s * t * c + (1.0 - s) * t * d
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Segments of `{field = level}` inside cell `(i, j)`.
    pub fn cell_segments(&self, i: usize, j: usize, level: f64, out: &mut Vec<(Point, Point)>) {
        let g = &self.grid;
        let p = [g.point(i, j), g.point(i + 1, j), g.point(i + 1, j + 1), g.point(i, j + 1)];
        let v = [self.at(i, j), self.at(i + 1, j), self.at(i + 1, j + 1), self.at(i, j + 1)];
        cell_segments(&p, &v, level, out);
    }

    /// All segments of one level curve.
    pub fn contour(&self, level: f64) -> Vec<(Point, Point)> {
        let g = self.grid;
        (0..g.ny - 1)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut out = Vec::new();
                for i in 0..g.nx - 1 {
                    self.cell_segments(i, j, level, &mut out);
                }
                out
            })
            .collect()
    }

    /// Lengths of the level curves `level_k = k * spacing`, `k = 1..=n_levels`, counting
    /// only the part of each segment accepted by `inside`. Segments whose endpoints
    /// disagree are cut at the crossing located by bisection on `inside`.
    pub fn level_lengths<F>(&self, spacing: f64, n_levels: usize, inside: F) -> Vec<f64>
    where
        F: Fn(Point) -> bool + Sync,
    {
        let g = self.grid;
        let node_in: Vec<bool> = (0..g.len())
            .into_par_iter()
            .map(|k| inside(g.point(k % g.nx, k / g.nx)))
            .collect();
        let rows: Vec<Vec<f64>> = (0..g.ny - 1)
            .into_par_iter()
            .map(|j| {
                let mut acc = vec![0.0; n_levels + 1];
                let mut segs = Vec::new();
                for i in 0..g.nx - 1 {
                    let corners = [g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)];
                    let n_in = corners.iter().filter(|&&c| node_in[c]).count();
                    if n_in == 0 {
                        continue;
                    }
                    let v = corners.map(|c| self.values[c]);
                    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let k0 = ((lo / spacing).floor() as i64 + 1).max(1);
                    let k1 = ((hi / spacing).floor() as i64).min(n_levels as i64);
                    for k in k0..=k1 {
                        segs.clear();
                        self.cell_segments(i, j, k as f64 * spacing, &mut segs);
                        for &(a, b) in &segs {
                            acc[k as usize] += if n_in == 4 {
                                a.dist(b)
                            } else {
                                clipped_length(a, b, &inside)
                            };
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; n_levels + 1];
        for row in rows {
            for (t, r) in total.iter_mut().zip(row) {
                *t += r;
            }
        }
        total
    }
}

/// Length of the part of `[a, b]` for which `inside` holds, assuming at most one crossing.
pub fn clipped_length<F: Fn(Point) -> bool>(a: Point, b: Point, inside: &F) -> f64 {
    match (inside(a), inside(b)) {
        (true, true) => a.dist(b),
        (false, false) => 0.0,
        (ia, _) => {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..40 {
                let m = 0.5 * (lo + hi);
                if inside(a + (b - a) * m) == ia {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            let t = 0.5 * (lo + hi);
            if ia {
                a.dist(b) * t
            } else {
                a.dist(b) * (1.0 - t)
            }
        }
    }
}

/// Marching squares on one cell with corners in counterclockwise order starting
/// at the lower left. Saddles are resolved with the cell-center average.
pub fn cell_segments(p: &[Point; 4], v: &[f64; 4], level: f64, out: &mut Vec<(Point, Point)>) {
    let above = v.map(|x| x >= level);
    let mut cuts: [Option<Point>; 4] = [None; 4];
    for e in 0..4 {
        let (a, b) = (e, (e + 1) % 4);
        if above[a] != above[b] {
            let t = (level - v[a]) / (v[b] - v[a]);
            cuts[e] = Some(p[a] + (p[b] - p[a]) * t);
        }
    }
    let hits: Vec<usize> = (0..4).filter(|&e| cuts[e].is_some()).collect();
    match hits.len() {
        2 => out.push((cuts[hits[0]].unwrap(), cuts[hits[1]].unwrap())),
        4 => {
            let center_above = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
            // corner 0 is joined to the center region iff it agrees with the center
            if above[0] == center_above {
                out.push((cuts[0].unwrap(), cuts[1].unwrap()));
                out.push((cuts[2].unwrap(), cuts[3].unwrap()));
            } else {
                out.push((cuts[3].unwrap(), cuts[0].unwrap()));
                out.push((cuts[1].unwrap(), cuts[2].unwrap()));
            }
        }
        _ => {}
    }
}
