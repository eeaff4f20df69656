//! Compressed sparse rows, reverse Cuthill–McKee ordering and an envelope
//! (skyline) Cholesky factorization.

use std::collections::VecDeque;

use crate::error::{Result, RfkError};

/// Symmetric matrix stored in full CSR form on a fixed pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix whose pattern is the union of the cliques in `groups`.
    pub fn from_cliques<'a>(n: usize, groups: impl Iterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for g in groups {
            for &a in g {
                rows[a].extend_from_slice(g);
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(row);
            indptr.push(indices.len());
        }
        let nnz = indices.len();
        Self {
            n,
            indptr,
            indices,
            data: vec![0.0; nnz],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            data: vec![0.0; self.data.len()],
            ..self.clone()
        }
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.indptr[i] + k)
    }

    /// Adds `v` at `(i, j)`; the entry must belong to the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the sparsity pattern"));
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.data[k])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.indptr[i]..self.indptr[i + 1])
                    .map(|k| self.data[k] * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// `self + c * other` on the shared pattern.
    pub fn axpy(&self, c: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.indices, other.indices, "patterns differ");
        CsrMatrix {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect(),
            ..self.clone()
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (self.indptr[i]..self.indptr[i + 1]).all(|k| (self.data[k] - self.get(self.indices[k], i)).abs() <= tol)
        })
    }

    /// Principal submatrix on `keep` (ascending indices of the original).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for &old in keep {
            for k in self.indptr[old]..self.indptr[old + 1] {
                let j = map[self.indices[k]];
                if j != usize::MAX {
                    indices.push(j);
                    data.push(self.data[k]);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n: keep.len(),
            indptr,
            indices,
            data,
        }
    }

    fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree = |i: usize| a.neighbors(i).len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree(i)).unwrap();
        let start = pseudo_peripheral(a, start);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.neighbors(v).iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; a.n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in a.neighbors(v) {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(a: &CsrMatrix, mut start: usize) -> usize {
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(a, start);
        let far = level.iter().filter(|&&l| l != usize::MAX).copied().max().unwrap_or(0);
        if far <= ecc {
            break;
        }
        ecc = far;
        start = (0..a.n)
            .filter(|&i| level[i] == far)
            .min_by_key(|&i| a.neighbors(i).len())
            .unwrap();
    }
    start
}

/// Lower-triangular envelope Cholesky factor of a permuted symmetric matrix.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    /// First stored column of each row.
    first: Vec<usize>,
    /// Offset of row `i`'s first entry in `values`.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors `P a P^T = L L^T`; fails unless `a` is numerically positive definite.
    pub fn factor(a: &CsrMatrix, perm: &[usize]) -> Result<Self> {
        let n = a.n;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &j_old in a.neighbors(old) {
                let j = inv[j_old];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut values = vec![0.0; total];
        for old in 0..n {
            let i = inv[old];
            for k in a.indptr[old]..a.indptr[old + 1] {
                let j = inv[a.indices[k]];
                if j <= i {
                    values[start[i] + j - first[i]] += a.data[k];
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[start[i] + j - fi];
                let ri = &values[start[i] + k0 - fi..start[i] + j - fi];
                let rj = &values[start[j] + k0 - fj..start[j] + j - fj];
                s -= dot(ri, rj);
                values[start[i] + j - fi] = s / values[start[j] + j - fj];
            }
            let row = &values[start[i]..start[i] + i - fi];
            let d = values[start[i] + i - fi] - dot(row, row);
            if !(d > 0.0) {
                return Err(RfkError::Factorization(format!("nonpositive pivot {d:.3e} at row {i}")));
            }
            values[start[i] + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm: perm.to_vec(),
            first,
            start,
            values,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[self.start[i] + j - self.first[i]]
    }

    /// Solves `a x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i] + i - fi];
            let s = y[i] - dot(row, &y[fi..i]);
            y[i] = s / self.entry(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.entry(i, i);
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.values[self.start[i]..self.start[i] + i - fi];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_ring(n: usize, shift: f64) -> CsrMatrix {
        let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        let mut a = CsrMatrix::from_cliques(n, edges.iter().map(|e| &e[..]));
        for e in &edges {
            a.add(e[0], e[0], 1.0);
            a.add(e[1], e[1], 1.0);
            a.add(e[0], e[1], -1.0);
            a.add(e[1], e[0], -1.0);
        }
        for i in 0..n {
            a.add(i, i, shift);
        }
        a
    }

    #[test]
    fn solves_periodic_system() {
        let a = laplacian_ring(50, 0.3);
        let perm = rcm_ordering(&a);
        let f = SkylineCholesky::factor(&a, &perm).unwrap();
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&x);
        let y = f.solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
        // RCM keeps the periodic ring narrow
        assert!(f.envelope_size() < 50 * 4);
    }

    #[test]
    fn rejects_indefinite() {
        let a = laplacian_ring(20, -0.1);
        assert!(SkylineCholesky::factor(&a, &rcm_ordering(&a)).is_err());
    }

    #[test]
    fn restrict_keeps_submatrix() {
        let a = laplacian_ring(6, 1.0);
        let r = a.restrict(&[0, 2, 3]);
        assert_eq!(r.n, 3);
        assert_eq!(r.get(1, 2), -1.0);
        assert_eq!(r.get(0, 1), 0.0);
        assert!(r.is_symmetric(0.0));
    }
}
