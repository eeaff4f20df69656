//! Structured transfinite mesh between the two star-shaped boundaries.

use crate::error::{Result, RfkError};
use crate::geometry::{DomainSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFlag {
    Interior,
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Geometric growth ratio of radial cell widths away from each boundary; 1 is uniform.
    pub grading: f64,
    /// Smallest admissible triangle angle in degrees.
    pub min_angle_deg: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            grading: 1.0,
            min_angle_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub inner_edges: Vec<[usize; 2]>,
    pub outer_edges: Vec<[usize; 2]>,
    pub node_flags: Vec<NodeFlag>,
    pub n_theta: usize,
    pub n_radial: usize,
}

/// Radial parameters `0 = s_0 < ... < s_n = 1`, clustered toward both ends for `q > 1`.
pub fn radial_parameters(n: usize, q: f64) -> Vec<f64> {
    let widths: Vec<f64> = (0..n).map(|k| q.powi(k.min(n - 1 - k) as i32)).collect();
    let total: f64 = widths.iter().sum();
    let mut s = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    s.push(0.0);
    for w in &widths {
        acc += w;
        s.push(acc / total);
    }
    s[n] = 1.0;
    s
}

pub fn build_mesh(domain: &DomainSpec, n_theta: usize, n_radial: usize) -> Result<Mesh> {
    build_mesh_with(domain, n_theta, n_radial, &MeshOptions::default())
}

pub fn build_mesh_with(domain: &DomainSpec, n_theta: usize, n_radial: usize, opts: &MeshOptions) -> Result<Mesh> {
    if n_theta < 16 || n_radial < 4 {
        return Err(RfkError::MeshingFailure {
            theta_index: n_theta,
            radial_index: n_radial,
            reason: "need n_theta >= 16 and n_radial >= 4".into(),
        });
    }
    if !(opts.grading >= 1.0 && opts.grading.is_finite()) {
        return Err(RfkError::Config(format!("mesh grading must be >= 1, got {}", opts.grading)));
    }
    let s = radial_parameters(n_radial, opts.grading);
    let stride = n_radial + 1;
    let mut nodes = Vec::with_capacity(n_theta * stride);
    let mut node_flags = Vec::with_capacity(n_theta * stride);
    for i in 0..n_theta {
        // start at the inner curve's rotation so that the mesh rotates with the domain
        let theta = domain.inner().sample_angle(i, n_theta);
        let p_in = domain.inner().point(theta);
        let p_out = domain.outer().point(theta);
        for (j, &sj) in s.iter().enumerate() {
            nodes.push(p_in * (1.0 - sj) + p_out * sj);
            node_flags.push(if j == 0 {
                NodeFlag::Inner
            } else if j == n_radial {
                NodeFlag::Outer
            } else {
                NodeFlag::Interior
            });
        }
    }
    let id = |i: usize, j: usize| (i % n_theta) * stride + j;
    let mut triangles = Vec::with_capacity(2 * n_theta * n_radial);
    for i in 0..n_theta {
        for j in 0..n_radial {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let diag_ac = nodes[a].dist(nodes[c]);
            let diag_bd = nodes[b].dist(nodes[d]);
            let pair = if diag_ac <= diag_bd {
                [[a, d, c], [a, c, b]]
            } else {
                [[a, d, b], [b, d, c]]
            };
            for t in pair {
                if signed_area(&nodes, t) <= 0.0 {
                    return Err(RfkError::MeshingFailure {
                        theta_index: i,
                        radial_index: j,
                        reason: "inverted element".into(),
                    });
                }
                triangles.push(t);
            }
        }
    }
    let inner_edges = (0..n_theta).map(|i| [id(i, 0), id(i + 1, 0)]).collect();
    let outer_edges = (0..n_theta).map(|i| [id(i, n_radial), id(i + 1, n_radial)]).collect();
    let mesh = Mesh {
        nodes,
        triangles,
        inner_edges,
        outer_edges,
        node_flags,
        n_theta,
        n_radial,
    };
    let worst = mesh.min_angle_deg();
    if worst < opts.min_angle_deg {
        return Err(RfkError::MeshingFailure {
            theta_index: n_theta,
            radial_index: n_radial,
            reason: format!("minimum angle {worst:.2} deg below {:.2} deg", opts.min_angle_deg),
        });
    }
    Ok(mesh)
}

pub fn signed_area(nodes: &[Point], t: [usize; 3]) -> f64 {
    0.5 * (nodes[t[1]] - nodes[t[0]]).cross(nodes[t[2]] - nodes[t[0]])
}

impl Mesh {
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        (i % self.n_theta) * (self.n_radial + 1) + j
    }

    pub fn triangle_area(&self, k: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[k])
    }

    pub fn triangle_vertices(&self, k: usize) -> [Point; 3] {
        let t = self.triangles[k];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.triangle_area(k)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&t| {
                let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
                (0..3)
                    .map(|k| {
                        let u = p[(k + 1) % 3] - p[k];
                        let v = p[(k + 2) % 3] - p[k];
                        u.cross(v).abs().atan2(u.dot(v)).to_degrees()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edge_length(&self, e: [usize; 2]) -> f64 {
        self.nodes[e[0]].dist(self.nodes[e[1]])
    }

    pub fn boundary_length(&self, inner: bool) -> f64 {
        let edges = if inner { &self.inner_edges } else { &self.outer_edges };
        edges.iter().map(|&e| self.edge_length(e)).sum()
    }

    /// Per-triangle gradient of a P1 field.
    pub fn gradients(&self, u: &[f64]) -> Vec<Point> {
        self.triangles
            .iter()
            .map(|&t| {
                let [p0, p1, p2] = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
                let a2 = (p1 - p0).cross(p2 - p0);
                let g = |q: Point, r: Point| Point::new(q.y - r.y, r.x - q.x) * (1.0 / a2);
                g(p1, p2) * u[t[0]] + g(p2, p0) * u[t[1]] + g(p0, p1) * u[t[2]]
            })
            .collect()
    }

    /// Area-weighted average of the triangle gradients around each node.
    pub fn recovered_gradients(&self, grads: &[Point]) -> Vec<Point> {
        let mut acc = vec![Point::new(0.0, 0.0); self.nodes.len()];
        let mut w = vec![0.0; self.nodes.len()];
        for (k, &t) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(k);
            for &n in &t {
                acc[n] = acc[n] + grads[k] * a;
                w[n] += a;
            }
        }
        acc.iter().zip(&w).map(|(g, w)| *g * (1.0 / w)).collect()
    }

    /// Mesh bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.nodes {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentric_counts() {
        let m = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 64, 16).unwrap();
        // one quad per (theta, radial) cell, two triangles each
        assert_eq!(m.triangles.len(), 2 * 64 * 16);
        assert_eq!(m.nodes.len(), 64 * 17);
        assert!((0..m.triangles.len()).all(|k| m.triangle_area(k) > 0.0));
        assert!(m.min_angle_deg() >= 15.0);
    }

    #[test]
    fn boundary_cycles_close() {
        let m = build_mesh(&DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.0)).unwrap(), 32, 8).unwrap();
        for edges in [&m.inner_edges, &m.outer_edges] {
            for w in edges.windows(2) {
                assert_eq!(w[0][1], w[1][0]);
            }
            assert_eq!(edges.last().unwrap()[1], edges[0][0]);
        }
    }

    #[test]
    fn eccentric_angles_checked_directly() {
        let m = build_mesh(&DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.0)).unwrap(), 64, 16).unwrap();
        let mut worst = f64::INFINITY;
        for k in 0..m.triangles.len() {
            let [a, b, c] = m.triangle_vertices(k);
            let (la, lb, lc) = (b.dist(c), a.dist(c), a.dist(b));
            for (x, y, z) in [(la, lb, lc), (lb, lc, la), (lc, la, lb)] {
                let ang = ((y * y + z * z - x * x) / (2.0 * y * z)).acos().to_degrees();
                worst = worst.min(ang);
            }
        }
        assert!((worst - m.min_angle_deg()).abs() < 1e-9);
        assert!(worst >= MeshOptions::default().min_angle_deg);
    }

    #[test]
    fn rejects_tiny_requests() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        assert!(matches!(build_mesh(&d, 64, 1), Err(RfkError::MeshingFailure { .. })));
        assert!(build_mesh(&d, 8, 8).is_err());
    }

    #[test]
    fn grading_clusters_at_both_ends() {
        let s = radial_parameters(8, 1.2);
        assert!((s[1] - s[0] - (s[8] - s[7])).abs() < 1e-15);
        assert!(s[1] - s[0] < s[4] - s[3]);
        assert_eq!(radial_parameters(4, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn linear_field_has_exact_gradient() {
        let m = build_mesh(&DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.2, 0.0)).unwrap(), 32, 6).unwrap();
        let u: Vec<f64> = m.nodes.iter().map(|p| 2.0 * p.x - 3.0 * p.y + 1.0).collect();
        for g in m.gradients(&u).iter().chain(&m.recovered_gradients(&m.gradients(&u))) {
            assert!((g.x - 2.0).abs() < 1e-10 && (g.y + 3.0).abs() < 1e-10);
        }
    }
}
