//! P1 stiffness, consistent mass and boundary mass matrices.

use rayon::prelude::*;

use super::mesh::{Mesh, NodeFlag};
use super::sparse::{dot, CsrMatrix};
use crate::error::{Result, RfkError};
use crate::robin::{RobinPair, RobinParam};

/// Full-size matrices on the mesh, before boundary conditions are applied.
#[derive(Debug, Clone)]
pub struct Matrices {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub inner_mass: CsrMatrix,
    pub outer_mass: CsrMatrix,
}

type Element = ([usize; 3], [[f64; 3]; 3], [[f64; 3]; 3]);

fn element(mesh: &Mesh, t: [usize; 3]) -> Element {
    let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    // grad phi_k is the rotated opposite edge over twice the area
    let g: Vec<_> = (0..3)
        .map(|k| {
            let e = p[(k + 2) % 3] - p[(k + 1) % 3];
            (-e.y / (2.0 * area), e.x / (2.0 * area))
        })
        .collect();
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            ke[a][b] = area * (g[a].0 * g[b].0 + g[a].1 * g[b].1);
            me[a][b] = area / 12.0 * if a == b { 2.0 } else { 1.0 };
        }
    }
    (t, ke, me)
}

pub fn assemble_matrices(mesh: &Mesh) -> Matrices {
    let n = mesh.nodes.len();
    let pattern = CsrMatrix::from_cliques(n, mesh.triangles.iter().map(|t| &t[..]));
    let mut stiffness = pattern.zeros_like();
    let mut mass = pattern.zeros_like();
    let elements: Vec<Element> = mesh.triangles.par_iter().map(|&t| element(mesh, t)).collect();
    for (t, ke, me) in &elements {
        for a in 0..3 {
            for b in 0..3 {
                stiffness.add(t[a], t[b], ke[a][b]);
                mass.add(t[a], t[b], me[a][b]);
            }
        }
    }
    let edge_mass = |edges: &[[usize; 2]]| {
        let mut m = pattern.zeros_like();
        for &e in edges {
            let l = mesh.edge_length(e);
            m.add(e[0], e[0], l / 3.0);
            m.add(e[1], e[1], l / 3.0);
            m.add(e[0], e[1], l / 6.0);
            m.add(e[1], e[0], l / 6.0);
        }
        m
    };
    Matrices {
        inner_mass: edge_mass(&mesh.inner_edges),
        outer_mass: edge_mass(&mesh.outer_edges),
        stiffness,
        mass,
    }
}

/// Reduced system `A u = lambda M u` on the non-Dirichlet nodes.
#[derive(Debug, Clone)]
pub struct System {
    pub a: CsrMatrix,
    pub m: CsrMatrix,
    /// Mesh node of each unknown.
    pub free: Vec<usize>,
    pub n_nodes: usize,
    pub robin: RobinPair,
}

impl System {
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_nodes];
        for (k, &node) in self.free.iter().enumerate() {
            full[node] = reduced[k];
        }
        full
    }

    pub fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&node| full[node]).collect()
    }

    pub fn quotient(&self, v: &[f64]) -> Result<f64> {
        let den = self.m.quad_form(v);
        if !(den > 0.0) {
            return Err(RfkError::InvalidTestFunction("zero L2 norm".into()));
        }
        Ok(self.a.quad_form(v) / den)
    }

    /// `||A v - q M v|| / ||M v||` with `q` the quotient of `v`.
    pub fn residual(&self, v: &[f64], q: f64) -> f64 {
        let av = self.a.matvec(v);
        let mv = self.m.matvec(v);
        let r: Vec<f64> = av.iter().zip(&mv).map(|(a, m)| a - q * m).collect();
        (dot(&r, &r) / dot(&mv, &mv)).sqrt()
    }
}

fn is_dirichlet_node(flag: NodeFlag, robin: &RobinPair) -> bool {
    match flag {
        NodeFlag::Inner => robin.h_in.is_dirichlet(),
        NodeFlag::Outer => robin.h_out.is_dirichlet(),
        NodeFlag::Interior => false,
    }
}

pub fn assemble(mesh: &Mesh, robin: &RobinPair) -> System {
    system_from(mesh, &assemble_matrices(mesh), robin)
}

pub fn system_from(mesh: &Mesh, mats: &Matrices, robin: &RobinPair) -> System {
    let mut a = mats.stiffness.clone();
    if let RobinParam::Finite(h) = robin.h_in {
        a = a.axpy(h, &mats.inner_mass);
    }
    if let RobinParam::Finite(h) = robin.h_out {
        a = a.axpy(h, &mats.outer_mass);
    }
    let free: Vec<usize> = (0..mesh.nodes.len())
        .filter(|&i| !is_dirichlet_node(mesh.node_flags[i], robin))
        .collect();
    System {
        a: a.restrict(&free),
        m: mats.mass.restrict(&free),
        free,
        n_nodes: mesh.nodes.len(),
        robin: *robin,
    }
}

/// Rayleigh quotient of the nodal field `v`, boundary terms included.
pub fn rayleigh_quotient(mesh: &Mesh, robin: &RobinPair, v: &[f64]) -> Result<f64> {
    if v.len() != mesh.nodes.len() {
        return Err(RfkError::InvalidTestFunction(format!(
            "{} values for {} nodes",
            v.len(),
            mesh.nodes.len()
        )));
    }
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let sys = assemble(mesh, robin);
    let clamped = (0..v.len()).any(|i| is_dirichlet_node(mesh.node_flags[i], robin) && v[i].abs() > 1e-12 * scale);
    if clamped {
        return Err(RfkError::InvalidTestFunction("nonzero values on a Dirichlet boundary".into()));
    }
    sys.quotient(&sys.reduce(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_mesh;
    use crate::geometry::{DomainSpec, Point};
    use std::f64::consts::PI;

    #[test]
    fn constants_in_kernel_and_mass_totals_area() {
        let mesh = build_mesh(&DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.1)).unwrap(), 64, 8).unwrap();
        let mats = assemble_matrices(&mesh);
        let ones = vec![1.0; mesh.nodes.len()];
        assert!(mats.stiffness.matvec(&ones).iter().all(|x| x.abs() < 1e-12));
        assert!((mats.mass.quad_form(&ones) - mesh.area()).abs() < 1e-12);
        assert!(mats.stiffness.is_symmetric(1e-14) && mats.mass.is_symmetric(1e-14));
    }

    #[test]
    fn boundary_mass_totals_perimeter() {
        let mesh = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 256, 8).unwrap();
        let mats = assemble_matrices(&mesh);
        let ones = vec![1.0; mesh.nodes.len()];
        assert!((mats.inner_mass.quad_form(&ones) - 2.0 * PI).abs() < 1e-3);
        assert!((mats.outer_mass.quad_form(&ones) - 4.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let mesh = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 32, 4).unwrap();
        let k = assemble_matrices(&mesh).stiffness;
        let mut x = 0.123_f64;
        for _ in 0..20 {
            let v: Vec<f64> = (0..k.n)
                .map(|_| {
                    x = (x * 997.0 + 0.31).fract();
                    x - 0.5
                })
                .collect();
            assert!(k.quad_form(&v) >= -1e-12);
        }
    }

    #[test]
    fn constant_quotient_on_robin_annulus() {
        // inner unit circle, |Omega| = 3 pi: quotient of 1 is 2 pi / 3 pi
        let mesh = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 256, 32).unwrap();
        let robin = RobinPair::from_f64(1.0, 0.0).unwrap();
        let q = rayleigh_quotient(&mesh, &robin, &vec![1.0; mesh.nodes.len()]).unwrap();
        assert!((q - 2.0 / 3.0).abs() < 1e-3, "{q}");
    }

    #[test]
    fn dirichlet_nodes_eliminated() {
        let mesh = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 32, 4).unwrap();
        let robin = RobinPair::from_f64(f64::INFINITY, 0.0).unwrap();
        let sys = assemble(&mesh, &robin);
        assert_eq!(sys.free.len(), mesh.nodes.len() - 32);
        assert!(rayleigh_quotient(&mesh, &robin, &vec![1.0; mesh.nodes.len()]).is_err());
        assert!(matches!(
            rayleigh_quotient(&mesh, &RobinPair::from_f64(1.0, 1.0).unwrap(), &vec![0.0; mesh.nodes.len()]),
            Err(RfkError::InvalidTestFunction(_))
        ));
    }
}
