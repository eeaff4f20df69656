//! P1 finite elements for the Robin eigenproblem on a general domain.

pub mod assemble;
pub mod eigen;
pub mod mesh;
pub mod sparse;

use std::fmt::Write as _;

pub use assemble::{assemble, assemble_matrices, rayleigh_quotient, System};
pub use eigen::{smallest_eig, solve_eigen, EigenOptions, EigenResult};
pub use mesh::{build_mesh, build_mesh_with, Mesh, MeshOptions, NodeFlag};

use crate::error::Result;
use crate::geometry::DomainSpec;
use crate::robin::RobinPair;

/// Default `(n_theta, n_radial)`.
pub const DEFAULT_RESOLUTION: (usize, usize) = (128, 32);

/// Meshes `domain` and solves for the first eigenpair.
pub fn solve_domain(
    domain: &DomainSpec,
    robin: &RobinPair,
    n_theta: usize,
    n_radial: usize,
) -> Result<(Mesh, EigenResult)> {
    let mesh = build_mesh(domain, n_theta, n_radial)?;
    let eig = solve_eigen(&mesh, robin, &EigenOptions::default())?;
    Ok((mesh, eig))
}

/// Plain-text dump: `node x y u` lines followed by `tri i j k` lines.
pub fn dump_field(mesh: &Mesh, u: &[f64]) -> String {
    let mut s = String::new();
    for (p, v) in mesh.nodes.iter().zip(u) {
        let _ = writeln!(s, "node {:.12e} {:.12e} {:.12e}", p.x, p.y, v);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "tri {} {} {}", t[0], t[1], t[2]);
    }
    s
}
