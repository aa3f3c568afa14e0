//! Meshes of planar domains, conformal path lengths, distance-to-boundary
//! fields and completeness probes.

mod completeness;
mod distance;
mod export;
mod mesh;

pub use completeness::{
    completeness_probe, decade_levels, CompletenessReport, DivergenceVerdict, FitModel, ProbeTarget,
};
pub use distance::{
    boundary_distance_field, hyperbolic_distance, path_length, poincare_density, shortest_paths,
};
pub use export::{export_csv, write_edges_csv, write_nodes_csv};
pub use mesh::{
    build_mesh, segment_weight, LatticeInfo, MeshedDomain, NodeFlag, NodeKind, BOUNDARY_INSET,
    PUNCTURE_EXCLUSION, RING_ANGLES,
};

use crate::mtriple::MTriple;

/// Meshes the domain of `t` with its own metric density.
pub fn mesh_for_triple(t: &MTriple, resolution: usize) -> crate::Result<MeshedDomain> {
    build_mesh(t.domain(), |z| t.density(z), resolution)
}
