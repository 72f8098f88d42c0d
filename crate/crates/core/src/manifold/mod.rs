//! Discretized manifolds, their Laplacians and spectral diagnostics.

mod distance;
mod laplacian;
mod mesh;
mod quotient;

pub use distance::{edge_graph, graph_diameter, single_source_distances, EdgeGraph};
pub use laplacian::{
    assemble_laplacian, first_nontrivial_eigenvalue, EigenConfig, Laplacian, SparseMatrix,
    SpectralEstimate,
};
pub use mesh::{
    build_circle, build_flat_torus, build_icosphere, build_interval, load_mesh_off, parse_off,
    AnalyticMetadata, Graph1D, TriangleMesh, Vec3,
};
pub use quotient::{oscillation_quotient_max, QArgmax, QDiagnostic, QOptions};

use serde::{Deserialize, Serialize};

/// Any discretized manifold the lab can handle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Manifold {
    Graph(Graph1D),
    Mesh(TriangleMesh),
}

impl Manifold {
    pub fn name(&self) -> &str {
        match self {
            Manifold::Graph(g) => &g.name,
            Manifold::Mesh(m) => &m.name,
        }
    }

    pub fn metadata(&self) -> Option<&AnalyticMetadata> {
        match self {
            Manifold::Graph(g) => g.metadata.as_ref(),
            Manifold::Mesh(m) => m.metadata.as_ref(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Manifold::Graph(g) => g.len(),
            Manifold::Mesh(m) => m.vertices.len(),
        }
    }

    /// Typical edge length, used as the mesh size `h`.
    pub fn mesh_size(&self) -> f64 {
        match self {
            Manifold::Graph(g) => {
                let edges = g.edges();
                edges.iter().map(|e| e.2).sum::<f64>() / edges.len() as f64
            }
            Manifold::Mesh(m) => m.mean_edge_length(),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        match self {
            Manifold::Graph(g) => g.validate(),
            Manifold::Mesh(m) => m.validate(),
        }
    }
}

impl From<Graph1D> for Manifold {
    fn from(g: Graph1D) -> Self {
        Manifold::Graph(g)
    }
}

impl From<TriangleMesh> for Manifold {
    fn from(m: TriangleMesh) -> Self {
        Manifold::Mesh(m)
    }
}
