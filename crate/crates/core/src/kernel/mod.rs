//! Program execution on provenance-tagged triangle meshes.

pub mod blend;
pub(crate) mod csg;
pub mod exec;
pub mod extrude;
pub mod frame;
pub mod mesh;
pub mod region;
pub mod sample;
pub mod solid;
pub mod surface;
pub mod triangulate;

use thiserror::Error;

use crate::grammar::EntityRef;

pub use exec::{execute_legacy, execute_program, to_legacy, ExecConfig, ExecError, Execution};
pub use frame::{build_frame, Frame, SketchPlane};
pub use mesh::{Aabb, ManifoldDefect, Tag, TriangleMesh};
pub use region::{evaluate_profile, PlanarRegion};
pub use sample::{sample_edge, sample_face, EdgeTensor, FaceTensor};
pub use solid::{EdgeCurve, Solid, SurfaceTable, Topology};
pub use surface::AnalyticSurface;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("degenerate geometry")]
    DegenerateGeometry,
    #[error("sketch target is not planar")]
    NonPlanarSketchTarget,
    #[error("sketch plane normal is orthogonal to the direction symbol")]
    DegenerateDirection,
    #[error("auxiliary direction is parallel to the sketch normal")]
    DegenerateProjection,
    #[error("self-intersecting loop")]
    SelfIntersectingLoop,
    #[error("ambiguous loop nesting")]
    AmbiguousRegion,
    #[error("snap target cannot be projected onto the sketch plane")]
    SnapFailure,
    #[error("degenerate profile")]
    DegenerateProfile,
    #[error("extrude extents must have a positive sum")]
    ExtrudeZero,
    #[error("boolean result is empty")]
    EmptyResult,
    #[error("result is not a closed two-manifold: {0:?}")]
    NonManifoldResult(ManifoldDefect),
    #[error("edge class not supported for blending")]
    UnsupportedEdge,
    #[error("chamfer distance too large")]
    ChamferTooLarge,
    #[error("fillet radius too large")]
    FilletTooLarge,
    #[error("pointer {0:?} does not resolve")]
    PointerResolutionFailed(EntityRef),
    #[error("operation {0} has no legacy encoding")]
    UnsupportedOperation(&'static str),
}

impl KernelError {
    pub fn is_pointer_error(&self) -> bool {
        matches!(self, KernelError::PointerResolutionFailed(_))
    }
}
