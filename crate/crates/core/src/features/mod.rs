//! Geometric quantities behind the cost functions.

pub mod eigen;
pub mod geometry;
pub mod smooth;
pub mod tensor;

pub use geometry::{
    angle_defect, dihedral_angles, face_normal_area, gaussian_curvature, interior_edges,
    vertex_normal, FaceGeometry, InteriorEdge,
};
pub use smooth::{default_smooth, laplacian_smooth};
pub use tensor::{
    compute_tensor_field, influence_domain, residuals, Pattern, ResidualField, TensorField,
};
