//! File formats: binvox voxel grids, OBJ meshes, XYZ and ASCII PLY clouds.

mod binvox;
mod cloud;
mod obj;

pub use binvox::{read_binvox, write_binvox};
pub use cloud::{read_ply, read_xyz, write_ply, write_xyz};
pub use obj::{read_obj, sample_mesh, Mesh};
