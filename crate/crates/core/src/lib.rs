//! Shape programs: a small DSL of draw statements and loops that lowers to
//! posed cuboids and cylinders, with distance fields, surface sampling,
//! voxelization, Chamfer and coverage losses, exact parameter gradients and
//! a gradient-descent fitter.

pub mod dsl;
pub mod error;
pub mod geometry;
pub mod gradients;
pub mod io;
pub mod losses;
pub mod lowering;
pub mod math;
pub mod optimizer;
pub mod renderer;
pub mod spatial;

pub use dsl::{parse_program, validate_program, Block, Program, Statement, StatementRegistry};
pub use error::{Error, FormatError, ParseError, Result};
pub use gradients::{
    apply_parameters, evaluate_loss, extract_parameters, finite_difference_check, loss_with_gradient, GradCheckConfig,
    GradCheckReport, GradientVector, ParameterVector, RenderConfig, SlotDescriptor,
};
pub use losses::{chamfer, coverage_loss, CoveragePower, LossConfig, LossKind, Reduce};
pub use lowering::{lower_program, PrimitiveKind, PrimitiveSet, Shape, TransformedPrimitive};
pub use optimizer::{fit, FitResult, Method, OptimConfig};
pub use renderer::{sample_points, voxelize, PointCloud, VoxelGrid};
