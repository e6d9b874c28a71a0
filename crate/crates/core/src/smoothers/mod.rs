//! Classical node-relocation smoothers. Each maps a star polygon to a
//! proposed position for its free node.

mod angle;
mod cvt;
mod laplacian;
mod optim;

pub use angle::angle_based_step;
pub use cvt::cvt_step;
pub use laplacian::{laplacian_step, smart_laplacian_step, star_mean_transformed};
pub use optim::{optimization_step, OptimConfig};
