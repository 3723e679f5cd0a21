pub mod convolution;
pub mod deformation;
pub mod error;
pub mod fixtures;
pub mod gauss;
pub mod geometry;
pub mod gmv;
pub mod matrix;
pub mod scalar;
pub mod serial;
pub mod sheaf;
pub mod stokes;
pub mod transport;

pub use error::{Error, Result};
pub use gauss::{direction_cmp, gauss, is_parallel_same_dir, GaussRat};
pub use geometry::{lifted_transport_count, Configuration, LiftedDirection};
pub use matrix::{Grading, Matrix};
pub use scalar::{int, rat, Rational, Scalar};
pub use sheaf::{CircleLocalSystem, Frame, LocalizedPerv, PathKind, PathSpec, Sign, SignWord};
pub use transport::{AlienMethod, TransportEngine};

pub type QMatrix = Matrix<Rational>;
pub type FMatrix = Matrix<f64>;
pub type QPerv = LocalizedPerv<Rational>;
pub type FPerv = LocalizedPerv<f64>;
