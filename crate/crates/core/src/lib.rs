//! Exact symbolic engine for graded geometry, generalized geometry and
//! gauged sigma models.

pub mod cartan;
pub mod equivariant;
pub mod error;
pub mod gauge;
pub mod graded;
pub mod gengeo;
pub mod linalg;
pub mod poly;
pub mod qmanifold;
pub mod status;

pub use error::{Error, Result};
pub use graded::{Derivation, GradedContext, GradedElement, Generator, Primitive};
pub use poly::{Poly, Q};
