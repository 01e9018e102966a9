//! Tensor algebra under the Einstein product: generalized inverses,
//! reverse-order laws for the core inverse, and multilinear solvers.

pub mod error;
pub mod inverse;
pub mod io;
pub mod laws;
mod linalg;
pub mod poisson;
pub mod solver;
pub mod tensor;
pub mod testkit;

pub use error::{Error, Result};
pub use inverse::{IndexResult, InverseEquation, InverseOptions};
pub use laws::{check_law, counterexample_search, LawId, LawReport};
pub use num_complex::Complex64;
pub use tensor::{DenseTensor, TensorShape};
