//! Polynomial arithmetic, dense complex linear algebra and root finding.

pub mod linalg;
pub mod matrix;
pub mod poly;
pub mod polymap;
pub mod roots;

pub use linalg::{eigenvalues, hermitian_eigen, HermitianEigen, Lu};
pub use matrix::CxMatrix;
pub use poly::{MultiIndex, MultiPoly};
pub use polymap::PolyMap;
pub use roots::{roots_univariate, Root};
