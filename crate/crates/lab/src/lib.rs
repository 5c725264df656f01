//! Exact linear algebra over truncated graded slices of iterated forms.
//!
//! Every dimension reported here is a statement about a finite slice cut
//! out by a [`TruncationSpec`]; reports carry those bounds and phrase
//! negative results as "within bounds".

pub mod error;
pub mod linalg;
pub mod oneline;
pub mod ops;
pub mod report;
pub mod slice;

pub use error::{LabError, Result};
pub use linalg::{Echelon, SparseMatrix, SparseVec};
pub use oneline::{one_line_samples, w_preimage, OneLineRun, OpElement};
pub use ops::{cohomology_dim, operator_matrix, solve_preimage, Cohomology, FormMap, OperatorMatrix, Preimage};
pub use report::Report;
pub use slice::{basis, SliceBasis, TruncationSpec};
