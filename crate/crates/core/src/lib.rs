//! Symbolic calculus of iterated differential forms on the infinite jet
//! space of a trivial vector bundle `R^{n+m} -> R^n`.
//!
//! Layers, bottom up:
//!
//! * [`coeff`] and [`form`]: the graded-commutative algebra `Lambda_k` in
//!   canonical form;
//! * [`calculus`]: the multiple bicomplex `(d_m^v, d_m^h)`, the slot
//!   involutions and total derivatives;
//! * [`derivations`]: vertical derivations, the module of generating
//!   fields and their evolutionary prolongations;
//! * [`cdiff`]: C-differential operators, adjoints and linearizations;
//! * [`secondary`]: secondary forms, the Euler operator, the secondary
//!   differential, Lie derivatives, insertions and covariant tensors.

pub mod calculus;
pub mod cdiff;
pub mod coeff;
pub mod config;
pub mod derivations;
pub mod error;
pub mod form;
pub mod sample;
pub mod secondary;

pub use calculus::{classify, differential, kappa, SlotKind};
pub use coeff::{Atom, Poly, Q};
pub use config::{BundleConfig, JetCoordinate, MultiIndex, SlotSet};
pub use error::{AlgebraError, Result};
pub use form::{FormExpr, Generator, Monomial};
