//! Exact linear algebra and combinatorics for 2-nilpotent Borel orbits in
//! classical Lie algebras, their closure orders, the associated quiver
//! representations and affine permutation lengths.

pub mod closure;
pub mod forms;
pub mod intmat;
pub mod linalg;
pub mod orbits;
pub mod patterns;
pub mod report;
pub mod seesaw;
pub mod weyl;

pub use closure::{ClosureOptions, ClosurePoset, GroupKind, Relation, SearchBudget, SearchGroup, Witness};
pub use forms::{ClassicalType, EpsForm, Epsilon, FormError};
pub use linalg::{FFMatrix, LinalgError, QMatrix, Rational};
pub use orbits::{OrbitError, OrbitRecord};
pub use patterns::{LinkPattern, PatternError, RankProfile};
pub use report::ReportError;
pub use seesaw::{QuiverRep, SeesawAlgebra, SeesawError, StringModule};
pub use weyl::{AffinePerm, AffineRoot, WeylError};
