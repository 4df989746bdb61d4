//! Symbol calculus for order-one finite-order invariants of null-homotopic
//! surface immersions in aspherical 3-manifolds.
//!
//! The crate decides equivalence of CE symbols over a fundamental group,
//! detects one-sided strata, instantiates the relation families, computes
//! truncated presentations of the universal group and evaluates candidate
//! invariants on event traces.

pub mod abelian;
pub mod error;
pub mod group;
pub mod invariants;
pub mod relations;
pub mod ring;
pub mod symbols;

pub use abelian::{present, smith_normal_form, AbelianElement, FgAbelianGroup, IntMatrix, SnfResult};
pub use error::{Error, Result};
pub use group::{Ball, ContextId, Eq3, Equality, Evidence, GroupContext, GroupElement, GroupSpec, Radius};
pub use invariants::{
    check_delta1, compute_universal_truncation, evaluate_trace, Assignment, Delta1Report, EventTrace, UniversalTruncation,
};
pub use relations::{
    build_universe, generate_relations, instantiate, Params, Relation, RelationKind, RelationTerm, SymbolUniverse,
    UniverseConfig, UniverseRelation,
};
pub use ring::GroupRingElement;
pub use symbols::{
    canonicalize, equivalent, is_one_sided, reverse, CanonStatus, CanonicalForm, EquivEvidence, Equivalence, Kind, Sign, Symbol,
    SymbolTuple, Witness,
};
