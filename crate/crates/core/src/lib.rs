//! Finite-dimensional measured quantum groupoids as dense complex linear algebra.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] — complex matrices, operator spaces, spans, commutants;
//! * [`fdcstar`] — multi-matrix C*-algebras, states, GNS construction,
//!   base projectors and bounded vector operators;
//! * [`groupoid`] — groupoid octuples, axiom verification, regular
//!   representations, duality and regularity certification;
//! * [`coliaison`] — finite quantum groups, trivial and cocycle-twisted
//!   linking groupoids, corner decompositions;
//! * [`action`] — actions, crossed products, dual actions and
//!   Takesaki–Takai biduality;
//! * [`induction`] — induction of actions, algebras, modules and operators
//!   along a linking groupoid, with round-trip certification;
//! * [`report`] — deterministic check reports shared by the CLI.
//!
//! Every structural statement is checked numerically: residuals are
//! Frobenius norms compared against a relative tolerance (default `1e-9`).

pub mod linalg;
pub mod fdcstar;
pub mod groupoid;
pub mod coliaison;
pub mod action;
pub mod induction;
pub mod report;

use std::sync::atomic::{AtomicBool, Ordering};

/// Default relative tolerance for all rank decisions and residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution even when the `parallel` feature is enabled.
///
/// Used by benchmarks to compare the rayon fan-out against the fallback;
/// results are identical either way because parallel maps reduce in input
/// order.
pub fn set_sequential(seq: bool) {
    FORCE_SEQUENTIAL.store(seq, Ordering::SeqCst);
}

/// Whether work should currently run sequentially.
pub fn sequential() -> bool {
    if cfg!(feature = "parallel") {
        FORCE_SEQUENTIAL.load(Ordering::SeqCst)
    } else {
        true
    }
}

/// Map `f` over `items`, in parallel when available, preserving input order.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential() {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    items.into_iter().map(f).collect()
}

/// Errors shared across all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A functional was expected to be faithful but has a kernel.
    #[error("functional is not faithful: {0}")]
    NonFaithful(String),
    /// Two morphisms disagree on their source algebra or variance.
    #[error("source mismatch: {0}")]
    SourceMismatch(String),
    /// A map expected to be a (partial) isometry fails the defect bound.
    #[error("not isometric: {0}")]
    NotIsometric(String),
    /// The dual algebra or dual GNS map degenerates.
    #[error("degenerate dual: {0}")]
    DegenerateDual(String),
    /// The pentagon product is not of the scalar block form.
    #[error("not of scalar form: {0}")]
    NotScalarForm(String),
    /// Densities of the two invariant weights fail to commute.
    #[error("non-commuting densities: {0}")]
    NonCommutingDensities(String),
    /// A 2-cocycle table fails unitarity or the cocycle identity.
    #[error("cocycle defect: {0}")]
    CocycleDefect(String),
    /// A groupoid axiom fails beyond tolerance during construction.
    #[error("axiom defect: {0}")]
    AxiomDefect(String),
    /// An action is declared over the wrong base algebra.
    #[error("wrong base: {0}")]
    WrongBase(String),
    /// A claimed isomorphism fails well-definedness or multiplicativity.
    #[error("isomorphism defect: {0}")]
    IsoDefect(String),
    /// An induced span fails to close under multiplication.
    #[error("induced space not closed: {0}")]
    NotClosed(String),
    /// A morphism fails equivariance.
    #[error("not equivariant: {0}")]
    NotEquivariant(String),
    /// Reassembly of a linking action disagrees with its components.
    #[error("assembly defect: {0}")]
    AssemblyDefect(String),
    /// A candidate linking algebra fails the linking axioms.
    #[error("not a linking algebra: {0}")]
    NotLinking(String),
    /// An operator fails the induction hypotheses.
    #[error("hypothesis defect: {0}")]
    HypothesisDefect(String),
    /// Malformed input data (tables, dimensions, JSON payloads).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
