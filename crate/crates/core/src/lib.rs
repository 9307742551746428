//! Exact, desk-scale tooling for composed two-party functions `f∘g`.
//!
//! The crate computes Boolean-function measures (sensitivity, block
//! sensitivity, degree, decision-tree depth), exact matrix ranks over the
//! rationals and GF(2), monochromatic rectangle covers, deterministic
//! communication complexity, and implements the constructive procedures that
//! relate them: dense rectangle extraction from a cover of `f∘g`, protocol
//! synthesis for `g` from such covers, protocol rebalancing, and the
//! block-sensitivity reduction.
//!
//! Linear algebra is generic over the scalar ring (see [`scalar`]); the
//! concrete aliases below are the defaults used throughout.

pub mod bitset;
pub mod boolfn;
pub mod corpus;
pub mod error;
pub mod gadget;
pub mod info;
pub mod lifting;
pub mod protocol;
pub mod rectcover;
pub mod scalar;
pub mod suite;

pub use bitset::BitSet;
pub use boolfn::TruthTable;
pub use error::{Error, Result};
pub use gadget::{Budget, GadgetMatrix};
pub use protocol::ProtocolTree;
pub use rectcover::{RectCover, Rectangle};

/// Arbitrary-precision integers used for exact rank and bound checks.
pub type Integer = num_bigint::BigInt;
/// Exact rationals used for probabilities and densities.
pub type Rational = num_rational::BigRational;
/// Floating type used for entropies.
pub type Bits = f64;
/// Integer matrix with big-integer entries.
pub type IntMatrix = gadget::IntegerMatrix<Integer>;
/// Finite distribution with exact rational weights.
pub type Distribution<L> = info::FiniteDistribution<L>;

/// Outcome of one verification check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Holds trivially (the bound is non-positive).
    Vacuous,
    /// The inequality does not apply to this input.
    Degenerate,
    /// Not evaluated, e.g. because a budget ran out.
    Skipped,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }

    /// Whether this status counts against a suite.
    pub fn is_failure(self) -> bool {
        self == CheckStatus::Fail
    }
}
