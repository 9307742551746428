//! Constructive lifting: the lifted distribution, dense-rectangle
//! extraction, protocol synthesis, the block-sensitivity reduction and the
//! checks that tie them together.

mod chain;
mod distribution;
mod extract;
mod reduction;
mod synthesis;

pub use chain::{verify_fknn, verify_main_chain, FknnReport, MainChainReport};
pub use distribution::{build_lifted_distribution, max_ratio_check, LiftedDistribution, MaxRatioReport};
pub use extract::{
    extract_rectangle_from_cover, extract_with, regime_of, Conditioned, ExtractionTrace, Regime,
    ENTROPY_TOLERANCE,
};
pub use reduction::{bs_reduction, check_negation_symmetry, BsReduction, BsReductionReport};
pub use synthesis::{
    finish, rank_decrement_split, synthesize_protocol, FinishRecord, Side, Split, SynthesisOptions,
    SynthesisResult, SynthesisStats, SynthesisStep,
};
