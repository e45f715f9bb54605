//! Finite machinery behind separation arguments in measure algebras.
//!
//! The crate works with the discrete dual group Γ of a compact abelian group:
//! dissociate letter sets and their word sets, almost-disjoint families of
//! letter sets, Riesz products described by their Fourier–Stieltjes
//! coefficients, exact densities on the circle and on Cantor-group levels,
//! and per-pair certificates collecting the finite facts that separate the
//! spectra of two Riesz products.

pub mod adfamily;
pub mod concrete;
pub mod dissociate;
pub mod dualgroup;
pub mod riesz;
pub mod spectrum;

pub use adfamily::{ad_set, intersection_bound, letters_for, AdSet, BranchSeed, LetterFamily};
pub use dissociate::{
    enumerate_words, is_dissociate, word_intersection_check, DissociateOutcome, FormalWord,
    IntersectionOutcome, Letter, Sign, WordSet,
};
pub use dualgroup::{Coord, DualGroup, GroupElement, GroupKind};
pub use riesz::{
    coefficient, convolve, default_family_coefficients, ip_criterion_partial, partial_transform,
    transform_power, validate_spec, RieszSpec, SparseTransform, Support,
};
pub use spectrum::{
    disc_lemma_check, gamma_avoidance, natural_spectrum, naturalness_gap, unit_disc_claim,
    witness_pair, Conclusion, WitnessParams, WitnessReport,
};
