//! Exact desk-scale toolkit for sunflowers (families whose pairwise
//! intersections all agree) in plain set systems and in finitely generated
//! substructures of two algebraic constructions: disjoint unary cycles and
//! a rotation-tuple structure whose substructures are determined by base
//! atom sets.
//!
//! Layout:
//! - [`sets`]: finite sets, set families, sunflower detection, padding.
//! - [`search`]: the constructive finder, the exact threshold oracle, and
//!   randomized harnesses.
//! - [`bounds`]: exact big-integer combinatorics, cycle-length schedules,
//!   growth-map catalog, schedule synthesis with machine-checked
//!   certificates.
//! - [`alg`]: finite structures as function tables, closure, substructure
//!   enumeration, isomorphism search, uniformity predicates.
//! - [`mk`], [`nbeta`]: the two structure builders and the symbolic
//!   substructure calculus.
//! - [`verify`]: the invariant suites shared by the CLI and the tests.

pub mod alg;
pub mod bounds;
pub mod error;
pub mod mk;
pub mod nbeta;
pub mod search;
pub mod sets;
pub mod verify;

pub use alg::{
    enumerate_isomorphisms, extension_check, find_isomorphism, is_strongly_uniform, is_uniform,
    Arity, FinStructure, GenSub, IsoMap, Signature, StructureFile, Table,
};
pub use bounds::{
    alpha_circ, check_beta_certificate, derived_sf_bound, er_bound, factorial, gamma, gamma_circ,
    seqsize, synth_beta, thm_bound, AlphaSpec, BetaCertificate, BetaFn, MonotoneMap,
};
pub use error::{Error, Result};
pub use mk::{build_mk_fragment, MkFragmentSpec};
pub use nbeta::{
    base_of, materialize, nbeta_apply, nbeta_closure, nbeta_size, sap_amalgamate,
    single_generator, strong_uniformize, sub_from_base, transfer_sunflower, BaseEmbedding,
    IsoWitness, NBetaElement, NBetaSub, NBetaSym,
};
pub use search::{
    empirical_sf_check, exact_sf, greedy_sunflower, random_family, random_uniform_family,
    EmpiricalReport, SearchBudget, SfAnswer, SfCertificate,
};
pub use sets::{
    canonical_family, is_sunflower, pad_family, Atom, FiniteSet, SetFamily, SunflowerWitness,
};
pub use verify::{
    bound_sanity, closure_cross_check_suite, empirical_sf_nbeta, lemma_guarantee_suite,
    nbeta_invariant_suite, padding_suite, proposition_suite, theorem_bound_cells, BoundCell,
    SuiteReport,
};
