//! Numerical laboratory for one-cut invariant Hermitian matrix ensembles:
//! equilibrium measures, spectrum samplers, eigenvalue counting fields,
//! multiplicative-chaos observables, Hankel determinants in extended
//! precision, and a Painleve V connection problem.

pub mod chaos;
pub mod cheby;
pub mod config;
pub mod counting;
pub mod report;
pub mod eqmeasure;
pub mod hankel;
pub mod painleve;
pub mod sampler;
