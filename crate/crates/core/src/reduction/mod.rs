//! Size reduction, exact shortest-vector enumeration, HKZ reduction and
//! certification, successive minima and projected sublattices.

mod enumerate;
mod hkz;
mod minima;

pub use hkz::{
    hkz_reduce, is_hkz_reduced, projected_gram, shortest_vector, size_reduce, HkzCertificate,
    ReductionReport, ShortestVectorResult,
};
pub use minima::{
    check_propositions, successive_minima, InequalityCheck, PropositionReport, SuccessiveMinima,
    MAX_MINIMA_RANK, MINIMUM_LOWER, MINIMUM_UPPER, PROJECTED_BELOW_MINIMUM,
    PROJECTED_RATIO_ADJACENT, PROJECTED_RATIO_SKIP,
};
