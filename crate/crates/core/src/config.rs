use serde::{Deserialize, Serialize};

/// Enumeration limits shared by the exact and approximate routines.
///
/// Every limit counts work items (colorings, edge subsets, polymers,
/// clusters, Taylor terms); exceeding one yields `Error::BudgetExceeded`
/// before any work is done where the count is known up front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Upper bound on `k^n` for brute-force enumeration of colorings.
    pub colorings: u64,
    /// Upper bound on the number of edge subsets visited by the subgraph expansion.
    pub subsets: u64,
    /// Upper bound on the number of polymers enumerated.
    pub polymers: u64,
    /// Upper bound on the number of clusters summed.
    pub clusters: u64,
    /// Largest Ursell-function graph size.
    pub ursell_max_t: usize,
    /// Largest number of Taylor terms in the interpolation pipeline.
    pub interp_terms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            colorings: 10_000_000,
            subsets: 10_000_000,
            polymers: 2_000_000,
            clusters: 20_000_000,
            ursell_max_t: 9,
            interp_terms: 40_000,
        }
    }
}
