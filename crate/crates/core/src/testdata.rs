//! Shared fixtures for unit tests.

use crate::matrix::{load_matrix, CitationMatrix, MaskPolicy};

pub const TABLE1_CSV: &str = ",AmS,AISM,AoS,ANZS,Bern
AmS,43,0,9,0,1
AISM,1,18,24,5,7
AoS,2,3,291,2,27
ANZS,0,3,4,5,0
Bern,0,5,53,0,22
";

pub fn table1(policy: MaskPolicy) -> CitationMatrix {
    load_matrix(TABLE1_CSV.as_bytes(), policy).unwrap()
}

/// Three-node instance whose likelihood has no finite maximizer.
pub fn tiny3() -> CitationMatrix {
    CitationMatrix::from_counts(vec![vec![0, 2, 1], vec![1, 0, 1], vec![4, 1, 0]], MaskPolicy::Diagonal)
        .unwrap()
}

/// Overdispersed three-node instance with an interior maximum.
pub fn well_posed3() -> CitationMatrix {
    CitationMatrix::from_counts(vec![vec![0, 9, 1], vec![1, 0, 8], vec![7, 2, 0]], MaskPolicy::Diagonal)
        .unwrap()
}
