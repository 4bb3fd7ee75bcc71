//! Inputs shared by the benchmarks under `benches/`.

use zkpol_core::appio::{generate_instance, FixtureMode, FixtureSpec};
use zkpol_core::{StatementInstance, StatementKind};

/// Compliant generated instance with the given sizes.
pub fn instance(kind: StatementKind, n_traj: usize, n_geo: usize) -> StatementInstance {
    let spec = FixtureSpec::new(kind, FixtureMode::Compliant, 42, n_traj, n_geo);
    generate_instance(&spec).expect("benchmark fixture generates")
}

/// Size points used by the statement benchmarks.
pub const SIZES: [(usize, usize); 3] = [(32, 4), (64, 4), (64, 8)];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_generate() {
        for (nt, ng) in SIZES {
            assert!(instance(StatementKind::Ev, nt, ng).oracle());
            assert!(instance(StatementKind::Tax, nt, ng).oracle());
        }
    }
}
