//! Shared fixtures for the benchmarks.

use alcove_core::sampling::sample_brownian;
use alcove_core::{PiecewiseLinearPath, RngStream, RootSystem};

/// Brownian path with barycentric drift, `T = 1`.
pub fn brownian(rs: &RootSystem, dt: f64, seed: u64) -> PiecewiseLinearPath {
    let nu = rs.barycentric_drift().finite.to_vec();
    let mut rng = RngStream::new(seed, 0).rng();
    sample_brownian(rs, 1.0, dt, &nu, &mut rng).expect("valid parameters")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_expected_grid() {
        let rs = RootSystem::new(2).unwrap();
        let p = brownian(&rs, 0.01, 1);
        assert_eq!(p.len(), 101);
        assert!((p.horizon() - 1.0).abs() < 1e-12);
    }
}
