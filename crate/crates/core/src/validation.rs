//! Seeded cross-check of the determinant echo formulas against the
//! brute-force Fock-space computation on small chains.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainSpec, QubitLabel};
use crate::echo::{echo_exchange, echo_survival, time_grid};
use crate::error::{Error, Result};
use crate::modes::diagonalize_spec;
use crate::oracle::{oracle_echo_exchange, oracle_echo_survival};

/// One randomly drawn configuration and the worst determinant-vs-oracle
/// disagreement found for it over t ∈ [0, 10].
#[derive(Debug, Clone)]
pub struct ValidationCell {
    pub spec: ChainSpec,
    pub d: usize,
    pub max_err_survival: f64,
    pub max_err_exchange: f64,
}

impl ValidationCell {
    pub fn max_err(&self) -> f64 {
        self.max_err_survival.max(self.max_err_exchange)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Whether a drawn configuration is safe to compare: unique many-body ground
/// state and no accidentally-degenerate single-particle spectrum edge.
fn usable(spec: &ChainSpec) -> bool {
    let Ok(basis) = diagonalize_spec(&spec.unperturbed()) else {
        return false;
    };
    if basis.energies.min() < 1e-6 {
        return false; // zero mode: vacuum choice ambiguous between methods
    }
    let Ok(perturbed) = diagonalize_spec(spec) else {
        return false;
    };
    perturbed.energies.min() > 1e-6
}

/// Draw `n_configs` random small chains and compare both echoes against the
/// Fock-space oracle on t ∈ [0, 10], Δt = 0.1.
pub fn run_oracle_suite(seed: u64, n_configs: usize) -> Result<Vec<ValidationCell>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = time_grid(10.0, 0.1);
    let mut cells = Vec::with_capacity(n_configs);
    let mut attempts = 0usize;
    while cells.len() < n_configs {
        attempts += 1;
        if attempts > 200 * n_configs {
            return Err(Error::InvalidArgument(
                "could not draw enough non-degenerate configurations".into(),
            ));
        }
        let n = *[4usize, 6, 8].get(rng.gen_range(0..3)).unwrap();
        let gamma: f64 = rng.gen_range(0.0..=1.0);
        let lambda: f64 = rng.gen_range(0.1..=2.0);
        // log-uniform coupling spans weak to strong
        let g = (rng.gen_range(0.05f64.ln()..=50.0f64.ln())).exp();
        let d = rng.gen_range(0..n);
        let Ok(spec) = ChainSpec::new(n, gamma, lambda, g, d, QubitLabel::OneOne) else {
            continue;
        };
        if !usable(&spec) {
            continue;
        }

        let survival = echo_survival(&spec, &times)?;
        let survival_oracle = match oracle_echo_survival(&spec, &times) {
            Ok(s) => s,
            Err(Error::DegenerateGroundState { .. }) => continue,
            Err(e) => return Err(e),
        };
        let exchange = echo_exchange(&spec, d, &times)?;
        let exchange_oracle = match oracle_echo_exchange(&spec, d, &times) {
            Ok(s) => s,
            Err(Error::DegenerateGroundState { .. }) => continue,
            Err(e) => return Err(e),
        };

        cells.push(ValidationCell {
            spec,
            d,
            max_err_survival: max_abs_diff(&survival.values, &survival_oracle.values),
            max_err_exchange: max_abs_diff(&exchange.values, &exchange_oracle.values),
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic() {
        let a = run_oracle_suite(7, 3).unwrap();
        let b = run_oracle_suite(7, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.spec, y.spec);
            assert_eq!(x.max_err_survival, y.max_err_survival);
            assert_eq!(x.max_err_exchange, y.max_err_exchange);
        }
    }

    #[test]
    fn small_suite_agrees_with_oracle() {
        for cell in run_oracle_suite(1, 5).unwrap() {
            assert!(
                cell.max_err() < 1e-8,
                "spec {:?} d={} err={:.3e}",
                cell.spec,
                cell.d,
                cell.max_err()
            );
        }
    }
}
