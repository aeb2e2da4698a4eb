//! Thermal pair-number distribution, truncation policy, and the
//! multinomial weights induced by equal splitting across modes.

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result, SourceParams};

/// Largest photon number for which multinomial weights are evaluated in
/// exact integer arithmetic before falling back to log-space.
const EXACT_FACTORIAL_MAX: u32 = 20;

/// Truncated probability vector over photon number n = 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    probs: Vec<f64>,
}

impl NumberDistribution {
    /// Wraps a dense probability vector indexed from n = 0.
    ///
    /// Entries must be nonnegative; normalization is the caller's
    /// contract (full states carry at most the truncated tail as
    /// missing mass, conditional distributions sum to 1).
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter(
                "number distribution must have at least the n = 0 entry".into(),
            ));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "number distribution entries must be finite and >= 0".into(),
            ));
        }
        Ok(Self { probs })
    }

    pub fn n_max(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    /// Probability of photon number `n`; zero beyond the truncation.
    pub fn prob(&self, n: u32) -> f64 {
        self.probs.get(n as usize).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Thermal distribution mu^n / (1 + mu)^(1 + n), truncated at `n_max`.
///
/// The retained mass is 1 - (mu / (1 + mu))^(n_max + 1).
pub fn thermal_distribution(source: &SourceParams, n_max: u32) -> NumberDistribution {
    let mu = source.mu();
    let ratio = source.thermal_ratio();
    let p0 = 1.0 / (1.0 + mu);
    let probs = (0..=n_max).map(|n| p0 * ratio.powi(n as i32)).collect();
    NumberDistribution { probs }
}

/// Smallest `n_max` whose truncated thermal tail (mu/(1+mu))^(n_max+1)
/// does not exceed `tail_tol`.
pub fn truncation_cutoff(source: &SourceParams, tail_tol: f64) -> Result<u32> {
    if !tail_tol.is_finite() || tail_tol <= 0.0 || tail_tol >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance must lie in (0, 1), got {tail_tol}"
        )));
    }
    let ratio = source.thermal_ratio();
    if ratio == 0.0 {
        return Ok(0);
    }
    let tail = |n_max: u32| ratio.powi(n_max as i32 + 1);
    // Log-space guess, then adjust for rounding.
    let mut n = (tail_tol.ln() / ratio.ln() - 1.0).ceil().max(0.0) as u32;
    while tail(n) > tail_tol {
        n += 1;
    }
    while n > 0 && tail(n - 1) <= tail_tol {
        n -= 1;
    }
    Ok(n)
}

/// Weight of one photon-number composition under equal splitting:
/// n! / (M^n * k_1! ... k_M!) with n = sum(k_i) and M = number of parts.
///
/// Exact integer arithmetic up to n = 20, log-space beyond.
pub fn multinomial_weight(composition: &[u32]) -> Result<f64> {
    if composition.is_empty() {
        return Err(Error::InvalidParameter(
            "composition must have at least one part".into(),
        ));
    }
    let modes = composition.len() as u32;
    let n: u32 = composition.iter().sum();
    if n <= EXACT_FACTORIAL_MAX {
        let mut coeff: u128 = 1;
        let mut placed = 0u32;
        // Product of binomials C(placed + k, k) builds n! / prod k_i!.
        for &k in composition {
            for i in 1..=k {
                coeff = coeff * u128::from(placed + i) / u128::from(i);
            }
            placed += k;
        }
        Ok(coeff as f64 / f64::from(modes).powi(n as i32))
    } else {
        let log_coeff = ln_gamma(f64::from(n) + 1.0)
            - composition
                .iter()
                .map(|&k| ln_gamma(f64::from(k) + 1.0))
                .sum::<f64>();
        Ok((log_coeff - f64::from(n) * f64::from(modes).ln()).exp())
    }
}

/// Calls `visit` with every composition of `n` into `parts` ordered parts.
pub fn for_each_composition<F: FnMut(&[u32])>(n: u32, parts: u32, mut visit: F) {
    assert!(parts >= 1, "need at least one part");
    let mut buf = vec![0u32; parts as usize];
    fn rec<F: FnMut(&[u32])>(buf: &mut [u32], idx: usize, rem: u32, visit: &mut F) {
        if idx == buf.len() - 1 {
            buf[idx] = rem;
            visit(buf);
            return;
        }
        for k in 0..=rem {
            buf[idx] = k;
            rec(buf, idx + 1, rem - k, visit);
        }
    }
    rec(&mut buf, 0, n, &mut visit);
}
