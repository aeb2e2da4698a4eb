//! Analytic click statistics: the general m-click inclusion-exclusion
//! series, its ideal (Stirling-number) limit, and the exact closed forms
//! for the single-click case.

use crate::model::{thermal_distribution, NumberDistribution};
use crate::{DetectorParams, Error, QnrConfig, Result, SourceParams};

/// Largest n for which [`stirling2`] is guaranteed exact in u128.
pub const STIRLING_EXACT_MAX_N: u32 = 40;

/// Above this mode count the single-click series is replaced by the
/// exact closed form; the alternating terms lose precision at large M.
const SERIES_MODE_LIMIT: u32 = 10_000;

/// An m-click probability together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickStatistics {
    pub probability: f64,
    pub config: QnrConfig,
    pub source: SourceParams,
    pub detector: DetectorParams,
}

impl ClickStatistics {
    pub fn compute(
        config: &QnrConfig,
        source: &SourceParams,
        detector: &DetectorParams,
        n_max: u32,
    ) -> Result<Self> {
        Ok(Self {
            probability: click_probability(config, source, detector, n_max)?,
            config: *config,
            source: *source,
            detector: *detector,
        })
    }
}

/// Heralded-arm state conditioned on a single click across M modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedState {
    /// Conditional photon-number distribution (sums to 1).
    pub distribution: NumberDistribution,
    /// Probability of the heralding click itself.
    pub herald_probability: f64,
    /// Overlap with the one-photon Fock state, the n = 1 entry.
    pub fidelity_to_single: f64,
}

/// Stirling number of the second kind S(n, m): partitions of an n-set
/// into m non-empty subsets. Exact for n <= [`STIRLING_EXACT_MAX_N`].
pub fn stirling2(n: u32, m: u32) -> u128 {
    assert!(
        n <= STIRLING_EXACT_MAX_N,
        "S({n}, {m}) may overflow u128; use the floating-point series path"
    );
    if m > n {
        return 0;
    }
    if n == 0 {
        return 1; // S(0, 0)
    }
    if m == 0 {
        return 0;
    }
    // S(n, m) = m S(n-1, m) + S(n-1, m-1)
    let mut row = vec![0u128; m as usize + 1];
    row[0] = 1;
    for _ in 1..=n {
        for j in (1..=m as usize).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[m as usize]
}

/// S(n, m) in floating point via the same recurrence; all terms are
/// positive so the relative error stays at machine level for any n.
fn stirling2_f64(n: u32, m: u32) -> f64 {
    if m > n {
        return 0.0;
    }
    if n == 0 {
        return 1.0;
    }
    if m == 0 {
        return 0.0;
    }
    let mut row = vec![0f64; m as usize + 1];
    row[0] = 1.0;
    for _ in 1..=n {
        for j in (1..=m as usize).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[m as usize]
}

/// Neumaier-compensated accumulator for the alternating j-sums.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut b = 1.0;
    for i in 0..k {
        b = b * f64::from(n - i) / f64::from(i + 1);
    }
    b
}

/// Truncated thermal expectation of x^n: sum_{n=0}^{n_max} |c_n|^2 x^n.
fn thermal_power_sum(source: &SourceParams, x: f64, n_max: u32) -> f64 {
    let p0 = 1.0 / (1.0 + source.mu());
    let step = source.thermal_ratio() * x;
    let mut term = p0;
    let mut total = 0.0;
    for _ in 0..=n_max {
        total += term;
        term *= step;
    }
    total
}

/// Probability of registering exactly m clicks across M modes, with the
/// photon-number series truncated at `n_max`:
///
/// P = C(M, m) sum_j (-1)^(m-j) C(m, j) (1-delta)^(M-j)
///     sum_n |c_n|^2 [(1-eta) + j eta / M]^n
///
/// For m = 1 and M beyond 10^4 the exact closed form
/// [`single_click_probability`] is used instead.
pub fn click_probability(
    config: &QnrConfig,
    source: &SourceParams,
    detector: &DetectorParams,
    n_max: u32,
) -> Result<f64> {
    let modes = config.modes();
    let m = config.clicks();
    if m == 1 && modes > SERIES_MODE_LIMIT {
        return single_click_probability(modes, source, detector);
    }
    let eta = detector.eta();
    let delta = detector.delta();
    let mut acc = CompensatedSum::default();
    for j in 0..=m {
        let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let x = (1.0 - eta) + f64::from(j) * eta / f64::from(modes);
        let term = sign
            * binomial_f64(m, j)
            * (1.0 - delta).powi((modes - j) as i32)
            * thermal_power_sum(source, x, n_max);
        acc.add(term);
    }
    Ok((binomial_f64(modes, m) * acc.value()).clamp(0.0, 1.0))
}

/// Ideal limit (eta = 1, delta = 0) via Stirling numbers:
/// P = sum_n |c_n|^2 M! S(n, m) / ((M - m)! M^n).
pub fn click_probability_ideal(
    config: &QnrConfig,
    source: &SourceParams,
    n_max: u32,
) -> Result<f64> {
    let modes = config.modes();
    let m = config.clicks();
    let thermal = thermal_distribution(source, n_max);
    let falling: f64 = (0..m).map(|i| f64::from(modes - i)).product();
    let mut total = 0.0;
    for n in m..=n_max {
        let s = if n <= STIRLING_EXACT_MAX_N {
            stirling2(n, m) as f64
        } else {
            stirling2_f64(n, m)
        };
        total += thermal.prob(n) * falling * s / f64::from(modes).powi(n as i32);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// xi = M (1 - delta)^(M - 1), the normalization that cancels between
/// the single-click probability and the heralded distribution.
pub fn xi(modes: u32, detector: &DetectorParams) -> f64 {
    f64::from(modes) * (1.0 - detector.delta()).powi(modes as i32 - 1)
}

/// Exact single-click probability (no truncation):
/// P = xi [ 1 / (1 + eta mu (1 - 1/M)) - (1 - delta) / (1 + eta mu) ].
pub fn single_click_probability(
    modes: u32,
    source: &SourceParams,
    detector: &DetectorParams,
) -> Result<f64> {
    if modes < 1 {
        return Err(Error::InvalidParameter(
            "mode count M must be at least 1".into(),
        ));
    }
    let mu = source.mu();
    let eta = detector.eta();
    let delta = detector.delta();
    let bracket = 1.0 / (1.0 + eta * mu * (1.0 - 1.0 / f64::from(modes)))
        - (1.0 - delta) / (1.0 + eta * mu);
    Ok((xi(modes, detector) * bracket).clamp(0.0, 1.0))
}

/// Unnormalized weight of photon number n given a single click, with the
/// xi prefactor already dropped:
/// |c_n|^2 { [(1-eta) + eta/M]^n - (1-delta)(1-eta)^n }.
fn heralded_weight(n: u32, modes: u32, source: &SourceParams, detector: &DetectorParams) -> f64 {
    let eta = detector.eta();
    let delta = detector.delta();
    let thermal = 1.0 / (1.0 + source.mu()) * source.thermal_ratio().powi(n as i32);
    let survive = (1.0 - eta) + eta / f64::from(modes);
    thermal * (survive.powi(n as i32) - (1.0 - delta) * (1.0 - eta).powi(n as i32))
}

/// Photon-number distribution of the heralded arm conditioned on exactly
/// one click, truncated at `n_max` and renormalized.
pub fn heralded_distribution(
    modes: u32,
    source: &SourceParams,
    detector: &DetectorParams,
    n_max: u32,
) -> Result<HeraldedState> {
    if modes < 1 {
        return Err(Error::InvalidParameter(
            "mode count M must be at least 1".into(),
        ));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter(
            "heralded distribution needs n_max >= 1".into(),
        ));
    }
    if detector.eta() == 0.0 && detector.delta() == 0.0 {
        return Err(Error::DegenerateHerald);
    }
    let weights: Vec<f64> = (0..=n_max)
        .map(|n| heralded_weight(n, modes, source, detector).max(0.0))
        .collect();
    let norm: f64 = weights.iter().sum();
    if norm <= 0.0 {
        return Err(Error::DegenerateHerald);
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let fidelity_to_single = probs[1];
    Ok(HeraldedState {
        distribution: NumberDistribution::from_probs(probs)?,
        herald_probability: single_click_probability(modes, source, detector)?,
        fidelity_to_single,
    })
}

/// Exact single-photon fidelity of the heralded state:
/// F = [mu / (1+mu)^2] [eta/M + delta (1-eta)] /
///     [ 1 / (1 + eta mu (1 - 1/M)) - (1 - delta) / (1 + eta mu) ].
pub fn single_photon_fidelity(
    modes: u32,
    source: &SourceParams,
    detector: &DetectorParams,
) -> Result<f64> {
    if modes < 1 {
        return Err(Error::InvalidParameter(
            "mode count M must be at least 1".into(),
        ));
    }
    if detector.eta() == 0.0 && detector.delta() == 0.0 {
        return Err(Error::DegenerateHerald);
    }
    let mu = source.mu();
    let eta = detector.eta();
    let delta = detector.delta();
    let numerator = mu / (1.0 + mu).powi(2) * (eta / f64::from(modes) + delta * (1.0 - eta));
    let denominator = 1.0 / (1.0 + eta * mu * (1.0 - 1.0 / f64::from(modes)))
        - (1.0 - delta) / (1.0 + eta * mu);
    if denominator <= 0.0 {
        return Err(Error::DegenerateHerald);
    }
    Ok(numerator / denominator)
}

/// Dark-count-dominated large-M fidelity floor: mu (1 + eta mu)(1 - eta)
/// / (1 + mu)^2. Only meaningful for delta > 0; with delta = 0 the
/// fidelity approaches a different (eta-dependent) limit instead.
pub fn fidelity_large_m_limit(source: &SourceParams, detector: &DetectorParams) -> Result<f64> {
    if detector.delta() == 0.0 {
        return Err(Error::DarkCountRequired);
    }
    let mu = source.mu();
    let eta = detector.eta();
    Ok(mu * (1.0 + eta * mu) * (1.0 - eta) / (1.0 + mu).powi(2))
}
