//! Ground-truth engines: exact combinatorial enumeration of the physical
//! process (thermal pairs, equal multinomial splitting, per-mode on-off
//! detection with efficiency and dark counts) and a seeded Monte Carlo
//! sampler. Everything here is independent of the closed forms it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{for_each_composition, multinomial_weight, thermal_distribution, NumberDistribution};
use crate::{DetectorParams, Error, QnrConfig, Result, SourceParams};

/// Hard cap on the enumeration work the exact oracle accepts.
const ENUMERATION_LIMIT: f64 = 1e8;

/// Work estimate for one full click-count table: compositions of
/// `photons` into `modes` parts, each convolved over the modes.
fn enumeration_cost(modes: u32, photons: u32) -> f64 {
    // C(photons + modes - 1, modes - 1) compositions
    let mut compositions = 1.0;
    for i in 1..modes {
        compositions = compositions * f64::from(photons + i) / f64::from(i);
    }
    compositions * f64::from(modes)
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOracleConfig {
    max_photons: u32,
    modes: u32,
}

impl ExactOracleConfig {
    pub fn new(modes: u32, max_photons: u32) -> Result<Self> {
        if modes < 1 {
            return Err(Error::InvalidParameter(
                "mode count M must be at least 1".into(),
            ));
        }
        if enumeration_cost(modes, max_photons) > ENUMERATION_LIMIT {
            return Err(Error::EnumerationBound {
                modes,
                photons: max_photons,
            });
        }
        Ok(Self { max_photons, modes })
    }

    pub fn modes(&self) -> u32 {
        self.modes
    }

    pub fn max_photons(&self) -> u32 {
        self.max_photons
    }
}

/// Monte Carlo sampling plan. The seed fully determines the output.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    trials: u64,
    seed: u64,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        Ok(Self { trials, seed })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Click-count distribution given exactly `n` photons enter the splitter:
/// entry m is the probability of exactly m clicks across the M modes.
///
/// Enumerates photon-number compositions with their multinomial weights;
/// given the occupation, clicks are independent across modes (a mode
/// holding k photons stays silent with probability (1-delta)(1-eta)^k),
/// so the m-click probability per occupation is a convolution over modes
/// rather than a sum over 2^M click patterns.
pub fn exact_click_given_n(
    n: u32,
    config: &ExactOracleConfig,
    detector: &DetectorParams,
) -> Result<Vec<f64>> {
    if n > config.max_photons {
        return Err(Error::EnumerationBound {
            modes: config.modes,
            photons: n,
        });
    }
    let modes = config.modes as usize;
    let eta = detector.eta();
    let delta = detector.delta();
    let mut dist = vec![0.0; modes + 1];
    let mut poly = vec![0.0; modes + 1];
    for_each_composition(n, config.modes, |composition| {
        let weight = multinomial_weight(composition).expect("valid composition");
        poly.iter_mut().for_each(|c| *c = 0.0);
        poly[0] = 1.0;
        for (i, &k) in composition.iter().enumerate() {
            let silent = (1.0 - delta) * (1.0 - eta).powi(k as i32);
            for m in (0..=i).rev() {
                let c = poly[m];
                poly[m + 1] += c * (1.0 - silent);
                poly[m] = c * silent;
            }
        }
        for (d, c) in dist.iter_mut().zip(&poly) {
            *d += weight * c;
        }
    });
    Ok(dist)
}

/// m-click probability by full enumeration: thermal mixture over n of
/// [`exact_click_given_n`], truncated at `n_max`.
pub fn exact_click_probability(
    config: &QnrConfig,
    source: &SourceParams,
    detector: &DetectorParams,
    n_max: u32,
) -> Result<f64> {
    let oracle = ExactOracleConfig::new(config.modes(), n_max)?;
    let thermal = thermal_distribution(source, n_max);
    let mut total = 0.0;
    for n in 0..=n_max {
        let dist = exact_click_given_n(n, &oracle, detector)?;
        total += thermal.prob(n) * dist[config.clicks() as usize];
    }
    Ok(total)
}

/// Heralded-arm photon-number distribution conditioned on exactly one
/// click, by full enumeration.
pub fn exact_heralded_distribution(
    config: &QnrConfig,
    source: &SourceParams,
    detector: &DetectorParams,
    n_max: u32,
) -> Result<NumberDistribution> {
    if config.clicks() != 1 {
        return Err(Error::InvalidParameter(
            "heralded distribution is defined for the single-click outcome".into(),
        ));
    }
    let oracle = ExactOracleConfig::new(config.modes(), n_max)?;
    let thermal = thermal_distribution(source, n_max);
    let joint: Vec<f64> = (0..=n_max)
        .map(|n| {
            exact_click_given_n(n, &oracle, detector).map(|dist| thermal.prob(n) * dist[1])
        })
        .collect::<Result<_>>()?;
    let norm: f64 = joint.iter().sum();
    if norm <= 0.0 {
        return Err(Error::DegenerateHerald);
    }
    NumberDistribution::from_probs(joint.iter().map(|p| p / norm).collect())
}

/// Stochastic realization of the full process. Per trial: draw a pair
/// number from the thermal law, route each surviving photon (survival
/// probability eta) to a uniformly random mode, fire independent dark
/// counts, and count clicking modes. Single-threaded by construction so
/// a seed pins the exact output.
pub fn mc_click_probability(
    config: &QnrConfig,
    source: &SourceParams,
    detector: &DetectorParams,
    mc: &McConfig,
) -> Result<McEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed());
    let modes = config.modes() as usize;
    let target = config.clicks();
    let ratio = source.thermal_ratio();
    let eta = detector.eta();
    let delta = detector.delta();
    let mut survivors = vec![0u32; modes];
    let mut hits = 0u64;
    for _ in 0..mc.trials() {
        survivors.iter_mut().for_each(|s| *s = 0);
        // geometric draw reproduces the thermal pair-number law
        while rng.gen::<f64>() < ratio {
            if rng.gen::<f64>() < eta {
                survivors[rng.gen_range(0..modes)] += 1;
            }
        }
        let mut clicks = 0u32;
        for &s in &survivors {
            if s > 0 || rng.gen::<f64>() < delta {
                clicks += 1;
            }
        }
        if clicks == target {
            hits += 1;
        }
    }
    let trials = mc.trials() as f64;
    let estimate = hits as f64 / trials;
    let std_error = (estimate * (1.0 - estimate) / trials).sqrt();
    Ok(McEstimate {
        estimate,
        std_error,
    })
}
