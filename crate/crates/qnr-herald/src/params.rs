use crate::{Error, Result};

/// Thermal pair source: mean number of photon pairs per pump pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    mu: f64,
}

impl SourceParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mean pair number mu must be finite and >= 0, got {mu}"
            )));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Geometric ratio of the thermal distribution, mu / (1 + mu).
    pub fn thermal_ratio(&self) -> f64 {
        self.mu / (1.0 + self.mu)
    }
}

/// Per-mode on-off detector: efficiency and dark-count probability per
/// detection window. Propagation and coupling losses fold into `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    eta: f64,
    delta: f64,
}

impl DetectorParams {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "detection efficiency eta must lie in [0, 1], got {eta}"
            )));
        }
        if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "dark-count probability delta must lie in [0, 1), got {delta}"
            )));
        }
        // The POVM model is derived for small dark-count probabilities.
        if delta > 0.1 {
            log::warn!("dark-count probability delta = {delta} is outside the small-delta regime the model assumes");
        }
        Ok(Self { eta, delta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Detection-mode layout: `modes` on-off detectors, `clicks` of which fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QnrConfig {
    modes: u32,
    clicks: u32,
}

impl QnrConfig {
    pub fn new(modes: u32, clicks: u32) -> Result<Self> {
        if modes < 1 {
            return Err(Error::InvalidParameter(
                "mode count M must be at least 1".into(),
            ));
        }
        if clicks > modes {
            return Err(Error::InvalidParameter(format!(
                "click count m = {clicks} exceeds mode count M = {modes}"
            )));
        }
        Ok(Self { modes, clicks })
    }

    /// A binary splitter tree with `layers` layers yields M = 2^layers modes.
    pub fn from_layers(layers: u32, clicks: u32) -> Result<Self> {
        if layers >= 32 {
            return Err(Error::InvalidParameter(format!(
                "splitter tree with {layers} layers overflows the mode count"
            )));
        }
        Self::new(1u32 << layers, clicks)
    }

    pub fn modes(&self) -> u32 {
        self.modes
    }

    pub fn clicks(&self) -> u32 {
        self.clicks
    }
}
