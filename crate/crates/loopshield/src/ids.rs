//! Residual-based anomaly detector: secure-phase statistics, eta-sigma
//! thresholds, and a latching persistence-counted threshold test.

use crate::error::{Error, Result};

/// Residual statistics collected during the attack-free secure phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecureStats {
    /// Sample mean of the residuals.
    pub mean: f64,
    /// Unbiased sample standard deviation (divisor n-1).
    pub std_dev: f64,
    pub sample_count: usize,
}

/// Fit mean and unbiased standard deviation from at least two residuals.
pub fn fit_secure_stats(residuals: &[f64]) -> Result<SecureStats> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientSamples {
            got: residuals.len(),
            required: 1,
        });
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let ss = residuals
        .iter()
        .map(|r| (r - mean) * (r - mean))
        .sum::<f64>();
    Ok(SecureStats {
        mean,
        std_dev: (ss / (n - 1.0)).sqrt(),
        sample_count: residuals.len(),
    })
}

/// Detector tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Threshold multiplier eta in band = mean +- eta * sigma.
    pub eta: f64,
    /// Lower bound substituted for the secure-phase standard deviation. With
    /// a perfect reference model the fitted sigma is ~0 and the band would
    /// collapse to zero width and trip on rounding noise.
    pub sigma_floor: f64,
    /// Consecutive out-of-band samples required before the flag raises.
    pub persistence: u32,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            eta: 3.0,
            sigma_floor: 1e-6,
            persistence: 1,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "detector.eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "detector.sigma_floor must be positive, got {}",
                self.sigma_floor
            )));
        }
        if self.persistence < 1 {
            return Err(Error::InvalidParameter(
                "detector.persistence must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Detection band mean +- eta * max(sigma, sigma_floor).
pub fn thresholds(stats: &SecureStats, config: &DetectorConfig) -> (f64, f64) {
    let s_eff = stats.std_dev.max(config.sigma_floor);
    (
        stats.mean - config.eta * s_eff,
        stats.mean + config.eta * s_eff,
    )
}

/// Threshold detector state. The flag latches: once raised it never resets
/// within a run.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    stats: Option<SecureStats>,
    band: Option<(f64, f64)>,
    consecutive: u32,
    flag: bool,
    detection_time: Option<f64>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            stats: None,
            band: None,
            consecutive: 0,
            flag: false,
            detection_time: None,
        })
    }

    /// Finish the secure phase: fit thresholds from the collected statistics.
    pub fn arm(&mut self, stats: SecureStats) {
        self.band = Some(thresholds(&stats, &self.config));
        self.stats = Some(stats);
    }

    pub fn is_armed(&self) -> bool {
        self.band.is_some()
    }

    /// Advance one sample. Out-of-band residuals increment the persistence
    /// counter; in-band residuals reset it. The flag raises at the first
    /// sample where the counter reaches `persistence` and stays raised.
    ///
    /// Returns the flag state. Erring before [`Detector::arm`] is the
    /// secure-phase misuse guard.
    pub fn step(&mut self, residual: f64, t: f64) -> Result<bool> {
        let (low, upp) = self.band.ok_or(Error::SecurePhase)?;
        if self.flag {
            return Ok(true);
        }
        if residual < low || residual > upp {
            self.consecutive += 1;
            if self.consecutive >= self.config.persistence {
                self.flag = true;
                self.detection_time = Some(t);
            }
        } else {
            self.consecutive = 0;
        }
        Ok(self.flag)
    }

    pub fn is_flagged(&self) -> bool {
        self.flag
    }

    pub fn detection_time(&self) -> Option<f64> {
        self.detection_time
    }

    pub fn band(&self) -> Option<(f64, f64)> {
        self.band
    }

    pub fn stats(&self) -> Option<&SecureStats> {
        self.stats.as_ref()
    }
}
