//! Polarization drift: a reflected, capped Gaussian random walk on the
//! misalignment offset with separate day and night step sizes.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::QkdError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftConfig {
    /// Random-walk step standard deviation per sqrt(second), night phase.
    pub night_sigma: f64,
    /// Same for the day phase.
    pub day_sigma: f64,
    /// Upper clamp on the offset.
    pub cap: f64,
    pub day_start_hour: f64,
    pub day_end_hour: f64,
    /// Wall-clock hour at simulated time zero.
    pub start_hour: f64,
    pub qber_threshold: f64,
    pub feedback_interval_s: f64,
    pub feedback_duration_s: f64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            night_sigma: 4e-5,
            day_sigma: 1e-3,
            cap: 0.05,
            day_start_hour: 8.0,
            day_end_hour: 18.0,
            start_hour: 20.0,
            qber_threshold: 0.03,
            feedback_interval_s: 1800.0,
            feedback_duration_s: 30.0,
        }
    }
}

impl DriftConfig {
    /// No drift and no feedback at all.
    pub fn frozen() -> Self {
        DriftConfig {
            night_sigma: 0.0,
            day_sigma: 0.0,
            qber_threshold: 1.0,
            feedback_interval_s: f64::INFINITY,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), QkdError> {
        let bad = |m: &str| Err(QkdError::InvalidParams(m.into()));
        if !(self.night_sigma >= 0.0 && self.day_sigma >= 0.0 && self.cap >= 0.0) {
            return bad("drift sigmas and cap must be non-negative");
        }
        for h in [self.day_start_hour, self.day_end_hour, self.start_hour] {
            if !(0.0..24.0).contains(&h) {
                return bad("hours must lie in [0, 24)");
            }
        }
        if self.feedback_interval_s.is_nan() || self.feedback_interval_s <= 0.0 || self.feedback_duration_s < 0.0 {
            return bad("feedback interval must be positive and duration non-negative");
        }
        Ok(())
    }

    pub fn hour_of_day(&self, t_s: f64) -> f64 {
        (self.start_hour + t_s / 3600.0).rem_euclid(24.0)
    }

    pub fn is_day(&self, t_s: f64) -> bool {
        let h = self.hour_of_day(t_s);
        if self.day_start_hour <= self.day_end_hour {
            h >= self.day_start_hour && h < self.day_end_hour
        } else {
            h >= self.day_start_hour || h < self.day_end_hour
        }
    }

    pub fn sigma_at(&self, t_s: f64) -> f64 {
        if self.is_day(t_s) {
            self.day_sigma
        } else {
            self.night_sigma
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftState {
    /// Extra misalignment on top of the link baseline, in `[0, cap]`.
    pub offset: f64,
    /// Running time since the last feedback, seconds.
    pub elapsed_s: f64,
    pub feedback_remaining_s: f64,
}

impl DriftState {
    pub fn feedback_active(&self) -> bool {
        self.feedback_remaining_s > 0.0
    }
}

/// Advances the walk by `dt` seconds starting at simulated time `t_s`.
/// Draws exactly one normal variate.
pub fn step_drift(d: &DriftState, cfg: &DriftConfig, t_s: f64, dt: f64, rng: &mut impl Rng) -> DriftState {
    debug_assert!(dt > 0.0);
    let z: f64 = rng.sample(StandardNormal);
    let mut offset = (d.offset + cfg.sigma_at(t_s) * dt.sqrt() * z).abs();
    if offset > cfg.cap {
        // reflect off the cap, then clamp in case the step overshot twice
        offset = (2.0 * cfg.cap - offset).clamp(0.0, cfg.cap);
    }
    DriftState { offset, elapsed_s: d.elapsed_s + dt, ..*d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn zero_variance_is_constant() {
        let cfg = DriftConfig { night_sigma: 0.0, day_sigma: 0.0, ..Default::default() };
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut d = DriftState { offset: 0.004, ..Default::default() };
        for t in 0..1000 {
            d = step_drift(&d, &cfg, t as f64, 1.0, &mut rng);
        }
        assert_eq!(d.offset, 0.004);
        assert_eq!(d.elapsed_s, 1000.0);
    }

    #[test]
    fn stays_in_bounds() {
        let cfg = DriftConfig { day_sigma: 0.02, night_sigma: 0.02, cap: 0.03, ..Default::default() };
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut d = DriftState::default();
        for t in 0..100_000 {
            d = step_drift(&d, &cfg, t as f64, 1.0, &mut rng);
            assert!((0.0..=0.03).contains(&d.offset));
        }
    }

    #[test]
    fn day_window() {
        let cfg = DriftConfig::default();
        assert!(!cfg.is_day(0.0)); // 20:00
        assert!(cfg.is_day(12.0 * 3600.0)); // 08:00
        assert!(!cfg.is_day(22.0 * 3600.0)); // 18:00
        assert_eq!(cfg.hour_of_day(5.0 * 3600.0), 1.0);
    }
}
