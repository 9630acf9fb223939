use rand::Rng;
use rand_distr::StandardNormal;

use super::attack::attacked_estimate;
use super::channel::{estimate_with_misalignment, key_fraction};
use super::drift::{step_drift, DriftConfig, DriftState};
use super::params::LinkParams;
use super::QkdError;

/// One authentication cycle of simulated time.
pub const CYCLE_SECONDS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackTrigger {
    Qber,
    Timer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    pub cycle: u64,
    pub time_s: f64,
    pub sifted_bits: u64,
    /// Measured in this cycle; 0 while feedback runs.
    pub qber: f64,
    pub key_bits: u64,
    pub auth_pass: bool,
    pub feedback: bool,
    /// Set on the cycle whose measurement started a feedback period.
    pub trigger: Option<FeedbackTrigger>,
    pub misalignment: f64,
}

/// A link together with its drift configuration and an optional
/// intercept-resend adversary.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub params: LinkParams,
    pub drift: DriftConfig,
    pub attack_fraction: f64,
}

impl LinkModel {
    pub fn new(params: LinkParams, drift: DriftConfig) -> Result<Self, QkdError> {
        params.validate()?;
        drift.validate()?;
        Ok(LinkModel { params, drift, attack_fraction: 0.0 })
    }

    pub fn with_attack(mut self, fraction: f64) -> Result<Self, QkdError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(QkdError::InvalidFraction(fraction));
        }
        self.attack_fraction = fraction;
        Ok(self)
    }

    /// Simulates cycle `cycle` starting from `d`. Draws three normals per
    /// cycle outside feedback and none during it, independent of the verdict,
    /// so forcing a verdict never shifts later cycles.
    pub fn simulate_cycle(
        &self,
        d: &DriftState,
        cycle: u64,
        auth_pass: bool,
        rng: &mut impl Rng,
    ) -> (CycleResult, DriftState) {
        let dt = CYCLE_SECONDS;
        let time_s = cycle as f64 * dt;
        let p = &self.params;
        if d.feedback_active() {
            let mut next = *d;
            next.feedback_remaining_s = (d.feedback_remaining_s - dt).max(0.0);
            let r = CycleResult {
                cycle,
                time_s,
                sifted_bits: 0,
                qber: 0.0,
                key_bits: 0,
                auth_pass,
                feedback: true,
                trigger: None,
                misalignment: p.misalignment,
            };
            return (r, next);
        }

        let mut next = step_drift(d, &self.drift, time_s, dt, rng);
        let e_d = (p.misalignment + next.offset).min(0.5);
        let mut est = estimate_with_misalignment(p, e_d);
        if self.attack_fraction > 0.0 {
            est = attacked_estimate(&est, self.attack_fraction).expect("fraction checked");
        }

        let pulses = p.pulse_rate_hz * dt;
        let mean_sifted = pulses * p.sift_factor * est.q_mu;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let sifted = (mean_sifted + mean_sifted.sqrt() * z1).round().max(0.0);
        let e = est.e_mu;
        let errors = (sifted * e + (sifted * e * (1.0 - e)).sqrt() * z2).round().clamp(0.0, sifted);
        let qber = if sifted > 0.0 { (errors / sifted).min(0.5) } else { 0.0 };

        let key_bits = if auth_pass && mean_sifted > 0.0 {
            (pulses * key_fraction(p, &est, qber) * sifted / mean_sifted).floor() as u64
        } else {
            0
        };

        let trigger = if qber >= self.drift.qber_threshold {
            Some(FeedbackTrigger::Qber)
        } else if next.elapsed_s >= self.drift.feedback_interval_s {
            Some(FeedbackTrigger::Timer)
        } else {
            None
        };
        if trigger.is_some() {
            next.offset = 0.0;
            next.elapsed_s = 0.0;
            next.feedback_remaining_s = self.drift.feedback_duration_s;
        }
        let r = CycleResult {
            cycle,
            time_s,
            sifted_bits: sifted as u64,
            qber,
            key_bits,
            auth_pass,
            feedback: false,
            trigger,
            misalignment: e_d,
        };
        (r, next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn model() -> LinkModel {
        LinkModel::new(LinkParams::paper_cal(), DriftConfig::default()).unwrap()
    }

    #[test]
    fn qber_trigger_then_feedback() {
        let m = model();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        // offset large enough that QBER lands above 3%
        let d = DriftState { offset: 0.03, elapsed_s: 10.0, feedback_remaining_s: 0.0 };
        let (r, next) = m.simulate_cycle(&d, 0, true, &mut rng);
        assert!(r.qber >= 0.03);
        assert_eq!(r.trigger, Some(FeedbackTrigger::Qber));
        assert_eq!(next.elapsed_s, 0.0);
        assert_eq!(next.offset, 0.0);
        let (r2, _) = m.simulate_cycle(&next, 1, true, &mut rng);
        assert!(r2.feedback);
        assert_eq!(r2.key_bits, 0);
    }

    #[test]
    fn timer_trigger_with_low_qber() {
        let m = model();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let d = DriftState { offset: 0.0, elapsed_s: 1799.0, feedback_remaining_s: 0.0 };
        let (r, next) = m.simulate_cycle(&d, 0, true, &mut rng);
        assert!(r.qber < 0.03);
        assert_eq!(r.trigger, Some(FeedbackTrigger::Timer));
        assert_eq!(next.feedback_remaining_s, 30.0);
    }

    #[test]
    fn feedback_lasts_configured_duration() {
        let m = model();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut d = DriftState { feedback_remaining_s: 30.0, ..Default::default() };
        let mut n = 0;
        while d.feedback_active() {
            let (r, next) = m.simulate_cycle(&d, n, true, &mut rng);
            assert!(r.feedback && r.key_bits == 0 && r.sifted_bits == 0);
            d = next;
            n += 1;
        }
        assert_eq!(n, 30);
    }

    #[test]
    fn failed_auth_zeroes_key_only() {
        let m = model();
        let d = DriftState::default();
        let (ok, _) = m.simulate_cycle(&d, 5, true, &mut ChaCha20Rng::seed_from_u64(4));
        let (bad, _) = m.simulate_cycle(&d, 5, false, &mut ChaCha20Rng::seed_from_u64(4));
        assert!(ok.key_bits > 0);
        assert_eq!(bad.key_bits, 0);
        assert_eq!(ok.qber, bad.qber);
        assert_eq!(ok.sifted_bits, bad.sifted_bits);
    }
}
