//! Intercept-resend adversary.

use rand::Rng;

use super::channel::ChannelEstimate;
use super::QkdError;

/// Error rate of a fully intercepted BB84 stream with random measurement bases.
pub const INTERCEPT_RESEND_ERROR: f64 = 0.25;

fn check_fraction(f: f64) -> Result<(), QkdError> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(QkdError::InvalidFraction(f))
    }
}

/// `f * 0.25 + (1 - f) * baseline`.
pub fn mix_error(baseline: f64, fraction: f64) -> f64 {
    fraction * INTERCEPT_RESEND_ERROR + (1.0 - fraction) * baseline
}

/// Expected QBER when a fraction of pulses is intercepted and resent.
pub fn intercept_resend_qber(est: &ChannelEstimate, fraction: f64) -> Result<f64, QkdError> {
    check_fraction(fraction)?;
    Ok(mix_error(est.e_mu, fraction))
}

/// Channel estimate as seen by the legitimate parties under attack. The
/// single-photon error bound degrades the same way as the signal QBER.
pub fn attacked_estimate(est: &ChannelEstimate, fraction: f64) -> Result<ChannelEstimate, QkdError> {
    check_fraction(fraction)?;
    let mut e = *est;
    e.e_mu = mix_error(est.e_mu, fraction);
    e.e_nu = mix_error(est.e_nu, fraction);
    e.e1 = mix_error(est.e1, fraction).min(0.5);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackTally {
    pub pulses: u64,
    pub sifted: u64,
    pub errors: u64,
}

impl AttackTally {
    pub fn qber(&self) -> f64 {
        if self.sifted == 0 {
            0.0
        } else {
            self.errors as f64 / self.sifted as f64
        }
    }
}

/// Pulse-by-pulse BB84 with single photons and lossless detection. Each pulse
/// is intercepted with probability `fraction`; Eve measures in a random basis
/// and resends her result in that basis. `device_error` flips Bob's outcome
/// independently (0 for ideal devices).
pub fn simulate_intercept_resend(
    pulses: u64,
    fraction: f64,
    device_error: f64,
    rng: &mut impl Rng,
) -> Result<AttackTally, QkdError> {
    check_fraction(fraction)?;
    if !(0.0..=0.5).contains(&device_error) {
        return Err(QkdError::InvalidParams(format!("device error {device_error} outside [0, 0.5]")));
    }
    let mut t = AttackTally { pulses, sifted: 0, errors: 0 };
    for _ in 0..pulses {
        let bit: bool = rng.random();
        let basis: bool = rng.random();
        let (mut state_bit, mut state_basis) = (bit, basis);
        if rng.random_bool(fraction) {
            let eve_basis: bool = rng.random();
            let eve_bit = if eve_basis == state_basis { state_bit } else { rng.random() };
            state_bit = eve_bit;
            state_basis = eve_basis;
        }
        let bob_basis: bool = rng.random();
        let mut bob_bit = if bob_basis == state_basis { state_bit } else { rng.random() };
        if device_error > 0.0 && rng.random_bool(device_error) {
            bob_bit = !bob_bit;
        }
        if bob_basis == basis {
            t.sifted += 1;
            if bob_bit != bit {
                t.errors += 1;
            }
        }
    }
    Ok(t)
}
