//! Weak-coherent-pulse channel model and the vacuum + weak decoy bounds.

use super::params::LinkParams;
use super::QkdError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEstimate {
    /// Overall transmittance including detector efficiency.
    pub eta: f64,
    pub q_mu: f64,
    pub q_nu: f64,
    pub q_vac: f64,
    pub e_mu: f64,
    pub e_nu: f64,
    /// Lower bound on the single-photon gain of the signal state.
    pub q1: f64,
    /// Upper bound on the single-photon error rate.
    pub e1: f64,
    /// Lower bound on the single-photon yield.
    pub y1: f64,
}

/// Observed gains and error-weighted gains for the three intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyObservations {
    pub mu: f64,
    pub nu: f64,
    pub w: f64,
    pub q_mu: f64,
    pub q_nu: f64,
    pub q_w: f64,
    /// `E_nu * Q_nu`
    pub eq_nu: f64,
    /// `E_w * Q_w`
    pub eq_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub y0: f64,
    pub y1: f64,
    pub q1: f64,
    pub e1: f64,
}

/// Two-decoy bounds with a weak decoy `nu` and a (near-)vacuum decoy `w`,
/// valid for `0 <= w < nu` and `nu + w < mu`.
///
/// ```text
/// Y0 >= max((nu Qw e^w - w Qnu e^nu) / (nu - w), 0)
/// Y1 >= mu / (mu(nu-w) - (nu^2-w^2)) * [Qnu e^nu - Qw e^w - (nu^2-w^2)/mu^2 (Qmu e^mu - Y0)]
/// Q1 >= Y1 mu e^-mu
/// e1 <= (EnuQnu e^nu - EwQw e^w) / ((nu - w) Y1)
/// ```
pub fn decoy_bounds(o: &DecoyObservations) -> DecoyBounds {
    let (mu, nu, w) = (o.mu, o.nu, o.w);
    let y0 = ((nu * o.q_w * w.exp() - w * o.q_nu * nu.exp()) / (nu - w)).max(0.0);
    let d2 = nu * nu - w * w;
    let y1 = mu / (mu * (nu - w) - d2)
        * (o.q_nu * nu.exp() - o.q_w * w.exp() - d2 / (mu * mu) * (o.q_mu * mu.exp() - y0));
    let y1 = y1.clamp(0.0, 1.0);
    let q1 = (y1 * mu * (-mu).exp()).min(o.q_mu);
    let e1 = if y1 > 0.0 {
        ((o.eq_nu * nu.exp() - o.eq_w * w.exp()) / ((nu - w) * y1)).clamp(0.0, 0.5)
    } else {
        0.5
    };
    DecoyBounds { y0, y1, q1, e1 }
}

pub fn transmittance(p: &LinkParams) -> f64 {
    p.detector_efficiency * 10f64.powf(-p.loss_db() / 10.0)
}

/// Gain `Q_k = Y0 + 1 - e^(-eta k)`, capped at 1.
pub fn gain(eta: f64, y0: f64, k: f64) -> f64 {
    (y0 + 1.0 - (-eta * k).exp()).min(1.0)
}

/// Error-weighted gain `E_k Q_k = Y0/2 + e_d (1 - e^(-eta k))`.
pub fn error_gain(eta: f64, y0: f64, e_d: f64, k: f64) -> f64 {
    (0.5 * y0 + e_d * (1.0 - (-eta * k).exp())).min(gain(eta, y0, k))
}

pub fn channel_estimate(p: &LinkParams) -> Result<ChannelEstimate, QkdError> {
    p.validate()?;
    Ok(estimate_with_misalignment(p, p.misalignment))
}

/// Same as [`channel_estimate`] with the misalignment replaced. Skips validation.
pub fn estimate_with_misalignment(p: &LinkParams, e_d: f64) -> ChannelEstimate {
    let e_d = e_d.clamp(0.0, 0.5);
    let eta = transmittance(p);
    let y0 = p.dark_count;
    let (q_mu, q_nu, q_vac) = (gain(eta, y0, p.mu), gain(eta, y0, p.nu), gain(eta, y0, p.vacuum));
    let eq_mu = error_gain(eta, y0, e_d, p.mu);
    let eq_nu = error_gain(eta, y0, e_d, p.nu);
    let eq_w = error_gain(eta, y0, e_d, p.vacuum);
    let b = decoy_bounds(&DecoyObservations {
        mu: p.mu,
        nu: p.nu,
        w: p.vacuum,
        q_mu,
        q_nu,
        q_w: q_vac,
        eq_nu,
        eq_w,
    });
    let ratio = |num: f64, den: f64| if den > 0.0 { (num / den).clamp(0.0, 0.5) } else { 0.0 };
    ChannelEstimate {
        eta,
        q_mu,
        q_nu,
        q_vac,
        e_mu: ratio(eq_mu, q_mu),
        e_nu: ratio(eq_nu, q_nu),
        q1: b.q1,
        e1: b.e1,
        y1: b.y1,
    }
}

pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Multiplicative finite-size penalty `1 - 7 sqrt(log2(2/eps) / N)`, floored at 0.
pub fn finite_key_factor(p: &LinkParams) -> f64 {
    (1.0 - 7.0 * ((2.0 / p.finite_key_epsilon).log2() / p.block_size).sqrt()).max(0.0)
}

/// Secure key per pulse before the repetition rate is applied, for the given
/// single-photon bounds and measured signal error rate.
pub fn key_fraction(p: &LinkParams, est: &ChannelEstimate, e_mu: f64) -> f64 {
    let raw = est.q1 * (1.0 - binary_entropy(est.e1)) - est.q_mu * p.ec_efficiency * binary_entropy(e_mu);
    (p.sift_factor * raw * finite_key_factor(p)).max(0.0)
}

/// `R = rate * q * {Q1 [1 - H2(e1)] - Q_mu f H2(E_mu)} * finite-key factor`, in bits/s.
pub fn secure_key_rate(p: &LinkParams) -> Result<f64, QkdError> {
    let est = channel_estimate(p)?;
    Ok(p.pulse_rate_hz * key_fraction(p, &est, est.e_mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_zero_distance() {
        let mut p = LinkParams::paper_cal().with_length(0.0);
        p.dark_count = 0.0;
        p.misalignment = 0.0;
        let e = channel_estimate(&p).unwrap();
        assert_eq!(e.e_mu, 0.0);
        assert_eq!(e.eta, p.detector_efficiency);
        assert!((e.q_mu - (1.0 - (-p.detector_efficiency * p.mu).exp())).abs() < 1e-15);
    }

    #[test]
    fn table_loss_column() {
        let mut p = LinkParams::paper_cal().with_length(50.0);
        p.attenuation_db_per_km = 0.2252;
        assert!((p.loss_db() - 11.26).abs() < 1e-9);
    }

    #[test]
    fn entropy_points() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - 0.4999).abs() < 1e-3);
    }

    #[test]
    fn finite_key_default() {
        // 1 - 7 sqrt(log2(2e10) / 1e6)
        let f = finite_key_factor(&LinkParams::paper_cal());
        assert!((f - 0.959_052).abs() < 1e-6, "{f}");
    }

    #[test]
    fn bad_channel_clamps_to_zero() {
        let mut p = LinkParams::paper_cal().with_length(30.0);
        p.misalignment = 0.2;
        assert_eq!(secure_key_rate(&p).unwrap(), 0.0);
        p.misalignment = 0.0075;
        p.length_km = 400.0;
        assert_eq!(secure_key_rate(&p).unwrap(), 0.0);
    }
}
