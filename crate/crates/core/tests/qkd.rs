use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qkdauth::qkd::channel::{decoy_bounds, DecoyObservations};
use qkdauth::qkd::{
    binary_entropy, channel_estimate, finite_key_factor, intercept_resend_qber, secure_key_rate,
    simulate_intercept_resend, step_drift, DriftConfig, DriftState, LinkParams,
};

/// Photon-number-resolved source: yields and error rates summed over a
/// Poisson mixture up to 20 photons.
struct Mixture {
    eta: f64,
    y0: f64,
    e_d: f64,
}

impl Mixture {
    fn y(&self, n: i32) -> f64 {
        1.0 - (1.0 - self.y0) * (1.0 - self.eta).powi(n)
    }

    fn e(&self, n: i32) -> f64 {
        (0.5 * self.y0 + self.e_d * (self.y(n) - self.y0)) / self.y(n)
    }

    fn gains(&self, k: f64) -> (f64, f64) {
        let mut p = (-k).exp();
        let (mut q, mut eq) = (0.0, 0.0);
        for n in 0..=20 {
            if n > 0 {
                p *= k / n as f64;
            }
            q += p * self.y(n);
            eq += p * self.y(n) * self.e(n);
        }
        (q, eq)
    }
}

// The closed form drops the Y0 * (1 - e^(-eta mu)) cross term, a relative
// error of order Y0.
#[test]
fn closed_form_gains_match_the_mixture() {
    for km in [0.0, 10.0, 50.0, 100.0] {
        let p = LinkParams::paper_cal().with_length(km);
        let est = channel_estimate(&p).unwrap();
        let m = Mixture { eta: est.eta, y0: p.dark_count, e_d: p.misalignment };
        let (q, eq) = m.gains(p.mu);
        assert!((est.q_mu / q - 1.0).abs() < 1e-5, "{km} km: {} vs {q}", est.q_mu);
        assert!((est.e_mu / (eq / q) - 1.0).abs() < 1e-5);
        assert!(est.q1 <= m.y(1) * p.mu * (-p.mu).exp() * (1.0 + 1e-12));
        assert!(est.e1 >= m.e(1) * (1.0 - 1e-12));
    }
}

#[test]
fn calibrated_rate_at_fifty_km_near_reference() {
    let r = secure_key_rate(&LinkParams::paper_cal().with_length(50.0)).unwrap() / 1e3;
    assert!((72.16 / 3.0..=72.16 * 3.0).contains(&r), "{r} kbps");
}

#[test]
fn rate_falls_with_length_at_the_fiber_slope() {
    let p = LinkParams::paper_cal();
    let pts: Vec<(f64, f64)> =
        (1..=10).map(|i| i as f64 * 10.0).map(|l| (l, secure_key_rate(&p.with_length(l)).unwrap())).collect();
    assert!(pts.windows(2).all(|w| w[1].1 < w[0].1));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1.log10()).sum::<f64>() / n;
    let slope = pts.iter().map(|q| (q.0 - mx) * (q.1.log10() - my)).sum::<f64>()
        / pts.iter().map(|q| (q.0 - mx).powi(2)).sum::<f64>();
    let expected = -p.attenuation_db_per_km / 10.0;
    assert!((slope / expected - 1.0).abs() < 0.15, "slope {slope} decades/km vs {expected}");
}

#[test]
fn finite_key_factor_default() {
    assert!((finite_key_factor(&LinkParams::paper_cal()) - 0.959052).abs() < 5e-7);
}

#[test]
fn half_interception_gives_an_eighth() {
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let q = simulate_intercept_resend(1_000_000, 0.5, 0.0, &mut rng).unwrap().qber();
    assert!((q - 0.125).abs() < 0.005, "{q}");
    let est = channel_estimate(&LinkParams::paper_cal()).unwrap();
    assert!((intercept_resend_qber(&est, 0.0).unwrap() - est.e_mu).abs() < 1e-15);
    let full = intercept_resend_qber(&est, 1.0).unwrap();
    assert!((full - 0.25).abs() < 0.01, "{full}");
}

#[test]
fn high_error_clamps_to_zero() {
    let mut p = LinkParams::paper_cal();
    p.misalignment = 0.2;
    assert_eq!(secure_key_rate(&p).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn decoy_bounds_bracket_the_truth(
        log_eta in -4.0f64..-0.3,
        log_y0 in -7.0f64..-4.0,
        e_d in 0.0f64..0.06,
        w in prop_oneof![Just(0.0), 0.0f64..0.02],
        nu_gap in 0.02f64..0.3,
        mu_gap in 0.05f64..0.7,
    ) {
        let m = Mixture { eta: 10f64.powf(log_eta), y0: 10f64.powf(log_y0), e_d };
        let nu = w + nu_gap;
        let mu = nu + w + mu_gap;
        let ((q_mu, _), (q_nu, eq_nu), (q_w, eq_w)) = (m.gains(mu), m.gains(nu), m.gains(w));
        let b = decoy_bounds(&DecoyObservations { mu, nu, w, q_mu, q_nu, q_w, eq_nu, eq_w });
        let q1 = m.y(1) * mu * (-mu).exp();
        prop_assert!(b.q1 <= q1 * (1.0 + 1e-12), "Q1 bound {} above truth {}", b.q1, q1);
        prop_assert!(b.e1 >= m.e(1) * (1.0 - 1e-12), "e1 bound {} below truth {}", b.e1, m.e(1));
        prop_assert!(b.y0 <= m.y0 * (1.0 + 1e-9));
    }

    #[test]
    fn rate_monotone_in_length_and_error(l in 0.0f64..150.0, dl in 0.5f64..20.0, e in 0.0f64..0.04, de in 0.001f64..0.02) {
        let mut p = LinkParams::paper_cal().with_length(l);
        p.misalignment = e;
        let r = secure_key_rate(&p).unwrap();
        prop_assert!(r >= 0.0);
        let farther = secure_key_rate(&p.with_length(l + dl)).unwrap();
        prop_assert!(farther <= r);
        let mut noisier = p;
        noisier.misalignment = e + de;
        prop_assert!(secure_key_rate(&noisier).unwrap() <= r);
    }

    #[test]
    fn entropy_is_symmetric_and_bounded(x in 0.0f64..=1.0) {
        let h = binary_entropy(x);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - x)).abs() < 1e-12);
    }

    #[test]
    fn drift_stays_within_cap(seed in any::<u64>(), start in 0.0f64..0.02) {
        let cfg = DriftConfig::default();
        let mut d = DriftState { offset: start.min(cfg.cap), ..Default::default() };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for t in 0..2000 {
            d = step_drift(&d, &cfg, t as f64 * 37.0, 1.0, &mut rng);
            prop_assert!((0.0..=cfg.cap).contains(&d.offset));
        }
    }
}
