//! Statistical and exhaustive checks that are too slow for unit tests.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qkdauth::crypto::sig::sign_with_budget;
use qkdauth::crypto::{gen_nonce, sig_keygen, sig_sign, sig_verify_bytes, PublicKey, SigParams};

/// Per-attempt acceptance of the z and r0 norm checks for uniform masking,
/// ignoring the rare hint-count rejections.
fn analytic_accept(p: &SigParams) -> f64 {
    let frac = |g: i64| (2 * (g - p.beta) - 1) as f64 / (2 * g - 1) as f64;
    frac(p.gamma1).powi((p.n * p.l) as i32) * frac(p.gamma2).powi((p.n * p.k) as i32)
}

#[test]
fn restart_rate_matches_analytic_probability() {
    for p in [SigParams::REFERENCE, SigParams::DESK] {
        let kp = sig_keygen(&p, &[3; 32]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let n = 10_000u32;
        let total: u64 = (0..n)
            .map(|i| sign_with_budget(kp.secret(), &i.to_le_bytes(), &mut rng, 512).unwrap().attempts as u64)
            .sum();
        let mean = total as f64 / n as f64;
        let a = analytic_accept(&p);
        let expected = 1.0 / a;
        let sigma = ((1.0 - a) / (a * a) / n as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sigma, "{:?}: mean attempts {mean}, analytic {expected} +- {sigma}", p.id);
    }
}

#[test]
fn distinct_seeds_give_distinct_public_keys() {
    let p = SigParams::DESK;
    let mut seen = HashSet::new();
    for i in 0u32..10_000 {
        let mut seed = [0u8; 32];
        seed[..4].copy_from_slice(&i.to_le_bytes());
        assert!(seen.insert(sig_keygen(&p, &seed).unwrap().public().to_bytes()), "seed {i} collides");
    }
}

#[test]
fn million_nonces_without_repeats() {
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let mut seen = HashSet::with_capacity(1 << 20);
    for _ in 0..1_000_000 {
        assert!(seen.insert(gen_nonce(&mut rng).unwrap()));
    }
}

#[test]
fn every_single_bit_flip_rejects() {
    let p = SigParams::REFERENCE;
    let kp = sig_keygen(&p, &[5; 32]).unwrap();
    let msg: Vec<u8> = (0..64).map(|i| (i * 7 + 1) as u8).collect();
    let sig = sig_sign(kp.secret(), &msg, &mut ChaCha20Rng::seed_from_u64(5)).unwrap().to_bytes();
    let pk = kp.public().to_bytes();
    let key = PublicKey::from_bytes(&p, &pk).unwrap();
    assert!(sig_verify_bytes(&key, &msg, &sig));

    for bit in 0..msg.len() * 8 {
        let mut m = msg.clone();
        m[bit / 8] ^= 1 << (bit % 8);
        assert!(!sig_verify_bytes(&key, &m, &sig), "message bit {bit}");
    }
    for bit in 0..sig.len() * 8 {
        let mut s = sig.clone();
        s[bit / 8] ^= 1 << (bit % 8);
        assert!(!sig_verify_bytes(&key, &msg, &s), "signature bit {bit}");
    }
    for bit in 0..pk.len() * 8 {
        let mut k = pk.clone();
        k[bit / 8] ^= 1 << (bit % 8);
        if let Ok(k) = PublicKey::from_bytes(&p, &k) {
            assert!(!sig_verify_bytes(&k, &msg, &sig), "public key bit {bit}");
        }
    }
}

#[test]
fn signature_length_is_constant() {
    for p in [SigParams::REFERENCE, SigParams::DESK] {
        let kp = sig_keygen(&p, &[6; 32]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for i in 0..1000u32 {
            let m = vec![i as u8; (i % 97) as usize];
            assert_eq!(sig_sign(kp.secret(), &m, &mut rng).unwrap().to_bytes().len(), p.signature_len());
        }
    }
}
