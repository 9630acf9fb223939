use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qkdauth::crypto::ring::Ring;
use qkdauth::crypto::sm3::Sm3;
use qkdauth::crypto::{
    digest, mac_tag, mac_verify, sig_keygen, sig_sign, sig_verify, sig_verify_bytes, ItsMacTag, LatticeSignature,
    PresharedKeyPool, PublicKey, SigParams,
};

fn message(n: usize) -> Vec<u8> {
    (0..n).map(|i| ((i * 31 + n * 7) % 256) as u8).collect()
}

// Expected digests from OpenSSL's SM3.
const SM3_VECTORS: &[(usize, &str)] = &[
    (0, "1ab21d8355cfa17f8e61194831e81a8f22bec8c728fefb747ed035eb5082aa2b"),
    (1, "e16b16a9a43625b8513f74bea54ff8e3166ccd74e4d62e2bcab0b96ffeb6f194"),
    (3, "84317bc055f4f4bccdc1016bcde050afefc869bc2f63c31f6ca86db6b1559294"),
    (55, "4d7a5a31e075bad466b507f20b2ee7d99b10ff053275858f1bee5793316c3d01"),
    (56, "3a5ac2415773c66a9329a8e9091daebbc848c035da0afc5272db79147ae23696"),
    (57, "e8f0c6d40889804aa6caab99590f4fb5fd0f5e6257bd5475f5ff3469c78cefef"),
    (63, "63c75ca6812b0b67abe63eee76a32f2873dc24e96b942d89a03499a668618d8b"),
    (64, "34ea1d47b10fb7aa3969cd0adf6703d7a3d01067853ed283740554b7eae22df8"),
    (65, "eb7888207016973911a7492749e9813ef691c3346b25964e306b430e958a11c8"),
    (119, "b45e23651e0b508e549674ba870f62eebe9dc829e4cb4746c90ee64b4d75f06d"),
    (120, "23756a908312a2123c01ceb2670d1b10d74969409debbbd8865bfb04e47dd0f9"),
    (128, "53546f77bedeab494288c50af2d5d71ea56ebedaa201d3af6a130468c40b09fe"),
    (200, "4bb9add0df7c19e16b57ce66f05b377b6acf44d0a3db273976bd42fcae73a786"),
    (1000, "e8685d62cd1ff69d8557140f46d6d62e15f066fe475b827387a5ab06b6868c07"),
    (4096, "1f6deb877fa2b3e294c8bb90ddaffdc49a83078bacf8b7816e04c4c7e73dd065"),
];

#[test]
fn sm3_matches_openssl_at_padding_boundaries() {
    for &(n, hex) in SM3_VECTORS {
        assert_eq!(digest(&message(n)).to_hex(), hex, "length {n}");
    }
}

#[test]
fn sm3_standard_vectors() {
    assert_eq!(digest(b"abc").to_hex(), "66c7f0f462eeedd9d1f2d46bdc10e4e24167c4875cf2f7a2297da02b8f4ba8e0");
    assert_eq!(
        digest(&b"abcd".repeat(16)).to_hex(),
        "debe9ff92275b8a138604889c18e5a4d6fdb70e5387e5765293dcba39c0c5732"
    );
}

fn schoolbook(a: &[i64], b: &[i64], q: i64) -> Vec<i64> {
    let n = a.len();
    let mut out = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            let p = a[i] as i128 * b[j] as i128;
            if i + j < n {
                out[i + j] += p;
            } else {
                out[i + j - n] -= p;
            }
        }
    }
    out.into_iter().map(|c| c.rem_euclid(q as i128) as i64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sm3_streaming_equals_one_shot(data in prop::collection::vec(any::<u8>(), 0..600), cuts in prop::collection::vec(0usize..600, 0..6)) {
        let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c.min(data.len())).collect();
        cuts.sort();
        let mut h = Sm3::new();
        let mut prev = 0;
        for c in cuts {
            h.update(&data[prev..c]);
            prev = c;
        }
        h.update(&data[prev..]);
        prop_assert_eq!(h.finalize(), digest(&data));
    }

    #[test]
    fn ntt_product_is_negacyclic(seed in any::<u64>(), n_log in 3u32..9) {
        let n = 1usize << n_log;
        let q = SigParams::REFERENCE.q;
        let ring = Ring::new(n, q);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(0..q)).collect();
        let b: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
        prop_assert_eq!(ring.mul(&a, &b), schoolbook(&a, &b, q));
    }

    #[test]
    fn ntt_round_trips(seed in any::<u64>()) {
        let ring = Ring::new(256, SigParams::REFERENCE.q);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a: Vec<i64> = (0..256).map(|_| rng.random_range(0..ring.q())).collect();
        prop_assert_eq!(ring.from_ntt(&ring.to_ntt(&a)), a);
    }

    #[test]
    fn desk_signatures_round_trip_and_bind(seed in any::<[u8; 32]>(), msg in prop::collection::vec(any::<u8>(), 0..300), flip in any::<usize>()) {
        let p = SigParams::DESK;
        let kp = sig_keygen(&p, &seed).unwrap();
        let mut rng = ChaCha20Rng::from_seed(seed);
        let sig = sig_sign(kp.secret(), &msg, &mut rng).unwrap();
        prop_assert!(sig_verify(kp.public(), &msg, &sig));

        let bytes = sig.to_bytes();
        prop_assert_eq!(bytes.len(), p.signature_len());
        prop_assert_eq!(&LatticeSignature::from_bytes(&p, &bytes).unwrap(), &sig);
        let pk = PublicKey::from_bytes(&p, &kp.public().to_bytes()).unwrap();
        prop_assert!(sig_verify_bytes(&pk, &msg, &bytes));

        let mut bad = bytes.clone();
        let at = flip % bad.len();
        bad[at] ^= 1 << (flip % 8);
        prop_assert!(!sig_verify_bytes(&pk, &msg, &bad));
        let mut m2 = msg.clone();
        m2.push(0);
        prop_assert!(!sig_verify(kp.public(), &m2, &sig));
    }

    #[test]
    fn mac_accepts_honest_and_rejects_changes(key in prop::collection::vec(any::<u8>(), 256..512), msgs in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..100), 1..8), tamper in any::<usize>()) {
        let mut alice = PresharedKeyPool::from_bytes("A", "B", &key);
        let mut bob = alice.clone();
        let target = tamper % msgs.len();
        for (i, m) in msgs.iter().enumerate() {
            let expected_cost = if i == 0 { 511 } else { 128 };
            let before = alice.remaining();
            let tag = mac_tag(&mut alice, m).unwrap();
            prop_assert_eq!(before - alice.remaining(), expected_cost);
            let mut received = m.clone();
            if i == target {
                received.push(1);
            }
            prop_assert_eq!(mac_verify(&mut bob, &received, &tag).unwrap(), i != target);
            prop_assert_eq!(alice.remaining(), bob.remaining());
            let decoded = ItsMacTag::from_bytes(&tag.to_bytes()).unwrap();
            prop_assert_eq!(decoded, tag);
        }
    }
}

#[test]
fn keygen_is_deterministic_and_seed_sensitive() {
    for p in [SigParams::REFERENCE, SigParams::DESK] {
        let a = sig_keygen(&p, &[9; 32]).unwrap();
        let b = sig_keygen(&p, &[9; 32]).unwrap();
        let c = sig_keygen(&p, &[8; 32]).unwrap();
        assert_eq!(a.public().to_bytes(), b.public().to_bytes());
        assert_ne!(a.public().to_bytes(), c.public().to_bytes());
        assert_eq!(a.public().to_bytes().len(), p.public_key_len());
    }
}

#[test]
fn signature_from_other_key_rejected() {
    let p = SigParams::REFERENCE;
    let a = sig_keygen(&p, &[1; 32]).unwrap();
    let b = sig_keygen(&p, &[2; 32]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let sig = sig_sign(a.secret(), b"hello", &mut rng).unwrap();
    assert!(sig_verify(a.public(), b"hello", &sig));
    assert!(!sig_verify(b.public(), b"hello", &sig));
}
