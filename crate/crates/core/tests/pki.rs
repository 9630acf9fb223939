use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qkdauth::crypto::{sig_keygen, ParamsId, SigParams};
use qkdauth::pki::{canonical_decode, canonical_encode, verify_certificate, CertFields, CertReject, Certificate, CertificateAuthority, Validity};

fn ca(seed: u8) -> CertificateAuthority {
    CertificateAuthority::new("CA", sig_keygen(&SigParams::DESK, &[seed; 32]).unwrap()).unwrap()
}

#[test]
fn issued_certificates_verify_inside_validity_only() {
    let mut ca = ca(1);
    let key = sig_keygen(&SigParams::REFERENCE, &[2; 32]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let cert = ca.issue_for("U1", key.public(), Validity::new(100, 200), &mut rng).unwrap();
    let store = ca.trust_store();
    assert_eq!(verify_certificate(&store, &cert, 150), Ok(()));
    assert_eq!(verify_certificate(&store, &cert, 50), Err(CertReject::NotYetValid));
    assert_eq!(verify_certificate(&store, &cert, 201), Err(CertReject::Expired));
    assert_eq!(cert.subject_public_key().unwrap().to_bytes(), key.public().to_bytes());

    let other = ca_named("Other", 3);
    assert_eq!(verify_certificate(&other.trust_store(), &cert, 150), Err(CertReject::UnknownIssuer));
}

fn ca_named(name: &str, seed: u8) -> CertificateAuthority {
    CertificateAuthority::new(name, sig_keygen(&SigParams::DESK, &[seed; 32]).unwrap()).unwrap()
}

#[test]
fn serials_increase() {
    let mut ca = ca(4);
    let key = sig_keygen(&SigParams::DESK, &[5; 32]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let s: Vec<u64> = (0..3)
        .map(|i| ca.issue_for(&format!("U{i}"), key.public(), Validity::new(0, 10), &mut rng).unwrap().serial())
        .collect();
    assert!(s.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn file_form_round_trips() {
    let mut ca = ca(6);
    let key = sig_keygen(&SigParams::DESK, &[7; 32]).unwrap();
    let cert = ca.issue_for("U9", key.public(), Validity::new(0, 10), &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
    let (id, back) = Certificate::from_file(&cert.to_file(ParamsId::Desk).unwrap()).unwrap();
    assert_eq!(id, ParamsId::Desk);
    assert_eq!(back, cert);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_encoding_round_trips(subject in "[A-Za-z0-9-]{1,32}", issuer in "[A-Za-z0-9]{1,16}", key in prop::collection::vec(any::<u8>(), 0..64), serial in any::<u64>(), nb in any::<u32>(), len in 1u32..u32::MAX) {
        let f = CertFields {
            subject,
            subject_params: ParamsId::Desk,
            subject_key: key,
            serial,
            validity: Validity::new(nb as u64, nb as u64 + len as u64),
            issuer,
        };
        let bytes = canonical_encode(&f).unwrap();
        prop_assert_eq!(canonical_decode(&bytes).unwrap(), f);
    }

    #[test]
    fn any_field_bit_flip_breaks_the_certificate(bit in any::<usize>()) {
        let mut ca = ca(8);
        let key = sig_keygen(&SigParams::DESK, &[9; 32]).unwrap();
        let cert = ca.issue_for("U1", key.public(), Validity::new(0, 1000), &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        let mut bytes = canonical_encode(&cert.fields).unwrap();
        let i = bit % (bytes.len() * 8);
        bytes[i / 8] ^= 1 << (i % 8);
        if let Ok(fields) = canonical_decode(&bytes) {
            let forged = Certificate { fields, signature: cert.signature.clone() };
            prop_assert!(verify_certificate(&ca.trust_store(), &forged, 500).is_err());
        }
    }
}

#[test]
fn each_field_mutation_is_rejected() {
    let mut ca = ca(10);
    let key = sig_keygen(&SigParams::DESK, &[11; 32]).unwrap();
    let other = sig_keygen(&SigParams::DESK, &[12; 32]).unwrap();
    let cert = ca.issue_for("U1", key.public(), Validity::new(0, 1000), &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
    let store = ca.trust_store();
    type Edit<'a> = (&'a str, Box<dyn Fn(&mut CertFields) + 'a>);
    let mutations: Vec<Edit> = vec![
        ("identity", Box::new(|f| f.subject = "U2".into())),
        ("key", Box::new(|f| f.subject_key = other.public().to_bytes())),
        ("serial", Box::new(|f| f.serial += 1)),
        ("window start", Box::new(|f| f.validity.not_before += 1)),
        ("window end", Box::new(|f| f.validity.not_after += 1)),
        ("issuer", Box::new(|f| f.issuer = "CA2".into())),
    ];
    for (name, m) in mutations {
        let mut forged = cert.clone();
        m(&mut forged.fields);
        let r = verify_certificate(&store, &forged, 500);
        assert!(matches!(r, Err(CertReject::BadSignature | CertReject::UnknownIssuer)), "{name}: {r:?}");
    }
}
