//! Module-lattice signature in the Fiat-Shamir-with-aborts paradigm.
//!
//! The construction follows the Dilithium template: a uniform public matrix
//! expanded from a seed, short secrets `s1`, `s2`, a public `t = A*s1 + s2`
//! split into high bits (published) and low bits (kept), a masking vector
//! `y`, a sparse ternary challenge `c` derived from the high bits of `A*y`,
//! and hints that let the verifier recover those high bits from the
//! compressed `t`. SHAKE-128 expands the matrix; SHAKE-256 handles every
//! other derivation.

use std::fmt;

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake128, Shake256};

use super::pack::{pack_bits, unpack_bits};
use super::params::{bit_len, ParamsId, SigParams};
use super::ring::{centered, inf_norm, Poly, Ring};
use super::{CryptoError, EntropySource};

/// Restart budget used by [`sig_sign`].
pub const DEFAULT_MAX_RESTARTS: u32 = 512;

#[derive(Clone)]
pub struct PublicKey {
    params: SigParams,
    rho: [u8; 32],
    t1: Vec<Poly>,
    // Derived on construction.
    tr: [u8; 64],
    a_hat: Vec<Vec<Poly>>,
    t1_shifted_hat: Vec<Poly>,
}

#[derive(Clone)]
pub struct SecretKey {
    public: PublicKey,
    key: [u8; 32],
    s1: Vec<Poly>,
    s2: Vec<Poly>,
    t0: Vec<Poly>,
    s1_hat: Vec<Poly>,
    s2_hat: Vec<Poly>,
    t0_hat: Vec<Poly>,
}

#[derive(Clone)]
pub struct SigKeypair {
    secret: SecretKey,
}

#[derive(Clone, PartialEq, Eq)]
pub struct LatticeSignature {
    params: SigParams,
    c_tilde: [u8; 32],
    /// Centered coefficients in `(-gamma1, gamma1]`.
    z: Vec<Poly>,
    hint: Vec<Vec<bool>>,
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicKey")
            .field("params", &self.params.id)
            .field("rho", &hex8(&self.rho))
            .finish_non_exhaustive()
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey").field("public", &self.public).finish_non_exhaustive()
    }
}

impl fmt::Debug for SigKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SigKeypair").field(&self.secret.public).finish()
    }
}

impl fmt::Debug for LatticeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeSignature")
            .field("params", &self.params.id)
            .field("c_tilde", &hex8(&self.c_tilde))
            .finish_non_exhaustive()
    }
}

fn hex8(b: &[u8]) -> String {
    b.iter().take(8).map(|x| format!("{x:02x}")).collect::<String>() + ".."
}

impl PartialEq for PublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.rho == other.rho && self.t1 == other.t1
    }
}

impl Eq for PublicKey {}

impl PublicKey {
    fn from_parts(params: SigParams, rho: [u8; 32], t1: Vec<Poly>) -> Self {
        let ring = Ring::for_params(&params);
        let a_hat = expand_matrix(&params, &rho);
        let scale = 1i64 << params.d;
        let t1_shifted_hat = t1
            .iter()
            .map(|p| ring.to_ntt(&p.iter().map(|&c| c * scale % params.q).collect::<Vec<_>>()))
            .collect();
        let mut pk = PublicKey { params, rho, t1, tr: [0; 64], a_hat, t1_shifted_hat };
        shake256(&[&pk.to_bytes()], &mut pk.tr);
        pk
    }

    pub fn params(&self) -> &SigParams {
        &self.params
    }

    pub fn seed(&self) -> &[u8; 32] {
        &self.rho
    }

    /// High bits of t, coefficients in `[0, 2^t1_bits)`.
    pub fn t1(&self) -> &[Poly] {
        &self.t1
    }

    /// The public matrix in coefficient form, `k` rows of `l` polynomials.
    pub fn matrix(&self) -> Vec<Vec<Poly>> {
        let ring = Ring::for_params(&self.params);
        self.a_hat.iter().map(|row| row.iter().map(|p| ring.from_ntt(p)).collect()).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.params.public_key_len());
        out.extend_from_slice(&self.rho);
        for p in &self.t1 {
            pack_bits(p.iter().map(|&c| c as u32), self.params.t1_bits(), &mut out);
        }
        out
    }

    pub fn from_bytes(params: &SigParams, bytes: &[u8]) -> Result<Self, CryptoError> {
        params.validate()?;
        if bytes.len() != params.public_key_len() {
            return Err(CryptoError::Malformed("public key length"));
        }
        let rho: [u8; 32] = bytes[..32].try_into().unwrap();
        let max = (params.q - 1) >> params.d;
        let chunk = params.poly_bytes(params.t1_bits());
        let mut t1 = Vec::with_capacity(params.k);
        for i in 0..params.k {
            let vals = unpack_bits(&bytes[32 + i * chunk..32 + (i + 1) * chunk], params.t1_bits(), params.n);
            if vals.iter().any(|&v| v as i64 > max) {
                return Err(CryptoError::Malformed("public key coefficient"));
            }
            t1.push(vals.into_iter().map(i64::from).collect());
        }
        Ok(PublicKey::from_parts(*params, rho, t1))
    }
}

impl SecretKey {
    pub fn params(&self) -> &SigParams {
        &self.public.params
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.public
    }

    /// Secret vector s1 with centered coefficients in `[-eta, eta]`.
    pub fn s1(&self) -> Vec<Poly> {
        center_all(&self.s1, self.params().q)
    }

    /// Secret vector s2 with centered coefficients in `[-eta, eta]`.
    pub fn s2(&self) -> Vec<Poly> {
        center_all(&self.s2, self.params().q)
    }

    /// Low bits of t, centered in `(-2^(d-1), 2^(d-1)]`.
    pub fn t0(&self) -> Vec<Poly> {
        center_all(&self.t0, self.params().q)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = self.params();
        let mut out = self.public.to_bytes();
        out.extend_from_slice(&self.key);
        out.extend_from_slice(&self.public.tr);
        for poly in self.s1().iter().chain(self.s2().iter()) {
            pack_bits(poly.iter().map(|&c| (p.eta - c) as u32), p.eta_bits(), &mut out);
        }
        let half = 1i64 << (p.d - 1);
        for poly in self.t0() {
            pack_bits(poly.iter().map(|&c| (half - c) as u32), p.d, &mut out);
        }
        out
    }

    pub fn from_bytes(params: &SigParams, bytes: &[u8]) -> Result<Self, CryptoError> {
        params.validate()?;
        if bytes.len() != params.secret_key_len() {
            return Err(CryptoError::Malformed("secret key length"));
        }
        let pk_len = params.public_key_len();
        let public = PublicKey::from_bytes(params, &bytes[..pk_len])?;
        let mut off = pk_len;
        let key: [u8; 32] = bytes[off..off + 32].try_into().unwrap();
        off += 32;
        if bytes[off..off + 64] != public.tr {
            return Err(CryptoError::Malformed("secret key public-key hash"));
        }
        off += 64;
        let q = params.q;
        let eta_chunk = params.poly_bytes(params.eta_bits());
        let read_eta = |count: usize, off: &mut usize| -> Result<Vec<Poly>, CryptoError> {
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                let vals = unpack_bits(&bytes[*off..*off + eta_chunk], params.eta_bits(), params.n);
                *off += eta_chunk;
                if vals.iter().any(|&x| x as i64 > 2 * params.eta) {
                    return Err(CryptoError::Malformed("secret coefficient"));
                }
                v.push(vals.into_iter().map(|x| (params.eta - x as i64).rem_euclid(q)).collect());
            }
            Ok(v)
        };
        let s1 = read_eta(params.l, &mut off)?;
        let s2 = read_eta(params.k, &mut off)?;
        let t0_chunk = params.poly_bytes(params.d);
        let half = 1i64 << (params.d - 1);
        let mut t0 = Vec::with_capacity(params.k);
        for _ in 0..params.k {
            let vals = unpack_bits(&bytes[off..off + t0_chunk], params.d, params.n);
            off += t0_chunk;
            t0.push(vals.into_iter().map(|x| (half - x as i64).rem_euclid(q)).collect());
        }
        Ok(SecretKey::from_parts(public, key, s1, s2, t0))
    }

    fn from_parts(public: PublicKey, key: [u8; 32], s1: Vec<Poly>, s2: Vec<Poly>, t0: Vec<Poly>) -> Self {
        let ring = Ring::for_params(&public.params);
        let hat = |v: &[Poly]| v.iter().map(|p| ring.to_ntt(p)).collect::<Vec<_>>();
        let (s1_hat, s2_hat, t0_hat) = (hat(&s1), hat(&s2), hat(&t0));
        SecretKey { public, key, s1, s2, t0, s1_hat, s2_hat, t0_hat }
    }
}

impl SigKeypair {
    pub fn public(&self) -> &PublicKey {
        &self.secret.public
    }

    pub fn secret(&self) -> &SecretKey {
        &self.secret
    }

    pub fn params(&self) -> &SigParams {
        &self.secret.public.params
    }

    pub fn from_secret(secret: SecretKey) -> Self {
        SigKeypair { secret }
    }
}

impl LatticeSignature {
    pub fn params(&self) -> &SigParams {
        &self.params
    }

    pub fn challenge_hash(&self) -> &[u8; 32] {
        &self.c_tilde
    }

    /// Response vector with centered coefficients.
    pub fn z(&self) -> &[Poly] {
        &self.z
    }

    pub fn hint_count(&self) -> usize {
        self.hint.iter().map(|h| h.iter().filter(|&&b| b).count()).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::with_capacity(p.signature_len());
        out.extend_from_slice(&self.c_tilde);
        for poly in &self.z {
            pack_bits(poly.iter().map(|&c| (p.gamma1 - c) as u32), p.z_bits(), &mut out);
        }
        let mut hints = vec![0u8; p.omega + p.k];
        let mut idx = 0;
        for (i, h) in self.hint.iter().enumerate() {
            for (j, _) in h.iter().enumerate().filter(|(_, &b)| b) {
                hints[idx] = j as u8;
                idx += 1;
            }
            hints[p.omega + i] = idx as u8;
        }
        out.extend_from_slice(&hints);
        out
    }

    /// Strict decoding: every accepted byte string has exactly one meaning.
    pub fn from_bytes(params: &SigParams, bytes: &[u8]) -> Result<Self, CryptoError> {
        params.validate()?;
        if bytes.len() != params.signature_len() {
            return Err(CryptoError::Malformed("signature length"));
        }
        let c_tilde: [u8; 32] = bytes[..32].try_into().unwrap();
        let chunk = params.poly_bytes(params.z_bits());
        let mut off = 32;
        let mut z = Vec::with_capacity(params.l);
        for _ in 0..params.l {
            let vals = unpack_bits(&bytes[off..off + chunk], params.z_bits(), params.n);
            off += chunk;
            z.push(vals.into_iter().map(|v| params.gamma1 - v as i64).collect());
        }
        let hb = &bytes[off..];
        let omega = params.omega;
        let mut hint = vec![vec![false; params.n]; params.k];
        let mut idx = 0usize;
        for (i, h) in hint.iter_mut().enumerate() {
            let end = hb[omega + i] as usize;
            if end < idx || end > omega {
                return Err(CryptoError::Malformed("hint counts"));
            }
            let first = idx;
            while idx < end {
                if idx > first && hb[idx - 1] >= hb[idx] {
                    return Err(CryptoError::Malformed("hint ordering"));
                }
                let pos = hb[idx] as usize;
                if pos >= params.n {
                    return Err(CryptoError::Malformed("hint position"));
                }
                h[pos] = true;
                idx += 1;
            }
        }
        if hb[idx..omega].iter().any(|&b| b != 0) {
            return Err(CryptoError::Malformed("hint padding"));
        }
        Ok(LatticeSignature { params: *params, c_tilde, z, hint })
    }
}

fn center_all(v: &[Poly], q: i64) -> Vec<Poly> {
    v.iter().map(|p| p.iter().map(|&c| centered(c, q)).collect()).collect()
}

fn shake256(parts: &[&[u8]], out: &mut [u8]) {
    let mut h = Shake256::default();
    for p in parts {
        h.update(p);
    }
    h.finalize_xof().read(out);
}

/// Uniform matrix in the transform domain.
fn expand_matrix(p: &SigParams, rho: &[u8; 32]) -> Vec<Vec<Poly>> {
    let qbits = bit_len(p.q as u64);
    let nbytes = qbits.div_ceil(8) as usize;
    let mask = (1u64 << qbits) - 1;
    (0..p.k)
        .map(|i| {
            (0..p.l)
                .map(|j| {
                    let mut h = Shake128::default();
                    h.update(rho);
                    h.update(&[j as u8, i as u8]);
                    let mut reader = h.finalize_xof();
                    let mut poly = Vec::with_capacity(p.n);
                    let mut buf = [0u8; 8];
                    while poly.len() < p.n {
                        reader.read(&mut buf[..nbytes]);
                        let v = u64::from_le_bytes(buf) & mask;
                        if (v as i64) < p.q {
                            poly.push(v as i64);
                        }
                    }
                    poly
                })
                .collect()
        })
        .collect()
}

/// Short polynomial with coefficients uniform in `[-eta, eta]`, reduced mod q.
fn sample_short(p: &SigParams, seed: &[u8; 64], nonce: u16) -> Poly {
    let m = (2 * p.eta + 1) as u32;
    let limit = 256 - 256 % m;
    let mut h = Shake256::default();
    h.update(seed);
    h.update(&nonce.to_le_bytes());
    let mut reader = h.finalize_xof();
    let mut poly = Vec::with_capacity(p.n);
    let mut b = [0u8; 1];
    while poly.len() < p.n {
        reader.read(&mut b);
        let v = b[0] as u32;
        if v < limit {
            poly.push((p.eta - (v % m) as i64).rem_euclid(p.q));
        }
    }
    poly
}

/// Masking polynomial with centered coefficients in `(-gamma1, gamma1]`.
fn sample_mask(p: &SigParams, seed: &[u8; 64], nonce: u16) -> Poly {
    let bits = p.z_bits();
    let mut buf = vec![0u8; p.poly_bytes(bits)];
    shake256(&[seed, &nonce.to_le_bytes()], &mut buf);
    unpack_bits(&buf, bits, p.n).into_iter().map(|v| p.gamma1 - v as i64).collect()
}

/// Sparse challenge with exactly `tau` coefficients in {-1, +1}.
fn sample_challenge(p: &SigParams, c_tilde: &[u8; 32]) -> Poly {
    let mut h = Shake256::default();
    h.update(c_tilde);
    let mut reader = h.finalize_xof();
    let mut sign_bytes = [0u8; 8];
    reader.read(&mut sign_bytes);
    let mut signs = u64::from_le_bytes(sign_bytes);
    let mut c = vec![0i64; p.n];
    let mut b = [0u8; 1];
    for i in p.n - p.tau..p.n {
        let j = loop {
            reader.read(&mut b);
            if (b[0] as usize) <= i {
                break b[0] as usize;
            }
        };
        c[i] = c[j];
        c[j] = if signs & 1 == 1 { -1 } else { 1 };
        signs >>= 1;
    }
    c
}

fn power2round(r: i64, d: u32, q: i64) -> (i64, i64) {
    let r = r.rem_euclid(q);
    let m = 1i64 << d;
    let mut r0 = r % m;
    if r0 > m / 2 {
        r0 -= m;
    }
    ((r - r0) >> d, r0)
}

fn decompose(r: i64, p: &SigParams) -> (i64, i64) {
    let r = r.rem_euclid(p.q);
    let m = 2 * p.gamma2;
    let mut r0 = r % m;
    if r0 > m / 2 {
        r0 -= m;
    }
    if r - r0 == p.q - 1 {
        (0, r0 - 1)
    } else {
        ((r - r0) / m, r0)
    }
}

fn high_bits(r: i64, p: &SigParams) -> i64 {
    decompose(r, p).0
}

fn use_hint(h: bool, r: i64, p: &SigParams) -> i64 {
    let m = (p.q - 1) / (2 * p.gamma2);
    let (r1, r0) = decompose(r, p);
    match (h, r0 > 0) {
        (false, _) => r1,
        (true, true) => (r1 + 1).rem_euclid(m),
        (true, false) => (r1 - 1).rem_euclid(m),
    }
}

fn encode_w1(w1: &[Poly], p: &SigParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(p.k * p.poly_bytes(p.w1_bits()));
    for poly in w1 {
        pack_bits(poly.iter().map(|&c| c as u32), p.w1_bits(), &mut out);
    }
    out
}

/// `A * v` for `v` already in the transform domain; result in coefficient form.
fn mat_vec(ring: &Ring, a_hat: &[Vec<Poly>], v_hat: &[Poly]) -> Vec<Poly> {
    a_hat
        .iter()
        .map(|row| {
            let mut acc = ring.zero();
            for (a, v) in row.iter().zip(v_hat) {
                ring.pointwise_acc(&mut acc, a, v);
            }
            ring.inv_ntt(&mut acc);
            acc
        })
        .collect()
}

/// Deterministic key generation from a 32-byte seed.
pub fn sig_keygen(params: &SigParams, seed: &[u8; 32]) -> Result<SigKeypair, CryptoError> {
    params.validate()?;
    let mut expanded = [0u8; 128];
    shake256(&[seed, &[params.k as u8, params.l as u8, params.id as u8]], &mut expanded);
    let rho: [u8; 32] = expanded[..32].try_into().unwrap();
    let rho_short: [u8; 64] = expanded[32..96].try_into().unwrap();
    let key: [u8; 32] = expanded[96..].try_into().unwrap();

    let ring = Ring::for_params(params);
    let a_hat = expand_matrix(params, &rho);
    let s1: Vec<Poly> = (0..params.l).map(|r| sample_short(params, &rho_short, r as u16)).collect();
    let s2: Vec<Poly> =
        (0..params.k).map(|r| sample_short(params, &rho_short, (params.l + r) as u16)).collect();
    let s1_hat: Vec<Poly> = s1.iter().map(|p| ring.to_ntt(p)).collect();
    let t: Vec<Poly> = mat_vec(&ring, &a_hat, &s1_hat)
        .iter()
        .zip(&s2)
        .map(|(as1, s)| ring.add(as1, s))
        .collect();

    let mut t1 = Vec::with_capacity(params.k);
    let mut t0 = Vec::with_capacity(params.k);
    for poly in &t {
        let (hi, lo): (Vec<i64>, Vec<i64>) =
            poly.iter().map(|&c| power2round(c, params.d, params.q)).unzip();
        t1.push(hi);
        t0.push(lo.into_iter().map(|c| c.rem_euclid(params.q)).collect());
    }
    let public = PublicKey::from_parts(*params, rho, t1);
    Ok(SigKeypair { secret: SecretKey::from_parts(public, key, s1, s2, t0) })
}

/// Outcome of a signing call, with the number of attempts the rejection loop took.
#[derive(Debug, Clone)]
pub struct SignOutcome {
    pub signature: LatticeSignature,
    pub attempts: u32,
}

/// Signs with the default restart budget.
pub fn sig_sign(
    sk: &SecretKey,
    message: &[u8],
    rng: &mut (impl EntropySource + ?Sized),
) -> Result<LatticeSignature, CryptoError> {
    sign_with_budget(sk, message, rng, DEFAULT_MAX_RESTARTS).map(|o| o.signature)
}

pub fn sign_with_budget(
    sk: &SecretKey,
    message: &[u8],
    rng: &mut (impl EntropySource + ?Sized),
    max_restarts: u32,
) -> Result<SignOutcome, CryptoError> {
    let p = sk.public.params;
    let ring = Ring::for_params(&p);
    let mut mu = [0u8; 64];
    shake256(&[&sk.public.tr, message], &mut mu);
    let mut rnd = [0u8; 32];
    rng.try_fill(&mut rnd)?;
    let mut rho_mask = [0u8; 64];
    shake256(&[&sk.key, &rnd, &mu], &mut rho_mask);

    let mut kappa: u16 = 0;
    for attempt in 1..=max_restarts + 1 {
        let y: Vec<Poly> = (0..p.l).map(|r| sample_mask(&p, &rho_mask, kappa + r as u16)).collect();
        kappa += p.l as u16;
        let y_hat: Vec<Poly> = y.iter().map(|poly| ring.to_ntt(&ring.reduce(poly))).collect();
        let w = mat_vec(&ring, &sk.public.a_hat, &y_hat);
        let w1: Vec<Poly> = w.iter().map(|poly| poly.iter().map(|&c| high_bits(c, &p)).collect()).collect();

        let mut c_tilde = [0u8; 32];
        shake256(&[&mu, &encode_w1(&w1, &p)], &mut c_tilde);
        let c_hat = ring.to_ntt(&ring.reduce(&sample_challenge(&p, &c_tilde)));

        let z: Vec<Poly> = y
            .iter()
            .zip(&sk.s1_hat)
            .map(|(yp, s)| {
                let cs1 = ring.from_ntt(&ring.pointwise(&c_hat, s));
                yp.iter().zip(cs1).map(|(&a, b)| a + centered(b, p.q)).collect()
            })
            .collect();
        if z.iter().flatten().any(|c| c.abs() >= p.gamma1 - p.beta) {
            continue;
        }

        let w_minus_cs2: Vec<Poly> = w
            .iter()
            .zip(&sk.s2_hat)
            .map(|(wp, s)| ring.sub(wp, &ring.from_ntt(&ring.pointwise(&c_hat, s))))
            .collect();
        let r0_too_big = w_minus_cs2
            .iter()
            .flatten()
            .any(|&c| decompose(c, &p).1.abs() >= p.gamma2 - p.beta);
        if r0_too_big {
            continue;
        }

        let ct0: Vec<Poly> = sk.t0_hat.iter().map(|t| ring.from_ntt(&ring.pointwise(&c_hat, t))).collect();
        if inf_norm(&ct0, p.q) >= p.gamma2 {
            continue;
        }
        // hint = HighBits(w - cs2 + ct0) != HighBits(w - cs2)
        let hint: Vec<Vec<bool>> = w_minus_cs2
            .iter()
            .zip(&ct0)
            .map(|(r, ct)| {
                r.iter()
                    .zip(ct)
                    .map(|(&rc, &tc)| high_bits(rc + tc, &p) != high_bits(rc, &p))
                    .collect()
            })
            .collect();
        let hint_count: usize = hint.iter().map(|h| h.iter().filter(|&&b| b).count()).sum();
        if hint_count > p.omega {
            continue;
        }
        return Ok(SignOutcome { signature: LatticeSignature { params: p, c_tilde, z, hint }, attempts: attempt });
    }
    Err(CryptoError::AbortLimitExceeded(max_restarts))
}

/// Total decision function: malformed or mismatched inputs are rejected.
pub fn sig_verify(pk: &PublicKey, message: &[u8], sig: &LatticeSignature) -> bool {
    let p = pk.params;
    if sig.params != p || sig.z.len() != p.l || sig.hint.len() != p.k {
        return false;
    }
    if sig.z.iter().any(|poly| poly.len() != p.n) || sig.hint.iter().any(|h| h.len() != p.n) {
        return false;
    }
    if sig.z.iter().flatten().any(|c| c.abs() >= p.gamma1 - p.beta) {
        return false;
    }
    if sig.hint_count() > p.omega {
        return false;
    }
    let ring = Ring::for_params(&p);
    let mut mu = [0u8; 64];
    shake256(&[&pk.tr, message], &mut mu);
    let c_hat = ring.to_ntt(&ring.reduce(&sample_challenge(&p, &sig.c_tilde)));
    let z_hat: Vec<Poly> = sig.z.iter().map(|poly| ring.to_ntt(&ring.reduce(poly))).collect();
    let az = mat_vec(&ring, &pk.a_hat, &z_hat);
    let w1: Vec<Poly> = az
        .iter()
        .zip(&pk.t1_shifted_hat)
        .zip(&sig.hint)
        .map(|((azp, t1), h)| {
            let ct1 = ring.from_ntt(&ring.pointwise(&c_hat, t1));
            ring.sub(azp, &ct1).iter().zip(h).map(|(&r, &hb)| use_hint(hb, r, &p)).collect()
        })
        .collect();
    let mut c_check = [0u8; 32];
    shake256(&[&mu, &encode_w1(&w1, &p)], &mut c_check);
    c_check == sig.c_tilde
}

/// Decodes and verifies a signature given as raw bytes.
pub fn sig_verify_bytes(pk: &PublicKey, message: &[u8], sig: &[u8]) -> bool {
    match LatticeSignature::from_bytes(&pk.params, sig) {
        Ok(s) => sig_verify(pk, message, &s),
        Err(_) => false,
    }
}

#[allow(dead_code)]
pub(crate) fn params_of(id: ParamsId) -> SigParams {
    id.params()
}
