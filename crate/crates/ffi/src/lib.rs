//! C ABI over the qkdauth library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_generate` and released by the matching `*_free`. Every fallible call
//! returns a `QkdauthStatus`; the message for the last failure on the calling
//! thread is available from `qkdauth_last_error_message`. Output buffers are
//! caller-owned: pass the capacity, receive the length written. When the
//! buffer is too small, the required length is still written and the call
//! returns `QKDAUTH_BUFFER_TOO_SMALL`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::{ptr, slice};

use qkdauth::crypto::{
    digest, mac_tag, mac_verify, sig_keygen, sig_sign, sig_verify_bytes, ItsMacTag, ParamsId, PresharedKeyPool,
    PublicKey, SigKeypair,
};
use qkdauth::netsim::preshared_pairs_required;
use qkdauth::qkd::{secure_key_rate, LinkParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdauthStatus {
    QkdauthOk = 0,
    QkdauthNullPointer = 1,
    QkdauthInvalidArgument = 2,
    QkdauthCryptoError = 3,
    QkdauthPoolExhausted = 4,
    QkdauthBufferTooSmall = 5,
    QkdauthPanic = 6,
}

use QkdauthStatus::*;

/// Signature parameter sets.
pub const QKDAUTH_PARAMS_REFERENCE: u16 = 1;
pub const QKDAUTH_PARAMS_DESK: u16 = 2;
/// Encoded tag: 128-bit value, key offset, sequence number.
pub const QKDAUTH_MAC_TAG_LEN: usize = 32;

const _: () = assert!(QKDAUTH_MAC_TAG_LEN == ItsMacTag::ENCODED_LEN);
pub const QKDAUTH_DIGEST_LEN: usize = 32;

/// Opaque signing keypair.
pub struct QkdauthKeypair(SigKeypair);

/// Opaque pre-shared key pool for one direction of use.
pub struct QkdauthPool(PresharedKeyPool);

/// Link description for key-rate queries.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QkdauthLinkParams {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub pulse_rate_hz: f64,
    pub mu: f64,
    pub nu: f64,
    pub vacuum: f64,
    pub detector_efficiency: f64,
    pub dark_count: f64,
    pub misalignment: f64,
    pub sift_factor: f64,
    pub ec_efficiency: f64,
    pub block_size: f64,
    pub finite_key_epsilon: f64,
}

impl From<LinkParams> for QkdauthLinkParams {
    fn from(p: LinkParams) -> Self {
        QkdauthLinkParams {
            length_km: p.length_km,
            attenuation_db_per_km: p.attenuation_db_per_km,
            pulse_rate_hz: p.pulse_rate_hz,
            mu: p.mu,
            nu: p.nu,
            vacuum: p.vacuum,
            detector_efficiency: p.detector_efficiency,
            dark_count: p.dark_count,
            misalignment: p.misalignment,
            sift_factor: p.sift_factor,
            ec_efficiency: p.ec_efficiency,
            block_size: p.block_size,
            finite_key_epsilon: p.finite_key_epsilon,
        }
    }
}

impl From<QkdauthLinkParams> for LinkParams {
    fn from(p: QkdauthLinkParams) -> Self {
        LinkParams {
            length_km: p.length_km,
            attenuation_db_per_km: p.attenuation_db_per_km,
            pulse_rate_hz: p.pulse_rate_hz,
            mu: p.mu,
            nu: p.nu,
            vacuum: p.vacuum,
            detector_efficiency: p.detector_efficiency,
            dark_count: p.dark_count,
            misalignment: p.misalignment,
            sift_factor: p.sift_factor,
            ec_efficiency: p.ec_efficiency,
            block_size: p.block_size,
            finite_key_epsilon: p.finite_key_epsilon,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: QkdauthStatus, msg: impl Into<String>) -> QkdauthStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> QkdauthStatus) -> QkdauthStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QkdauthPanic, "internal panic"),
    }
}

unsafe fn bytes<'a>(p: *const u8, len: usize) -> Option<&'a [u8]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(p, len))
    }
}

unsafe fn emit(src: &[u8], out: *mut u8, cap: usize, written: *mut usize) -> QkdauthStatus {
    if written.is_null() {
        return fail(QkdauthNullPointer, "written is null");
    }
    *written = src.len();
    if src.len() > cap {
        return fail(QkdauthBufferTooSmall, format!("need {} bytes, have {cap}", src.len()));
    }
    if !src.is_empty() {
        if out.is_null() {
            return fail(QkdauthNullPointer, "output buffer is null");
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    QkdauthOk
}

fn params_id(id: u16) -> Option<ParamsId> {
    ParamsId::from_u16(id)
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `cap`. Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null when `cap` is 0.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if cap > 0 && !buf.is_null() {
            let n = e.len().min(cap - 1);
            ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// NUL-terminated crate version, static storage.
#[no_mangle]
pub extern "C" fn qkdauth_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// SM3 digest of `data` into `out[32]`.
///
/// # Safety
/// `data` must be valid for `len` bytes; `out` for 32 bytes.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_sm3(data: *const u8, len: usize, out: *mut u8) -> QkdauthStatus {
    guard(|| {
        let Some(d) = bytes(data, len) else { return fail(QkdauthNullPointer, "data is null") };
        if out.is_null() {
            return fail(QkdauthNullPointer, "out is null");
        }
        ptr::copy_nonoverlapping(digest(d).as_bytes().as_ptr(), out, 32);
        QkdauthOk
    })
}

/// Encoded sizes for a parameter set; 0 for an unknown set.
#[no_mangle]
pub extern "C" fn qkdauth_signature_len(params: u16) -> usize {
    params_id(params).map_or(0, |p| p.params().signature_len())
}

#[no_mangle]
pub extern "C" fn qkdauth_public_key_len(params: u16) -> usize {
    params_id(params).map_or(0, |p| p.params().public_key_len())
}

/// Deterministic keypair from a 32-byte seed.
///
/// # Safety
/// `seed` must be valid for 32 bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_keypair_generate(
    params: u16,
    seed: *const u8,
    out: *mut *mut QkdauthKeypair,
) -> QkdauthStatus {
    guard(|| {
        if seed.is_null() || out.is_null() {
            return fail(QkdauthNullPointer, "seed or out is null");
        }
        let Some(id) = params_id(params) else { return fail(QkdauthInvalidArgument, "unknown parameter set") };
        let s: [u8; 32] = slice::from_raw_parts(seed, 32).try_into().unwrap();
        match sig_keygen(&id.params(), &s) {
            Ok(kp) => {
                *out = Box::into_raw(Box::new(QkdauthKeypair(kp)));
                QkdauthOk
            }
            Err(e) => fail(QkdauthCryptoError, e.to_string()),
        }
    })
}

/// # Safety
/// `kp` must come from `qkdauth_keypair_generate` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_keypair_free(kp: *mut QkdauthKeypair) {
    if !kp.is_null() {
        drop(Box::from_raw(kp));
    }
}

/// Encoded public key.
///
/// # Safety
/// `kp` must be a live handle; `out` valid for `cap` bytes; `written` valid.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_keypair_public_key(
    kp: *const QkdauthKeypair,
    out: *mut u8,
    cap: usize,
    written: *mut usize,
) -> QkdauthStatus {
    guard(|| {
        let Some(kp) = kp.as_ref() else { return fail(QkdauthNullPointer, "keypair is null") };
        emit(&kp.0.public().to_bytes(), out, cap, written)
    })
}

/// Signs `msg`. The signing randomness is derived from `rng_seed`.
///
/// # Safety
/// `kp` must be a live handle; buffers must match their lengths.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_sign(
    kp: *const QkdauthKeypair,
    msg: *const u8,
    msg_len: usize,
    rng_seed: u64,
    out: *mut u8,
    cap: usize,
    written: *mut usize,
) -> QkdauthStatus {
    guard(|| {
        let Some(kp) = kp.as_ref() else { return fail(QkdauthNullPointer, "keypair is null") };
        let Some(m) = bytes(msg, msg_len) else { return fail(QkdauthNullPointer, "message is null") };
        let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
        match sig_sign(kp.0.secret(), m, &mut rng) {
            Ok(s) => emit(&s.to_bytes(), out, cap, written),
            Err(e) => fail(QkdauthCryptoError, e.to_string()),
        }
    })
}

/// Sets `*valid` to 1 if `sig` is a valid signature on `msg` under the
/// encoded public key, 0 otherwise. Malformed keys are an error; malformed
/// signatures just fail to verify.
///
/// # Safety
/// Buffers must match their lengths; `valid` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_verify(
    params: u16,
    pk: *const u8,
    pk_len: usize,
    msg: *const u8,
    msg_len: usize,
    sig: *const u8,
    sig_len: usize,
    valid: *mut i32,
) -> QkdauthStatus {
    guard(|| {
        if valid.is_null() {
            return fail(QkdauthNullPointer, "valid is null");
        }
        let (Some(pk), Some(m), Some(s)) = (bytes(pk, pk_len), bytes(msg, msg_len), bytes(sig, sig_len)) else {
            return fail(QkdauthNullPointer, "input buffer is null");
        };
        let Some(id) = params_id(params) else { return fail(QkdauthInvalidArgument, "unknown parameter set") };
        let key = match PublicKey::from_bytes(&id.params(), pk) {
            Ok(k) => k,
            Err(e) => return fail(QkdauthInvalidArgument, e.to_string()),
        };
        *valid = sig_verify_bytes(&key, m, s) as i32;
        QkdauthOk
    })
}

/// Pool over `len` bytes of shared key. Each peer keeps its own pool built
/// from the same bytes.
///
/// # Safety
/// `key` must be valid for `len` bytes; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_pool_new(key: *const u8, len: usize, out: *mut *mut QkdauthPool) -> QkdauthStatus {
    guard(|| {
        let Some(k) = bytes(key, len) else { return fail(QkdauthNullPointer, "key is null") };
        if out.is_null() {
            return fail(QkdauthNullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(QkdauthPool(PresharedKeyPool::from_bytes("a", "b", k))));
        QkdauthOk
    })
}

/// # Safety
/// `pool` must come from `qkdauth_pool_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_pool_free(pool: *mut QkdauthPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Unused key bits left in the pool.
///
/// # Safety
/// `pool` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_pool_remaining(pool: *const QkdauthPool) -> u64 {
    pool.as_ref().map_or(0, |p| p.0.remaining())
}

/// Tags `msg`, consuming pool bits; writes `QKDAUTH_MAC_TAG_LEN` bytes.
///
/// # Safety
/// `pool` must be a live handle; `out` valid for `QKDAUTH_MAC_TAG_LEN` bytes.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_mac_tag(
    pool: *mut QkdauthPool,
    msg: *const u8,
    msg_len: usize,
    out: *mut u8,
) -> QkdauthStatus {
    guard(|| {
        let Some(p) = pool.as_mut() else { return fail(QkdauthNullPointer, "pool is null") };
        let Some(m) = bytes(msg, msg_len) else { return fail(QkdauthNullPointer, "message is null") };
        if out.is_null() {
            return fail(QkdauthNullPointer, "out is null");
        }
        match mac_tag(&mut p.0, m) {
            Ok(t) => {
                ptr::copy_nonoverlapping(t.to_bytes().as_ptr(), out, QKDAUTH_MAC_TAG_LEN);
                QkdauthOk
            }
            Err(e @ qkdauth::crypto::CryptoError::PoolExhausted { .. }) => fail(QkdauthPoolExhausted, e.to_string()),
            Err(e) => fail(QkdauthCryptoError, e.to_string()),
        }
    })
}

/// Verifies a tag from the peer's pool copy, consuming the same bits.
///
/// # Safety
/// `pool` must be a live handle; `tag` valid for `QKDAUTH_MAC_TAG_LEN` bytes.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_mac_verify(
    pool: *mut QkdauthPool,
    msg: *const u8,
    msg_len: usize,
    tag: *const u8,
    valid: *mut i32,
) -> QkdauthStatus {
    guard(|| {
        let Some(p) = pool.as_mut() else { return fail(QkdauthNullPointer, "pool is null") };
        let Some(m) = bytes(msg, msg_len) else { return fail(QkdauthNullPointer, "message is null") };
        if tag.is_null() || valid.is_null() {
            return fail(QkdauthNullPointer, "tag or valid is null");
        }
        let t = match ItsMacTag::from_bytes(slice::from_raw_parts(tag, QKDAUTH_MAC_TAG_LEN)) {
            Ok(t) => t,
            Err(e) => return fail(QkdauthInvalidArgument, e.to_string()),
        };
        match mac_verify(&mut p.0, m, &t) {
            Ok(ok) => {
                *valid = ok as i32;
                QkdauthOk
            }
            Err(e @ qkdauth::crypto::CryptoError::PoolExhausted { .. }) => fail(QkdauthPoolExhausted, e.to_string()),
            Err(e) => fail(QkdauthCryptoError, e.to_string()),
        }
    })
}

/// Fills `out` with the bundled calibrated link at `length_km`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_link_params_default(length_km: f64, out: *mut QkdauthLinkParams) -> QkdauthStatus {
    guard(|| {
        if out.is_null() {
            return fail(QkdauthNullPointer, "out is null");
        }
        *out = LinkParams::paper_cal().with_length(length_km).into();
        QkdauthOk
    })
}

/// Secure key rate in bits per second.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qkdauth_secure_key_rate(p: *const QkdauthLinkParams, out: *mut f64) -> QkdauthStatus {
    guard(|| {
        let Some(p) = p.as_ref() else { return fail(QkdauthNullPointer, "params is null") };
        if out.is_null() {
            return fail(QkdauthNullPointer, "out is null");
        }
        match secure_key_rate(&LinkParams::from(*p)) {
            Ok(r) => {
                *out = r;
                QkdauthOk
            }
            Err(e) => fail(QkdauthInvalidArgument, e.to_string()),
        }
    })
}

/// Pools needed for pairwise pre-shared keys among `n` users.
#[no_mangle]
pub extern "C" fn qkdauth_preshared_pairs_required(n: u32) -> u64 {
    preshared_pairs_required(n)
}
