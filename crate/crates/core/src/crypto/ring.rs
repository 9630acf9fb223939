//! Arithmetic in R_q = Z_q[X]/(X^n + 1) with a negacyclic number-theoretic
//! transform.
//!
//! Coefficients are kept as `i64` in canonical form `[0, q)` unless a function
//! says otherwise. Moduli are below 2^31, so products of two reduced values fit
//! comfortably in an `i64`.

use std::sync::{Arc, Mutex, OnceLock};

use super::params::SigParams;

pub type Poly = Vec<i64>;

#[derive(Debug, Clone)]
pub struct Ring {
    n: usize,
    q: i64,
    /// Powers of a primitive 2n-th root of unity in bit-reversed order.
    zetas: Vec<i64>,
    n_inv: i64,
    /// floor(2^64 / q), for Barrett reduction of products.
    barrett: u128,
}

impl Ring {
    /// Builds the transform tables for `(n, q)`. Requires `q` prime with
    /// `q ≡ 1 (mod 2n)` and `n` a power of two; `SigParams::validate` checks both.
    pub fn new(n: usize, q: i64) -> Self {
        let root = primitive_root_of_unity(2 * n as u64, q);
        let log_n = n.trailing_zeros();
        let zetas = (0..n)
            .map(|i| pow_mod(root, bit_reverse(i, log_n) as u64, q))
            .collect();
        Ring { n, q, zetas, n_inv: pow_mod(n as i64, (q - 2) as u64, q), barrett: (1u128 << 64) / q as u128 }
    }

    /// Shared tables for a parameter set, built once per `(n, q)`.
    pub fn for_params(p: &SigParams) -> Arc<Ring> {
        static CACHE: OnceLock<Mutex<Vec<Arc<Ring>>>> = OnceLock::new();
        let mut cache = CACHE.get_or_init(|| Mutex::new(Vec::new())).lock().unwrap_or_else(|e| e.into_inner());
        if let Some(r) = cache.iter().find(|r| r.n == p.n && r.q == p.q) {
            return Arc::clone(r);
        }
        let r = Arc::new(Ring::new(p.n, p.q));
        cache.push(Arc::clone(&r));
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `a * b mod q` for `a, b` in `[0, q)`.
    #[inline(always)]
    pub fn mul_mod(&self, a: i64, b: i64) -> i64 {
        let x = (a * b) as u64;
        let t = ((x as u128 * self.barrett) >> 64) as u64;
        let r = (x - t * self.q as u64) as i64;
        if r >= self.q {
            r - self.q
        } else {
            r
        }
    }

    pub fn zero(&self) -> Poly {
        vec![0; self.n]
    }

    /// In-place forward transform. Input in `[0, q)`, output in `[0, q)`.
    pub fn ntt(&self, a: &mut [i64]) {
        let q = self.q;
        let mut k = 0;
        let mut len = self.n / 2;
        while len >= 1 {
            for block in a.chunks_exact_mut(2 * len) {
                k += 1;
                let zeta = self.zetas[k];
                let (lo, hi) = block.split_at_mut(len);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = self.mul_mod(zeta, *y);
                    *y = sub_mod(*x, t, q);
                    *x = add_mod(*x, t, q);
                }
            }
            len >>= 1;
        }
    }

    /// In-place inverse transform including the 1/n scaling.
    pub fn inv_ntt(&self, a: &mut [i64]) {
        let q = self.q;
        let mut k = self.n;
        let mut len = 1;
        while len < self.n {
            for block in a.chunks_exact_mut(2 * len) {
                k -= 1;
                let zeta = q - self.zetas[k];
                let (lo, hi) = block.split_at_mut(len);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = *x;
                    *x = add_mod(t, *y, q);
                    *y = self.mul_mod(zeta, sub_mod(t, *y, q));
                }
            }
            len <<= 1;
        }
        for c in a.iter_mut() {
            *c = self.mul_mod(*c, self.n_inv);
        }
    }

    pub fn to_ntt(&self, a: &[i64]) -> Poly {
        let mut out = a.to_vec();
        self.ntt(&mut out);
        out
    }

    pub fn from_ntt(&self, a: &[i64]) -> Poly {
        let mut out = a.to_vec();
        self.inv_ntt(&mut out);
        out
    }

    pub fn pointwise(&self, a: &[i64], b: &[i64]) -> Poly {
        a.iter().zip(b).map(|(x, y)| self.mul_mod(*x, *y)).collect()
    }

    pub fn pointwise_acc(&self, acc: &mut [i64], a: &[i64], b: &[i64]) {
        for ((c, x), y) in acc.iter_mut().zip(a).zip(b) {
            *c = add_mod(*c, self.mul_mod(*x, *y), self.q);
        }
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Poly {
        a.iter().zip(b).map(|(x, y)| add_mod(*x, *y, self.q)).collect()
    }

    pub fn sub(&self, a: &[i64], b: &[i64]) -> Poly {
        a.iter().zip(b).map(|(x, y)| sub_mod(*x, *y, self.q)).collect()
    }

    /// Reduces an arbitrary signed polynomial into `[0, q)`.
    pub fn reduce(&self, a: &[i64]) -> Poly {
        a.iter().map(|c| c.rem_euclid(self.q)).collect()
    }

    /// Full product via the transform.
    pub fn mul(&self, a: &[i64], b: &[i64]) -> Poly {
        let fa = self.to_ntt(&self.reduce(a));
        let fb = self.to_ntt(&self.reduce(b));
        self.from_ntt(&self.pointwise(&fa, &fb))
    }
}

#[inline(always)]
fn add_mod(a: i64, b: i64, q: i64) -> i64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline(always)]
fn sub_mod(a: i64, b: i64, q: i64) -> i64 {
    let s = a - b;
    if s < 0 {
        s + q
    } else {
        s
    }
}

/// Centered representative of `a mod q` in `(-q/2, q/2]`.
#[inline]
pub fn centered(a: i64, q: i64) -> i64 {
    let r = a.rem_euclid(q);
    if r > q / 2 {
        r - q
    } else {
        r
    }
}

pub fn inf_norm(polys: &[Poly], q: i64) -> i64 {
    polys
        .iter()
        .flat_map(|p| p.iter())
        .map(|&c| centered(c, q).abs())
        .max()
        .unwrap_or(0)
}

pub(crate) fn pow_mod(base: i64, mut exp: u64, q: i64) -> i64 {
    let mut result = 1i64;
    let mut b = base.rem_euclid(q);
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % q;
        }
        b = b * b % q;
        exp >>= 1;
    }
    result
}

fn bit_reverse(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Smallest generator of Z_q^* raised to (q-1)/order.
fn primitive_root_of_unity(order: u64, q: i64) -> i64 {
    let phi = (q - 1) as u64;
    let factors = prime_factors(phi);
    let generator = (2..q)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, phi / f, q) != 1))
        .expect("a prime modulus has a generator");
    pow_mod(generator, phi / order, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schoolbook(a: &[i64], b: &[i64], q: i64) -> Vec<i64> {
        let n = a.len();
        let mut out = vec![0i64; n];
        for i in 0..n {
            for j in 0..n {
                let prod = a[i] * b[j] % q;
                if i + j < n {
                    out[i + j] = (out[i + j] + prod) % q;
                } else {
                    out[i + j - n] = (out[i + j - n] - prod).rem_euclid(q);
                }
            }
        }
        out
    }

    #[test]
    fn dilithium_root() {
        // 1753 is the customary 512th root for q = 8380417; ours must also
        // have exact order 512.
        let q = 8_380_417;
        let r = primitive_root_of_unity(512, q);
        assert_eq!(pow_mod(r, 512, q), 1);
        assert_eq!(pow_mod(r, 256, q), q - 1);
        assert_eq!(pow_mod(1753, 512, q), 1);
    }

    #[test]
    fn roundtrip_and_schoolbook() {
        for &(n, q) in &[(8usize, 17i64), (64, 8_380_417), (256, 8_380_417), (256, 7681)] {
            let ring = Ring::new(n, q);
            let a: Vec<i64> = (0..n as i64).map(|i| (i * i * 31 + 7) % q).collect();
            let b: Vec<i64> = (0..n as i64).map(|i| (i * 1009 + 3) % q).collect();
            assert_eq!(ring.from_ntt(&ring.to_ntt(&a)), a);
            assert_eq!(ring.mul(&a, &b), schoolbook(&a, &b, q), "n={n} q={q}");
        }
    }

    #[test]
    fn x_to_the_n_is_minus_one() {
        let ring = Ring::new(16, 97);
        let mut x = vec![0; 16];
        x[1] = 1;
        let mut x15 = vec![0; 16];
        x15[15] = 1;
        let prod = ring.mul(&x, &x15);
        let mut expect = vec![0; 16];
        expect[0] = 96;
        assert_eq!(prod, expect);
    }
}
