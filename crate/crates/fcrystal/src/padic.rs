//! Truncated Witt vectors `W_N(F_q)`, `q = p^d`, modelled as `(Z/p^N)[x]/(f)`
//! where `f` is a monic lift of an irreducible polynomial over `F_p`.
//!
//! Elements are fixed-size coordinate arrays; every operation goes through
//! the [`WittRing`] that owns the modulus and the Frobenius table.

use crate::error::{Error, Result};
use crate::fpoly;

/// Largest residue degree supported by the fixed-size element layout.
pub const MAX_D: usize = 4;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub fn vp_u64(mut x: u64, p: u64) -> u32 {
    assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Largest N such that p^N stays below 2^62, so that products fit in u128
/// with room for a handful of accumulated terms.
pub fn max_precision(p: u64) -> u32 {
    let mut n = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 62) {
        acc *= p as u128;
        n += 1;
    }
    n
}

/// Legendre's formula: v_p(j!).
pub fn vp_factorial(j: u64, p: u64) -> u64 {
    let mut s = 0;
    let mut q = p;
    while q <= j {
        s += j / q;
        q = q.saturating_mul(p);
        if q == u64::MAX {
            break;
        }
    }
    s
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct WittElem {
    c: [u64; MAX_D],
}

impl WittElem {
    pub fn coeffs(&self) -> &[u64; MAX_D] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c[i]
    }
}

#[derive(Clone, Debug)]
pub struct WittRing {
    p: u64,
    d: usize,
    n: u32,
    modulus: u64,
    pw: Vec<u64>,
    /// Non-leading coefficients of the monic modulus, as integers in [0, p).
    f: [u64; MAX_D],
    /// σ(x^k) for k < d.
    sig: [WittElem; MAX_D],
}

impl PartialEq for WittRing {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.d == o.d && self.n == o.n
    }
}

impl Eq for WittRing {}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl WittRing {
    pub fn new(p: u64, d: usize, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if d == 0 || d > MAX_D {
            return Err(Error::invalid(format!("residue degree {d} outside 1..={MAX_D}")));
        }
        if n == 0 {
            return Err(Error::invalid("precision must be positive"));
        }
        if n > max_precision(p) {
            return Err(Error::precision(format!("precision {n} exceeds the machine-word limit {} for p = {p}", max_precision(p))));
        }
        let mut pw = vec![1u64; n as usize + 1];
        for k in 1..=n as usize {
            pw[k] = pw[k - 1] * p;
        }
        let res = fpoly::first_irreducible(d, p);
        let mut f = [0u64; MAX_D];
        f[..d].copy_from_slice(&res[..d]);
        let mut ring = WittRing { p, d, n, modulus: pw[n as usize], pw, f, sig: [WittElem::default(); MAX_D] };
        ring.sig[0] = ring.one();
        if d > 1 {
            let s = ring.hensel_sigma();
            for k in 1..d {
                ring.sig[k] = ring.mul(&ring.sig[k - 1], &s);
            }
        }
        Ok(ring)
    }

    /// Lifts the residue Frobenius x ↦ x^p to the root of f congruent to x^p.
    fn hensel_sigma(&self) -> WittElem {
        let gen = self.gen();
        let mut s = self.pow(&gen, self.p);
        for _ in 0..128 {
            let fs = self.eval_modulus(&s);
            if self.is_zero(&fs) {
                return s;
            }
            let ds = self.eval_modulus_deriv(&s);
            let inv = self.inv_unit(&ds).expect("separable modulus");
            s = self.sub(&s, &self.mul(&fs, &inv));
        }
        panic!("Hensel iteration for σ did not converge");
    }

    fn eval_modulus(&self, s: &WittElem) -> WittElem {
        let mut acc = self.one();
        for i in (0..self.d).rev() {
            acc = self.mul(&acc, s);
            acc = self.add(&acc, &self.from_u64(self.f[i]));
        }
        acc
    }

    fn eval_modulus_deriv(&self, s: &WittElem) -> WittElem {
        let mut acc = self.from_u64(self.d as u64);
        for i in (1..self.d).rev() {
            acc = self.mul(&acc, s);
            acc = self.add(&acc, &self.from_u64(self.f[i] * i as u64));
        }
        acc
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn prec(&self) -> u32 {
        self.n
    }

    /// p^N.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Residue field size q = p^d.
    pub fn q(&self) -> u64 {
        self.p.pow(self.d as u32)
    }

    /// p^k as an integer, 0 once k ≥ N.
    pub fn pk(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.pw[k as usize]
        }
    }

    /// The residue modulus polynomial (monic, coefficients in [0, p)).
    pub fn modulus_poly(&self) -> Vec<u64> {
        let mut v = self.f[..self.d].to_vec();
        v.push(1);
        v
    }

    pub fn zero(&self) -> WittElem {
        WittElem::default()
    }

    pub fn one(&self) -> WittElem {
        self.from_u64(1)
    }

    /// The generator x (equal to 1 when d = 1).
    pub fn gen(&self) -> WittElem {
        if self.d == 1 {
            return self.one();
        }
        let mut e = WittElem::default();
        e.c[1] = 1;
        e
    }

    pub fn from_u64(&self, a: u64) -> WittElem {
        let mut e = WittElem::default();
        e.c[0] = a % self.modulus;
        e
    }

    pub fn from_i64(&self, a: i64) -> WittElem {
        let m = self.modulus as i128;
        self.from_u64((a as i128).rem_euclid(m) as u64)
    }

    pub fn from_coeffs(&self, cs: &[u64]) -> WittElem {
        assert!(cs.len() <= self.d, "too many coordinates");
        let mut e = WittElem::default();
        for (i, &c) in cs.iter().enumerate() {
            e.c[i] = c % self.modulus;
        }
        e
    }

    pub fn from_icoeffs(&self, cs: &[i64]) -> WittElem {
        let m = self.modulus as i128;
        let v: Vec<u64> = cs.iter().map(|&c| (c as i128).rem_euclid(m) as u64).collect();
        self.from_coeffs(&v)
    }

    /// Coordinates as signed integers in (-p^N/2, p^N/2].
    pub fn centered(&self, a: &WittElem) -> Vec<i64> {
        let m = self.modulus;
        a.c[..self.d].iter().map(|&c| if c > m / 2 { c as i64 - m as i64 } else { c as i64 }).collect()
    }

    pub fn is_zero(&self, a: &WittElem) -> bool {
        a.c[..self.d].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let mut e = WittElem::default();
        for i in 0..self.d {
            let s = a.c[i] + b.c[i];
            e.c[i] = if s >= self.modulus { s - self.modulus } else { s };
        }
        e
    }

    pub fn sub(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let mut e = WittElem::default();
        for i in 0..self.d {
            e.c[i] = if a.c[i] >= b.c[i] { a.c[i] - b.c[i] } else { a.c[i] + self.modulus - b.c[i] };
        }
        e
    }

    pub fn neg(&self, a: &WittElem) -> WittElem {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let m = self.modulus;
        if self.d == 1 {
            let mut e = WittElem::default();
            e.c[0] = mulmod(a.c[0], b.c[0], m);
            return e;
        }
        let d = self.d;
        let mut prod = [0u128; 2 * MAX_D - 1];
        for i in 0..d {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..d {
                prod[i + j] += a.c[i] as u128 * b.c[j] as u128;
            }
        }
        let mut c = [0u64; 2 * MAX_D - 1];
        for k in 0..2 * d - 1 {
            c[k] = (prod[k] % m as u128) as u64;
        }
        for k in (d..2 * d - 1).rev() {
            let t = c[k];
            if t == 0 {
                continue;
            }
            for i in 0..d {
                let sub = mulmod(t, self.f[i], m);
                let x = c[k - d + i];
                c[k - d + i] = if x >= sub { x - sub } else { x + m - sub };
            }
            c[k] = 0;
        }
        let mut e = WittElem::default();
        e.c[..d].copy_from_slice(&c[..d]);
        e
    }

    /// Multiplication by an integer.
    pub fn scale(&self, a: &WittElem, k: u64) -> WittElem {
        let mut e = WittElem::default();
        for i in 0..self.d {
            e.c[i] = mulmod(a.c[i], k % self.modulus, self.modulus);
        }
        e
    }

    /// Multiplication by p^k (zero once k ≥ N).
    pub fn mul_pk(&self, a: &WittElem, k: u32) -> WittElem {
        if k >= self.n {
            return self.zero();
        }
        self.scale(a, self.pw[k as usize])
    }

    /// Coordinatewise floor division by p^k. Exact when v(a) ≥ k.
    pub fn div_pk(&self, a: &WittElem, k: u32) -> WittElem {
        if k == 0 {
            return *a;
        }
        assert!(k < self.n || self.is_zero(a), "division by p^{k} at precision {}", self.n);
        if k >= self.n {
            return self.zero();
        }
        let q = self.pw[k as usize];
        let mut e = WittElem::default();
        for i in 0..self.d {
            e.c[i] = a.c[i] / q;
        }
        e
    }

    /// Canonical representative modulo p^k (coordinates in [0, p^k)).
    pub fn mod_pk(&self, a: &WittElem, k: u32) -> WittElem {
        if k >= self.n {
            return *a;
        }
        let q = self.pw[k as usize];
        let mut e = WittElem::default();
        for i in 0..self.d {
            e.c[i] = a.c[i] % q;
        }
        e
    }

    /// Valuation, N for zero.
    pub fn val(&self, a: &WittElem) -> u32 {
        let mut v = self.n;
        for i in 0..self.d {
            if a.c[i] != 0 {
                v = v.min(a.c[i].trailing_zeros_base(self.p));
            }
        }
        v
    }

    pub fn is_unit(&self, a: &WittElem) -> bool {
        self.val(a) == 0
    }

    pub fn pow(&self, a: &WittElem, mut e: u64) -> WittElem {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv_unit(&self, a: &WittElem) -> Option<WittElem> {
        if !self.is_unit(a) {
            return None;
        }
        if self.d == 1 {
            return Some(self.from_u64(fpoly::inv_mod(a.c[0], self.modulus)));
        }
        let mut y = self.pow(a, self.q() - 2);
        let two = self.from_u64(2);
        let mut k = 1u32;
        while k < self.n {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            k *= 2;
        }
        y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
        debug_assert_eq!(self.mul(a, &y), self.one());
        Some(y)
    }

    /// Splits a nonzero element as p^v · u with u a unit. The unit is only
    /// determined modulo p^{N-v}; its upper digits are zero.
    pub fn unit_part(&self, a: &WittElem) -> Option<(u32, WittElem)> {
        let v = self.val(a);
        if v >= self.n {
            return None;
        }
        Some((v, self.div_pk(a, v)))
    }

    /// The Frobenius automorphism σ.
    pub fn frob(&self, a: &WittElem) -> WittElem {
        if self.d == 1 {
            return *a;
        }
        let mut acc = self.from_u64(a.c[0]);
        for k in 1..self.d {
            if a.c[k] != 0 {
                acc = self.add(&acc, &self.scale(&self.sig[k], a.c[k]));
            }
        }
        acc
    }

    /// σ^e for any integer e (σ has order d).
    pub fn frob_pow(&self, a: &WittElem, e: i64) -> WittElem {
        let k = e.rem_euclid(self.d as i64);
        let mut x = *a;
        for _ in 0..k {
            x = self.frob(&x);
        }
        x
    }

    /// Reduction mod p, as coordinates in F_p with respect to 1, x, ..., x^{d-1}.
    pub fn residue(&self, a: &WittElem) -> Vec<u64> {
        a.c[..self.d].iter().map(|&c| c % self.p).collect()
    }

    /// The Teichmüller lift of a residue-field element.
    pub fn teichmuller(&self, residue: &[u64]) -> WittElem {
        let r: Vec<u64> = residue.iter().map(|&c| c % self.p).collect();
        let mut w = self.from_coeffs(&r);
        if self.is_zero(&w) {
            return w;
        }
        let q = self.q();
        for _ in 0..=self.n {
            let next = self.pow(&w, q);
            if next == w {
                return w;
            }
            w = next;
        }
        w
    }

    /// All residue-field elements, in base-p digit order.
    pub fn residue_field(&self) -> Vec<Vec<u64>> {
        let q = self.q();
        (0..q)
            .map(|mut t| {
                (0..self.d)
                    .map(|_| {
                        let c = t % self.p;
                        t /= self.p;
                        c
                    })
                    .collect()
            })
            .collect()
    }
}

trait TrailingBase {
    fn trailing_zeros_base(self, p: u64) -> u32;
}

impl TrailingBase for u64 {
    #[inline]
    fn trailing_zeros_base(self, p: u64) -> u32 {
        if p == 2 {
            return self.trailing_zeros();
        }
        let mut x = self;
        let mut v = 0;
        while x % p == 0 {
            x /= p;
            v += 1;
        }
        v
    }
}

/// p^val · unit, with val possibly negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    pub val: i32,
    pub unit: WittElem,
    pub zero: bool,
}

impl PadicScalar {
    pub fn zero(ring: &WittRing) -> Self {
        PadicScalar { val: ring.prec() as i32, unit: ring.zero(), zero: true }
    }

    pub fn one(ring: &WittRing) -> Self {
        PadicScalar { val: 0, unit: ring.one(), zero: false }
    }

    /// p^shift · a, normalized.
    pub fn from_elem(ring: &WittRing, a: &WittElem, shift: i32) -> Self {
        match ring.unit_part(a) {
            None => PadicScalar { val: shift + ring.prec() as i32, unit: ring.zero(), zero: true },
            Some((v, u)) => PadicScalar { val: shift + v as i32, unit: u, zero: false },
        }
    }

    pub fn pow_p(ring: &WittRing, k: i32) -> Self {
        PadicScalar { val: k, unit: ring.one(), zero: false }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Valuation, or None for zero-at-precision.
    pub fn valuation(&self) -> Option<i32> {
        if self.zero {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn mul(&self, ring: &WittRing, o: &Self) -> Self {
        if self.zero || o.zero {
            return PadicScalar::zero(ring);
        }
        PadicScalar { val: self.val + o.val, unit: ring.mul(&self.unit, &o.unit), zero: false }
    }

    /// Integral representative p^val·unit when val ≥ 0.
    pub fn to_elem(&self, ring: &WittRing) -> Option<WittElem> {
        if self.zero {
            return Some(ring.zero());
        }
        if self.val < 0 {
            return None;
        }
        Some(ring.mul_pk(&self.unit, self.val as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z256() {
        let r = WittRing::new(2, 1, 8).unwrap();
        assert_eq!(r.modulus(), 256);
        let a = r.from_u64(37);
        assert_eq!(r.frob(&a), a);
        assert_eq!(r.val(&r.from_u64(96)), 5);
        assert_eq!(r.val(&r.zero()), 8);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(WittRing::new(4, 1, 3).is_err());
        assert!(WittRing::new(3, 0, 3).is_err());
        assert!(WittRing::new(3, 1, 0).is_err());
    }

    #[test]
    fn teichmuller_minus_one() {
        let r = WittRing::new(3, 1, 4).unwrap();
        let w = r.teichmuller(&[2]);
        assert_eq!(w, r.from_u64(80));
        assert_eq!(r.pow(&w, 3), w);
    }

    #[test]
    fn vp_factorial_legendre() {
        assert_eq!(vp_factorial(4, 3), 1);
        assert_eq!(vp_factorial(10, 2), 8);
        assert_eq!(vp_factorial(1, 2), 0);
    }
}
