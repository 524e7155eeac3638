//! Matrices, normal forms, lattices and σ-semilinear maps over a [`WittRing`].

mod lattice;
mod mat;
mod snf;

pub use lattice::Lattice;
pub use mat::Mat;
pub use snf::{berkowitz, det, elementary_divisors, hnf, hnf_solve, kernel, snf, Snf};

use crate::error::{Error, Result};
use crate::padic::{PadicScalar, WittElem, WittRing};

/// The matrix p^val · m with m integral and known modulo p^prec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMatrix {
    pub val: i32,
    pub m: Mat,
    pub prec: u32,
}

impl PMatrix {
    pub fn new(val: i32, m: Mat, prec: u32) -> Self {
        PMatrix { val, m, prec }
    }

    /// Moves common factors of p from the matrix into `val`.
    pub fn normalized(mut self, ring: &WittRing) -> Self {
        let e = self.m.min_val(ring);
        if e > 0 && e < ring.prec() {
            self.m = self.m.div_pk(ring, e);
            self.val += e as i32;
            self.prec = self.prec.saturating_sub(e);
        }
        self
    }

    pub fn entry(&self, ring: &WittRing, i: usize, j: usize) -> PadicScalar {
        PadicScalar::from_elem(ring, self.m.at(i, j), self.val)
    }

    pub fn rows(&self) -> usize {
        self.m.rows
    }

    pub fn cols(&self) -> usize {
        self.m.cols
    }

    /// Builds a matrix from scalar entries, clearing the common denominator.
    pub fn from_scalars(ring: &WittRing, rows: usize, cols: usize, entries: &[PadicScalar], prec: u32) -> Self {
        let vmin = entries.iter().filter(|s| !s.zero).map(|s| s.val).min().unwrap_or(0);
        let m = Mat::from_fn(rows, cols, |i, j| {
            let s = &entries[i * cols + j];
            if s.zero {
                ring.zero()
            } else {
                ring.mul_pk(&s.unit, (s.val - vmin) as u32)
            }
        });
        PMatrix { val: vmin, m, prec }.normalized(ring)
    }
}

/// v ↦ A·σ^twist(v).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearMap {
    pub matrix: PMatrix,
    pub twist: i64,
}

impl SemilinearMap {
    /// (A, e)∘(B, f) = (A·σ^e(B), e + f).
    pub fn compose(&self, ring: &WittRing, o: &SemilinearMap) -> SemilinearMap {
        let b = o.matrix.m.frob_pow(ring, self.twist);
        let m = self.matrix.m.mul(ring, &b);
        SemilinearMap {
            matrix: PMatrix::new(self.matrix.val + o.matrix.val, m, self.matrix.prec.min(o.matrix.prec)),
            twist: self.twist + o.twist,
        }
    }

    /// Applies the integral part: returns m·σ^e(v) (the p^val factor is left to the caller).
    pub fn apply_integral(&self, ring: &WittRing, v: &[WittElem]) -> Vec<WittElem> {
        let sv: Vec<WittElem> = v.iter().map(|x| ring.frob_pow(x, self.twist)).collect();
        self.matrix.m.mul_vec(ring, &sv)
    }

    /// The d-fold iterate, a W-linear map when twist = 1.
    pub fn iterate(&self, ring: &WittRing, k: usize) -> SemilinearMap {
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.compose(ring, self);
        }
        acc
    }
}

/// A finitely generated Z_p-module ⊕ Z/p^{e_i} ⊕ Z_p^free_rank.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiniteModule {
    pub exps: Vec<u32>,
    pub free_rank: usize,
}

impl FiniteModule {
    pub fn trivial() -> Self {
        FiniteModule::default()
    }

    /// Builds from SNF exponents: 0 dropped, ≥ `known` counted as free.
    pub fn from_exps(exps: impl IntoIterator<Item = u32>, extra_free: usize, known: u32) -> Self {
        let mut m = FiniteModule { exps: vec![], free_rank: extra_free };
        for e in exps {
            if e >= known {
                m.free_rank += 1;
            } else if e > 0 {
                m.exps.push(e);
            }
        }
        m.exps.sort_unstable();
        m
    }

    /// log_p of the order, None if infinite.
    pub fn order_val(&self) -> Option<u64> {
        (self.free_rank == 0).then(|| self.exps.iter().map(|&e| e as u64).sum())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.exps.is_empty()
    }

    /// Repeats every exponent and free summand `d` times (restriction of scalars W → Z_p).
    pub fn repeat(&self, d: usize) -> Self {
        let mut exps: Vec<u32> = self.exps.iter().flat_map(|&e| std::iter::repeat_n(e, d)).collect();
        exps.sort_unstable();
        FiniteModule { exps, free_rank: self.free_rank * d }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut exps = self.exps.clone();
        exps.extend_from_slice(&o.exps);
        exps.sort_unstable();
        FiniteModule { exps, free_rank: self.free_rank + o.free_rank }
    }
}

/// Cokernel of the map W^m → W^n given by `f` (as a Z_p-module, so each
/// W-summand contributes d copies). Exponents at or above `known` count as free.
pub fn cokernel(ring: &WittRing, f: &Mat, known: u32) -> FiniteModule {
    let e = elementary_divisors(ring, f);
    let missing = f.rows.saturating_sub(e.len());
    FiniteModule::from_exps(e, missing, known.min(ring.prec())).repeat(ring.d())
}

/// Restriction of scalars of v ↦ A·σ^twist(v) to a Z_p-matrix over `zp`
/// (which must be the d = 1 ring of the same p and precision). Basis order
/// is x^k·e_j ↦ index j·d + k.
pub fn linearize(ring: &WittRing, zp: &WittRing, a: &Mat, twist: i64) -> Mat {
    assert_eq!(zp.d(), 1);
    assert_eq!(zp.modulus(), ring.modulus());
    let d = ring.d();
    let gen = ring.gen();
    let sx: Vec<WittElem> = (0..d).map(|k| ring.frob_pow(&ring.pow(&gen, k as u64), twist)).collect();
    let mut out = Mat::zeros(a.rows * d, a.cols * d);
    for j in 0..a.cols {
        for (k, s) in sx.iter().enumerate() {
            for i in 0..a.rows {
                let y = ring.mul(a.at(i, j), s);
                for l in 0..d {
                    out.set(i * d + l, j * d + k, zp.from_u64(y.coeff(l)));
                }
            }
        }
    }
    out
}

/// det(u·I − p^val·m) as PadicScalar coefficients, highest degree first.
pub fn char_poly(ring: &WittRing, f: &PMatrix) -> Vec<PadicScalar> {
    let n = f.rows() as i32;
    let c = berkowitz(ring, &f.m);
    c.iter()
        .enumerate()
        .map(|(k, x)| PadicScalar::from_elem(ring, x, f.val * k as i32))
        .collect::<Vec<_>>()
        .into_iter()
        .take((n + 1) as usize)
        .collect()
}

/// Valuation of det(a) for a square integral matrix, or an error if the
/// determinant is zero at precision.
pub fn det_val(ring: &WittRing, a: &Mat) -> Result<u32> {
    let e = elementary_divisors(ring, a);
    if e.iter().any(|&x| x >= ring.prec()) {
        return Err(Error::precision("determinant is zero at working precision"));
    }
    Ok(e.iter().sum())
}

/// Whether y lies in the Z_p- (or W-) column span of `m`, comparing only
/// the first `known` p-adic digits.
pub fn span_contains(ring: &WittRing, m: &Mat, y: &[WittElem], known: u32) -> bool {
    let s = snf(ring, m, true, false);
    let uy = s.u.as_ref().unwrap().mul_vec(ring, y);
    let known = known.min(ring.prec());
    uy.iter().enumerate().all(|(i, x)| {
        let e = s.exps.get(i).copied().unwrap_or(ring.prec()).min(known);
        ring.val(x) >= e
    })
}

/// Inverse of a square matrix that is invertible over the ring, if it is.
pub fn inverse_unimodular(ring: &WittRing, m: &Mat) -> Option<Mat> {
    let s = snf(ring, m, true, true);
    if s.exps.iter().any(|&e| e > 0) {
        return None;
    }
    Some(s.v.unwrap().mul(ring, s.u.as_ref().unwrap()))
}

/// Generators of the kernel of `a`, keeping only directions on which `a`
/// vanishes to at least `known` digits (truncation artifacts are dropped).
pub fn kernel_known(ring: &WittRing, a: &Mat, known: u32) -> Mat {
    let s = snf(ring, a, false, true);
    let v = s.v.unwrap();
    let cols: Vec<Vec<WittElem>> =
        (0..a.cols).filter(|&i| s.exps.get(i).copied().unwrap_or(ring.prec()) >= known).map(|i| v.col(i)).collect();
    Mat::from_cols(a.cols, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cokernel_examples() {
        let r = WittRing::new(3, 1, 10).unwrap();
        let f = Mat::from_ints(&r, &[&[1, 1], &[0, 3]]);
        assert_eq!(cokernel(&r, &f, 10), FiniteModule { exps: vec![1], free_rank: 0 });
        let z = Mat::zeros(1, 1);
        assert_eq!(cokernel(&r, &z, 10).free_rank, 1);
        let pk = Mat::from_ints(&r, &[&[27]]);
        assert_eq!(cokernel(&r, &pk, 10).exps, vec![3]);
    }

    #[test]
    fn composition_rule() {
        let r = WittRing::new(2, 2, 8).unwrap();
        let x = r.gen();
        let a = SemilinearMap { matrix: PMatrix::new(0, Mat::diag(&r, &[x, r.one()]), 8), twist: 1 };
        let b = SemilinearMap { matrix: PMatrix::new(1, Mat::diag(&r, &[r.one(), x]), 8), twist: 1 };
        let c = a.compose(&r, &b);
        assert_eq!(c.twist, 2);
        assert_eq!(c.matrix.val, 1);
        let v = vec![r.from_u64(3), r.mul(&x, &x)];
        let lhs = c.apply_integral(&r, &v);
        let rhs = a.apply_integral(&r, &b.apply_integral(&r, &v));
        assert_eq!(lhs, rhs);
    }
}
