use super::mat::Mat;
use super::snf::{hnf, hnf_solve, kernel, snf};
use crate::error::{Error, Result};
use crate::padic::{WittElem, WittRing};

/// A full-rank W-lattice p^offset · span(basis) inside Q_p ⊗ W^n.
///
/// `basis` is the canonical lower-triangular Hermite form and the offset is
/// normalized so that the lattice is not contained in p·W^n; equal lattices
/// therefore have identical representations. `bound` is an upper bound on
/// the largest elementary divisor exponent of `basis` and takes no part
/// in equality.
#[derive(Clone, Debug)]
pub struct Lattice {
    offset: i32,
    basis: Mat,
    pivots: Vec<u32>,
    bound: u32,
}

impl PartialEq for Lattice {
    fn eq(&self, o: &Self) -> bool {
        self.offset == o.offset && self.pivots == o.pivots && self.basis == o.basis
    }
}

impl Eq for Lattice {}

impl std::hash::Hash for Lattice {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.offset.hash(h);
        self.pivots.hash(h);
        self.basis.hash(h);
    }
}

fn not_full(what: &str) -> Error {
    Error::precision(format!("{what}: span is not of full rank at working precision"))
}

impl Lattice {
    /// The lattice p^offset · span(gens); `floor` promises p^floor·W^n ⊆ span(gens).
    pub fn from_gens(ring: &WittRing, n: usize, offset: i32, gens: &[Vec<WittElem>], floor: Option<u32>) -> Result<Self> {
        if let Some(t) = floor {
            if t >= ring.prec() {
                return Err(Error::precision(format!("lattice floor {t} at precision {}", ring.prec())));
            }
        }
        let (h, ks) = hnf(ring, n, gens, floor).ok_or_else(|| not_full("lattice"))?;
        let sum: u32 = ks.iter().sum();
        let bound = floor.map_or(sum, |t| t.min(sum));
        if bound >= ring.prec() {
            return Err(Error::precision("lattice spread reaches working precision"));
        }
        Ok(Lattice { offset, basis: h, pivots: ks, bound }.normalized(ring))
    }

    pub fn from_mat(ring: &WittRing, offset: i32, m: &Mat, floor: Option<u32>) -> Result<Self> {
        Lattice::from_gens(ring, m.rows, offset, &m.columns(), floor)
    }

    /// p^offset · W^n.
    pub fn standard(ring: &WittRing, n: usize, offset: i32) -> Self {
        Lattice { offset, basis: Mat::identity(ring, n), pivots: vec![0; n], bound: 0 }
    }

    fn normalized(mut self, ring: &WittRing) -> Self {
        let e = self.basis.min_val(ring);
        if e > 0 && e < ring.prec() {
            self.basis = self.basis.div_pk(ring, e);
            for k in self.pivots.iter_mut() {
                *k -= e;
            }
            self.bound -= e;
            self.offset += e as i32;
        }
        self
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn pivots(&self) -> &[u32] {
        &self.pivots
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// log_p of the W-length of W^n / L (negative when L is larger).
    pub fn volume(&self) -> i64 {
        self.rank() as i64 * self.offset as i64 + self.pivots.iter().map(|&k| k as i64).sum::<i64>()
    }

    /// Basis columns rescaled to offset `target` (requires target ≤ offset).
    fn basis_at(&self, ring: &WittRing, target: i32) -> Result<Mat> {
        let s = self.offset - target;
        assert!(s >= 0);
        if self.bound as i64 + s as i64 >= ring.prec() as i64 {
            return Err(Error::precision_retry("rescaling a lattice exceeds working precision", self.bound + s as u32 + 1));
        }
        Ok(self.basis.mul_pk(ring, s as u32))
    }

    pub fn scale(&self, r: i32) -> Self {
        let mut l = self.clone();
        l.offset += r;
        l
    }

    pub fn sum(&self, ring: &WittRing, o: &Lattice) -> Result<Self> {
        let a = self.offset.min(o.offset);
        let b1 = self.basis_at(ring, a)?;
        let b2 = o.basis_at(ring, a)?;
        let floor = (self.bound + (self.offset - a) as u32).min(o.bound + (o.offset - a) as u32);
        Lattice::from_mat(ring, a, &b1.hcat(&b2), Some(floor))
    }

    pub fn intersect(&self, ring: &WittRing, o: &Lattice) -> Result<Self> {
        let a = self.offset.min(o.offset);
        let b1 = self.basis_at(ring, a)?;
        let b2 = o.basis_at(ring, a)?;
        let floor = (self.bound + (self.offset - a) as u32).max(o.bound + (o.offset - a) as u32);
        let n = self.rank();
        let k = kernel(ring, &b1.hcat(&b2.neg(ring)));
        let top = k.submatrix(0, n, 0, k.cols);
        let gens = b1.mul(ring, &top);
        Lattice::from_mat(ring, a, &gens, Some(floor))
    }

    /// Image under an integral matrix `a` whose elementary divisors are at most `a_bound`.
    pub fn image(&self, ring: &WittRing, a: &Mat, a_bound: u32) -> Result<Self> {
        let gens = a.mul(ring, &self.basis);
        Lattice::from_mat(ring, self.offset, &gens, Some(self.bound + a_bound))
    }

    /// {x ∈ p^src_offset·W^n : p^shift·a·x ∈ self} for an integral matrix `a`.
    pub fn preimage(&self, ring: &WittRing, a: &Mat, shift: i32, src_offset: i32) -> Result<Self> {
        // Condition on y with x = p^src·y: p^{src+shift} a y ∈ p^off span(B).
        let c = src_offset + shift - self.offset;
        let (am, bm, floor) = if c >= 0 {
            (a.mul_pk(ring, c as u32), self.basis.clone(), self.bound)
        } else {
            let t = (-c) as u32;
            if self.bound + t >= ring.prec() {
                return Err(Error::precision_retry("preimage exceeds working precision", self.bound + t + 1));
            }
            (a.clone(), self.basis.mul_pk(ring, t), self.bound + t)
        };
        let n = a.cols;
        let k = kernel(ring, &am.hcat(&bm.neg(ring)));
        let top = k.submatrix(0, n, 0, k.cols);
        Lattice::from_mat(ring, src_offset, &top, Some(floor))
    }

    /// The dual lattice {λ : λ·x ∈ W for all x ∈ L} in the dual coordinates.
    pub fn dual(&self, ring: &WittRing) -> Result<Self> {
        let s = snf(ring, &self.basis, true, false);
        let emax = *s.exps.iter().max().unwrap_or(&0);
        if emax >= ring.prec() {
            return Err(not_full("dual"));
        }
        let ut = s.u.unwrap().transpose();
        let n = self.rank();
        let gens = Mat::from_fn(n, n, |i, j| ring.mul_pk(ut.at(i, j), emax - s.exps[j]));
        Lattice::from_mat(ring, -self.offset - emax as i32, &gens, Some(emax))
    }

    /// Span of all Kronecker products of basis vectors.
    pub fn tensor(&self, ring: &WittRing, o: &Lattice) -> Result<Self> {
        let k = self.basis.kron(ring, &o.basis);
        Lattice::from_mat(ring, self.offset + o.offset, &k, Some(self.bound + o.bound))
    }

    /// Membership of the vector p^x_offset · x.
    pub fn contains_vec(&self, ring: &WittRing, x: &[WittElem], x_offset: i32) -> bool {
        self.coords(ring, x, x_offset).is_some()
    }

    /// Coordinates c with p^x_offset·x = p^offset·B·c, if x lies in the lattice.
    pub fn coords(&self, ring: &WittRing, x: &[WittElem], x_offset: i32) -> Option<Vec<WittElem>> {
        let s = x_offset - self.offset;
        let y: Vec<WittElem> = if s >= 0 {
            x.iter().map(|v| ring.mul_pk(v, s as u32)).collect()
        } else {
            let t = (-s) as u32;
            if x.iter().any(|v| ring.val(v) < t) {
                return None;
            }
            x.iter().map(|v| ring.div_pk(v, t)).collect()
        };
        hnf_solve(ring, &self.basis, &self.pivots, &y)
    }

    pub fn contains(&self, ring: &WittRing, o: &Lattice) -> bool {
        (0..o.rank()).all(|j| self.contains_vec(ring, &o.basis.col(j), o.offset))
    }

    /// Elementary divisor exponents of self / sub, or None if sub ⊄ self.
    pub fn quotient_exps(&self, ring: &WittRing, sub: &Lattice) -> Option<Vec<u32>> {
        let n = self.rank();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            cols.push(self.coords(ring, &sub.basis.col(j), sub.offset)?);
        }
        let m = Mat::from_cols(n, &cols);
        let mut e: Vec<u32> = snf(ring, &m, false, false).exps.into_iter().filter(|&e| e > 0).collect();
        e.sort_unstable();
        Some(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(r: &WittRing, rows: &[&[i64]]) -> Lattice {
        Lattice::from_mat(r, 0, &Mat::from_ints(r, rows), None).unwrap()
    }

    #[test]
    fn coordinate_intersection() {
        let r = WittRing::new(3, 1, 10).unwrap();
        let a = lat(&r, &[&[1, 0], &[0, 3]]);
        let b = lat(&r, &[&[3, 0], &[0, 1]]);
        let c = a.intersect(&r, &b).unwrap();
        assert_eq!(c, Lattice::standard(&r, 2, 1));
        assert_eq!(a.sum(&r, &b).unwrap(), Lattice::standard(&r, 2, 0));
    }

    #[test]
    fn dual_of_dual() {
        let r = WittRing::new(2, 1, 12).unwrap();
        let a = lat(&r, &[&[1, 0], &[3, 8]]).scale(-2);
        let dd = a.dual(&r).unwrap().dual(&r).unwrap();
        assert_eq!(a, dd);
    }

    #[test]
    fn offset_normalization() {
        let r = WittRing::new(5, 1, 8).unwrap();
        let a = lat(&r, &[&[5, 0], &[0, 25]]);
        assert_eq!(a.offset(), 1);
        assert_eq!(a.volume(), 3);
    }
}
