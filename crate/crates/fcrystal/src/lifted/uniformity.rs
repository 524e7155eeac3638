//! Detecting non-uniform crystals.
//!
//! Over a one-variable base the image of M^r(D)_Y in F^*D_X is a module
//! over the principal ideal domain k[T] (or k[T, T^{-1}]); it is locally a
//! direct summand iff every non-zero invariant factor is a unit. The
//! two-variable entry point compares the generic rank of M^r with the
//! number of generators of its fibre at the origin.

use std::collections::BTreeMap;

use super::{divisible_kernel, AffineBase, BaseKind, LMat, Laurent, LiftedCrystal, Selection};
use crate::error::{Error, Result};
use crate::fpoly::{self, FPoly};
use crate::padic::{WittElem, WittRing};
use crate::semilinear::{elementary_divisors, Lattice, Mat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniformity {
    /// An invariant factor of M^r(D_X) that is not a unit, with the image
    /// vector it multiplies.
    CertifiedNonuniform {
        r: i32,
        divisor: String,
        witness: String,
    },
    ProbablyUniform,
}

fn fp_string(a: &[u64], var: &str) -> String {
    let parts: Vec<String> = a
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| match (k, c) {
            (0, c) => format!("{c}"),
            (1, 1) => var.to_string(),
            (k, 1) => format!("{var}^{k}"),
            (1, c) => format!("{c}*{var}"),
            (k, c) => format!("{c}*{var}^{k}"),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Smith form over F_p[T] of an n×g matrix; returns the diagonal and L⁻¹
/// with A = L⁻¹·diag·R⁻¹.
fn poly_snf(mut a: Vec<Vec<FPoly>>, n: usize, g: usize, p: u64) -> (Vec<FPoly>, Vec<Vec<FPoly>>) {
    let mut linv: Vec<Vec<FPoly>> = (0..n).map(|i| (0..n).map(|j| if i == j { vec![1] } else { vec![] }).collect()).collect();
    let mut diag = Vec::new();
    let dg = |x: &FPoly| fpoly::deg(x);
    for t in 0..n.min(g) {
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if let Some(d) = dg(x) {
                        if best.is_none_or(|b| d < b.2) {
                            best = Some((i, j, d));
                        }
                    }
                }
            }
            let Some((bi, bj, _)) = best else {
                return (diag, linv);
            };
            a.swap(t, bi);
            for row in linv.iter_mut() {
                row.swap(t, bi);
            }
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let (q, r) = fpoly::divrem(&a[i][t], &a[t][t], p);
                if !fpoly::is_zero(&q) {
                    for j in t..g {
                        let s = fpoly::mul(&q, &a[t][j], p);
                        a[i][j] = fpoly::sub(&a[i][j], &s, p);
                    }
                    for row in linv.iter_mut() {
                        let s = fpoly::mul(&q, &row[i], p);
                        row[t] = fpoly::add(&row[t], &s, p);
                    }
                }
                if !fpoly::is_zero(&r) {
                    clean = false;
                }
            }
            for j in t + 1..g {
                let (q, r) = fpoly::divrem(&a[t][j], &a[t][t], p);
                if !fpoly::is_zero(&q) {
                    for row in a.iter_mut().skip(t) {
                        let s = fpoly::mul(&q, &row[t], p);
                        row[j] = fpoly::sub(&row[j], &s, p);
                    }
                }
                if !fpoly::is_zero(&r) {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility of the remaining block by the pivot.
            let bad = (t + 1..n).find(|&i| (t + 1..g).any(|j| !fpoly::is_zero(&fpoly::divrem(&a[i][j], &a[t][t], p).1)));
            match bad {
                Some(i) => {
                    for j in t..g {
                        let s = a[i][j].clone();
                        a[t][j] = fpoly::add(&a[t][j], &s, p);
                    }
                    for row in linv.iter_mut() {
                        let s = row[t].clone();
                        row[i] = fpoly::sub(&row[i], &s, p);
                    }
                }
                None => break,
            }
        }
        let lc = *a[t][t].iter().rev().find(|&&c| c != 0).unwrap();
        let inv = fpoly::inv_mod(lc, p);
        for j in t..g {
            a[t][j] = fpoly::scale(&a[t][j], inv, p);
        }
        for row in linv.iter_mut() {
            row[t] = fpoly::scale(&row[t], lc, p);
        }
        diag.push(a[t][t].clone());
    }
    (diag, linv)
}

/// Image of M^r(D)_Y in F^*D_X on the window, as k[T]-vectors (shifted by
/// T^{shift} on the torus to make them polynomial).
fn reduced_generators(d: &LiftedCrystal, r: i32) -> Result<(Vec<Vec<FPoly>>, i32)> {
    let ring = d.ring();
    let p = ring.p();
    let n = d.rank();
    let (lo, hi) = d.base().window_range();
    let sel = Selection::window(n, lo, hi);
    let m = d.filtration_m(r, &sel)?;
    let shift = -lo;
    let mut cols = Vec::new();
    for v in m.gens(ring) {
        let col: Vec<FPoly> = v
            .iter()
            .map(|x| {
                let mut out = vec![0u64; (hi - lo + 1) as usize];
                for (k, a) in x.terms() {
                    out[(k + shift) as usize] = a.coeff(0) % p;
                }
                fpoly::trim(&mut out);
                out
            })
            .collect();
        if col.iter().any(|c| !fpoly::is_zero(c)) {
            cols.push(col);
        }
    }
    Ok((cols, shift))
}

/// Invariant factors of the image of M^r(D)_Y in F^*D_X on the window.
pub fn uniformity_at(d: &LiftedCrystal, r: i32) -> Result<Uniformity> {
    let p = d.ring().p();
    let n = d.rank();
    let (cols, _) = reduced_generators(d, r)?;
    let g = cols.len();
    let a: Vec<Vec<FPoly>> = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let (diag, linv) = poly_snf(a, n, g, p);
    let torus = d.base().kind() == BaseKind::Torus;
    for (t, dv) in diag.iter().enumerate() {
        let deg = fpoly::deg(dv).unwrap_or(0);
        let low = dv.iter().position(|&c| c != 0).unwrap_or(0);
        let unit = if torus { deg == low } else { deg == 0 };
        if unit {
            continue;
        }
        // On the torus the common shift T^{−lo} is a unit; strip T-powers.
        let dv: FPoly = if torus { dv[low..].to_vec() } else { dv.clone() };
        let vec: Vec<FPoly> = (0..n).map(|i| fpoly::mul(&dv, &linv[i][t], p)).collect();
        let lead = vec.iter().find_map(|c| c.iter().rev().find(|&&x| x != 0).copied()).unwrap_or(1);
        let inv = fpoly::inv_mod(lead, p);
        let terms: Vec<String> = vec
            .iter()
            .enumerate()
            .filter(|(_, c)| !fpoly::is_zero(c))
            .map(|(i, c)| {
                let c = fpoly::scale(c, inv, p);
                let s = fp_string(&c, "T");
                if c.iter().filter(|&&x| x != 0).count() > 1 {
                    format!("({s})⊗e{}", i + 1)
                } else {
                    format!("{s}⊗e{}", i + 1)
                }
            })
            .collect();
        return Ok(Uniformity::CertifiedNonuniform { r, divisor: fp_string(&dv, "T"), witness: terms.join(" + ") });
    }
    Ok(Uniformity::ProbablyUniform)
}

/// The rank-three crystal on the affine line with s1 = s2 = T^p:
/// Φ = [[p, 0, 0], [0, p, 0], [T^p, T^p, p]] and ∇e_i = e_3⊗ω for i = 1, 2,
/// where ω = −(1 − F)^{-1}(T^{p−1}dT) = −Σ_k p^k·T^{p^{k+1}−1}dT.
pub fn rank_three_line(p: u64, prec: u32, window: i32) -> Result<LiftedCrystal> {
    let base = AffineBase::standard(BaseKind::AffineLine, p, prec, window)?;
    let ring = base.ring().clone();
    let pi = p as i64;
    let s = Laurent::from_terms(&ring, &[(p as i32, 1)]);
    let mut phi = LMat::from_ints(&ring, &[&[pi, 0, 0], &[0, pi, 0], &[0, 0, pi]]);
    phi.set(2, 0, s.clone());
    phi.set(2, 1, s);
    let mut omega = Laurent::zero();
    let mut pk = 1u64;
    for k in 0..prec {
        let e = pk * p - 1;
        omega = omega.add(&ring, &Laurent::monomial(ring.mul_pk(&ring.from_i64(-1), k), e as i32));
        pk *= p;
    }
    let mut nabla = LMat::zeros(3);
    nabla.set(2, 0, omega.clone());
    nabla.set(2, 1, omega);
    LiftedCrystal::new(&base, 0, phi, nabla, None)
}

/// Runs [`uniformity_at`] over a range of r, returning the first certificate.
pub fn uniformity_check(d: &LiftedCrystal, rs: std::ops::RangeInclusive<i32>) -> Result<Uniformity> {
    for r in rs {
        if let u @ Uniformity::CertifiedNonuniform { .. } = uniformity_at(d, r)? {
            return Ok(u);
        }
    }
    Ok(Uniformity::ProbablyUniform)
}

/// A polynomial in T1, T2 over Z/p^N.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), WittElem>,
}

impl BiPoly {
    pub fn from_terms(ring: &WittRing, terms: &[((u32, u32), i64)]) -> Self {
        let mut out = BiPoly::default();
        for &(k, c) in terms {
            let e = out.terms.entry(k).or_default();
            *e = ring.add(e, &ring.from_i64(c));
        }
        out.terms.retain(|_, v| !ring.is_zero(v));
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &WittElem)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }
}

/// Frobenius data on the free module with basis e_1, …, e_n over the
/// p-adic completion of W[T1, T2]: Φ(F^*e_j) = p^val·Σ_i phi[i][j]·e_i.
#[derive(Clone, Debug)]
pub struct TwoVarCrystal {
    pub ring: WittRing,
    pub val: i32,
    pub phi: Vec<Vec<BiPoly>>,
}

impl TwoVarCrystal {
    /// Φ = [[p, 0, 0], [0, p, 0], [s1, s2, p]] with s_i = T_i^p.
    pub fn rank_three_example(p: u64, prec: u32) -> Result<Self> {
        let ring = WittRing::new(p, 1, prec)?;
        let c = |x: i64| BiPoly::from_terms(&ring, &[((0, 0), x)]);
        let pi = p as i64;
        let pu = p as u32;
        let s1 = BiPoly::from_terms(&ring, &[((pu, 0), 1)]);
        let s2 = BiPoly::from_terms(&ring, &[((0, pu), 1)]);
        let phi = vec![vec![c(pi), c(0), c(0)], vec![c(0), c(pi), c(0)], vec![s1, s2, c(pi)]];
        Ok(TwoVarCrystal { ring, val: 0, phi })
    }

    pub fn rank(&self) -> usize {
        self.phi.len()
    }

    fn monomials(&self, k: u32) -> Vec<(usize, u32, u32)> {
        let mut out = Vec::new();
        for j in 0..self.rank() {
            for t in 0..=k {
                for a in 0..=t {
                    out.push((j, a, t - a));
                }
            }
        }
        out
    }

    /// M^r ∩ (total degree ≤ k) as a lattice in the monomial coordinates.
    fn m_piece(&self, r: i32, k: u32) -> Result<(Lattice, Vec<(usize, u32, u32)>)> {
        let ring = &self.ring;
        let src = self.monomials(k);
        let dmax = self.phi.iter().flatten().map(|x| x.total_degree()).max().unwrap_or(0);
        let tgt = self.monomials(k + dmax);
        let pos: BTreeMap<(usize, u32, u32), usize> = tgt.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut l = Mat::zeros(tgt.len(), src.len());
        for (c, &(j, a, b)) in src.iter().enumerate() {
            for (i, row) in self.phi.iter().enumerate() {
                for (&(x, y), v) in row[j].terms() {
                    l.set(pos[&(i, a + x, b + y)], c, *v);
                }
            }
        }
        Ok((divisible_kernel(ring, &l, r - self.val)?, src))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankJump {
    pub r: i32,
    pub generic_rank: usize,
    /// dim M^r ⊗ k(x) at the origin.
    pub fiber_rank: usize,
    pub jump: bool,
}

/// Generic rank of M^r against the number of generators of its fibre at
/// the origin x = (T1, T2). A jump certifies that M^r is not locally free.
pub fn two_variable_rank_jump(c: &TwoVarCrystal, r: i32) -> Result<RankJump> {
    let ring = &c.ring;
    let n = c.rank();
    let dmax = c.phi.iter().flatten().map(|x| x.total_degree()).max().unwrap_or(0);
    let k = dmax + 1;
    let (l1, src) = c.m_piece(r, k)?;
    let (l0, src0) = c.m_piece(r, k - 1)?;
    let pos: BTreeMap<(usize, u32, u32), usize> = src.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let off1 = l1.offset();
    let mut gens: Vec<Vec<WittElem>> = Vec::new();
    for j in 0..l1.rank() {
        gens.push(l1.basis().col(j).iter().map(|x| ring.mul_pk(x, (off1 + 1) as u32)).collect());
    }
    let off0 = l0.offset();
    for j in 0..l0.rank() {
        let col = l0.basis().col(j);
        for (da, db) in [(1, 0), (0, 1)] {
            let mut v = vec![WittElem::default(); src.len()];
            for (i, &(e, a, b)) in src0.iter().enumerate() {
                v[pos[&(e, a + da, b + db)]] = ring.mul_pk(&col[i], off0 as u32);
            }
            gens.push(v);
        }
    }
    let floor = (r - c.val).max(0) as u32 + 1;
    let l2 = Lattice::from_gens(ring, src.len(), 0, &gens, Some(floor))?;
    let fiber = l2.volume() - l1.volume();
    // Generic rank: the rank of Φ₀ after a random specialization of (T1, T2),
    // which bounds the rank of M^r ⊇ p^{r−val}·F^*D from both sides.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let (t1, t2): (i64, i64) = (rng.gen_range(1..1000), rng.gen_range(1..1000));
    let spec = Mat::from_fn(n, n, |i, j| {
        c.phi[i][j].terms().fold(ring.zero(), |acc, (&(a, b), v)| {
            let m = ring.mul(&ring.pow(&ring.from_i64(t1), a as u64), &ring.pow(&ring.from_i64(t2), b as u64));
            ring.add(&acc, &ring.mul(v, &m))
        })
    });
    let generic = elementary_divisors(ring, &spec).iter().filter(|&&e| e < ring.prec()).count();
    if generic != n {
        return Err(Error::invalid("Φ is degenerate at the sampled point"));
    }
    Ok(RankJump { r, generic_rank: n, fiber_rank: fiber.max(0) as usize, jump: fiber as usize > n })
}

#[cfg(test)]
mod tests {
    use super::super::{AffineBase, LMat, Laurent};
    use super::*;

    #[test]
    fn snf_over_fp_t() {
        // diag(T, T + 1) has invariant factors 1, T(T + 1).
        let a = vec![vec![vec![0, 1], vec![]], vec![vec![], vec![1, 1]]];
        let (d, _) = poly_snf(a, 2, 2, 3);
        assert_eq!(d, vec![vec![1], vec![0, 1, 1]]);
    }

    #[test]
    fn unit_is_uniform() {
        let b = AffineBase::standard(BaseKind::AffineLine, 3, 5, 6).unwrap();
        let d = LiftedCrystal::unit(&b);
        assert_eq!(uniformity_check(&d, -1..=3).unwrap(), Uniformity::ProbablyUniform);
        let c = LiftedCrystal::new(&b, 0, LMat::from_ints(b.ring(), &[&[1, 0], &[0, 3]]), LMat::zeros(2), None).unwrap();
        assert_eq!(uniformity_check(&c, 0..=2).unwrap(), Uniformity::ProbablyUniform);
        let _ = Laurent::zero();
    }

    #[test]
    fn rank_three_line_witness() {
        for p in [2u64, 3] {
            let d = rank_three_line(p, 6, 2 * p as i32).unwrap();
            assert!(d.check_compatibility().ok);
            assert_eq!(uniformity_at(&d, 1).unwrap(), Uniformity::ProbablyUniform);
            match uniformity_at(&d, 2).unwrap() {
                Uniformity::CertifiedNonuniform { witness, .. } => assert_eq!(witness, format!("T^{p}⊗e3")),
                u => panic!("{u:?}"),
            }
        }
    }

    #[test]
    fn origin_fiber_jump() {
        let c = TwoVarCrystal::rank_three_example(2, 6).unwrap();
        let j = two_variable_rank_jump(&c, 1).unwrap();
        assert_eq!(j.generic_rank, 3);
        assert_eq!(j.fiber_rank, 4);
        assert!(j.jump);
        assert!(!two_variable_rank_jump(&c, 0).unwrap().jump);
    }
}
