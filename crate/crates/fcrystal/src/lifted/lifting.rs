//! Change of Frobenius lift, the divided-power filtration A^{[i]}, and the
//! nilpotent torus example comparing A^i for two lifts.

use super::{AffineBase, BaseKind, LMat, Laurent, LiftedCrystal, Selection, SubmodulePresentation};
use crate::error::{Error, Result};
use crate::padic::{vp_factorial, PadicScalar, WittElem, WittRing};
use crate::semilinear::{kernel_known, Lattice, Mat};

/// p^{[j]} = p^j / j!.
pub fn divided_power(ring: &WittRing, j: u64) -> Result<PadicScalar> {
    if j > 1 << 20 {
        return Err(Error::precision(format!("divided power p^[{j}] is out of range")));
    }
    let p = ring.p();
    let mut unit = ring.one();
    for k in 1..=j {
        let mut m = k;
        while m % p == 0 {
            m /= p;
        }
        unit = ring.mul(&unit, &ring.from_u64(m));
    }
    let inv = ring.inv_unit(&unit).expect("unit part of j! is a unit");
    Ok(PadicScalar { val: (j - vp_factorial(j, p)) as i32, unit: inv, zero: false })
}

fn dp_elem(ring: &WittRing, j: u64) -> Result<WittElem> {
    Ok(divided_power(ring, j)?.to_elem(ring).expect("p^[j] is integral"))
}

/// ∂ = ∇(d/dT) on coefficient vectors.
fn partial(d: &LiftedCrystal, x: &[Laurent]) -> Vec<Laurent> {
    let w = d.nabla_apply(x);
    match d.base().kind() {
        BaseKind::Torus => w.iter().map(|c| c.shift(-1)).collect(),
        BaseKind::AffineLine => w,
    }
}

#[derive(Clone, Debug)]
pub struct ChangeOfLifting {
    /// Column i is ε(η_G(e_i)) in the basis η_F(e_k).
    pub eps: LMat,
    /// Number of Taylor terms before the tail vanished.
    pub terms: usize,
}

/// ε_{G,F}(η_G(e')) = Σ_j p^{[j]}·g^j·η_F(∂^j e') for G = F + p·g, where F
/// is the lift of `d`'s base. The series is summed until 4N consecutive
/// indices contribute nothing modulo p^N.
pub fn change_of_lifting(d: &LiftedCrystal, g: &Laurent) -> Result<ChangeOfLifting> {
    let ring = d.ring();
    let n = d.rank();
    let depth = 4 * ring.prec() as usize;
    let mut eps = LMat::zeros(n);
    let mut terms = 0;
    for i in 0..n {
        let mut v = vec![Laurent::zero(); n];
        v[i] = Laurent::one(ring);
        let mut gj = Laurent::one(ring);
        let mut acc = vec![Laurent::zero(); n];
        let mut last = 0;
        for j in 0..=2 * depth {
            if v.iter().all(|x| x.is_zero()) {
                break;
            }
            let c = dp_elem(ring, j as u64)?;
            let t: Vec<Laurent> = d.eta(&v).iter().map(|x| x.mul(ring, &gj).scale(ring, &c)).collect();
            if t.iter().any(|x| !x.is_zero()) {
                last = j;
                for (a, b) in acc.iter_mut().zip(&t) {
                    *a = a.add(ring, b);
                }
            }
            if j > last + depth {
                break;
            }
            if j == 2 * depth {
                return Err(Error::precision(format!(
                    "Taylor series for ε does not decay: term {last} on e_{i} is still non-zero mod p^N"
                )));
            }
            v = partial(d, &v);
            gj = gj.mul(ring, g);
        }
        terms = terms.max(last + 1);
        for (k, a) in acc.into_iter().enumerate() {
            eps.set(k, i, a);
        }
    }
    Ok(ChangeOfLifting { eps, terms })
}

/// The crystal with Frobenius Φ_G = Φ̃_F∘ε over the base with lift G = F + p·g.
pub fn regauge(d: &LiftedCrystal, g: &Laurent) -> Result<(LiftedCrystal, ChangeOfLifting)> {
    let ring = d.ring();
    let fg = d.base().g().add(ring, g);
    let base = d.base().with_lift(fg)?;
    let c = change_of_lifting(d, g)?;
    let phi = d.phi().mul(ring, &c.eps);
    Ok((d.with_base(&base, phi, d.val())?, c))
}

/// A^{[i]} = Σ_j p^{[j]}·A^{i−j} on span(sel).
pub fn filtration_a_bracket(d: &LiftedCrystal, i: i32, sel: &Selection) -> Result<SubmodulePresentation> {
    let ring = d.ring();
    let p = ring.p() as i64;
    let full = d.val();
    let v = |j: i64| j - vp_factorial(j as u64, p as u64) as i64;
    let mut acc: Option<Lattice> = None;
    let jmax = (i - full).max(0) as i64;
    let add = |l: Lattice, acc: &mut Option<Lattice>| -> Result<()> {
        *acc = Some(match acc.take() {
            None => l,
            Some(a) => a.sum(ring, &l)?,
        });
        Ok(())
    };
    for j in 0..jmax {
        let a = d.filtration_a(i - j as i32, sel)?;
        add(a.lattice.scale(v(j) as i32), &mut acc)?;
    }
    // A^{i−j} is everything once i − j ≤ val; take the least p^{[j]} beyond.
    let vmin = (jmax..=2 * jmax + 2 * p + 2).map(v).min().unwrap();
    add(Lattice::standard(ring, sel.len(), vmin as i32), &mut acc)?;
    Ok(SubmodulePresentation { rank: d.rank(), sel: sel.clone(), lattice: acc.unwrap() })
}

/// L ∩ span(inner) for a lattice L in the coordinates of `outer` ⊇ `inner`.
pub fn restrict_lattice(ring: &WittRing, l: &Lattice, outer: &Selection, inner: &Selection) -> Result<Lattice> {
    let off = l.offset();
    if off < 0 {
        return Err(Error::invalid("restriction expects an integral lattice"));
    }
    let b = l.basis().mul_pk(ring, off as u32);
    let out_rows: Vec<usize> = (0..outer.len()).filter(|&r| inner.position(&outer.indices()[r]).is_none()).collect();
    let proj = Mat::from_fn(out_rows.len(), b.cols, |i, j| b.get(out_rows[i], j));
    let k = if out_rows.is_empty() { Mat::identity(ring, b.cols) } else { kernel_known(ring, &proj, ring.prec()) };
    let gens = b.mul(ring, &k);
    let cols: Vec<Vec<WittElem>> = (0..gens.cols)
        .map(|j| inner.indices().iter().map(|idx| gens.get(outer.position(idx).expect("inner ⊆ outer"), j)).collect())
        .collect();
    let floor = l.bound() + off as u32;
    Lattice::from_gens(ring, inner.len(), 0, &cols, Some(floor))
}

#[derive(Clone, Debug)]
pub struct LiftingReport {
    pub p: u64,
    pub rank: usize,
    pub g: String,
    /// δ = p^{-1}·log(1 + p·T^{-p}·g).
    pub delta: Laurent,
    pub phi_g: LMat,
    /// Φ_G and ∇ are compatible over the second lift.
    pub horizontal: bool,
    /// ε_{F,G}·ε_{G,F} = 1.
    pub eps_invertible: bool,
    /// (a) Φ_G(e_i) = p^i·Σ_j δ^{[j]}·e_{i−j}.
    pub a: bool,
    /// (b) e_2 ∈ A²_F but e_2 ∉ A²_G (needs p = 2, rank ≥ 3, δ ≢ 0 mod p).
    pub b: Option<bool>,
    /// (c) A^{[i]}_F = A^{[i]}_G for 0 ≤ i < rank on the inner window.
    pub c: bool,
    /// (d) e_2 − 2δ'·e_0 ∈ A²_G with G^*(δ') ≡ δ² mod 2.
    pub d: Option<bool>,
    /// e_i ∈ A^i for both lifts and all i < min(p, rank).
    pub small_i: bool,
}

/// A^{[i]}_F = A^{[i]}_G for G = F + p·g and i in `levels`, compared on
/// weights [−M, M] inside a window with a margin for elements whose
/// decomposition leaves it.
pub fn bracket_invariance_check(d: &LiftedCrystal, g: &Laurent, window: i32, levels: std::ops::Range<i32>) -> Result<bool> {
    let ring = d.ring();
    let n = d.rank();
    let (dg, _) = regauge(d, g)?;
    let margin = 2 * n as i32 + 2;
    let inner = Selection::window(n, -window, window);
    let outer = Selection::window(n, -window - margin, window + margin);
    for i in levels {
        let lf = restrict_lattice(ring, &filtration_a_bracket(d, i, &outer)?.lattice, &outer, &inner)?;
        let lg = restrict_lattice(ring, &filtration_a_bracket(&dg, i, &outer)?.lattice, &outer, &inner)?;
        if lf != lg {
            return Ok(false);
        }
    }
    Ok(true)
}

/// δ = Σ_k (−1)^{k+1}·p^{k−1}·h^k/k with h = T^{-p}·g.
pub fn delta_of(ring: &WittRing, p: u64, g: &Laurent) -> Laurent {
    let h = g.shift(-(p as i32));
    let mut out = Laurent::zero();
    let mut hk = Laurent::one(ring);
    for k in 1..=(4 * ring.prec() as u64 + 8) {
        hk = hk.mul(ring, &h);
        let v = vp_factorial(k, p) - vp_factorial(k - 1, p);
        let e = (k - 1) as i64 - v as i64;
        if e >= ring.prec() as i64 {
            continue;
        }
        let mut unit = k;
        while unit % p == 0 {
            unit /= p;
        }
        let mut c = ring.mul_pk(&ring.inv_unit(&ring.from_u64(unit)).unwrap(), e as u32);
        if k % 2 == 0 {
            c = ring.neg(&c);
        }
        out = out.add(ring, &hk.scale(ring, &c));
    }
    out
}

/// The nilpotent crystal over the torus with ∇e_i = e_{i−1}·dT/T and
/// Φ̃_F(e'_i) = p^i·e_i for F = T^p.
pub fn lifting_crystal(p: u64, rank: usize, prec: u32, window: i32) -> Result<LiftedCrystal> {
    if rank < 2 {
        return Err(Error::invalid("the example needs at least two basis vectors"));
    }
    let base = AffineBase::standard(BaseKind::Torus, p, prec, window)?;
    let ring = base.ring().clone();
    let mut phi = LMat::zeros(rank);
    let mut nabla = LMat::zeros(rank);
    for i in 0..rank {
        phi.set(i, i, Laurent::one(&ring).mul_pk(&ring, i as u32));
        if i > 0 {
            nabla.set(i - 1, i, Laurent::one(&ring));
        }
    }
    LiftedCrystal::new(&base, 0, phi, nabla, Some(vec![0; rank]))
}

/// Builds the example, a second lift G = T^p + p·g (default g = T^{p+1},
/// so u = 1 + p·T), and checks the assertions of [`LiftingReport`].
pub fn lifting_example(p: u64, rank: usize, prec: u32, window: i32, g: Option<Laurent>) -> Result<LiftingReport> {
    let d = lifting_crystal(p, rank, prec, window)?;
    let ring = d.ring().clone();
    let g = g.unwrap_or_else(|| Laurent::monomial(ring.one(), p as i32 + 1));
    let (dg, eps) = regauge(&d, &g)?;
    let delta = delta_of(&ring, p, &g);

    // (a): columns of Φ_G against p^{i−j}·p^{[j]}·δ^j.
    let mut a = true;
    for i in 0..rank {
        for k in 0..rank {
            let expect = if k <= i {
                let j = (i - k) as u64;
                let c = ring.mul_pk(&dp_elem(&ring, j)?, k as u32);
                delta.pow(&ring, j as u32).scale(&ring, &c)
            } else {
                Laurent::zero()
            };
            if dg.phi().at(k, i).mul_pk(&ring, dg.val().max(0) as u32) != expect {
                a = false;
            }
        }
    }

    let horizontal = dg.check_compatibility().ok;
    let back = change_of_lifting(&dg, &g.neg(&ring))?;
    let prod = eps.eps.mul(&ring, &back.eps);
    let eps_invertible = prod == LMat::identity(&ring, rank);

    let unit_vec = |i: usize| {
        let mut v = vec![Laurent::zero(); rank];
        v[i] = Laurent::one(&ring);
        v
    };
    let small_i = (0..rank.min(p as usize)).all(|i| d.in_a(i as i32, &unit_vec(i)) && dg.in_a(i as i32, &unit_vec(i)));
    let delta_mod_p = delta.mod_pk(&ring, 1);
    let (b, dd) = if p == 2 && rank >= 3 && !delta_mod_p.is_zero() {
        let b = d.in_a(2, &unit_vec(2)) && !dg.in_a(2, &unit_vec(2));
        // δ' = δ mod 2 satisfies δ'(T^2) ≡ δ² mod 2.
        let mut v = unit_vec(2);
        v[0] = delta_mod_p.mul_pk(&ring, 1).neg(&ring);
        (Some(b), Some(dg.in_a(2, &v)))
    } else {
        (None, None)
    };

    let c = bracket_invariance_check(&d, &g, window, 0..rank as i32)?;
    Ok(LiftingReport {
        p,
        rank,
        g: g.to_string(&ring),
        delta,
        phi_g: dg.phi().clone(),
        horizontal,
        eps_invertible,
        a,
        b,
        c,
        d: dd,
        small_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divided_powers() {
        let r = WittRing::new(3, 1, 8).unwrap();
        assert_eq!(divided_power(&r, 0).unwrap(), PadicScalar::one(&r));
        assert_eq!(divided_power(&r, 1).unwrap().val, 1);
        let x = divided_power(&r, 4).unwrap();
        assert_eq!(x.val, 3);
        assert_eq!(r.mul(&x.unit, &r.from_u64(8)), r.one());
        let r2 = WittRing::new(2, 1, 8).unwrap();
        assert_eq!(divided_power(&r2, 2).unwrap().to_elem(&r2), Some(r2.from_u64(2)));
    }

    #[test]
    fn trivial_change_of_lift() {
        let d = lifting_crystal(3, 3, 6, 3).unwrap();
        let c = change_of_lifting(&d, &Laurent::zero()).unwrap();
        assert_eq!(c.eps, LMat::identity(d.ring(), 3));
    }

    #[test]
    fn example_p2() {
        let rep = lifting_example(2, 3, 8, 2, None).unwrap();
        assert!(rep.a && rep.horizontal && rep.eps_invertible && rep.small_i, "{rep:?}");
        assert_eq!(rep.b, Some(true));
        assert_eq!(rep.d, Some(true));
        assert!(rep.c);
    }
}
