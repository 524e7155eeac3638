//! Seeded random instances for property tests, the acceptance suite and
//! benchmarks. Every generator rejects and redraws until its output meets
//! the stated constraints.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fcrystal_point::FCrystalPoint;
use crate::lifted::{AffineBase, BaseKind, LMat, Laurent, LiftedCrystal};
use crate::padic::{WittElem, WittRing};
use crate::semilinear::{Mat, PMatrix};
use crate::zeta::FgModule;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform element of W_N(F_q).
pub fn random_elem<R: Rng>(rng: &mut R, ring: &WittRing) -> WittElem {
    let m = ring.modulus();
    let cs: Vec<u64> = (0..ring.d()).map(|_| rng.gen_range(0..m)).collect();
    ring.from_coeffs(&cs)
}

pub fn random_unit<R: Rng>(rng: &mut R, ring: &WittRing) -> WittElem {
    loop {
        let x = random_elem(rng, ring);
        if ring.is_unit(&x) {
            return x;
        }
    }
}

/// p^v·(unit) with v uniform in [lo, hi], or zero with probability 1/4,
/// returned as (v, unit) with v = None for zero.
fn random_entry<R: Rng>(rng: &mut R, ring: &WittRing, lo: i32, hi: i32) -> Option<(i32, WittElem)> {
    if rng.gen_ratio(1, 4) {
        return None;
    }
    Some((rng.gen_range(lo..=hi), random_unit(rng, ring)))
}

/// Random crystal over a point: entries p^v·u with v ∈ [−2, 2]. Redraws
/// until Φ is invertible with elementary divisor spread at most `max_spread`.
pub fn random_point_crystal<R: Rng>(rng: &mut R, ring: &WittRing, rank: usize, max_spread: u32) -> FCrystalPoint {
    loop {
        let entries: Vec<Option<(i32, WittElem)>> = (0..rank * rank).map(|_| random_entry(rng, ring, -2, 2)).collect();
        let Some(vmin) = entries.iter().flatten().map(|e| e.0).min() else { continue };
        let m = Mat::from_fn(rank, rank, |i, j| match entries[i * rank + j] {
            Some((v, u)) => ring.mul_pk(&u, (v - vmin) as u32),
            None => ring.zero(),
        });
        if let Ok(d) = FCrystalPoint::new(ring, PMatrix::new(vmin, m, ring.prec())) {
            if d.spread() <= max_spread {
                return d;
            }
        }
    }
}

/// (p, d, rank) with p ∈ {2, 3, 5}, d ≤ 2 and rank ≤ `max_rank`.
pub fn random_point_shape<R: Rng>(rng: &mut R, max_rank: usize) -> (u64, usize, usize) {
    let p = *[2u64, 3, 5].choose(rng).unwrap();
    (p, rng.gen_range(1..=2), rng.gen_range(1..=max_rank))
}

/// Largest spread whose filtrations over the full effective range fit
/// in `prec` digits: M^{r} for r up to val + spread + 1 is cut out by Φ
/// modulo p^{spread + 1} and solved against a basis of spread `spread`.
pub fn max_spread_for(prec: u32) -> u32 {
    prec.saturating_sub(3) / 2
}

/// Random point crystal of a random shape at precision `prec`.
pub fn random_point<R: Rng>(rng: &mut R, max_rank: usize, prec: u32) -> FCrystalPoint {
    let (p, d, n) = random_point_shape(rng, max_rank);
    let ring = WittRing::new(p, d, prec).expect("small primes fit");
    random_point_crystal(rng, &ring, n, max_spread_for(prec))
}

/// Uniform graded crystal over the torus: a direct sum of ladders
/// Φ = u·p^s·diag(1, p, …, p^{k−1}) with ∇e_i = c·e_{i−1}·dT/T inside a
/// ladder, followed by the monomial gauge e_i ↦ T^{a_i}·e_i.
pub fn random_uniform_torus<R: Rng>(rng: &mut R, p: u64, rank: usize, prec: u32, window: i32) -> LiftedCrystal {
    let base = AffineBase::standard(BaseKind::Torus, p, prec, window).expect("valid base");
    let ring = base.ring().clone();
    loop {
        let mut phi = LMat::zeros(rank);
        let mut nabla = LMat::zeros(rank);
        let gauge: Vec<i32> = (0..rank).map(|_| rng.gen_range(-2..=2)).collect();
        let mut i = 0;
        while i < rank {
            let k = rng.gen_range(1..=rank - i);
            let s = rng.gen_range(0..=1u32);
            let u = random_unit(rng, &ring);
            let c = ring.from_i64(rng.gen_range(1..p as i64 * 2));
            for t in 0..k {
                let j = i + t;
                let e = (p as i32 * gauge[j]) - gauge[j];
                phi.set(j, j, Laurent::monomial(ring.mul_pk(&u, s + t as u32), e));
                if t > 0 {
                    nabla.set(j - 1, j, Laurent::monomial(c, gauge[j] - gauge[j - 1]));
                }
                nabla.set(j, j, Laurent::constant(ring.from_i64(gauge[j] as i64)));
            }
            i += k;
        }
        // Conjugate by a permutation so ladders are not always consecutive.
        let mut perm: Vec<usize> = (0..rank).collect();
        perm.shuffle(rng);
        let pm = |m: &LMat| {
            let mut out = LMat::zeros(rank);
            for a in 0..rank {
                for b in 0..rank {
                    out.set(perm[a], perm[b], m.at(a, b).clone());
                }
            }
            out
        };
        let mut w = vec![0; rank];
        for a in 0..rank {
            w[perm[a]] = gauge[a];
        }
        if let Ok(d) = LiftedCrystal::new(&base, 0, pm(&phi), pm(&nabla), Some(w)) {
            if d.check_compatibility().ok {
                return d;
            }
        }
    }
}

/// Constant crystal on the affine line: Φ = p^v·A with A an integral
/// matrix of small elementary divisors and ∇ = d.
pub fn random_constant_line<R: Rng>(rng: &mut R, p: u64, rank: usize, prec: u32, window: i32) -> LiftedCrystal {
    let base = AffineBase::standard(BaseKind::AffineLine, p, prec, window).expect("valid base");
    let ring = base.ring().clone();
    loop {
        let rows: Vec<Vec<i64>> = (0..rank)
            .map(|_| {
                (0..rank)
                    .map(|_| match random_entry(rng, &ring, 0, 2) {
                        Some((v, u)) => ring.centered(&ring.mul_pk(&u, v as u32))[0],
                        None => 0,
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let v = rng.gen_range(-1..=0);
        if let Ok(d) = LiftedCrystal::constant(&base, v, &refs) {
            let spread = crate::semilinear::elementary_divisors(&ring, &Mat::from_ints(&ring, &refs));
            if spread.iter().all(|&e| e <= 2) {
                return d;
            }
        }
    }
}

/// A uniform graded crystal on a random one-variable base.
pub fn random_uniform_lifted<R: Rng>(rng: &mut R, p: u64, prec: u32, window: i32) -> LiftedCrystal {
    let rank = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        random_uniform_torus(rng, p, rank, prec, window)
    } else {
        random_constant_line(rng, p, rank, prec, window)
    }
}

/// A second Frobenius lift G = F + p·g with g = c·T^k, k ∈ [p, p + 2].
pub fn random_lift_change<R: Rng>(rng: &mut R, ring: &WittRing) -> Laurent {
    let p = ring.p() as i32;
    Laurent::monomial(random_unit(rng, ring), rng.gen_range(p..=p + 2))
}

/// Random f.g. module with `free + torsion.len() ≤ max_rank` and torsion
/// exponents in [1, max_exp], with a random endomorphism.
pub fn random_module_endomorphism<R: Rng>(rng: &mut R, ring: &WittRing, max_rank: usize, max_exp: u32) -> (FgModule, Mat) {
    let n = rng.gen_range(1..=max_rank);
    let free = rng.gen_range(0..=n);
    let torsion: Vec<u32> = (0..n - free).map(|_| rng.gen_range(1..=max_exp)).collect();
    let m = FgModule { free, torsion };
    let h = Mat::from_fn(n, n, |i, j| {
        // Column j torsion forces zero free rows and divisibility p^{t_i − t_j}.
        let ti = (i >= free).then(|| m.torsion[i - free]);
        let tj = (j >= free).then(|| m.torsion[j - free]);
        let x = match random_entry(rng, ring, 0, 2) {
            Some((v, u)) => ring.mul_pk(&u, v as u32),
            None => ring.zero(),
        };
        match (ti, tj) {
            (None, Some(_)) => ring.zero(),
            (Some(a), Some(b)) if a > b => ring.mul_pk(&x, a - b),
            _ => x,
        }
    });
    (m, h)
}

/// Random integral square matrix with entries p^v·u, v ∈ [0, 2].
pub fn random_integral_mat<R: Rng>(rng: &mut R, ring: &WittRing, n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| match random_entry(rng, ring, 0, 2) {
        Some((v, u)) => ring.mul_pk(&u, v as u32),
        None => ring.zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_valid() {
        let a = random_point(&mut seeded(7), 4, 12);
        let b = random_point(&mut seeded(7), 4, 12);
        assert_eq!(a.phi(), b.phi());
        let mut rng = seeded(11);
        for _ in 0..10 {
            let d = random_uniform_lifted(&mut rng, 3, 6, 4);
            assert!(d.check_compatibility().ok);
            assert!(d.weights().is_some());
        }
        let ring = WittRing::new(2, 1, 8).unwrap();
        for _ in 0..20 {
            let (m, h) = random_module_endomorphism(&mut rng, &ring, 4, 3);
            assert!(m.is_endomorphism(&ring, &h));
        }
    }
}
