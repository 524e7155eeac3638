use fcrystal::fcrystal_point::FCrystalPoint;
use fcrystal::gen::{random_point, random_point_crystal, seeded};
use fcrystal::padic::WittRing;
use fcrystal::semilinear::Lattice;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;

fn vp(mut x: i128, p: i128) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Integer lift of Φ₀ for a crystal over Z_p.
fn phi0(d: &FCrystalPoint) -> Vec<Vec<i128>> {
    let r = d.ring();
    let m = &d.phi().m;
    (0..m.rows).map(|i| (0..m.cols).map(|j| r.centered(m.at(i, j))[0] as i128).collect()).collect()
}

fn det2(a: &[Vec<i128>]) -> i128 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// x ∈ M^r iff v(Φ₀x) ≥ r − val; x ∈ N_r iff v(adj(Φ₀)x) ≥ val + v(det Φ₀) − r.
fn oracle_m(d: &FCrystalPoint, r: i32, x: &[i128]) -> bool {
    let p = d.ring().p() as i128;
    let a = phi0(d);
    let need = r - d.phi().val;
    (0..2).all(|i| {
        let y = a[i][0] * x[0] + a[i][1] * x[1];
        need <= 0 || vp(y, p) >= need as u32
    })
}

fn oracle_n(d: &FCrystalPoint, r: i32, x: &[i128]) -> bool {
    let p = d.ring().p() as i128;
    let a = phi0(d);
    let adj = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
    let need = d.phi().val + vp(det2(&a), p) as i32 - r;
    (0..2).all(|i| {
        let y = adj[i][0] * x[0] + adj[i][1] * x[1];
        need <= 0 || vp(y, p) >= need as u32
    })
}

#[test]
fn membership_matches_integer_oracle() {
    let mut rng = seeded(101);
    for _ in 0..40 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let ring = WittRing::new(p, 1, 12).unwrap();
        let d = random_point_crystal(&mut rng, &ring, 2, 4);
        let (lo, hi) = d.effective_range();
        for r in lo - 1..=hi + 1 {
            let m = d.filtration_m(r).unwrap();
            let n = d.filtration_n(r).unwrap();
            for _ in 0..30 {
                let x: Vec<i128> = (0..2).map(|_| (p as i128).pow(rng.gen_range(0..4)) * rng.gen_range(-20i128..=20)).collect();
                let xe: Vec<_> = x.iter().map(|&t| ring.from_i64(t as i64)).collect();
                assert_eq!(m.contains_vec(&ring, &xe, 0), oracle_m(&d, r, &x), "M^{r} of {:?} at {x:?}", d.phi());
                assert_eq!(n.contains_vec(&ring, &xe, 0), oracle_n(&d, r, &x), "N_{r} of {:?} at {x:?}", d.phi());
            }
        }
    }
}

#[test]
fn unit_negative_level_is_pw() {
    let r = WittRing::new(3, 1, 12).unwrap();
    let u = FCrystalPoint::unit(&r);
    assert_eq!(u.filtration_n(-1).unwrap(), Lattice::standard(&r, 1, 1));
}

#[test]
fn supersingular_slopes() {
    let r = WittRing::new(5, 1, 12).unwrap();
    let d = FCrystalPoint::from_ints(&r, 0, &[&[0, 5], &[1, 0]]).unwrap();
    assert_eq!(d.newton_slopes().unwrap(), vec![Ratio::new(1, 2); 2]);
    assert_eq!(d.hodge_slopes(), vec![0, 1]);
    assert!(d.newton_above_hodge().unwrap());
}

#[test]
fn ordinary_rank_two_frozen() {
    // Φ = diag(1, 3): N_0 = W ⊕ 3W, M^1 = 3W ⊕ W, frozen from the oracle above.
    let r = WittRing::new(3, 1, 12).unwrap();
    let d = FCrystalPoint::from_ints(&r, 0, &[&[1, 0], &[0, 3]]).unwrap();
    assert!(d.filtration_isomorphism_check(0).unwrap());
    assert_eq!(d.filtration_n(0).unwrap().volume(), 1);
    assert_eq!(d.filtration_m(1).unwrap().volume(), 1);
    assert_eq!(d.filtration_m(2).unwrap().volume(), 3);
    assert_eq!(d.newton_slopes().unwrap(), vec![Ratio::from_integer(0), Ratio::from_integer(1)]);
}

/// Σ_{i+j=r} N_i(D)⊗N_j(D').
fn tensor_rhs(a: &FCrystalPoint, b: &FCrystalPoint, r: i32) -> Lattice {
    let ring = a.ring();
    let (lo, hi) = a.effective_range();
    let mut acc: Option<Lattice> = None;
    for i in lo - 1..=hi + 1 {
        let t = a.filtration_n(i).unwrap().tensor(ring, &b.filtration_n(r - i).unwrap()).unwrap();
        acc = Some(match acc {
            None => t,
            Some(x) => x.sum(ring, &t).unwrap(),
        });
    }
    acc.unwrap()
}

/// {λ ∈ D^* : λ(N_s(D)) ⊆ p^{−r−s}W for all s} = D^* ∩ ∩_s p^{−r−s}·N_s(D)^∨.
fn dual_rhs(a: &FCrystalPoint, r: i32) -> Lattice {
    let ring = a.ring();
    let (lo, hi) = a.effective_range();
    let mut acc = Some(Lattice::standard(ring, a.rank(), 0));
    for s in lo - 1..=hi + 1 {
        let t = a.filtration_n(s).unwrap().dual(ring).unwrap().scale(-r - s);
        acc = Some(match acc {
            None => t,
            Some(x) => x.intersect(ring, &t).unwrap(),
        });
    }
    acc.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filtration_axioms(seed in any::<u64>()) {
        let d = random_point(&mut seeded(seed), 4, 12);
        prop_assert!(d.stabilization_check().unwrap());
        let (lo, hi) = d.effective_range();
        for r in lo - 1..=hi + 1 {
            prop_assert!(d.filtration_isomorphism_check(r).unwrap());
            prop_assert!(d.filtration_sequences_check(r).unwrap());
            for s in -2..=2 {
                let t = d.tate_twist(s);
                prop_assert_eq!(t.filtration_n(r).unwrap(), d.filtration_n(r + s).unwrap());
                prop_assert_eq!(t.filtration_m(r).unwrap(), d.filtration_m(r + s).unwrap());
            }
        }
    }

    #[test]
    fn newton_above_hodge(seed in any::<u64>()) {
        let d = random_point(&mut seeded(seed), 4, 12);
        prop_assert!(d.newton_above_hodge().unwrap());
    }

    #[test]
    fn gauge_axioms(seed in any::<u64>()) {
        let d = random_point(&mut seeded(seed), 3, 12);
        let g = d.gauge().unwrap();
        prop_assert_eq!(g.lattices.len() as i32, g.r_max - g.r_min + 3);
    }

    #[test]
    fn tensor_and_dual_formulas(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (p, dd) = ([2u64, 3, 5][rng.gen_range(0..3)], rng.gen_range(1..=2));
        let ring = WittRing::new(p, dd, 12).unwrap();
        let (na, nb) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = random_point_crystal(&mut rng, &ring, na, 3);
        let b = random_point_crystal(&mut rng, &ring, nb, 3);
        let t = a.tensor(&b).unwrap();
        let du = a.dual().unwrap();
        let (lo, hi) = t.effective_range();
        for r in lo - 1..=hi + 1 {
            prop_assert_eq!(t.filtration_n(r).unwrap(), tensor_rhs(&a, &b, r));
        }
        let (lo, hi) = du.effective_range();
        for r in lo - 1..=hi + 1 {
            prop_assert_eq!(du.filtration_n(r).unwrap(), dual_rhs(&a, r));
        }
    }
}
