use fcrystal::fcrystal_point::FCrystalPoint;
use fcrystal::gen::{random_lift_change, random_uniform_lifted, random_uniform_torus, seeded};
use fcrystal::lifted::{
    bracket_invariance_check, cartier, cocycle_of_extension, delta_of, eta_quasi_iso_check, extension_of_cocycle, inverse_cartier,
    is_cocycle, lie_rank_check, lifting_example, rank_three_line, same_class, syntomic_lifted, two_variable_rank_jump, uniformity_at,
    AffineBase, BaseKind, Form, LMat, Laurent, LiftedCrystal, Selection, TwoVarCrystal, Uniformity,
};
use fcrystal::padic::WittRing;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;

fn unit_on(kind: BaseKind, p: u64) -> LiftedCrystal {
    LiftedCrystal::unit(&AffineBase::standard(kind, p, 8, 12).unwrap())
}

#[test]
fn unit_crystal_identities() {
    for kind in [BaseKind::AffineLine, BaseKind::Torus] {
        for p in [2u64, 3] {
            let d = unit_on(kind, p);
            assert!(d.check_compatibility().ok);
            for r in -1..=3 {
                assert!(d.griffiths_check_graded(r, 12).unwrap(), "{kind:?} p={p} r={r}");
                assert!(d.fstar_a_vs_m_graded(r, 12).unwrap(), "{kind:?} p={p} r={r}");
                assert!(eta_quasi_iso_check(&d, r, 12, false).unwrap().ok, "{kind:?} p={p} r={r}");
            }
        }
    }
    let d = unit_on(BaseKind::AffineLine, 3);
    for r in 0..=2 {
        assert!(eta_quasi_iso_check(&d, r, 12, true).unwrap().ok);
    }
}

#[test]
fn random_uniform_crystals() {
    let mut rng = seeded(707);
    for _ in 0..12 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let d = random_uniform_lifted(&mut rng, p, 8, 8);
        assert!(d.check_compatibility().ok);
        for r in 0..=2 {
            assert!(d.griffiths_check_graded(r, 8).unwrap(), "{:?}", d.phi());
            assert!(d.fstar_a_vs_m_graded(r, 8).unwrap(), "{:?}", d.phi());
            let rep = eta_quasi_iso_check(&d, r, 8, false).unwrap();
            assert!(rep.ok, "{rep:?}");
        }
    }
}

#[test]
fn rank_three_on_the_line_is_not_uniform() {
    let d = rank_three_line(2, 8, 8).unwrap();
    assert!(d.check_compatibility().ok);
    match uniformity_at(&d, 2).unwrap() {
        Uniformity::CertifiedNonuniform { witness, .. } => assert_eq!(witness, "T^2⊗e3"),
        u => panic!("{u:?}"),
    }
    let c = TwoVarCrystal::rank_three_example(3, 6).unwrap();
    let j = two_variable_rank_jump(&c, 1).unwrap();
    assert_eq!((j.generic_rank, j.fiber_rank, j.jump), (3, 4, true));
}

/// δ = p^{-1}·log(1 + p·T) = Σ_k (−1)^{k+1}·p^{k−1}·T^k/k with rational
/// coefficients, reduced mod p^N through the inverse of the odd part.
fn log_series_oracle(p: i128, n: u32, k: i128) -> i128 {
    let c = Ratio::new(if k % 2 == 1 { 1 } else { -1 } * p.pow(k as u32 - 1), k);
    let m = p.pow(n);
    let (num, den) = (*c.numer(), *c.denom());
    let inv = (1..m).find(|x| (x * den).rem_euclid(m) == 1).expect("denominator prime to p");
    (num.rem_euclid(m) * inv).rem_euclid(m)
}

#[test]
fn change_of_lifting_at_two() {
    let ring = WittRing::new(2, 1, 8).unwrap();
    let g = Laurent::from_terms(&ring, &[(3, 1)]);
    let delta = delta_of(&ring, 2, &g);
    for k in 1..=20 {
        let got = ring.centered(&delta.coeff(k))[0].rem_euclid(256) as i128;
        assert_eq!(got, log_series_oracle(2, 8, k as i128), "coefficient of T^{k}");
    }
    assert!(delta.coeff(0) == ring.zero() && delta.coeff(21) == ring.zero());

    let rep = lifting_example(2, 3, 8, 3, None).unwrap();
    assert!(rep.a && rep.horizontal && rep.eps_invertible && rep.small_i && rep.c, "{rep:?}");
    assert_eq!((rep.b, rep.d), (Some(true), Some(true)));
    // Φ_G(e1) = 2e1 + 2δe0.
    let scale = rep.phi_g.at(1, 1).coeff(0);
    assert_eq!(ring.centered(&scale)[0], 2);
    assert_eq!(rep.phi_g.at(0, 1), &delta.mul_pk(&ring, 1));
}

#[test]
fn bracket_filtration_is_lift_independent() {
    let mut rng = seeded(808);
    for _ in 0..6 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let rank = rng.gen_range(1..=3);
        let d = random_uniform_torus(&mut rng, p, rank, 8, 8);
        let g = random_lift_change(&mut rng, d.ring());
        assert!(bracket_invariance_check(&d, &g, 2, 0..rank as i32 + 1).unwrap(), "{:?} with g = {:?}", d.phi(), g);
    }
}

/// Indices reachable from j through non-zero entries of ∇ (column j → row i).
fn nabla_closure(d: &LiftedCrystal, j: usize) -> Vec<usize> {
    let mut out = vec![j];
    let mut k = 0;
    while k < out.len() {
        let c = out[k];
        for i in 0..d.rank() {
            if i != c && !d.nabla().at(i, c).is_zero() && !out.contains(&i) {
                out.push(i);
            }
        }
        k += 1;
    }
    out
}

#[test]
fn descent_of_stable_submodules() {
    let mut rng = seeded(909);
    let mut checked = 0;
    while checked < 20 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let d = random_uniform_lifted(&mut rng, p, 8, 6);
        let ring = d.ring().clone();
        let n = d.rank();
        let s = nabla_closure(&d, rng.gen_range(0..n));
        let gens: Vec<Vec<Laurent>> = s
            .iter()
            .map(|&i| {
                let mut v = vec![Laurent::zero(); n];
                v[i] = Laurent::one(&ring).mul_pk(&ring, rng.gen_range(0..=1));
                v
            })
            .collect();
        let floor = rng.gen_range(1..=3);
        assert!(d.descent_check(&gens, floor, 6).unwrap(), "{:?} on {s:?}", d.phi());
        checked += 1;
    }
}

/// Φ = diag(1, p^{-1}): the crystal of Q_p/Z_p ⊕ μ_{p^∞}, with Lie algebra of rank one.
#[test]
fn lie_rank_of_ordinary_rank_two() {
    let b = AffineBase::standard(BaseKind::AffineLine, 3, 8, 6).unwrap();
    let d = LiftedCrystal::constant(&b, -1, &[&[3, 0], &[0, 1]]).unwrap();
    let lie = lie_rank_check(&d, 0, 6).unwrap();
    assert_eq!(lie.rank, Some(1), "{lie:?}");
    let ring = WittRing::new(3, 1, 8).unwrap();
    let pt = FCrystalPoint::from_ints(&ring, -1, &[&[3, 0], &[0, 1]]).unwrap();
    assert_eq!(pt.syntomic().unwrap().t0.order_val(), Some(1));
}

#[test]
fn lifted_syntomic_and_cocycles() {
    for kind in [BaseKind::AffineLine, BaseKind::Torus] {
        let d = unit_on(kind, 3);
        let s = syntomic_lifted(&d, &Selection::window(1, if kind == BaseKind::Torus { -4 } else { 0 }, 4)).unwrap();
        assert_eq!(s.h0.free_rank, 1);
        assert!(s.h0.exps.is_empty());
    }
    let b = AffineBase::standard(BaseKind::AffineLine, 3, 8, 6).unwrap();
    let ring = b.ring().clone();
    let d = LiftedCrystal::new(&b, 1, LMat::from_ints(&ring, &[&[1]]), LMat::zeros(1), Some(vec![0])).unwrap();
    // Φ = p: a constant x with ω = 0 is a cocycle.
    let omega = vec![Laurent::zero()];
    let x = vec![Laurent::from_terms(&ring, &[(0, 4)])];
    assert!(is_cocycle(&d, &omega, &x).unwrap());
    let e = extension_of_cocycle(&d, &omega, &x).unwrap();
    let one = Laurent::one(&ring);
    let (w1, x1) = cocycle_of_extension(&e, &[Laurent::zero(), one.clone()]).unwrap();
    assert_eq!((&w1, &x1), (&omega, &x));
    let (w2, x2) = cocycle_of_extension(&e, &[Laurent::from_terms(&ring, &[(2, 5)]), one]).unwrap();
    assert!(same_class(&d, (&w1, &x1), (&w2, &x2), &Selection::window(1, 0, 4)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cartier_inverts_its_inverse(terms in prop::collection::vec((0i32..20, -5i64..5), 0..6), torus in any::<bool>()) {
        let kind = if torus { BaseKind::Torus } else { BaseKind::AffineLine };
        let f = Form::new(kind, 3, 1, &terms).unwrap();
        prop_assert_eq!(cartier(&inverse_cartier(&f)).unwrap(), f.clone());
        prop_assert!(inverse_cartier(&cartier(&f).unwrap()).sub(&f).is_exact());
        let h = Form::new(kind, 3, 0, &terms).unwrap();
        prop_assert!(cartier(&h.d()).unwrap().is_zero());
    }
}
