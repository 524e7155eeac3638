//! The acceptance suite: ten criteria, each a batch of independent
//! instances checked by exact equality at a declared precision.
//!
//! Instances are drawn from ChaCha streams keyed by (seed, criterion,
//! index), so the batch is the same whether it runs on one thread or many.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use fcrystal::fcrystal_point::{ExactnessVerdict, FCrystalPoint};
use fcrystal::gen::{
    random_elem, random_integral_mat, random_lift_change, random_module_endomorphism, random_point, random_point_crystal,
    random_uniform_lifted, random_uniform_torus, seeded,
};
use fcrystal::lifted::{
    bracket_invariance_check, delta_of, eta_quasi_iso_check, lie_rank_check, lifting_example, rank_three_line, two_variable_rank_jump,
    uniformity_at, AffineBase, BaseKind, Laurent, LiftedCrystal, Uniformity,
};
use fcrystal::padic::WittRing;
use fcrystal::semilinear::{Lattice, Mat};
use fcrystal::zeta::{det2_lemma_check, det_lemma_check, verify_class_number_point};
use fcrystal::{par, Error};
use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::doc::{CrystalDocument, Overrides};

/// Every comparison in the suite is an exact equality.
pub const TOLERANCE: u32 = 0;

pub const CRITERIA: &[(u32, &str)] = &[
    (1, "filtration axioms on random point crystals"),
    (2, "tensor and dual filtration formulas"),
    (3, "Newton polygon above Hodge polygon"),
    (4, "extensions: cocycle round trip and Ext count"),
    (5, "class-number identity and determinant lemmas"),
    (6, "lifted Griffiths, F^*A^r = M^r and eta quasi-isomorphism"),
    (7, "non-uniformity and non-exactness detection"),
    (8, "change of Frobenius lifting"),
    (9, "Frobenius gauge axioms"),
    (10, "Lie algebra identification"),
];

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides every declared precision; below a declaration the
    /// criterion is reported as insufficient.
    pub precision: Option<u32>,
    pub window: Option<i32>,
    /// Documents by name (the bundled set unless replaced).
    pub documents: BTreeMap<String, CrystalDocument>,
}

impl SuiteConfig {
    pub fn new(seed: u64, documents: BTreeMap<String, CrystalDocument>) -> Self {
        SuiteConfig { seed, precision: None, window: None, documents }
    }

    fn prec(&self, declared: u32) -> u32 {
        self.precision.map_or(declared, |p| p.max(declared))
    }

    fn window(&self, declared: i32) -> i32 {
        self.window.unwrap_or(declared)
    }

    fn doc(&self, name: &str) -> Result<&CrystalDocument, Error> {
        self.documents.get(name).ok_or_else(|| Error::invalid(format!("document {name:?} is missing")))
    }

    fn rng(&self, criterion: u32, index: usize) -> ChaCha8Rng {
        seeded(self.seed ^ ((criterion as u64) << 40) ^ index as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Insufficient,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub instances: usize,
    pub tolerance: u32,
    pub outcome: Outcome,
    /// First few failure descriptions.
    pub failures: Vec<String>,
    pub retry_precision: Option<u32>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Insufficient => "INSUFFICIENT",
        };
        let mut s = format!(
            "criterion {:>2} {tag:<12} {} [{} instances, tolerance {} (exact), {:.2?}]",
            self.id, self.title, self.instances, self.tolerance, self.elapsed
        );
        if let Some(n) = self.retry_precision {
            s.push_str(&format!(" retry with --precision {n}"));
        }
        for f in self.failures.iter().take(3) {
            s.push_str(&format!("\n    {f}"));
        }
        s
    }
}

/// Result of one instance: Ok(None) passes, Ok(Some(why)) fails.
type Check = Result<Option<String>, Error>;

fn fail_if(bad: bool, why: impl FnOnce() -> String) -> Check {
    Ok(bad.then(why))
}

struct Tally {
    instances: usize,
    failures: Vec<String>,
    retry: Option<u32>,
    insufficient: bool,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { instances: 0, failures: vec![], retry: None, insufficient: false, notes: vec![] }
    }

    fn add(&mut self, label: &str, results: Vec<Check>) {
        for (i, r) in results.into_iter().enumerate() {
            self.instances += 1;
            match r {
                Ok(None) => {}
                Ok(Some(why)) => self.failures.push(format!("{label} #{i}: {why}")),
                Err(Error::Precision { msg, retry }) => {
                    self.insufficient = true;
                    self.retry = self.retry.max(retry);
                    self.notes.push(format!("{label} #{i}: {msg}"));
                }
                Err(Error::Window { msg, .. }) => {
                    self.insufficient = true;
                    self.notes.push(format!("{label} #{i}: {msg}"));
                }
                Err(e) => self.failures.push(format!("{label} #{i}: {e}")),
            }
        }
    }

    fn finish(self, id: u32, elapsed: Duration) -> CriterionResult {
        let outcome = if !self.failures.is_empty() {
            Outcome::Fail
        } else if self.insufficient {
            Outcome::Insufficient
        } else {
            Outcome::Pass
        };
        let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("?");
        CriterionResult {
            id,
            title,
            instances: self.instances,
            tolerance: TOLERANCE,
            outcome,
            failures: self.failures,
            retry_precision: self.retry,
            notes: self.notes,
            elapsed,
        }
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run(cfg, id)).collect()
}

pub fn run(cfg: &SuiteConfig, id: u32) -> CriterionResult {
    let t = Instant::now();
    let mut tally = Tally::new();
    if let Some(p) = cfg.precision {
        let declared = declared_precision(id);
        if p < declared {
            tally.insufficient = true;
            tally.retry = Some(declared);
            tally.notes.push(format!("declared precision {declared} exceeds the requested {p}"));
            return tally.finish(id, t.elapsed());
        }
    }
    match id {
        1 => filtration_axioms(cfg, &mut tally),
        2 => tensor_dual(cfg, &mut tally),
        3 => newton_hodge(cfg, &mut tally),
        4 => extensions(cfg, &mut tally),
        5 => class_number(cfg, &mut tally),
        6 => lifted_identities(cfg, &mut tally),
        7 => nonuniformity(cfg, &mut tally),
        8 => change_of_lifting(cfg, &mut tally),
        9 => gauge(cfg, &mut tally),
        10 => lie(cfg, &mut tally),
        _ => tally.failures.push(format!("no criterion {id}")),
    }
    tally.finish(id, t.elapsed())
}

/// The precision each criterion is stated at.
pub fn declared_precision(id: u32) -> u32 {
    match id {
        1 | 2 | 3 | 5 | 9 => 12,
        4 => 5,
        6 | 8 | 10 => 8,
        _ => 6,
    }
}

fn indices(n: usize) -> Vec<usize> {
    (0..n).collect()
}

// Criterion 1 and the crystals reused by 3 and 9.

const AXIOM_INSTANCES: usize = 200;

fn axiom_crystal(cfg: &SuiteConfig, i: usize) -> FCrystalPoint {
    random_point(&mut cfg.rng(1, i), 4, cfg.prec(12))
}

fn filtration_axioms(cfg: &SuiteConfig, t: &mut Tally) {
    let res = par::map(&indices(AXIOM_INSTANCES), |&i| -> Check {
        let d = axiom_crystal(cfg, i);
        if !d.stabilization_check()? {
            return Ok(Some(format!("stabilization fails for {:?}", d.phi())));
        }
        let (lo, hi) = d.effective_range();
        for r in lo - 1..=hi + 1 {
            if !d.filtration_isomorphism_check(r)? {
                return Ok(Some(format!("p^-r Φ(M^r) ≠ N_r at r = {r}")));
            }
            if !d.filtration_sequences_check(r)? {
                return Ok(Some(format!("graded sequences fail at r = {r}")));
            }
            for s in -2..=2 {
                let tw = d.tate_twist(s);
                if tw.filtration_n(r)? != d.filtration_n(r + s)? || tw.filtration_m(r)? != d.filtration_m(r + s)? {
                    return Ok(Some(format!("twist by {s} does not shift level {r}")));
                }
            }
        }
        Ok(None)
    });
    t.add("random crystal", res);
}

// Criterion 2.

fn tensor_rhs(a: &FCrystalPoint, b: &FCrystalPoint, r: i32) -> Result<Lattice, Error> {
    let ring = a.ring();
    let (lo, hi) = a.effective_range();
    let mut acc: Option<Lattice> = None;
    for i in lo - 1..=hi + 1 {
        let x = a.filtration_n(i)?.tensor(ring, &b.filtration_n(r - i)?)?;
        acc = Some(match acc {
            None => x,
            Some(y) => y.sum(ring, &x)?,
        });
    }
    Ok(acc.expect("non-empty range"))
}

fn dual_rhs(a: &FCrystalPoint, r: i32) -> Result<Lattice, Error> {
    let ring = a.ring();
    let (lo, hi) = a.effective_range();
    let mut acc = Lattice::standard(ring, a.rank(), 0);
    for s in lo - 1..=hi + 1 {
        acc = acc.intersect(ring, &a.filtration_n(s)?.dual(ring)?.scale(-r - s))?;
    }
    Ok(acc)
}

fn pair(cfg: &SuiteConfig, i: usize) -> (FCrystalPoint, FCrystalPoint) {
    let mut rng = cfg.rng(2, i);
    let p = [2u64, 3, 5][rng.gen_range(0..3)];
    let ring = WittRing::new(p, rng.gen_range(1..=2), cfg.prec(12)).expect("small primes");
    let (na, nb) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let a = random_point_crystal(&mut rng, &ring, na, 3);
    let b = random_point_crystal(&mut rng, &ring, nb, 3);
    (a, b)
}

fn tensor_dual(cfg: &SuiteConfig, t: &mut Tally) {
    let res = par::map(&indices(50), |&i| -> Check {
        let (a, b) = pair(cfg, i);
        let tp = a.tensor(&b)?;
        let (lo, hi) = tp.effective_range();
        for r in lo - 1..=hi + 1 {
            if tp.filtration_n(r)? != tensor_rhs(&a, &b, r)? {
                return Ok(Some(format!("N_{r} of the tensor product")));
            }
        }
        let du = a.dual()?;
        let (lo, hi) = du.effective_range();
        for r in lo - 1..=hi + 1 {
            if du.filtration_n(r)? != dual_rhs(&a, r)? {
                return Ok(Some(format!("N_{r} of the dual")));
            }
        }
        Ok(None)
    });
    t.add("random pair", res);
}

// Criterion 3.

/// Newton above Hodge, re-embedding the generated entries at the precision
/// the characteristic polynomial asks for.
fn newton_above_hodge(d: &FCrystalPoint) -> Result<bool, Error> {
    let mut d = d.clone();
    loop {
        match d.newton_above_hodge() {
            Err(Error::Precision { retry: Some(n), .. }) if n > d.prec() && n <= 40 => d = d.at_precision(n)?,
            r => return r,
        }
    }
}

fn newton_hodge(cfg: &SuiteConfig, t: &mut Tally) {
    let res = par::map(&indices(AXIOM_INSTANCES), |&i| -> Check {
        let d = axiom_crystal(cfg, i);
        fail_if(!newton_above_hodge(&d)?, || format!("{:?}", d.phi()))
    });
    t.add("random crystal", res);
    let res = par::map(&indices(50), |&i| -> Check {
        let (a, b) = pair(cfg, i);
        for d in [a.dual()?, a, b] {
            if !newton_above_hodge(&d)? {
                return Ok(Some(format!("{:?}", d.phi())));
            }
        }
        Ok(None)
    });
    t.add("random pair", res);
    let check = || -> Check {
        let d = cfg.doc("supersingular")?.to_point(&Overrides { precision: cfg.precision, window: None }).map_err(cli_err)?;
        let newton = d.newton_slopes()?;
        fail_if(newton != vec![Ratio::new(1, 2); 2] || d.hodge_slopes() != vec![0, 1], || {
            format!("Newton {newton:?}, Hodge {:?}", d.hodge_slopes())
        })
    };
    t.add("supersingular", vec![check()]);
}

fn cli_err(e: crate::CliError) -> Error {
    match e {
        crate::CliError::Compute(e) => e,
        crate::CliError::Input(m) => Error::Invalid(m),
    }
}

// Criterion 4.

/// Orbits of x ∈ Φ(F^*D)/2^n under x ↦ x + (a − 1)z for rank one D with
/// Φ = a = 2^v·u over Z_2: the classes of extension matrices modulo base
/// change, counted by union-find.
pub fn brute_force_ext_count(a: i64, v: u32, n: u32) -> u64 {
    let m = 1i64 << n;
    let xs: Vec<i64> = (0..m).filter(|x| x % (1 << v) == 0).collect();
    let mut parent: Vec<usize> = (0..m as usize).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &x in &xs {
        for z in 0..m {
            let y = (x + (a - 1) * z).rem_euclid(m);
            if y % (1 << v) == 0 {
                let (rx, ry) = (find(&mut parent, x as usize), find(&mut parent, y as usize));
                parent[rx] = ry;
            }
        }
    }
    let mut roots: Vec<usize> = xs.iter().map(|&x| find(&mut parent, x as usize)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len() as u64
}

fn extensions(cfg: &SuiteConfig, t: &mut Tally) {
    let res = par::map(&indices(100), |&i| -> Check {
        let mut rng = cfg.rng(4, i);
        let d = random_point(&mut rng, 3, cfg.prec(12));
        let ring = d.ring().clone();
        let n = d.rank();
        let y: Vec<_> = (0..n).map(|_| random_elem(&mut rng, &ring)).collect();
        let x = d.phi().m.mul_vec(&ring, &y);
        let off = d.phi().val;
        let e = d.extension_of_cocycle(&x, off)?;
        let n0 = d.filtration_n(0)?;
        let c: Vec<_> = (0..n).map(|_| random_elem(&mut rng, &ring)).collect();
        let z: Vec<_> = n0.basis().mul_vec(&ring, &c).iter().map(|v| ring.mul_pk(v, n0.offset().max(0) as u32)).collect();
        for lift in [vec![ring.zero(); n], z] {
            let (x2, off2) = FCrystalPoint::cocycle_of_extension(&e, &lift)?;
            if !d.same_class((&x, off), (&x2, off2))? {
                return Ok(Some("round trip changed the class".into()));
            }
        }
        Ok(None)
    });
    t.add("cocycle round trip", res);
    let prec = cfg.prec(5);
    let cases: Vec<(u32, i64)> = (0..=2u32).flat_map(|v| (3..32).step_by(2).map(move |u| (v, u))).collect();
    let res = par::map(&cases, |&(v, u)| -> Check {
        let ring = WittRing::new(2, 1, prec)?;
        let a = (1i64 << v) * u;
        let h1 = FCrystalPoint::from_ints(&ring, 0, &[&[a]])?.ext_unit()?;
        let count = h1.order_val().map(|e| 1u64 << e);
        let oracle = brute_force_ext_count(a, v, prec);
        fail_if(count != Some(oracle), || format!("Φ = {a}: H¹ gives {count:?}, classification gives {oracle}"))
    });
    t.add("Ext count", res);
}

// Criterion 5.

fn vp_i64(mut x: i64, p: i64) -> i64 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Draws until `want` instances are applicable; inapplicable draws (and
/// singular determinant-lemma inputs) are counted in the notes.
fn applicable<F>(cfg: &SuiteConfig, id: u32, salt: usize, want: usize, f: F) -> (Vec<Check>, usize)
where
    F: Fn(&mut ChaCha8Rng) -> Check + Sync + Send,
{
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut next = 0;
    while out.len() < want && next < 20 * want {
        let batch: Vec<usize> = (next..next + want).collect();
        next += want;
        for r in par::map(&batch, |&i| f(&mut cfg.rng(id, salt + i))) {
            match r {
                Err(Error::Inapplicable(_)) => skipped += 1,
                r if out.len() < want => out.push(r),
                _ => {}
            }
        }
    }
    (out, skipped)
}

fn class_number(cfg: &SuiteConfig, t: &mut Tally) {
    let prec = cfg.prec(12);
    let twists: Vec<(u64, i32)> = [2u64, 3, 5].iter().flat_map(|&p| (1..=4).map(move |r| (p, r))).collect();
    let res = par::map(&twists, |&(p, r)| -> Check {
        let ring = WittRing::new(p, 1, prec)?;
        let rep = verify_class_number_point(&FCrystalPoint::unit(&ring).tate_twist(r))?;
        let ok = rep.verdict && rep.lhs_valuation == -(r as i64) && rep.syntomic.t0.order_val() == Some(r as u64);
        fail_if(!ok, || format!("unit({r}) at p = {p}: {rep:?}"))
    });
    t.add("unit twist", res);
    // a ≡ 1 mod p is the anomalous case.
    let elliptic = [(5i64, 1i64), (5, 2), (5, 3), (7, 1), (7, 2), (3, 1), (3, 2)];
    let res = par::map(&elliptic, |&(p, a)| -> Check {
        let ring = WittRing::new(p as u64, 1, prec)?;
        let d = FCrystalPoint::from_ints(&ring, 0, &[&[0, -p], &[1, a]])?;
        let rep = verify_class_number_point(&d)?;
        let expect = vp_i64(1 - a + p, p);
        fail_if(!rep.verdict || rep.lhs_valuation != expect, || format!("p = {p}, a = {a}: {rep:?}, expected lhs {expect}"))
    });
    t.add("elliptic-shaped", res);
    let (res, skipped) = applicable(cfg, 5, 0, 50, |rng| {
        let d = random_point(rng, 3, prec);
        let rep = verify_class_number_point(&d)?;
        fail_if(!rep.verdict, || format!("{:?}: {rep:?}", d.phi()))
    });
    t.notes.push(format!("class number: {skipped} inapplicable draws skipped"));
    t.add("random admissible", res);
    let (res, skipped) = applicable(cfg, 5, 1 << 20, 200, |rng| {
        let p = [2u64, 3, 5][rng.gen_range(0..3)];
        let ring = WittRing::new(p, rng.gen_range(1..=2), prec.min(10))?;
        let (m, h) = random_module_endomorphism(rng, &ring, 4, 3);
        match det_lemma_check(&ring, &m, &h) {
            Ok(rep) => fail_if(!rep.holds, || format!("{rep:?}")),
            // Singular on the free part: the cokernel is infinite.
            Err(Error::Precision { .. }) => Err(Error::Inapplicable("singular".into())),
            Err(e) => Err(e),
        }
    });
    t.notes.push(format!("determinant lemma: {skipped} singular draws skipped"));
    t.add("determinant lemma", res);
    let (res, skipped) = applicable(cfg, 5, 2 << 20, 200, |rng| {
        let ring = WittRing::new(2, 2, prec.min(10))?;
        let n = rng.gen_range(1..=3);
        let a = random_integral_mat(rng, &ring, n);
        let b = random_integral_mat(rng, &ring, n);
        match det2_lemma_check(&ring, &a, &b) {
            Ok(rep) => fail_if(!rep.holds, || format!("{rep:?}")),
            // det(1 − φ) ≡ 0 mod p^N: finiteness of the cokernels is not certified.
            Err(Error::Precision { .. }) => Err(Error::Inapplicable("singular".into())),
            Err(e) => Err(e),
        }
    });
    t.notes.push(format!("two-map lemma: {skipped} inapplicable or singular draws skipped"));
    t.add("two-map determinant lemma", res);
}

// Criterion 6.

fn lifted_suite(d: &LiftedCrystal, window: i32) -> Check {
    if !d.check_compatibility().ok {
        return Ok(Some("Φ is not horizontal".into()));
    }
    let lo = d.val().min(0) - 1;
    for r in lo..=lo + 3 {
        if !d.griffiths_check_graded(r, window)? {
            return Ok(Some(format!("Griffiths transversality at r = {r}")));
        }
        if !d.fstar_a_vs_m_graded(r, window)? {
            return Ok(Some(format!("F^*A^r ≠ M^r at r = {r}")));
        }
        let rep = eta_quasi_iso_check(d, r, window, false)?;
        if !rep.ok {
            return Ok(Some(format!("η is not a quasi-isomorphism at r = {r}, weight {:?}", rep.failing_weight)));
        }
    }
    Ok(None)
}

const UNIFORM_DOCS: [&str; 4] = ["unit_line", "unit_torus", "p_divisible_line", "lifting_torus"];

fn lifted_identities(cfg: &SuiteConfig, t: &mut Tally) {
    let o = Overrides { precision: Some(cfg.prec(8)), window: Some(cfg.window(64)) };
    let res = par::map(&UNIFORM_DOCS, |name| -> Check {
        let d = cfg.doc(name)?.to_lifted(&o).map_err(cli_err)?;
        lifted_suite(&d, o.window.unwrap()).map(|r| r.map(|why| format!("{name}: {why}")))
    });
    t.add("bundled", res);
    let res = par::map(&indices(20), |&i| -> Check {
        let mut rng = cfg.rng(6, i);
        let p = [2u64, 3][rng.gen_range(0..2)];
        let d = random_uniform_lifted(&mut rng, p, o.precision.unwrap(), o.window.unwrap());
        lifted_suite(&d, o.window.unwrap())
    });
    t.add("random uniform", res);
}

// Criterion 7.

fn nonuniformity(cfg: &SuiteConfig, t: &mut Tally) {
    let o = Overrides { precision: cfg.precision, window: None };
    let line = || -> Check {
        let d = cfg.doc("rank_three_line")?.to_lifted(&o).map_err(cli_err)?;
        let p = d.ring().p();
        if uniformity_at(&d, 1)? != Uniformity::ProbablyUniform {
            return Ok(Some("M^1 reported non-uniform".into()));
        }
        match uniformity_at(&d, 2)? {
            Uniformity::CertifiedNonuniform { witness, .. } if witness == format!("T^{p}⊗e3") => Ok(None),
            u => Ok(Some(format!("M^2: {u:?}"))),
        }
    };
    let line3 = || -> Check {
        let d = rank_three_line(3, cfg.prec(6), 6)?;
        fail_if(!matches!(uniformity_at(&d, 2)?, Uniformity::CertifiedNonuniform { ref witness, .. } if witness == "T^3⊗e3"), || {
            "p = 3 witness".into()
        })
    };
    let plane = || -> Check {
        let c = cfg.doc("rank_three_plane")?.to_plane(&o).map_err(cli_err)?;
        let j = two_variable_rank_jump(&c, 1)?;
        fail_if(!j.jump || j.generic_rank != 3 || j.fiber_rank != 4, || format!("{j:?}"))
    };
    let non_exact = || -> Check {
        let d = cfg.doc("non_exact")?.to_point(&o).map_err(cli_err)?;
        let ring = d.ring().clone();
        let one = FCrystalPoint::unit(&ring);
        let f = Mat::from_ints(&ring, &[&[1], &[0]]);
        let g = Mat::from_ints(&ring, &[&[0, 1]]);
        if FCrystalPoint::exactness_at(&one, &d, &one, &f, &g, 0)?.is_none() {
            return Ok(Some("level 0 reported exact".into()));
        }
        fail_if(!matches!(FCrystalPoint::exactness_check(&one, &d, &one, &f, &g)?, ExactnessVerdict::NotExact { r: 0, .. }), || {
            "first failing level is not 0".into()
        })
    };
    t.add("rank-three line", vec![line(), line3()]);
    t.add("rank-three plane", vec![plane()]);
    t.add("non-exact extension", vec![non_exact()]);
}

// Criterion 8.

/// Indices reachable from j through non-zero entries of ∇ (column j to row i).
pub fn nabla_closure(d: &LiftedCrystal, j: usize) -> Vec<usize> {
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

fn change_of_lifting(cfg: &SuiteConfig, t: &mut Tally) {
    let prec = cfg.prec(8);
    let example = || -> Check {
        let doc = cfg.doc("lifting_torus")?;
        let p = doc.p().map_err(cli_err)?;
        let rank = doc.rank().map_err(cli_err)?;
        let window = doc.window(&Overrides::default()).map_err(cli_err)?;
        let rep = lifting_example(p, rank, prec, window, None)?;
        let ring = WittRing::new(p, 1, prec)?;
        let delta = delta_of(&ring, p, &Laurent::monomial(ring.one(), p as i32 + 1));
        // Φ_G(e_1) = p·e_1 + p·δ·e_0.
        let e1 = rep.phi_g.at(1, 1) == &Laurent::constant(ring.from_u64(p)) && rep.phi_g.at(0, 1) == &delta.mul_pk(&ring, 1);
        let checks = [
            ("Φ_G = Φ_F∘ε is horizontal over G", rep.horizontal),
            ("ε_{F,G}∘ε_{G,F} = 1", rep.eps_invertible),
            ("Φ_G(e_i) = p^i Σ δ^[j] e_{i−j}", rep.a),
            ("Φ_G(e_1) = p e_1 + p δ e_0", e1),
            ("e_2 ∈ A²_F outside A²_G", rep.b == Some(true)),
            ("corrected e_2 ∈ A²_G", rep.d == Some(true)),
            ("A^[i]_F = A^[i]_G", rep.c),
        ];
        Ok(checks.iter().find(|c| !c.1).map(|c| c.0.to_string()))
    };
    t.add("example", vec![example()]);
    let res = par::map(&indices(20), |&i| -> Check {
        let mut rng = cfg.rng(8, i);
        let p = [2u64, 3][rng.gen_range(0..2)];
        let rank = rng.gen_range(1..=3);
        let d = random_uniform_torus(&mut rng, p, rank, prec, 8);
        let g = random_lift_change(&mut rng, d.ring());
        fail_if(!bracket_invariance_check(&d, &g, 2, 0..rank as i32 + 1)?, || format!("g = {}", g.to_string(d.ring())))
    });
    t.add("random bracket invariance", res);
    let res = par::map(&indices(20), |&i| -> Check {
        let mut rng = cfg.rng(8, 1000 + i);
        let p = [2u64, 3][rng.gen_range(0..2)];
        let d = random_uniform_lifted(&mut rng, p, prec, 6);
        let ring = d.ring().clone();
        let n = d.rank();
        let s = nabla_closure(&d, rng.gen_range(0..n));
        let gens: Vec<Vec<Laurent>> = s
            .iter()
            .map(|&j| {
                let mut v = vec![Laurent::zero(); n];
                v[j] = Laurent::one(&ring).mul_pk(&ring, rng.gen_range(0..=1));
                v
            })
            .collect();
        let floor = rng.gen_range(1..=3);
        fail_if(!d.descent_check(&gens, floor, 6)?, || format!("submodule on {s:?}"))
    });
    t.add("descent", res);
}

// Criterion 9.

fn gauge(cfg: &SuiteConfig, t: &mut Tally) {
    let res = par::map(&indices(AXIOM_INSTANCES), |&i| -> Check {
        let d = axiom_crystal(cfg, i);
        let g = d.gauge()?;
        fail_if(g.lattices.len() as i32 != g.r_max - g.r_min + 3, || "ladder length".into())
    });
    t.add("random crystal", res);
}

// Criterion 10.

fn lie(cfg: &SuiteConfig, t: &mut Tally) {
    let prec = cfg.prec(8);
    // (Φ as p^{-1}·rows, dimension of Lie).
    let cases: Vec<(u64, Vec<Vec<i64>>, u64)> = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| {
            let q = p as i64;
            [
                (p, vec![vec![q, 0], vec![0, 1]], 1),
                (p, vec![vec![0, q], vec![1, 0]], 1),
                (p, vec![vec![q, 0, 0, 0], vec![0, q, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]], 2),
            ]
        })
        .collect();
    let res = par::map(&cases, |(p, rows, dim)| -> Check {
        let ring = WittRing::new(*p, 1, prec)?;
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let t0 = FCrystalPoint::from_ints(&ring, -1, &refs)?.syntomic()?.t0;
        fail_if(t0.order_val() != Some(*dim), || format!("p = {p}: H⁰(T) = {t0:?}, dim Lie = {dim}"))
    });
    t.add("point", res);
    let line = || -> Check {
        let d = cfg.doc("p_divisible_line")?.to_lifted(&Overrides { precision: Some(prec), window: Some(8) }).map_err(cli_err)?;
        let lie = lie_rank_check(&d, 0, 8)?;
        fail_if(lie.rank != Some(1), || format!("{lie:?}"))
    };
    let line2 = || -> Check {
        let base = AffineBase::standard(BaseKind::AffineLine, 2, prec, 8)?;
        let d = LiftedCrystal::constant(&base, -1, &[&[2, 0, 0], &[0, 2, 0], &[0, 0, 1]])?;
        let lie = lie_rank_check(&d, 0, 8)?;
        fail_if(lie.rank != Some(1), || format!("{lie:?}"))
    };
    t.add("affine line", vec![line(), line2()]);
}
