//! F-crystals in a lifted situation over the affine line or the torus over
//! F_p, with Frobenius lift F(T) = T^p + p·g(T).
//!
//! A crystal is a free module D_Y = O_Y^n with Φ = p^val·Φ₀ : F^*D_Y → D_Y
//! (Φ₀ a matrix of Laurent polynomials, column j = Φ₀(F^*e_j)) and a
//! connection ∇(x) = (D(x) + N·x)·ω, where ω = dT/T and D = T·d/dT on the
//! torus, ω = dT and D = d/dT on the affine line.
//!
//! Arithmetic is exact modulo p^N. Submodules such as A^r(D)_Y are infinite
//! rank over Z_p, so they are computed on finite sets of monomials (a
//! [`Selection`]): either a degree window, or a single weight when the
//! crystal is graded (Φ and ∇ homogeneous for T of weight 1 and basis
//! weights w_j). Graded pieces are finite and make the comparisons exact.

mod cartier;
mod graded;
mod lifting;
mod poly;
mod uniformity;

pub use cartier::{cartier, inverse_cartier, Form};
pub use graded::{
    a_de_rham, cocycle_of_extension, de_rham, eta_quasi_iso_check, extension_of_cocycle, is_cocycle, lie_rank_check, m_de_rham, minus_log,
    n_de_rham, same_class, syntomic_lifted, EtaQuasiIsoReport, GradedComplex, GradedPiece, LieRank, SyntomicLifted,
};
pub use lifting::{
    bracket_invariance_check, change_of_lifting, delta_of, divided_power, filtration_a_bracket, lifting_crystal, lifting_example, regauge,
    restrict_lattice, ChangeOfLifting, LiftingReport,
};
pub use poly::{LMat, Laurent};
pub use uniformity::{
    rank_three_line, two_variable_rank_jump, uniformity_at, uniformity_check, BiPoly, RankJump, TwoVarCrystal, Uniformity,
};

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::padic::{WittElem, WittRing};
use crate::semilinear::{snf, Lattice, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseKind {
    AffineLine,
    Torus,
}

#[derive(Clone, Debug)]
pub struct AffineBase {
    kind: BaseKind,
    ring: WittRing,
    window: i32,
    g: Laurent,
    frob: Laurent,
    frob_inv: Option<Laurent>,
    kappa: Laurent,
}

impl AffineBase {
    /// Base with Frobenius lift T^p + p·g; `window` is the default degree bound M.
    pub fn new(kind: BaseKind, p: u64, prec: u32, window: i32, g: Laurent) -> Result<Self> {
        let ring = WittRing::new(p, 1, prec)?;
        if window < 0 {
            return Err(Error::invalid("degree window must be non-negative"));
        }
        if kind == BaseKind::AffineLine && !g.is_zero() && g.lo() < 0 {
            return Err(Error::invalid("g must be a polynomial on the affine line"));
        }
        let tp = Laurent::monomial(ring.one(), p as i32);
        let frob = tp.add(&ring, &g.mul_pk(&ring, 1));
        let (frob_inv, kappa) = match kind {
            BaseKind::AffineLine => (None, frob.derivative(&ring)),
            BaseKind::Torus => {
                // F = T^p·u with u = 1 + p·h, h = T^{-p}·g.
                let ph = g.shift(-(p as i32)).mul_pk(&ring, 1);
                let mut uinv = Laurent::one(&ring);
                let mut term = Laurent::one(&ring);
                for _ in 1..prec {
                    term = term.mul(&ring, &ph).neg(&ring);
                    if term.is_zero() {
                        break;
                    }
                    uinv = uinv.add(&ring, &term);
                }
                let finv = uinv.shift(-(p as i32));
                let kappa = frob.theta(&ring).mul(&ring, &finv);
                (Some(finv), kappa)
            }
        };
        Ok(AffineBase { kind, ring, window, g, frob, frob_inv, kappa })
    }

    /// The standard lift F(T) = T^p.
    pub fn standard(kind: BaseKind, p: u64, prec: u32, window: i32) -> Result<Self> {
        AffineBase::new(kind, p, prec, window, Laurent::zero())
    }

    /// The same base with another lift.
    pub fn with_lift(&self, g: Laurent) -> Result<Self> {
        AffineBase::new(self.kind, self.p(), self.prec(), self.window, g)
    }

    pub fn with_window(&self, window: i32) -> Self {
        AffineBase { window, ..self.clone() }
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn prec(&self) -> u32 {
        self.ring.prec()
    }

    pub fn window(&self) -> i32 {
        self.window
    }

    pub fn g(&self) -> &Laurent {
        &self.g
    }

    pub fn frobenius_lift(&self) -> &Laurent {
        &self.frob
    }

    /// F^*ω = κ·ω.
    pub fn kappa(&self) -> &Laurent {
        &self.kappa
    }

    /// Whether F(T) = T^p.
    pub fn is_standard_lift(&self) -> bool {
        self.g.is_zero()
    }

    /// Default exponent range [−M, M] (torus) or [0, M] (affine line).
    pub fn window_range(&self) -> (i32, i32) {
        match self.kind {
            BaseKind::Torus => (-self.window, self.window),
            BaseKind::AffineLine => (0, self.window),
        }
    }

    /// Weight of the basis form ω.
    pub fn form_weight(&self) -> i32 {
        match self.kind {
            BaseKind::Torus => 0,
            BaseKind::AffineLine => 1,
        }
    }

    /// x(F(T)).
    pub fn subst(&self, x: &Laurent) -> Laurent {
        let r = &self.ring;
        if self.g.is_zero() {
            return x.frob_tp(r.p());
        }
        if x.is_zero() {
            return Laurent::zero();
        }
        let mut out = Laurent::zero();
        let mut pow = Laurent::one(r);
        for k in 0..=x.hi().max(0) {
            if k > 0 {
                pow = pow.mul(r, &self.frob);
            }
            let a = x.coeff(k);
            if !r.is_zero(&a) {
                out = out.add(r, &pow.scale(r, &a));
            }
        }
        if x.lo() < 0 {
            let finv = self.frob_inv.as_ref().expect("negative powers only occur on the torus");
            let mut pow = Laurent::one(r);
            for k in 1..=(-x.lo()) {
                pow = pow.mul(r, finv);
                let a = x.coeff(-k);
                if !r.is_zero(&a) {
                    out = out.add(r, &pow.scale(r, &a));
                }
            }
        }
        out
    }

    /// The derivation D with ∇ = (D + N)·ω.
    pub fn deriv(&self, x: &Laurent) -> Laurent {
        match self.kind {
            BaseKind::Torus => x.theta(&self.ring),
            BaseKind::AffineLine => x.derivative(&self.ring),
        }
    }

    /// F^*(x·ω) = x(F)·κ·ω.
    pub fn form_pullback(&self, x: &Laurent) -> Laurent {
        self.subst(x).mul(&self.ring, &self.kappa)
    }
}

/// A monomial T^k·e_j of a free module, as (j, k).
pub type Idx = (usize, i32);

/// A finite ordered set of monomials spanning a free Z_p-module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    idx: Vec<Idx>,
    pos: HashMap<Idx, usize>,
}

impl Selection {
    pub fn new(idx: Vec<Idx>) -> Self {
        let pos = idx.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        Selection { idx, pos }
    }

    /// All T^k·e_j with j < n and lo ≤ k ≤ hi.
    pub fn window(n: usize, lo: i32, hi: i32) -> Self {
        Selection::new((0..n).flat_map(|j| (lo..=hi).map(move |k| (j, k))).collect())
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn indices(&self) -> &[Idx] {
        &self.idx
    }

    pub fn position(&self, i: &Idx) -> Option<usize> {
        self.pos.get(i).copied()
    }

    /// The vector Σ c_i·T^{k_i}e_{j_i} in a module of rank n.
    pub fn vector(&self, n: usize, c: &[WittElem]) -> Vec<Laurent> {
        let mut out = vec![Laurent::zero(); n];
        let mut by_comp: Vec<Vec<(i32, WittElem)>> = vec![vec![]; n];
        for (&(j, k), a) in self.idx.iter().zip(c.iter()) {
            if *a != WittElem::default() {
                by_comp[j].push((k, *a));
            }
        }
        for (j, terms) in by_comp.into_iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let lo = terms.iter().map(|t| t.0).min().unwrap();
            let hi = terms.iter().map(|t| t.0).max().unwrap();
            let mut dense = vec![WittElem::default(); (hi - lo + 1) as usize];
            for (k, a) in terms {
                dense[(k - lo) as usize] = a;
            }
            out[j] = Laurent::from_dense(lo, dense);
        }
        out
    }

    /// Coordinates of a vector, or None if it has a monomial outside the selection.
    pub fn coords(&self, v: &[Laurent]) -> Option<Vec<WittElem>> {
        let mut c = vec![WittElem::default(); self.len()];
        for (j, x) in v.iter().enumerate() {
            for (k, a) in x.terms() {
                c[self.position(&(j, k))?] = a;
            }
        }
        Some(c)
    }
}

/// The matrix of a Z_p-linear map on span(sel), with the set of output
/// monomials it reaches (sorted).
pub fn matrix_of(ring: &WittRing, n: usize, sel: &Selection, f: impl Fn(&[Laurent]) -> Vec<Laurent>) -> (Mat, Selection) {
    let images: Vec<Vec<Laurent>> = sel
        .indices()
        .iter()
        .map(|&(j, k)| {
            let mut v = vec![Laurent::zero(); n];
            v[j] = Laurent::monomial(ring.one(), k);
            f(&v)
        })
        .collect();
    let mut out: BTreeSet<Idx> = BTreeSet::new();
    for img in &images {
        for (i, x) in img.iter().enumerate() {
            for (k, _) in x.terms() {
                out.insert((i, k));
            }
        }
    }
    let osel = Selection::new(out.into_iter().collect());
    let cols: Vec<Vec<WittElem>> = images.iter().map(|v| osel.coords(v).expect("collected")).collect();
    (Mat::from_cols(osel.len(), &cols), osel)
}

/// {c : L·c ≡ 0 mod p^k} as a lattice in Z_p^{L.cols}.
fn divisible_kernel(ring: &WittRing, l: &Mat, k: i32) -> Result<Lattice> {
    let n = l.cols;
    if k <= 0 {
        return Ok(Lattice::standard(ring, n, 0));
    }
    let k = k as u32;
    if k >= ring.prec() {
        return Err(Error::precision_retry(format!("filtration step {k} needs more p-adic digits"), k + 4));
    }
    let s = snf(ring, l, false, true);
    let v = s.v.unwrap();
    let gens: Vec<Vec<WittElem>> = (0..n)
        .map(|i| {
            let e = s.exps.get(i).copied().unwrap_or(ring.prec());
            let sc = k.saturating_sub(e);
            v.col(i).iter().map(|x| ring.mul_pk(x, sc)).collect()
        })
        .collect();
    Lattice::from_gens(ring, n, 0, &gens, Some(k))
}

/// A Z_p-lattice of full rank inside span(sel): a finite piece of a
/// submodule of D_Y or F^*D_Y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodulePresentation {
    pub rank: usize,
    pub sel: Selection,
    pub lattice: Lattice,
}

impl SubmodulePresentation {
    pub fn full(rank: usize, ring: &WittRing, sel: Selection) -> Self {
        let lattice = Lattice::standard(ring, sel.len(), 0);
        SubmodulePresentation { rank, sel, lattice }
    }

    /// Z_p-generators as vectors of Laurent polynomials.
    pub fn gens(&self, ring: &WittRing) -> Vec<Vec<Laurent>> {
        let off = self.lattice.offset();
        let b = self.lattice.basis();
        (0..b.cols)
            .map(|j| {
                let c: Vec<WittElem> = b.col(j).iter().map(|x| shift_elem(ring, x, off)).collect();
                self.sel.vector(self.rank, &c)
            })
            .collect()
    }

    pub fn contains(&self, ring: &WittRing, v: &[Laurent]) -> bool {
        match self.sel.coords(v) {
            Some(c) => self.lattice.contains_vec(ring, &c, 0),
            None => false,
        }
    }

    /// log_p of the index in the full span of the selection.
    pub fn colength(&self) -> i64 {
        self.lattice.volume()
    }
}

fn shift_elem(ring: &WittRing, x: &WittElem, off: i32) -> WittElem {
    if off >= 0 {
        ring.mul_pk(x, off as u32)
    } else {
        ring.div_pk(x, (-off) as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub ok: bool,
    /// First failing entry (row, column) of D(Φ₀) + NΦ₀ − κΦ₀N^F, with its value.
    pub failing: Option<(usize, usize, String)>,
}

#[derive(Clone, Debug)]
pub struct LiftedCrystal {
    base: AffineBase,
    val: i32,
    phi: LMat,
    nabla: LMat,
    nabla_f: LMat,
    weights: Option<Vec<i32>>,
}

impl LiftedCrystal {
    /// Φ = p^val·phi and ∇ = D + nabla. Weights, if given, must make Φ
    /// and ∇ homogeneous.
    pub fn new(base: &AffineBase, val: i32, phi: LMat, nabla: LMat, weights: Option<Vec<i32>>) -> Result<Self> {
        let r = base.ring();
        let n = phi.n;
        if n == 0 || nabla.n != n {
            return Err(Error::invalid("Φ and ∇ must be square of the same positive size"));
        }
        if base.kind == BaseKind::AffineLine && phi.e.iter().chain(nabla.e.iter()).any(|x| !x.is_zero() && x.lo() < 0) {
            return Err(Error::invalid("entries on the affine line must be polynomials"));
        }
        let e = phi.min_val(r);
        if e >= r.prec() {
            return Err(Error::invalid("Φ is zero at working precision"));
        }
        let (val, phi) = if e > 0 { (val + e as i32, phi.map(|x| x.div_pk(r, e))) } else { (val, phi) };
        if phi.det(r).is_zero() {
            return Err(Error::invalid("Φ is not invertible after inverting p"));
        }
        let kappa = base.kappa().clone();
        let nabla_f = nabla.map(|x| base.subst(x).mul(r, &kappa));
        let d = LiftedCrystal { base: base.clone(), val, phi, nabla, nabla_f, weights: None };
        if let Some(w) = weights {
            if w.len() != n {
                return Err(Error::invalid("one weight per basis vector"));
            }
            d.check_homogeneous(&w)?;
            return Ok(LiftedCrystal { weights: Some(w), ..d });
        }
        Ok(d)
    }

    fn check_homogeneous(&self, w: &[i32]) -> Result<()> {
        let p = self.base.p() as i32;
        let n = self.rank();
        let fw = self.base.form_weight();
        for i in 0..n {
            for j in 0..n {
                if self.phi.at(i, j).terms().any(|(k, _)| k != p * w[j] - w[i]) {
                    return Err(Error::invalid(format!("Φ entry ({i},{j}) is not homogeneous for the given weights")));
                }
                if self.nabla.at(i, j).terms().any(|(k, _)| k != w[j] - w[i] - fw) {
                    return Err(Error::invalid(format!("∇ entry ({i},{j}) is not homogeneous for the given weights")));
                }
            }
        }
        Ok(())
    }

    /// The constant crystal with Φ = p^val·rows and ∇ = D (all weights 0).
    pub fn constant(base: &AffineBase, val: i32, rows: &[&[i64]]) -> Result<Self> {
        let r = base.ring();
        let phi = LMat::from_ints(r, rows);
        let n = phi.n;
        let w = base.is_standard_lift().then(|| vec![0; n]);
        LiftedCrystal::new(base, val, phi, LMat::zeros(n), w)
    }

    pub fn unit(base: &AffineBase) -> Self {
        LiftedCrystal::constant(base, 0, &[&[1]]).expect("unit crystal")
    }

    pub fn base(&self) -> &AffineBase {
        &self.base
    }

    pub fn ring(&self) -> &WittRing {
        self.base.ring()
    }

    pub fn rank(&self) -> usize {
        self.phi.n
    }

    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn phi(&self) -> &LMat {
        &self.phi
    }

    pub fn nabla(&self) -> &LMat {
        &self.nabla
    }

    pub fn weights(&self) -> Option<&[i32]> {
        self.weights.as_deref()
    }

    /// The same Φ and ∇ over the same base with another Frobenius lift is
    /// not a crystal in general; this only swaps the base data.
    pub(crate) fn with_base(&self, base: &AffineBase, phi: LMat, val: i32) -> Result<Self> {
        LiftedCrystal::new(base, val, phi, self.nabla.clone(), None)
    }

    pub fn tate_twist(&self, s: i32) -> Self {
        LiftedCrystal { val: self.val - s, ..self.clone() }
    }

    /// Φ₀·y for y ∈ F^*D_Y.
    pub fn phi0_apply(&self, y: &[Laurent]) -> Vec<Laurent> {
        self.phi.apply(self.ring(), y)
    }

    /// η(x) = Σ x_j(F)·F^*e_j.
    pub fn eta(&self, x: &[Laurent]) -> Vec<Laurent> {
        x.iter().map(|c| self.base.subst(c)).collect()
    }

    /// Φ₀·η(x); Φη = p^val times this.
    pub fn phi_eta0(&self, x: &[Laurent]) -> Vec<Laurent> {
        self.phi0_apply(&self.eta(x))
    }

    /// Coefficient vector of ∇x with respect to ω.
    pub fn nabla_apply(&self, x: &[Laurent]) -> Vec<Laurent> {
        let r = self.ring();
        let nx = self.nabla.apply(r, x);
        x.iter().zip(nx).map(|(c, t)| self.base.deriv(c).add(r, &t)).collect()
    }

    /// Coefficient vector of the pulled-back connection on F^*D_Y.
    pub fn nabla_f_apply(&self, y: &[Laurent]) -> Vec<Laurent> {
        let r = self.ring();
        let ny = self.nabla_f.apply(r, y);
        y.iter().zip(ny).map(|(c, t)| self.base.deriv(c).add(r, &t)).collect()
    }

    /// Φ is horizontal: D(Φ₀) + N·Φ₀ = κ·Φ₀·N^F.
    pub fn check_compatibility(&self) -> CompatibilityReport {
        let r = self.ring();
        let n = self.rank();
        let lhs = self.phi.map(|x| self.base.deriv(x)).add(r, &self.nabla.mul(r, &self.phi));
        let rhs = self.phi.mul(r, &self.nabla_f);
        for i in 0..n {
            for j in 0..n {
                let diff = lhs.at(i, j).sub(r, rhs.at(i, j));
                if !diff.is_zero() {
                    return CompatibilityReport { ok: false, failing: Some((i, j, diff.to_string(r))) };
                }
            }
        }
        CompatibilityReport { ok: true, failing: None }
    }

    /// First j ≤ depth with ∂^j(e_i) ≡ 0 mod p^N for every basis vector,
    /// where ∂ = ∇(d/dT).
    pub fn quasi_nilpotence(&self, depth: usize) -> Result<usize> {
        let r = self.ring();
        let n = self.rank();
        let mut vs: Vec<Vec<Laurent>> = (0..n)
            .map(|i| {
                let mut v = vec![Laurent::zero(); n];
                v[i] = Laurent::one(r);
                v
            })
            .collect();
        for j in 0..=depth {
            if vs.iter().all(|v| v.iter().all(|x| x.is_zero())) {
                return Ok(j);
            }
            if j == depth {
                break;
            }
            vs = vs
                .iter()
                .map(|v| {
                    let w = self.nabla_apply(v);
                    match self.base.kind {
                        BaseKind::Torus => w.iter().map(|x| x.shift(-1)).collect(),
                        BaseKind::AffineLine => w,
                    }
                })
                .collect();
        }
        let i = vs.iter().position(|v| v.iter().any(|x| !x.is_zero())).unwrap_or(0);
        Err(Error::precision(format!("∂^{depth}(e_{i}) has not reached p^N; connection not certified quasi-nilpotent")))
    }

    /// Monomials of D_Y of weight m.
    pub fn weight_sel(&self, m: i32) -> Result<Selection> {
        let w = self.weights.as_ref().ok_or_else(|| Error::Inapplicable("crystal has no grading".into()))?;
        Ok(self.sel_with_weights(w, m, 1))
    }

    /// Monomials of F^*D_Y of weight m (F^*e_j has weight p·w_j).
    pub fn weight_sel_f(&self, m: i32) -> Result<Selection> {
        let w = self.weights.as_ref().ok_or_else(|| Error::Inapplicable("crystal has no grading".into()))?;
        Ok(self.sel_with_weights(w, m, self.base.p() as i32))
    }

    fn sel_with_weights(&self, w: &[i32], m: i32, mult: i32) -> Selection {
        let idx =
            w.iter().enumerate().map(|(j, &wj)| (j, m - mult * wj)).filter(|&(_, k)| self.base.kind == BaseKind::Torus || k >= 0).collect();
        Selection::new(idx)
    }

    /// Monomials of D_Y ⊗ ω¹ of weight m, as coefficient vectors of ω.
    pub fn form_sel(&self, m: i32) -> Result<Selection> {
        self.weight_sel(m - self.base.form_weight())
    }

    pub fn form_sel_f(&self, m: i32) -> Result<Selection> {
        self.weight_sel_f(m - self.base.form_weight())
    }

    /// The default window selection of D_Y.
    pub fn window_sel(&self) -> Selection {
        let (lo, hi) = self.base.window_range();
        Selection::window(self.rank(), lo, hi)
    }

    /// x ∈ A^r(D)_Y: p^{val−r}·Φ₀(η(x)) is integral.
    pub fn in_a(&self, r: i32, x: &[Laurent]) -> bool {
        self.integral_after(r, &self.phi_eta0(x))
    }

    /// y ∈ M^r(D)_Y: p^{val−r}·Φ₀(y) is integral.
    pub fn in_m(&self, r: i32, y: &[Laurent]) -> bool {
        self.integral_after(r, &self.phi0_apply(y))
    }

    fn integral_after(&self, r: i32, v: &[Laurent]) -> bool {
        let k = r - self.val;
        if k <= 0 {
            return true;
        }
        let ring = self.ring();
        v.iter().all(|x| x.min_val(ring) >= (k as u32).min(ring.prec()))
    }

    /// A^r(D)_Y ∩ span(sel).
    pub fn filtration_a(&self, r: i32, sel: &Selection) -> Result<SubmodulePresentation> {
        let (l, _) = matrix_of(self.ring(), self.rank(), sel, |x| self.phi_eta0(x));
        let lattice = divisible_kernel(self.ring(), &l, r - self.val)?;
        Ok(SubmodulePresentation { rank: self.rank(), sel: sel.clone(), lattice })
    }

    /// M^r(D)_Y ∩ span(sel), sel a set of monomials of F^*D_Y.
    pub fn filtration_m(&self, r: i32, sel: &Selection) -> Result<SubmodulePresentation> {
        let (l, _) = matrix_of(self.ring(), self.rank(), sel, |y| self.phi0_apply(y));
        let lattice = divisible_kernel(self.ring(), &l, r - self.val)?;
        Ok(SubmodulePresentation { rank: self.rank(), sel: sel.clone(), lattice })
    }

    /// ∇(A^r) ⊆ A^{r−1}⊗ω¹ on every generator of A^r ∩ span(sel).
    pub fn griffiths_check(&self, r: i32, sel: &Selection) -> Result<bool> {
        let a = self.filtration_a(r, sel)?;
        let ring = self.ring();
        Ok(a.gens(ring).iter().all(|x| self.in_a(r - 1, &self.nabla_apply(x))))
    }

    /// Griffiths transversality on every weight in [−M, M] of a graded crystal.
    pub fn griffiths_check_graded(&self, r: i32, window: i32) -> Result<bool> {
        for m in -window..=window {
            let sel = self.weight_sel(m)?;
            if !sel.is_empty() && !self.griffiths_check(r, &sel)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// F^*(A^r) → M^r is onto on the window: span{T^s·η(a) : a ∈ A^r ∩ W,
    /// 0 ≤ s < p} equals M^r on the monomials [p·lo, p·hi + p − 1].
    /// Needs F = T^p, where the residue decomposition makes this exact.
    pub fn fstar_a_vs_m(&self, r: i32, lo: i32, hi: i32) -> Result<bool> {
        if !self.base.is_standard_lift() {
            return Err(Error::Inapplicable("comparison implemented for the lift F(T) = T^p".into()));
        }
        let p = self.base.p() as i32;
        let n = self.rank();
        let ring = self.ring();
        let a = self.filtration_a(r, &Selection::window(n, lo, hi))?;
        let fsel = Selection::window(n, p * lo, p * hi + p - 1);
        let mut gens = Vec::new();
        for x in a.gens(ring) {
            let ex = self.eta(&x);
            for s in 0..p {
                let v: Vec<Laurent> = ex.iter().map(|c| c.shift(s)).collect();
                gens.push(fsel.coords(&v).ok_or_else(|| Error::window("η(A^r) left the comparison window"))?);
            }
        }
        let floor = (r - self.val).max(0) as u32;
        let lhs = Lattice::from_gens(ring, fsel.len(), 0, &gens, Some(floor))?;
        let m = self.filtration_m(r, &fsel)?;
        Ok(lhs == m.lattice)
    }

    /// The graded version of [`Self::fstar_a_vs_m`] on weights [−M, M].
    pub fn fstar_a_vs_m_graded(&self, r: i32, window: i32) -> Result<bool> {
        if !self.base.is_standard_lift() {
            return Err(Error::Inapplicable("comparison implemented for the lift F(T) = T^p".into()));
        }
        let p = self.base.p() as i32;
        let ring = self.ring();
        for m in -window..=window {
            let fsel = self.weight_sel_f(m)?;
            if fsel.is_empty() {
                continue;
            }
            let s = m.rem_euclid(p);
            let a = self.filtration_a(r, &self.weight_sel((m - s) / p)?)?;
            let mut gens = Vec::new();
            for x in a.gens(ring) {
                let v: Vec<Laurent> = self.eta(&x).iter().map(|c| c.shift(s)).collect();
                gens.push(fsel.coords(&v).ok_or_else(|| Error::window("weight bookkeeping"))?);
            }
            let floor = (r - self.val).max(0) as u32;
            let lhs = Lattice::from_gens(ring, fsel.len(), 0, &gens, Some(floor))?;
            if lhs != self.filtration_m(r, &fsel)?.lattice {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Weight of a homogeneous vector of F^*D_Y, None if not homogeneous.
    fn f_weight(&self, y: &[Laurent]) -> Option<i32> {
        let w = self.weights.as_ref()?;
        let p = self.base.p() as i32;
        let mut out = None;
        for (j, c) in y.iter().enumerate() {
            for (k, _) in c.terms() {
                let m = k + p * w[j];
                if out.is_some_and(|o| o != m) {
                    return None;
                }
                out = Some(m);
            }
        }
        out
    }

    /// E ∩ (F^*D_Y)_m for E = O_Y·gens + p^floor·F^*D_Y.
    fn span_piece(&self, gens: &[(Vec<Laurent>, i32)], floor: u32, m: i32) -> Result<Lattice> {
        let ring = self.ring();
        let sel = self.weight_sel_f(m)?;
        let mut cols: Vec<Vec<WittElem>> = Vec::new();
        for (g, wt) in gens {
            let s = m - wt;
            if s < 0 && self.base.kind == BaseKind::AffineLine {
                continue;
            }
            let v: Vec<Laurent> = g.iter().map(|c| c.shift(s)).collect();
            cols.push(sel.coords(&v).ok_or_else(|| Error::window("weight bookkeeping"))?);
        }
        for i in 0..sel.len() {
            let mut c = vec![WittElem::default(); sel.len()];
            c[i] = ring.mul_pk(&ring.one(), floor);
            cols.push(c);
        }
        Lattice::from_gens(ring, sel.len(), 0, &cols, Some(floor))
    }

    /// For E = O_Y·gens + p^floor·F^*D_Y with homogeneous generators and
    /// stable under the pulled-back connection, checks that F^*(η^{-1}E) → E
    /// is onto on weights [−M, M]: E_m = T^s·η(η^{-1}(E)_{m'}) for m = pm' + s.
    pub fn descent_check(&self, gens: &[Vec<Laurent>], floor: u32, window: i32) -> Result<bool> {
        if !self.base.is_standard_lift() {
            return Err(Error::Inapplicable("check implemented for the lift F(T) = T^p".into()));
        }
        let ring = self.ring();
        let p = self.base.p() as i32;
        let mut hg = Vec::new();
        for g in gens {
            let w = self.f_weight(g).ok_or_else(|| Error::Inapplicable("generators must be homogeneous".into()))?;
            hg.push((g.clone(), w));
        }
        // Stability: ∇_F(g) ∈ E ⊗ ω¹ for every generator.
        for (g, w) in &hg {
            let dg = self.nabla_f_apply(g);
            let m = w + self.base.form_weight();
            let piece = self.span_piece(&hg, floor, m - self.base.form_weight())?;
            let sel = self.weight_sel_f(m - self.base.form_weight())?;
            let c = sel.coords(&dg).ok_or_else(|| Error::window("weight bookkeeping"))?;
            if !piece.contains_vec(ring, &c, 0) {
                return Err(Error::Inapplicable("E is not stable under the connection".into()));
            }
        }
        for m in -window..=window {
            let sel = self.weight_sel_f(m)?;
            if sel.is_empty() {
                continue;
            }
            let s = m.rem_euclid(p);
            let base_piece = self.span_piece(&hg, floor, m - s)?;
            let bsel = self.weight_sel_f(m - s)?;
            // η^{-1}(E)_{m'} has the coordinates of E_{pm'}; T^s moves them to weight m.
            let mut cols = Vec::new();
            let off = base_piece.offset();
            for j in 0..base_piece.rank() {
                let c: Vec<WittElem> = base_piece.basis().col(j).iter().map(|x| shift_elem(ring, x, off)).collect();
                let v = bsel.vector(self.rank(), &c);
                let v: Vec<Laurent> = v.iter().map(|x| x.shift(s)).collect();
                cols.push(sel.coords(&v).ok_or_else(|| Error::window("weight bookkeeping"))?);
            }
            let lhs = Lattice::from_gens(ring, sel.len(), 0, &cols, Some(floor))?;
            if lhs != self.span_piece(&hg, floor, m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_filtrations() {
        let b = AffineBase::standard(BaseKind::AffineLine, 3, 6, 5).unwrap();
        let d = LiftedCrystal::unit(&b);
        let sel = d.window_sel();
        for r in -2..=3 {
            let a = d.filtration_a(r, &sel).unwrap();
            assert_eq!(a.colength(), sel.len() as i64 * r.max(0) as i64);
            assert!(d.griffiths_check(r, &sel).unwrap());
            assert!(d.fstar_a_vs_m(r, 0, 5).unwrap());
        }
        assert!(d.check_compatibility().ok);
        assert_eq!(d.quasi_nilpotence(24).unwrap(), 1);
    }

    #[test]
    fn torus_lift_kappa() {
        let b = AffineBase::new(BaseKind::Torus, 2, 8, 4, Laurent::from_terms(&WittRing::new(2, 1, 8).unwrap(), &[(3, 1)])).unwrap();
        let r = b.ring().clone();
        // F·F^{-1} = 1.
        let x = Laurent::from_terms(&r, &[(-1, 1)]);
        let y = Laurent::from_terms(&r, &[(1, 1)]);
        assert_eq!(b.subst(&x).mul(&r, &b.subst(&y)), Laurent::one(&r));
    }
}
