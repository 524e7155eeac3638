//! F-crystals over a point Spec(F_q): Frobenius matrix Φ = p^val·A₀ acting
//! σ-semilinearly on W^n. Filtrations, polygons, syntomic cohomology,
//! extensions of the unit crystal and Frobenius gauges.
//!
//! Over a point every F-crystal is uniform: the images of N_r in D/pD are
//! subspaces of a vector space, hence direct summands.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::padic::{WittElem, WittRing};
use crate::semilinear::{berkowitz, cokernel, elementary_divisors, linearize, snf, span_contains, FiniteModule, Lattice, Mat, PMatrix};

#[derive(Clone, Debug)]
pub struct FCrystalPoint {
    ring: WittRing,
    phi: PMatrix,
    exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntomicCohomologyReport {
    pub h0: FiniteModule,
    pub h1: FiniteModule,
    pub t0: FiniteModule,
    /// p-adic digits of the linearized map that were certified.
    pub precision: u32,
}

/// The ladder D_r = N_r(D) with f = inclusion and v = multiplication by p.
#[derive(Clone, Debug)]
pub struct FrobeniusGauge {
    pub r_min: i32,
    pub r_max: i32,
    /// D_r for r in [r_min - 1, r_max + 1].
    pub lattices: Vec<Lattice>,
    /// f: D_r → D_{r+1} in Hermite coordinates, for r in [r_min - 1, r_max].
    pub f_maps: Vec<Mat>,
    /// v: D_r → D_{r-1} in Hermite coordinates, for r in [r_min, r_max + 1].
    pub v_maps: Vec<Mat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactnessVerdict {
    Exact,
    /// The first r where the N_r sequence fails, with a description.
    NotExact {
        r: i32,
        witness: String,
    },
}

impl FCrystalPoint {
    pub fn new(ring: &WittRing, phi: PMatrix) -> Result<Self> {
        if phi.rows() != phi.cols() || phi.rows() == 0 {
            return Err(Error::invalid("Φ must be a nonempty square matrix"));
        }
        let phi = phi.normalized(ring);
        let exps = elementary_divisors(ring, &phi.m);
        if exps.iter().any(|&e| e >= ring.prec()) {
            return Err(Error::invalid("Φ is not invertible after inverting p"));
        }
        let emax = *exps.iter().max().unwrap();
        if emax >= phi.prec {
            return Err(Error::precision_retry(
                format!("Φ has elementary divisor p^{emax} but is only known mod p^{}", phi.prec),
                emax + 3,
            ));
        }
        Ok(FCrystalPoint { ring: ring.clone(), phi, exps })
    }

    /// Integer-entry constructor for tests and documents: Φ = p^val·m.
    pub fn from_ints(ring: &WittRing, val: i32, rows: &[&[i64]]) -> Result<Self> {
        FCrystalPoint::new(ring, PMatrix::new(val, Mat::from_ints(ring, rows), ring.prec()))
    }

    pub fn unit(ring: &WittRing) -> Self {
        FCrystalPoint::new(ring, PMatrix::new(0, Mat::identity(ring, 1), ring.prec())).unwrap()
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.phi.rows()
    }

    pub fn phi(&self) -> &PMatrix {
        &self.phi
    }

    /// Largest elementary divisor exponent of A₀.
    pub fn spread(&self) -> u32 {
        *self.exps.iter().max().unwrap()
    }

    /// Certified digits of the input Frobenius.
    pub fn prec(&self) -> u32 {
        self.phi.prec
    }

    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        let mut phi = self.phi.clone();
        phi.prec = prec;
        FCrystalPoint::new(&self.ring, phi)
    }

    /// The crystal with the same centered entries over W_n(k); raising n
    /// treats those entries as exact.
    pub fn at_precision(&self, n: u32) -> Result<Self> {
        let ring = WittRing::new(self.ring.p(), self.ring.d(), n)?;
        let m = &self.phi.m;
        let modulus = ring.modulus() as i64;
        let lifted = Mat::from_fn(m.rows, m.cols, |i, j| {
            let cs: Vec<u64> = self.ring.centered(m.at(i, j)).iter().map(|c| c.rem_euclid(modulus) as u64).collect();
            ring.from_coeffs(&cs)
        });
        FCrystalPoint::new(&ring, PMatrix::new(self.phi.val, lifted, n))
    }

    /// Dual crystal: Φ* = (Φ^T)^{-1}.
    pub fn dual(&self) -> Result<Self> {
        let r = &self.ring;
        let s = snf(r, &self.phi.m, true, true);
        let emax = self.spread();
        let ut = s.u.unwrap().transpose();
        let vt = s.v.unwrap().transpose();
        let n = self.rank();
        let scaled = Mat::from_fn(n, n, |i, j| r.mul_pk(ut.at(i, j), emax - s.exps[j]));
        let m = scaled.mul(r, &vt);
        let prec = self.phi.prec.saturating_sub(emax);
        FCrystalPoint::new(r, PMatrix::new(-self.phi.val - emax as i32, m, prec))
    }

    pub fn tensor(&self, o: &FCrystalPoint) -> Result<Self> {
        let r = &self.ring;
        let m = self.phi.m.kron(r, &o.phi.m);
        FCrystalPoint::new(r, PMatrix::new(self.phi.val + o.phi.val, m, self.phi.prec.min(o.phi.prec)))
    }

    pub fn direct_sum(&self, o: &FCrystalPoint) -> Result<Self> {
        let r = &self.ring;
        let v = self.phi.val.min(o.phi.val);
        let a = self.phi.m.mul_pk(r, (self.phi.val - v) as u32);
        let b = o.phi.m.mul_pk(r, (o.phi.val - v) as u32);
        let prec = (self.phi.prec + (self.phi.val - v) as u32).min(o.phi.prec + (o.phi.val - v) as u32);
        FCrystalPoint::new(r, PMatrix::new(v, a.block_diag(&b), prec))
    }

    /// D(s): Φ ↦ p^{-s}Φ.
    pub fn tate_twist(&self, s: i32) -> Self {
        let mut d = self.clone();
        d.phi.val -= s;
        d
    }

    /// Hodge slopes: valuations of the elementary divisors of Φ, ascending.
    pub fn hodge_slopes(&self) -> Vec<i32> {
        let mut h: Vec<i32> = self.exps.iter().map(|&e| e as i32 + self.phi.val).collect();
        h.sort_unstable();
        h
    }

    /// [min, max] of the Hodge slopes; outside it the filtrations are forced.
    pub fn effective_range(&self) -> (i32, i32) {
        let h = self.hodge_slopes();
        (h[0], *h.last().unwrap())
    }

    /// Φ(F^*D) = p^val·span(A₀).
    pub fn phi_lattice(&self) -> Result<Lattice> {
        Lattice::from_mat(&self.ring, self.phi.val, &self.phi.m, Some(self.spread()))
    }

    /// N_r = W^n ∩ p^{-r}Φ(F^*D).
    pub fn filtration_n(&self, r: i32) -> Result<Lattice> {
        let std = Lattice::standard(&self.ring, self.rank(), 0);
        std.intersect(&self.ring, &self.phi_lattice()?.scale(-r))
    }

    /// M^r = {x ∈ W^n : p^{-r}Φx ∈ W^n}.
    pub fn filtration_m(&self, r: i32) -> Result<Lattice> {
        let k = r - self.phi.val;
        if k > self.phi.prec as i32 {
            return Err(Error::precision_retry(format!("M^{r} needs Φ modulo p^{k}, known only modulo p^{}", self.phi.prec), k as u32 + 1));
        }
        let std = Lattice::standard(&self.ring, self.rank(), 0);
        std.preimage(&self.ring, &self.phi.m, self.phi.val - r, 0)
    }

    /// p^{-r}Φ(M^r) as a lattice.
    pub fn phi_of_m(&self, r: i32) -> Result<Lattice> {
        let m = self.filtration_m(r)?;
        Ok(m.image(&self.ring, &self.phi.m, self.spread())?.scale(self.phi.val - r))
    }

    /// p^{-r}Φ: M^r → N_r is an isomorphism.
    pub fn filtration_isomorphism_check(&self, r: i32) -> Result<bool> {
        Ok(self.phi_of_m(r)? == self.filtration_n(r)?)
    }

    /// φ_k = Φ∘σΦ∘…∘σ^{d-1}Φ as p^{d·val}·P₀.
    pub fn linear_frobenius(&self) -> PMatrix {
        let r = &self.ring;
        let d = r.d();
        let mut p0 = self.phi.m.clone();
        for i in 1..d {
            p0 = p0.mul(r, &self.phi.m.frob_pow(r, i as i64));
        }
        PMatrix::new(self.phi.val * d as i32, p0, self.phi.prec)
    }

    /// Newton slopes of det(u − φ_k) divided by d, ascending.
    pub fn newton_slopes(&self) -> Result<Vec<Ratio<i64>>> {
        let r = &self.ring;
        let d = r.d() as i64;
        let n = self.rank();
        let lin = self.linear_frobenius();
        let c = berkowitz(r, &lin.m);
        // Point (i, w_i) for the coefficient of u^i; c[k] multiplies u^{n-k}.
        let known = lin.prec.min(r.prec());
        let mut pts: Vec<(i64, Option<i64>)> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let k = n - i;
            let w = if i == 0 {
                Some(d * self.exps.iter().map(|&e| e as i64).sum::<i64>())
            } else {
                let v = r.val(&c[k]);
                (v < known).then_some(v as i64)
            };
            pts.push((i as i64, w));
        }
        let hull = lower_hull(&pts);
        for &(i, w) in &pts {
            if w.is_none() && hull_value(&hull, i) > Ratio::from_integer(known as i64) {
                return Err(Error::precision_retry(
                    "a characteristic polynomial coefficient is not certified below the Newton polygon",
                    known + 4,
                ));
            }
        }
        let mut slopes = Vec::with_capacity(n);
        for seg in hull.windows(2) {
            let (i1, w1) = seg[0];
            let (i2, w2) = seg[1];
            let s = Ratio::new(w1 - w2, i2 - i1);
            for _ in 0..(i2 - i1) {
                slopes.push(s / d + Ratio::from_integer(self.phi.val as i64));
            }
        }
        slopes.sort();
        Ok(slopes)
    }

    /// Partial sums of Newton slopes dominate those of Hodge slopes, with equal totals.
    pub fn newton_above_hodge(&self) -> Result<bool> {
        let nw = self.newton_slopes()?;
        let hd = self.hodge_slopes();
        let mut sn = Ratio::from_integer(0i64);
        let mut sh = Ratio::from_integer(0i64);
        for (a, b) in nw.iter().zip(hd.iter()) {
            sn += a;
            sh += Ratio::from_integer(*b as i64);
            if sn < sh {
                return Ok(false);
            }
        }
        Ok(sn == sh)
    }

    /// Matrix X with Φ(F^*D)-coordinates of the N_0 basis: b = A·X, plus N_0 itself.
    fn n0_in_phi_coords(&self) -> Result<(Lattice, Mat, u32)> {
        let r = &self.ring;
        let n0 = self.filtration_n(0)?;
        let s = snf(r, &self.phi.m, true, true);
        let u = s.u.unwrap();
        let v = s.v.unwrap();
        // b_j = p^o·B_j and A = p^val·A₀, so X = p^{o - val}·A₀^{-1}·B.
        let y = u.mul(r, n0.basis());
        let shift = n0.offset() - self.phi.val;
        let n = self.rank();
        let mut loss = 0u32;
        let mut z = Mat::zeros(n, n);
        for i in 0..n {
            let t = shift - s.exps[i] as i32;
            for j in 0..n {
                let x = y.get(i, j);
                let val = if t >= 0 {
                    r.mul_pk(&x, t as u32)
                } else {
                    let k = (-t) as u32;
                    if r.val(&x) < k && !r.is_zero(&x) {
                        return Err(Error::precision("N_0 is not contained in Φ(F^*D) at precision"));
                    }
                    loss = loss.max(k);
                    r.div_pk(&x, k)
                };
                z.set(i, j, val);
            }
        }
        let known = self.phi.prec.saturating_sub(self.spread()).min(r.prec() - loss);
        Ok((n0, v.mul(r, &z), known))
    }

    /// The Z_p-matrix of 1 − Φη: N_0 → Φ(F^*D) in the bases x^k·b_j and x^k·a_j.
    fn syntomic_matrix(&self) -> Result<(Lattice, Mat, Mat, u32)> {
        let r = &self.ring;
        let zp = WittRing::new(r.p(), 1, r.prec())?;
        let (n0, x, known) = self.n0_in_phi_coords()?;
        let sb = n0.basis().mul_pk(r, n0.offset() as u32).frob_pow(r, 1);
        let lin = linearize(r, &zp, &x, 0).sub(&zp, &linearize(r, &zp, &sb, 1));
        Ok((n0, x, lin, known))
    }

    pub fn syntomic(&self) -> Result<SyntomicCohomologyReport> {
        let r = &self.ring;
        let zp = WittRing::new(r.p(), 1, r.prec())?;
        let (_, x, lin, known) = self.syntomic_matrix()?;
        let e = elementary_divisors(&zp, &lin);
        let h0_free = e.iter().filter(|&&v| v >= known).count();
        let h0 = FiniteModule { exps: vec![], free_rank: h0_free };
        let h1 = FiniteModule::from_exps(e, 0, known);
        let t0 = cokernel(r, &x, known);
        if t0.free_rank > 0 {
            return Err(Error::precision("Φ(F^*D)/N_0 is not certified finite"));
        }
        Ok(SyntomicCohomologyReport { h0, h1, t0, precision: known })
    }

    pub fn hom_unit(&self) -> Result<FiniteModule> {
        Ok(self.syntomic()?.h0)
    }

    pub fn ext_unit(&self) -> Result<FiniteModule> {
        Ok(self.syntomic()?.h1)
    }

    /// E = D ⊕ 1 with Φ_E(0, 1) = (p^x_off·x, 1); x must lie in Φ(F^*D).
    pub fn extension_of_cocycle(&self, x: &[WittElem], x_off: i32) -> Result<FCrystalPoint> {
        let r = &self.ring;
        let n = self.rank();
        if x.len() != n || !self.phi_lattice()?.contains_vec(r, x, x_off) {
            return Err(Error::invalid("cocycle does not lie in Φ(F^*D)"));
        }
        let v = self.phi.val.min(x_off).min(0);
        let a = self.phi.m.mul_pk(r, (self.phi.val - v) as u32);
        let m = Mat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => a.get(i, j),
            (true, false) => r.mul_pk(&x[i], (x_off - v) as u32),
            (false, true) => r.zero(),
            (false, false) => r.mul_pk(&r.one(), (-v) as u32),
        });
        let prec = self.phi.prec + (self.phi.val - v) as u32;
        FCrystalPoint::new(r, PMatrix::new(v, m, prec))
    }

    /// Recovers the class of an extension 0 → D → E → 1 → 0 whose Frobenius
    /// is block upper triangular with lower-right entry 1: lift 1 to
    /// e = (z, 1) ∈ N_0(E) and return Φ_Eσ(e) − e, an element of Φ(F^*D),
    /// as (vector, offset). `z` is any element of N_0(D) (as integral vector).
    pub fn cocycle_of_extension(e: &FCrystalPoint, z: &[WittElem]) -> Result<(Vec<WittElem>, i32)> {
        let r = &e.ring;
        let n = e.rank() - 1;
        let v = e.phi.val;
        let last = e.phi.m.row(n);
        let one_at = r.mul_pk(&r.one(), (-v).max(0) as u32);
        if v > 0 || last[..n].iter().any(|t| !r.is_zero(t)) || last[n] != one_at {
            return Err(Error::invalid("extension is not in block triangular form"));
        }
        let mut lift = z.to_vec();
        lift.push(r.one());
        let sl: Vec<WittElem> = lift.iter().map(|t| r.frob(t)).collect();
        let img = e.phi.m.mul_vec(r, &sl);
        // Φ_E σ(e) − e = p^v·img − lift, scaled to offset v.
        let out: Vec<WittElem> = (0..n).map(|i| r.sub(&img[i], &r.mul_pk(&lift[i], (-v) as u32))).collect();
        Ok((out, v))
    }

    /// Whether two cocycles (vector, offset) in Φ(F^*D) have the same class
    /// modulo (1 − Φη)N_0.
    pub fn same_class(&self, a: (&[WittElem], i32), b: (&[WittElem], i32)) -> Result<bool> {
        let r = &self.ring;
        let zp = WittRing::new(r.p(), 1, r.prec())?;
        let (_, _, lin, known) = self.syntomic_matrix()?;
        let off = a.1.min(b.1);
        let diff: Vec<WittElem> =
            (0..self.rank()).map(|i| r.sub(&r.mul_pk(&a.0[i], (a.1 - off) as u32), &r.mul_pk(&b.0[i], (b.1 - off) as u32))).collect();
        let phi = self.phi_lattice()?;
        let c = phi.coords(r, &diff, off).ok_or_else(|| Error::invalid("cocycle difference not in Φ(F^*D)"))?;
        // Hermite coordinates → coordinates in the columns of A.
        let hb = phi.basis().mul_pk(r, 0);
        let s = snf(r, &self.phi.m, true, true);
        let u = s.u.unwrap();
        let w = s.v.unwrap();
        let y = u.mul_vec(r, &hb.mul_vec(r, &c));
        let shift = phi.offset() - self.phi.val;
        let mut z = Vec::with_capacity(self.rank());
        for (i, t) in y.iter().enumerate() {
            let k = shift - s.exps[i] as i32;
            z.push(if k >= 0 { r.mul_pk(t, k as u32) } else { r.div_pk(t, (-k) as u32) });
        }
        let coords = w.mul_vec(r, &z);
        let d = r.d();
        let mut flat = Vec::with_capacity(self.rank() * d);
        for t in &coords {
            for l in 0..d {
                flat.push(zp.from_u64(t.coeff(l)));
            }
        }
        Ok(span_contains(&zp, &lin, &flat, known))
    }

    /// Checks condition (iii) of exactness for 0 → D' →f D →g D'' → 0.
    pub fn exactness_check(dp: &FCrystalPoint, d: &FCrystalPoint, dpp: &FCrystalPoint, f: &Mat, g: &Mat) -> Result<ExactnessVerdict> {
        let r = &d.ring;
        if !commutes(r, &d.phi, &dp.phi, f) || !commutes(r, &dpp.phi, &d.phi, g) {
            return Err(Error::invalid("maps do not commute with Frobenius"));
        }
        if !g.mul(r, f).is_zero(r) {
            return Err(Error::invalid("g∘f ≠ 0"));
        }
        let lo = [dp, d, dpp].iter().map(|c| c.effective_range().0).min().unwrap() - 1;
        let hi = [dp, d, dpp].iter().map(|c| c.effective_range().1).max().unwrap() + 1;
        for rr in lo..=hi {
            if let Some(witness) = Self::exactness_at(dp, d, dpp, f, g, rr)? {
                return Ok(ExactnessVerdict::NotExact { r: rr, witness });
            }
        }
        Ok(ExactnessVerdict::Exact)
    }

    /// The level-r part of the exactness condition: g(N_r(D)) = N_r(D'')
    /// and f^{-1}(N_r(D)) = N_r(D'). Returns a witness on failure.
    pub fn exactness_at(dp: &FCrystalPoint, d: &FCrystalPoint, dpp: &FCrystalPoint, f: &Mat, g: &Mat, rr: i32) -> Result<Option<String>> {
        let r = &d.ring;
        let nd = d.filtration_n(rr)?;
        let img = Lattice::from_mat(r, nd.offset(), &g.mul(r, nd.basis()), None)?;
        let target = dpp.filtration_n(rr)?;
        if img != target {
            return Ok(Some(format!("g(N_{rr}(D)) has volume {} but N_{rr}(D'') has volume {}", img.volume(), target.volume())));
        }
        let pre = nd.preimage(r, f, 0, 0)?;
        if pre != dp.filtration_n(rr)? {
            return Ok(Some(format!("f^-1(N_{rr}(D)) differs from N_{rr}(D')")));
        }
        Ok(None)
    }

    /// Builds the gauge D_r = N_r and verifies fv = vf = p, the boundary
    /// isomorphisms and Φ(F^*D_∞) = D_{-∞}.
    pub fn gauge(&self) -> Result<FrobeniusGauge> {
        let r = &self.ring;
        let (r_min, r_max) = self.effective_range();
        let lats: Vec<Lattice> = (r_min - 1..=r_max + 1).map(|k| self.filtration_n(k)).collect::<Result<_>>()?;
        let coords_of = |dst: &Lattice, src: &Lattice, scale: i32| -> Result<Mat> {
            let n = src.rank();
            let mut cols = Vec::with_capacity(n);
            for j in 0..n {
                let c = dst
                    .coords(r, &src.basis().col(j), src.offset() + scale)
                    .ok_or_else(|| Error::invalid("gauge map is not well defined"))?;
                cols.push(c);
            }
            Ok(Mat::from_cols(n, &cols))
        };
        let mut f_maps = Vec::new();
        for i in 0..lats.len() - 1 {
            f_maps.push(coords_of(&lats[i + 1], &lats[i], 0)?);
        }
        let mut v_maps = Vec::new();
        for i in 1..lats.len() {
            v_maps.push(coords_of(&lats[i - 1], &lats[i], 1)?);
        }
        let n = self.rank();
        let p_id = Mat::identity(r, n).mul_pk(r, 1);
        // Back-substitution through a triangular Hermite basis loses up to
        // the sum of its pivots.
        let loss = lats.iter().map(|l| l.pivots().iter().sum::<u32>()).max().unwrap_or(0);
        let known = r.prec().saturating_sub(loss);
        let trunc = |m: &Mat| m.map(|x| r.mod_pk(x, known));
        let p_id = trunc(&p_id);
        for i in 1..lats.len() - 1 {
            // On D_r (index i): f∘v and v∘f.
            let fv = trunc(&f_maps[i - 1].mul(r, &v_maps[i - 1]));
            let vf = trunc(&v_maps[i].mul(r, &f_maps[i]));
            if fv != p_id || vf != p_id {
                return Err(Error::invalid(format!("fv = vf = p fails at r = {}", r_min - 1 + i as i32)));
            }
        }
        let is_iso = |m: &Mat| elementary_divisors(r, m).iter().all(|&e| e == 0);
        if !is_iso(f_maps.last().unwrap()) || !is_iso(&v_maps[0]) {
            return Err(Error::invalid("gauge boundary maps are not isomorphisms"));
        }
        if self.phi_lattice()? != lats[1].scale(r_min) {
            return Err(Error::invalid("Φ(F^*D_∞) differs from D_{-∞}"));
        }
        Ok(FrobeniusGauge { r_min, r_max, lattices: lats, f_maps, v_maps })
    }

    /// The four short exact sequences relating N_r, M^r and their reductions mod p, at level r.
    pub fn filtration_sequences_check(&self, r: i32) -> Result<bool> {
        let ring = &self.ring;
        let n = self.rank();
        let dlat = Lattice::standard(ring, n, 0);
        let pd = dlat.scale(1);
        let nl = |k: i32| self.filtration_n(k);
        let ml = |k: i32| self.filtration_m(k);
        let (nr, nr1, nrm) = (nl(r)?, nl(r + 1)?, nl(r - 1)?);
        let (mr, mr1, mrm) = (ml(r)?, ml(r + 1)?, ml(r - 1)?);
        // (1) 0 → N_{r+1} →p N_r → (N_r + pD)/pD → 0
        let ok1 =
            nr.intersect(ring, &pd)? == nr1.scale(1) && nr1.scale(1).volume() - nr.volume() == pd.volume() - nr.sum(ring, &pd)?.volume();
        // (2) 0 → M^{r-1} →p M^r → (M^r + pF^*D)/pF^*D → 0
        let ok2 =
            mr.intersect(ring, &pd)? == mrm.scale(1) && mrm.scale(1).volume() - mr.volume() == pd.volume() - mr.sum(ring, &pd)?.volume();
        // (3) 0 → N_{r+1}/N_r →p N_r/N_{r-1} → (N_r + pD)/(N_{r-1} + pD) → 0
        let img3 = nrm.sum(ring, &nr1.scale(1))?;
        let ok3 = nr1.scale(1).intersect(ring, &nrm)? == nr.scale(1)
            && nr.intersect(ring, &nrm.sum(ring, &pd)?)? == img3
            && img3.volume() - nr.volume() == nrm.sum(ring, &pd)?.volume() - nr.sum(ring, &pd)?.volume();
        // (4) 0 → M^{r-1}/M^r →p M^r/M^{r+1} → (M^r + pF^*D)/(M^{r+1} + pF^*D) → 0
        let img4 = mr1.sum(ring, &mrm.scale(1))?;
        let ok4 = mrm.scale(1).intersect(ring, &mr1)? == mr.scale(1)
            && mr.intersect(ring, &mr1.sum(ring, &pd)?)? == img4
            && img4.volume() - mr.volume() == mr1.sum(ring, &pd)?.volume() - mr.sum(ring, &pd)?.volume();
        Ok(ok1 && ok2 && ok3 && ok4)
    }

    /// Stabilization of N and M outside the effective range, monotonicity inside.
    pub fn stabilization_check(&self) -> Result<bool> {
        let ring = &self.ring;
        let (lo, hi) = self.effective_range();
        let d = Lattice::standard(ring, self.rank(), 0);
        for r in lo - 2..=hi + 2 {
            let (n0, n1) = (self.filtration_n(r)?, self.filtration_n(r + 1)?);
            if !n1.contains(ring, &n0) || !n0.contains(ring, &n1.scale(1)) {
                return Ok(false);
            }
            let (m0, m1) = (self.filtration_m(r)?, self.filtration_m(r + 1)?);
            if !m0.contains(ring, &m1) || !m1.contains(ring, &m0.scale(1)) {
                return Ok(false);
            }
        }
        for r in hi..=hi + 2 {
            if self.filtration_n(r)? != d || self.filtration_m(r + 1)? != self.filtration_m(r)?.scale(1) {
                return Ok(false);
            }
        }
        for r in lo - 2..=lo {
            if self.filtration_m(r)? != d || self.filtration_n(r - 1)? != self.filtration_n(r)?.scale(1) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Φ_target·σ(h) = h·Φ_source for an integral W-linear h: source → target.
fn commutes(r: &WittRing, target: &PMatrix, source: &PMatrix, h: &Mat) -> bool {
    let v = target.val.min(source.val);
    let lhs = target.m.mul(r, &h.frob_pow(r, 1)).mul_pk(r, (target.val - v) as u32);
    let rhs = h.mul(r, &source.m).mul_pk(r, (source.val - v) as u32);
    lhs == rhs
}

/// Lower convex hull of points with known ordinates, left to right.
fn lower_hull(pts: &[(i64, Option<i64>)]) -> Vec<(i64, i64)> {
    let mut h: Vec<(i64, i64)> = Vec::new();
    for &(x, w) in pts {
        let Some(y) = w else { continue };
        while h.len() >= 2 {
            let (x1, y1) = h[h.len() - 2];
            let (x2, y2) = h[h.len() - 1];
            // Remove the middle point if it lies on or above the segment.
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                h.pop();
            } else {
                break;
            }
        }
        h.push((x, y));
    }
    h
}

fn hull_value(h: &[(i64, i64)], x: i64) -> Ratio<i64> {
    for seg in h.windows(2) {
        let (x1, y1) = seg[0];
        let (x2, y2) = seg[1];
        if x1 <= x && x <= x2 {
            return Ratio::from_integer(y1) + Ratio::new((y2 - y1) * (x - x1), x2 - x1);
        }
    }
    Ratio::from_integer(h.last().map_or(0, |t| t.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_filtrations() {
        let r = WittRing::new(3, 1, 12).unwrap();
        let u = FCrystalPoint::unit(&r);
        for k in -3..=3 {
            let expect_n = Lattice::standard(&r, 1, (-k).max(0));
            let expect_m = Lattice::standard(&r, 1, k.max(0));
            assert_eq!(u.filtration_n(k).unwrap(), expect_n);
            assert_eq!(u.filtration_m(k).unwrap(), expect_m);
            assert!(u.filtration_isomorphism_check(k).unwrap());
        }
    }

    #[test]
    fn supersingular_polygons() {
        let r = WittRing::new(5, 1, 12).unwrap();
        let d = FCrystalPoint::from_ints(&r, 0, &[&[0, 5], &[1, 0]]).unwrap();
        assert_eq!(d.hodge_slopes(), vec![0, 1]);
        let half = Ratio::new(1, 2);
        assert_eq!(d.newton_slopes().unwrap(), vec![half, half]);
        assert!(d.newton_above_hodge().unwrap());
    }

    #[test]
    fn unit_twist_syntomic() {
        let r = WittRing::new(2, 1, 20).unwrap();
        for k in 1..4 {
            let d = FCrystalPoint::unit(&r).tate_twist(k);
            let s = d.syntomic().unwrap();
            assert!(s.h0.is_trivial() && s.h1.is_trivial());
            assert_eq!(s.t0.order_val(), Some(k as u64));
        }
        let s = FCrystalPoint::unit(&r).syntomic().unwrap();
        assert_eq!((s.h0.free_rank, s.h1.free_rank), (1, 1));
        assert!(s.t0.is_trivial());
    }
}
