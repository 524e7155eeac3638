//! Bounded complexes of finitely presented modules over a [`WittRing`],
//! decreasing filtrations, Deligne's Dec, mapping fibers and cohomology.
//!
//! A module is W^gens modulo the column span of `relations`. Submodules are
//! generator matrices in the ambient coordinates. Every comparison is made
//! on the first `known` p-adic digits, which callers choose below the ring
//! precision to absorb the loss from divisions.

use crate::error::{Error, Result};
use crate::padic::{WittElem, WittRing};
use crate::semilinear::{elementary_divisors, inverse_unimodular, kernel_known, snf, span_contains, FiniteModule, Mat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedModule {
    pub gens: usize,
    pub relations: Mat,
}

impl PresentedModule {
    pub fn free(n: usize) -> Self {
        PresentedModule { gens: n, relations: Mat::zeros(n, 0) }
    }

    pub fn new(gens: usize, relations: Mat) -> Result<Self> {
        if relations.rows != gens {
            return Err(Error::invalid("relation matrix has the wrong number of rows"));
        }
        Ok(PresentedModule { gens, relations })
    }

    /// W/p^e.
    pub fn cyclic(ring: &WittRing, e: u32) -> Self {
        PresentedModule { gens: 1, relations: Mat::diag(ring, &[ring.mul_pk(&ring.one(), e)]) }
    }

    pub fn is_free(&self, ring: &WittRing) -> bool {
        self.relations.is_zero(ring)
    }

    /// Structure as a module over the coefficient ring.
    pub fn structure(&self, ring: &WittRing, known: u32) -> FiniteModule {
        let e = elementary_divisors(ring, &self.relations);
        let missing = self.gens - e.len().min(self.gens);
        FiniteModule::from_exps(e, missing, known)
    }

    pub fn direct_sum(&self, o: &PresentedModule) -> PresentedModule {
        PresentedModule { gens: self.gens + o.gens, relations: self.relations.block_diag(&o.relations) }
    }
}

/// span(a) / span(b) for span(b) ⊆ span(a) inside a common free module.
pub fn subquotient(ring: &WittRing, a: &Mat, b: &Mat, known: u32) -> Result<FiniteModule> {
    let s = snf(ring, a, true, false);
    let u = s.u.unwrap();
    let rank = s.exps.iter().filter(|&&e| e < known).count();
    let emax = s.exps[..rank].iter().copied().max().unwrap_or(0);
    let ub = u.mul(ring, b);
    let mut c = Mat::zeros(rank, b.cols);
    for j in 0..b.cols {
        for i in 0..ub.rows {
            let y = ub.get(i, j);
            if i < rank {
                if ring.val(&y) < s.exps[i] {
                    return Err(Error::invalid("subquotient: second span is not contained in the first"));
                }
                c.set(i, j, ring.div_pk(&y, s.exps[i]));
            } else if ring.val(&y) < known {
                return Err(Error::invalid("subquotient: second span is not contained in the first"));
            }
        }
    }
    let e = elementary_divisors(ring, &c);
    let missing = rank - e.len().min(rank);
    Ok(FiniteModule::from_exps(e, missing, known.saturating_sub(emax)))
}

/// A submodule of a free module with an adapted basis.
#[derive(Clone, Debug)]
struct Sub {
    u: Mat,
    basis: Mat,
    exps: Vec<u32>,
    known: u32,
}

impl Sub {
    fn new(ring: &WittRing, gens: &Mat, known: u32) -> Result<Sub> {
        let s = snf(ring, gens, true, false);
        let u = s.u.unwrap();
        let uinv = inverse_unimodular(ring, &u).ok_or_else(|| Error::precision("transform is not invertible"))?;
        let exps: Vec<u32> = s.exps.iter().copied().filter(|&e| e < known).collect();
        let cols: Vec<Vec<WittElem>> =
            exps.iter().enumerate().map(|(i, &e)| uinv.col(i).iter().map(|x| ring.mul_pk(x, e)).collect()).collect();
        Ok(Sub { u, basis: Mat::from_cols(gens.rows, &cols), exps, known })
    }

    fn rank(&self) -> usize {
        self.exps.len()
    }

    fn coords(&self, ring: &WittRing, y: &[WittElem]) -> Option<Vec<WittElem>> {
        let uy = self.u.mul_vec(ring, y);
        let mut c = Vec::with_capacity(self.rank());
        for (i, x) in uy.iter().enumerate() {
            if i < self.rank() {
                if ring.val(x) < self.exps[i].min(self.known) {
                    return None;
                }
                c.push(ring.div_pk(x, self.exps[i]));
            } else if ring.val(x) < self.known {
                return None;
            }
        }
        Some(c)
    }

    fn coords_mat(&self, ring: &WittRing, m: &Mat) -> Option<Mat> {
        let cols: Option<Vec<Vec<WittElem>>> = m.columns().iter().map(|c| self.coords(ring, c)).collect();
        Some(Mat::from_cols(self.rank(), &cols?))
    }
}

/// Whether the column spans of `a` and `b` agree.
pub fn same_span(ring: &WittRing, a: &Mat, b: &Mat, known: u32) -> bool {
    b.columns().iter().all(|c| span_contains(ring, a, c, known)) && a.columns().iter().all(|c| span_contains(ring, b, c, known))
}

/// A bounded cochain complex; `diffs[i]` maps `terms[i]` to `terms[i + 1]`.
#[derive(Clone, Debug)]
pub struct Complex {
    pub start: i32,
    pub terms: Vec<PresentedModule>,
    pub diffs: Vec<Mat>,
}

impl Complex {
    /// Validates shapes, d∘d = 0 and that d maps relations into relations.
    pub fn new(ring: &WittRing, start: i32, terms: Vec<PresentedModule>, diffs: Vec<Mat>, known: u32) -> Result<Self> {
        if diffs.len() + 1 != terms.len().max(1) {
            return Err(Error::invalid("a complex needs one differential between consecutive terms"));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.cols != terms[i].gens || d.rows != terms[i + 1].gens {
                return Err(Error::invalid(format!("differential in degree {} has the wrong shape", start + i as i32)));
            }
            let next = &terms[i + 1].relations;
            let dr = d.mul(ring, &terms[i].relations);
            if !dr.columns().iter().all(|c| span_contains(ring, next, c, known)) {
                return Err(Error::invalid("differential does not respect relations"));
            }
            if i + 1 < diffs.len() {
                let dd = diffs[i + 1].mul(ring, d);
                let rel = &terms[i + 2].relations;
                if !dd.columns().iter().all(|c| span_contains(ring, rel, c, known)) {
                    return Err(Error::invalid(format!("d∘d ≠ 0 in degree {}", start + i as i32)));
                }
            }
        }
        Ok(Complex { start, terms, diffs })
    }

    /// A complex of free modules given by its differentials.
    pub fn free(ring: &WittRing, start: i32, ranks: &[usize], diffs: Vec<Mat>, known: u32) -> Result<Self> {
        Complex::new(ring, start, ranks.iter().map(|&n| PresentedModule::free(n)).collect(), diffs, known)
    }

    pub fn end(&self) -> i32 {
        self.start + self.terms.len() as i32 - 1
    }

    pub fn term(&self, q: i32) -> Option<&PresentedModule> {
        usize::try_from(q - self.start).ok().and_then(|i| self.terms.get(i))
    }

    fn gens(&self, q: i32) -> usize {
        self.term(q).map_or(0, |t| t.gens)
    }

    fn relations(&self, q: i32) -> Mat {
        self.term(q).map_or(Mat::zeros(0, 0), |t| t.relations.clone())
    }

    /// d^q: C^q → C^{q+1}, a zero matrix outside the range.
    pub fn diff(&self, q: i32) -> Mat {
        match usize::try_from(q - self.start).ok().and_then(|i| self.diffs.get(i)) {
            Some(d) => d.clone(),
            None => Mat::zeros(self.gens(q + 1), self.gens(q)),
        }
    }

    /// H^q for q in [start, end].
    pub fn cohomology(&self, ring: &WittRing, known: u32) -> Result<Vec<FiniteModule>> {
        (self.start..=self.end()).map(|q| self.cohomology_at(ring, q, known)).collect()
    }

    pub fn cohomology_at(&self, ring: &WittRing, q: i32, known: u32) -> Result<FiniteModule> {
        let n = self.gens(q);
        if n == 0 {
            return Ok(FiniteModule::trivial());
        }
        let d = self.diff(q);
        let z = if d.rows == 0 {
            Mat::identity(ring, n)
        } else {
            let k = kernel_known(ring, &d.hcat(&self.relations(q + 1)), known);
            k.submatrix(0, n, 0, k.cols)
        };
        let im = self.diff(q - 1).hcat(&self.relations(q));
        subquotient(ring, &z, &im, known)
    }

    pub fn is_acyclic(&self, ring: &WittRing, known: u32) -> Result<bool> {
        Ok(self.cohomology(ring, known)?.iter().all(|h| h.is_trivial()))
    }
}

/// Degreewise matrices `maps[i]` from C^{start+i} to C'^{start+i}; degrees
/// outside the list map by zero.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub start: i32,
    pub maps: Vec<Mat>,
}

impl ChainMap {
    pub fn at(&self, q: i32, rows: usize, cols: usize) -> Mat {
        match usize::try_from(q - self.start).ok().and_then(|i| self.maps.get(i)) {
            Some(m) => m.clone(),
            None => Mat::zeros(rows, cols),
        }
    }

    pub fn identity(ring: &WittRing, c: &Complex) -> ChainMap {
        ChainMap { start: c.start, maps: c.terms.iter().map(|t| Mat::identity(ring, t.gens)).collect() }
    }

    /// Checks f∘d = d'∘f modulo the target relations.
    pub fn commutes(&self, ring: &WittRing, c: &Complex, c2: &Complex, known: u32) -> bool {
        let lo = c.start.min(c2.start);
        let hi = c.end().max(c2.end());
        (lo..=hi).all(|q| {
            let f0 = self.at(q, c2.gens(q), c.gens(q));
            let f1 = self.at(q + 1, c2.gens(q + 1), c.gens(q + 1));
            let lhs = f1.mul(ring, &c.diff(q));
            let rhs = c2.diff(q).mul(ring, &f0);
            let rel = c2.relations(q + 1);
            lhs.sub(ring, &rhs).columns().iter().all(|v| span_contains(ring, &rel, v, known))
        })
    }
}

/// fiber^q = C^q ⊕ C'^{q−1} with d(x, y) = (dx, f(x) − d'y).
pub fn mapping_fiber(ring: &WittRing, f: &ChainMap, c: &Complex, c2: &Complex, known: u32) -> Result<Complex> {
    let lo = c.start.min(c2.start + 1);
    let hi = c.end().max(c2.end() + 1);
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for q in lo..=hi {
        let a = c.term(q).cloned().unwrap_or_else(|| PresentedModule::free(0));
        let b = c2.term(q - 1).cloned().unwrap_or_else(|| PresentedModule::free(0));
        terms.push(a.direct_sum(&b));
        if q < hi {
            let d = c.diff(q);
            let d2 = c2.diff(q - 1).neg(ring);
            let fq = f.at(q, c2.gens(q), c.gens(q));
            let top = d.hcat(&Mat::zeros(c.gens(q + 1), c2.gens(q - 1)));
            let bottom = fq.hcat(&d2);
            diffs.push(top.vcat(&bottom));
        }
    }
    Complex::new(ring, lo, terms, diffs, known)
}

/// f is a quasi-isomorphism iff its mapping fiber is acyclic.
pub fn quasi_iso_check(ring: &WittRing, f: &ChainMap, c: &Complex, c2: &Complex, known: u32) -> Result<bool> {
    if !f.commutes(ring, c, c2, known) {
        return Err(Error::invalid("map does not commute with the differentials"));
    }
    mapping_fiber(ring, f, c, c2, known)?.is_acyclic(ring, known)
}

/// A complex of free modules with a decreasing filtration by subcomplexes.
/// Level i equals C for i < `lo` and level lo + k is given by generator
/// matrices `levels[k][q − start]`; levels beyond the list repeat the last.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub complex: Complex,
    pub lo: i32,
    pub levels: Vec<Vec<Mat>>,
}

impl FilteredComplex {
    pub fn new(ring: &WittRing, complex: Complex, lo: i32, levels: Vec<Vec<Mat>>, known: u32) -> Result<Self> {
        if !complex.terms.iter().all(|t| t.is_free(ring)) {
            return Err(Error::invalid("filtered complexes need free terms"));
        }
        for lv in &levels {
            if lv.len() != complex.terms.len() {
                return Err(Error::invalid("filtration level has the wrong number of degrees"));
            }
        }
        let fc = FilteredComplex { complex, lo, levels };
        for k in 0..fc.levels.len() {
            fc.level_complex(ring, lo + k as i32, known)?;
        }
        Ok(fc)
    }

    /// The filtration with every level equal to C.
    pub fn trivial(complex: Complex) -> Self {
        FilteredComplex { complex, lo: 0, levels: vec![] }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.levels.len() as i32 - 1
    }

    /// Generators of ({}^iC)^q.
    pub fn level(&self, ring: &WittRing, i: i32, q: i32) -> Mat {
        let n = self.complex.gens(q);
        if i < self.lo || self.levels.is_empty() || self.complex.term(q).is_none() {
            return Mat::identity(ring, n);
        }
        let k = ((i - self.lo) as usize).min(self.levels.len() - 1);
        self.levels[k][(q - self.complex.start) as usize].clone()
    }

    fn subcomplex(&self, ring: &WittRing, gens: Vec<Mat>, known: u32) -> Result<(Complex, Vec<Mat>)> {
        let subs: Vec<Sub> = gens.iter().map(|g| Sub::new(ring, g, known)).collect::<Result<_>>()?;
        let c = &self.complex;
        let mut diffs = Vec::new();
        for (i, s) in subs.iter().enumerate().take(subs.len().saturating_sub(1)) {
            let q = c.start + i as i32;
            let img = c.diff(q).mul(ring, &s.basis);
            let m = subs[i + 1]
                .coords_mat(ring, &img)
                .ok_or_else(|| Error::invalid(format!("differential leaves the submodule in degree {q}")))?;
            diffs.push(m);
        }
        let ranks: Vec<usize> = subs.iter().map(|s| s.rank()).collect();
        let sub = Complex::free(ring, c.start, &ranks, diffs, known)?;
        Ok((sub, subs.into_iter().map(|s| s.basis).collect()))
    }

    /// The level {}^iC as a free complex, with the basis inclusions.
    pub fn level_complex(&self, ring: &WittRing, i: i32, known: u32) -> Result<(Complex, Vec<Mat>)> {
        let c = &self.complex;
        let gens = (c.start..=c.end()).map(|q| self.level(ring, i, q)).collect();
        self.subcomplex(ring, gens, known)
    }
}

/// (Dec^r C)^q = {x ∈ ({}^{q+r}C)^q : dx ∈ ({}^{q+r+1}C)^{q+1}} as a free
/// complex, with its basis inclusions into C.
pub fn dec(ring: &WittRing, fc: &FilteredComplex, r: i32, known: u32) -> Result<(Complex, Vec<Mat>)> {
    let c = &fc.complex;
    let mut gens = Vec::new();
    for q in c.start..=c.end() {
        let f = fc.level(ring, q + r, q);
        if q == c.end() {
            gens.push(f);
            continue;
        }
        let g = fc.level(ring, q + r + 1, q + 1);
        let df = c.diff(q).mul(ring, &f);
        let k = kernel_known(ring, &df.hcat(&g), known);
        gens.push(f.mul(ring, &k.submatrix(0, f.cols, 0, k.cols)));
    }
    fc.subcomplex(ring, gens, known)
}

#[derive(Clone, Debug)]
pub struct DecLimit {
    /// First r with Dec^{r+1} = p·Dec^r.
    pub r: i32,
    /// Dec^r; p^{-r}Dec^r has the same matrices in these bases.
    pub complex: Complex,
    pub bases: Vec<Mat>,
}

/// Finds the stable range of p^{-r}·Dec^r C, searching r in [0, rmax].
pub fn dec_infinity(ring: &WittRing, fc: &FilteredComplex, rmax: i32, known: u32) -> Result<DecLimit> {
    let mut cur = dec(ring, fc, 0, known)?;
    for r in 0..=rmax {
        let next = dec(ring, fc, r + 1, known)?;
        let stable = cur.1.iter().zip(next.1.iter()).all(|(a, b)| same_span(ring, &a.mul_pk(ring, 1), b, known));
        if stable {
            return Ok(DecLimit { r, complex: cur.0, bases: cur.1 });
        }
        cur = next;
    }
    Err(Error::precision(format!("p^-r Dec^r did not stabilize for r ≤ {rmax}")))
}

/// The matrix M with basis·M = images, for a basis of linearly independent
/// columns; an error if some image leaves the span.
pub fn express_in_basis(ring: &WittRing, basis: &Mat, images: &Mat, known: u32) -> Result<Mat> {
    let sub = Sub::new(ring, basis, known)?;
    if sub.rank() != basis.cols {
        return Err(Error::precision("basis columns are not independent at precision"));
    }
    let m = sub.coords_mat(ring, images).ok_or_else(|| Error::invalid("image leaves the target submodule"))?;
    // Sub::new picks its own adapted basis; change back to `basis`.
    let cy = sub.coords_mat(ring, basis).ok_or_else(|| Error::invalid("basis mismatch"))?;
    let cyi = inverse_unimodular(ring, &cy).ok_or_else(|| Error::invalid("basis mismatch"))?;
    Ok(cyi.mul(ring, &m))
}

/// Restriction of f to subcomplexes given by basis inclusions.
fn restrict(ring: &WittRing, f: &ChainMap, c: &Complex, b1: &[Mat], b2: &[Mat], known: u32) -> Result<ChainMap> {
    let mut maps = Vec::new();
    for (i, (x, y)) in b1.iter().zip(b2.iter()).enumerate() {
        let q = c.start + i as i32;
        let img = f.at(q, y.rows, x.rows).mul(ring, x);
        let m = express_in_basis(ring, y, &img, known).map_err(|e| Error::invalid(format!("map is not filtered in degree {q}: {e}")))?;
        maps.push(m);
    }
    Ok(ChainMap { start: c.start, maps })
}

/// Every level of a filtered map and the induced map on Dec⁰ are
/// quasi-isomorphisms.
pub fn filtered_quasi_iso_check(ring: &WittRing, f: &ChainMap, fc: &FilteredComplex, fc2: &FilteredComplex, known: u32) -> Result<bool> {
    let lo = fc.lo.min(fc2.lo);
    let hi = fc.hi().max(fc2.hi()).max(lo);
    for i in lo..=hi {
        let (c1, b1) = fc.level_complex(ring, i, known)?;
        let (c2, b2) = fc2.level_complex(ring, i, known)?;
        let g = restrict(ring, f, &fc.complex, &b1, &b2, known)?;
        if !quasi_iso_check(ring, &g, &c1, &c2, known)? {
            return Ok(false);
        }
    }
    let (d1, b1) = dec(ring, fc, 0, known)?;
    let (d2, b2) = dec(ring, fc2, 0, known)?;
    let g = restrict(ring, f, &fc.complex, &b1, &b2, known)?;
    quasi_iso_check(ring, &g, &d1, &d2, known)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term(r: &WittRing, a: i64) -> Complex {
        Complex::free(r, 0, &[1, 1], vec![Mat::from_ints(r, &[&[a]])], r.prec()).unwrap()
    }

    #[test]
    fn cohomology_of_multiplication() {
        let r = WittRing::new(3, 1, 12).unwrap();
        let h = two_term(&r, 9).cohomology(&r, 12).unwrap();
        assert!(h[0].is_trivial());
        assert_eq!(h[1].exps, vec![2]);
        let h = two_term(&r, 0).cohomology(&r, 12).unwrap();
        assert_eq!(h[0].free_rank, 1);
        assert_eq!(h[1].free_rank, 1);
    }

    #[test]
    fn fiber_of_p() {
        let r = WittRing::new(5, 1, 10).unwrap();
        let c = Complex::free(&r, 0, &[1], vec![], 10).unwrap();
        let f = ChainMap { start: 0, maps: vec![Mat::from_ints(&r, &[&[5]])] };
        let fib = mapping_fiber(&r, &f, &c, &c, 10).unwrap();
        let h = fib.cohomology(&r, 10).unwrap();
        assert!(h[0].is_trivial());
        assert_eq!(h[1].exps, vec![1]);
        assert!(quasi_iso_check(&r, &ChainMap::identity(&r, &c), &c, &c, 10).unwrap());
    }

    #[test]
    fn dec_of_two_term() {
        let r = WittRing::new(2, 1, 12).unwrap();
        let c = two_term(&r, 2);
        let p = Mat::from_ints(&r, &[&[2]]);
        let fc = FilteredComplex::new(&r, c, 0, vec![vec![Mat::identity(&r, 1); 2], vec![p.clone(), p]], 12).unwrap();
        let (_, b) = dec(&r, &fc, 0, 12).unwrap();
        assert_eq!(r.val(&b[0].get(0, 0)), 0);
        assert_eq!(r.val(&b[1].get(0, 0)), 1);
    }

    #[test]
    fn torsion_terms() {
        let r = WittRing::new(2, 1, 10).unwrap();
        // W/4 --2--> W/4: H⁰ = 2W/4W, H¹ = W/2.
        let t = PresentedModule::cyclic(&r, 2);
        let c = Complex::new(&r, 0, vec![t.clone(), t], vec![Mat::from_ints(&r, &[&[2]])], 10).unwrap();
        let h = c.cohomology(&r, 10).unwrap();
        assert_eq!(h[0].exps, vec![1]);
        assert_eq!(h[1].exps, vec![1]);
    }
}
