use crate::padic::{WittElem, WittRing};

/// Dense row-major matrix over a [`WittRing`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<WittElem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![WittElem::default(); rows * cols] }
    }

    pub fn identity(ring: &WittRing, n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> WittElem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_ints(ring: &WittRing, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Mat::from_fn(r, c, |i, j| ring.from_i64(rows[i][j]))
    }

    pub fn from_cols(rows: usize, cols: &[Vec<WittElem>]) -> Self {
        Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn diag(ring: &WittRing, entries: &[WittElem]) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, *e);
        }
        let _ = ring;
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> WittElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &WittElem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: WittElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[WittElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [WittElem] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<WittElem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<WittElem>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, ring: &WittRing, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ring.is_zero(&a) {
                    continue;
                }
                for j in 0..o.cols {
                    let t = ring.mul(&a, o.at(k, j));
                    let cur = out.get(i, j);
                    out.set(i, j, ring.add(&cur, &t));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, ring: &WittRing, v: &[WittElem]) -> Vec<WittElem> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = ring.zero();
                for (k, x) in v.iter().enumerate() {
                    acc = ring.add(&acc, &ring.mul(self.at(i, k), x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, ring: &WittRing, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| ring.add(self.at(i, j), o.at(i, j)))
    }

    pub fn sub(&self, ring: &WittRing, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| ring.sub(self.at(i, j), o.at(i, j)))
    }

    pub fn neg(&self, ring: &WittRing) -> Mat {
        self.map(|x| ring.neg(x))
    }

    pub fn map(&self, f: impl Fn(&WittElem) -> WittElem) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, ring: &WittRing, s: &WittElem) -> Mat {
        self.map(|x| ring.mul(x, s))
    }

    pub fn mul_pk(&self, ring: &WittRing, k: u32) -> Mat {
        self.map(|x| ring.mul_pk(x, k))
    }

    pub fn div_pk(&self, ring: &WittRing, k: u32) -> Mat {
        self.map(|x| ring.div_pk(x, k))
    }

    /// Entrywise σ^e.
    pub fn frob_pow(&self, ring: &WittRing, e: i64) -> Mat {
        if e.rem_euclid(ring.d() as i64) == 0 {
            return self.clone();
        }
        self.map(|x| ring.frob_pow(x, e))
    }

    /// Minimum valuation over all entries (N for the zero matrix).
    pub fn min_val(&self, ring: &WittRing) -> u32 {
        self.data.iter().map(|x| ring.val(x)).min().unwrap_or(ring.prec())
    }

    pub fn is_zero(&self, ring: &WittRing) -> bool {
        self.data.iter().all(|x| ring.is_zero(x))
    }

    pub fn kron(&self, ring: &WittRing, o: &Mat) -> Mat {
        Mat::from_fn(self.rows * o.rows, self.cols * o.cols, |i, j| ring.mul(self.at(i / o.rows, j / o.cols), o.at(i % o.rows, j % o.cols)))
    }

    pub fn hcat(&self, o: &Mat) -> Mat {
        assert_eq!(self.rows, o.rows);
        Mat::from_fn(self.rows, self.cols + o.cols, |i, j| if j < self.cols { self.get(i, j) } else { o.get(i, j - self.cols) })
    }

    pub fn vcat(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.cols);
        Mat::from_fn(self.rows + o.rows, self.cols, |i, j| if i < self.rows { self.get(i, j) } else { o.get(i - self.rows, j) })
    }

    pub fn block_diag(&self, o: &Mat) -> Mat {
        Mat::from_fn(self.rows + o.rows, self.cols + o.cols, |i, j| match (i < self.rows, j < self.cols) {
            (true, true) => self.get(i, j),
            (false, false) => o.get(i - self.rows, j - self.cols),
            _ => WittElem::default(),
        })
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }
}
