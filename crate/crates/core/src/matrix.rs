//! Dense matrices over `Frac(O)` with valuation-aware elimination.

use std::sync::Arc;

use rand::Rng;

use crate::padic::{FieldContext, PadicElem, PadicError, Valuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicMatrix {
    ctx: Arc<FieldContext>,
    rows: usize,
    cols: usize,
    data: Vec<PadicElem>,
}

impl PadicMatrix {
    pub fn zeros(ctx: &Arc<FieldContext>, rows: usize, cols: usize) -> Self {
        PadicMatrix { ctx: ctx.clone(), rows, cols, data: vec![PadicElem::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &Arc<FieldContext>, n: usize) -> Self {
        Self::from_diag(ctx, &vec![PadicElem::one(ctx); n])
    }

    pub fn from_diag(ctx: &Arc<FieldContext>, diag: &[PadicElem]) -> Self {
        let mut m = Self::zeros(ctx, diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn from_fn(
        ctx: &Arc<FieldContext>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> PadicElem,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        PadicMatrix { ctx: ctx.clone(), rows, cols, data }
    }

    /// Column vectors as the columns of a matrix.
    pub fn from_columns(ctx: &Arc<FieldContext>, rows: usize, cols: &[Vec<PadicElem>]) -> Self {
        Self::from_fn(ctx, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    /// A random matrix with entries in `O`, including occasional zeros.
    pub fn random_integral<R: Rng + ?Sized>(
        ctx: &Arc<FieldContext>,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        Self::from_fn(ctx, rows, cols, |_, _| {
            if rng.gen_ratio(1, 8) {
                PadicElem::zero(ctx)
            } else {
                PadicElem::random_integral(ctx, rng)
            }
        })
    }

    /// A random integral upper-triangular matrix with unit diagonal; invertible over `O`.
    pub fn random_unipotent<R: Rng + ?Sized>(ctx: &Arc<FieldContext>, n: usize, rng: &mut R) -> Self {
        Self::from_fn(ctx, n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => PadicElem::random_unit(ctx, rng),
            std::cmp::Ordering::Less => PadicElem::random_integral(ctx, rng),
            std::cmp::Ordering::Greater => PadicElem::zero(ctx),
        })
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<PadicElem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<PadicElem> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn mul(&self, other: &PadicMatrix) -> PadicMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        Self::from_fn(&self.ctx, self.rows, other.cols, |i, j| {
            let mut acc = PadicElem::zero(&self.ctx);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                acc = &acc + &(a * b);
            }
            acc
        })
    }

    pub fn apply(&self, v: &[PadicElem]) -> Vec<PadicElem> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = PadicElem::zero(&self.ctx);
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !(a.is_exact_zero() || x.is_exact_zero()) {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &PadicMatrix) -> PadicMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, s: &PadicElem) -> PadicMatrix {
        Self::from_fn(&self.ctx, self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    pub fn leading_block(&self, k: usize) -> PadicMatrix {
        assert!(k <= self.rows && k <= self.cols);
        Self::from_fn(&self.ctx, k, k, |i, j| self.get(i, j).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> PadicMatrix {
        Self::from_fn(&self.ctx, rows.len(), self.cols, |i, j| self.get(rows[i], j).clone())
    }

    /// Minimal valuation over all entries.
    pub fn min_valuation(&self) -> Valuation {
        let mut best = Valuation::Infinite;
        for x in &self.data {
            let v = x.valuation();
            best = match (best, v) {
                (Valuation::Exact(a), Valuation::Exact(b)) => Valuation::Exact(a.min(b)),
                (Valuation::Exact(a), _) => Valuation::Exact(a),
                (_, Valuation::Exact(b)) => Valuation::Exact(b),
                (a, b) => {
                    if b.lower_bound() < a.lower_bound() {
                        b
                    } else {
                        a
                    }
                }
            };
        }
        best
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(PadicElem::is_zero)
    }

    /// Row echelon form with minimal-valuation pivots; returns pivot columns and the reduced matrix.
    fn echelon(&self) -> (Vec<usize>, PadicMatrix) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows)
                .filter(|&i| !m.get(i, c).is_zero())
                .min_by_key(|&i| m.get(i, c).valuation().lower_bound())
            else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = m.get(r, c).inverse().expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_exact_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
                m.set(i, c, PadicElem::zero(&self.ctx));
            }
            pivots.push(c);
            r += 1;
        }
        (pivots, m)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Rank over the fraction field at working precision.
    pub fn rank(&self) -> usize {
        self.echelon().0.len()
    }

    /// A basis of the right kernel over the fraction field.
    pub fn nullspace(&self) -> Vec<Vec<PadicElem>> {
        let (pivots, m) = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![PadicElem::zero(&self.ctx); self.cols];
                v[f] = PadicElem::one(&self.ctx);
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.get(r, f);
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<PadicMatrix, PadicError> {
        assert_eq!(self.rows, self.cols, "only square matrices are invertible");
        let n = self.rows;
        let aug = Self::from_fn(&self.ctx, n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                PadicElem::one(&self.ctx)
            } else {
                PadicElem::zero(&self.ctx)
            }
        });
        let (pivots, m) = aug.echelon();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(PadicError::DivisionByZero);
        }
        Ok(Self::from_fn(&self.ctx, n, n, |i, j| m.get(i, n + j).clone()))
    }

    /// Column-reduces `self` to a basis of its column span with an identity block on the
    /// returned pivot rows. Pivots are chosen by minimal valuation over the remaining block.
    pub fn column_basis(&self) -> (Vec<usize>, PadicMatrix) {
        let mut m = self.clone();
        let mut pivot_rows = Vec::new();
        let mut k = 0;
        while k < m.cols {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in 0..m.rows {
                if pivot_rows.contains(&i) {
                    continue;
                }
                for j in k..m.cols {
                    let x = m.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let v = x.valuation().lower_bound();
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
            let Some((pi, pj, _)) = best else { break };
            m.swap_cols(k, pj);
            let inv = m.get(pi, k).inverse().expect("pivot is nonzero");
            for i in 0..m.rows {
                let v = m.get(i, k) * &inv;
                m.set(i, k, v);
            }
            for j in 0..m.cols {
                if j == k || m.get(pi, j).is_exact_zero() {
                    continue;
                }
                let f = m.get(pi, j).clone();
                for i in 0..m.rows {
                    let v = m.get(i, j) - &(&f * m.get(i, k));
                    m.set(i, j, v);
                }
                m.set(pi, j, PadicElem::zero(&self.ctx));
            }
            pivot_rows.push(pi);
            k += 1;
        }
        let basis = Self::from_fn(&self.ctx, m.rows, k, |i, j| m.get(i, j).clone());
        (pivot_rows, basis)
    }
}
