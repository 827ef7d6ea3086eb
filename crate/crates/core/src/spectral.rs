//! Slope theory for truncated compact operators: characteristic series
//! `det(1 - X A) = sum c_n X^n`, Newton polygons, slope counts over truncation
//! schedules and bases of slope-bounded invariant subspaces.

use std::sync::Arc;

use num::rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::PadicMatrix;
use crate::padic::{FieldContext, PadicElem, PadicError, Valuation};

pub type Rational = Ratio<i64>;

/// Coefficients with fewer known digits than this are flagged untrusted.
pub const TRUST_DIGITS: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("requested degree {degree} exceeds the dimension {dim}")]
    DegreeTooLarge { degree: usize, dim: usize },
    #[error("matrix is {rows}x{cols}, expected square with {expected} basis valuations")]
    Shape { rows: usize, cols: usize, expected: usize },
    #[error("entry ({row}, {col}) has valuation {found}, below the compactness bound {bound}")]
    NotCompact { row: usize, col: usize, found: Valuation, bound: Rational },
    #[error("truncation schedule {0:?} must be nonempty, strictly increasing and within the dimension")]
    BadSchedule(Vec<usize>),
    #[error("precision insufficient to separate slopes at h = {h}: {detail}")]
    PrecisionInsufficient { h: Rational, detail: String },
}

/// A finite matrix approximating a compact operator, with the valuation profile of its
/// orthonormalizable basis: column `j` is expected to have entries of valuation at least
/// `basis_valuations[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedOperator {
    entries: PadicMatrix,
    basis_valuations: Vec<Rational>,
}

impl TruncatedOperator {
    /// Builds an operator; the compactness profile is advisory.
    pub fn new(entries: PadicMatrix, basis_valuations: Vec<Rational>) -> Result<Self, SpectralError> {
        if entries.rows() != entries.cols() || entries.rows() != basis_valuations.len() {
            return Err(SpectralError::Shape {
                rows: entries.rows(),
                cols: entries.cols(),
                expected: basis_valuations.len(),
            });
        }
        Ok(TruncatedOperator { entries, basis_valuations })
    }

    /// Builds an operator claiming compact origin; every entry must respect the profile.
    pub fn new_compact(entries: PadicMatrix, basis_valuations: Vec<Rational>) -> Result<Self, SpectralError> {
        let op = Self::new(entries, basis_valuations)?;
        if let Some(&(row, col)) = op.compactness_violations().first() {
            return Err(SpectralError::NotCompact {
                row,
                col,
                found: op.entries.get(row, col).valuation(),
                bound: op.basis_valuations[col],
            });
        }
        Ok(op)
    }

    /// Entries below the profile of their column.
    pub fn compactness_violations(&self) -> Vec<(usize, usize)> {
        let n = self.dimension();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.entries.get(i, j).valuation();
                let low = match v {
                    Valuation::Exact(x) => Some(x),
                    _ => None,
                };
                if low.is_some_and(|x| Rational::from_integer(x) < self.basis_valuations[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        self.entries.context()
    }

    pub fn dimension(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &PadicMatrix {
        &self.entries
    }

    pub fn basis_valuations(&self) -> &[Rational] {
        &self.basis_valuations
    }

    /// The leading `k x k` block.
    pub fn truncate(&self, k: usize) -> TruncatedOperator {
        TruncatedOperator {
            entries: self.entries.leading_block(k),
            basis_valuations: self.basis_valuations[..k].to_vec(),
        }
    }

    /// `U A U^-1`; the profile is carried over unchanged.
    pub fn conjugate(&self, u: &PadicMatrix) -> Result<TruncatedOperator, SpectralError> {
        let entries = u.mul(&self.entries).mul(&u.inverse()?);
        Ok(TruncatedOperator { entries, basis_valuations: self.basis_valuations.clone() })
    }
}

/// `diag(1, p, ..., p^(dim-1))`.
pub fn delta_model(ctx: &Arc<FieldContext>, dim: usize) -> TruncatedOperator {
    let diag: Vec<PadicElem> = (0..dim).map(|m| PadicElem::p_power(ctx, m as i64)).collect();
    TruncatedOperator {
        entries: PadicMatrix::from_diag(ctx, &diag),
        basis_valuations: (0..dim).map(|m| Rational::from_integer(m as i64)).collect(),
    }
}

fn hessenberg(a: &PadicMatrix) -> PadicMatrix {
    let ctx = a.context().clone();
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let Some(pi) = (k + 1..n)
            .filter(|&i| !h.get(i, k).is_zero())
            .min_by_key(|&i| h.get(i, k).valuation().lower_bound())
        else {
            continue;
        };
        if pi != k + 1 {
            for j in 0..n {
                let (x, y) = (h.get(pi, j).clone(), h.get(k + 1, j).clone());
                h.set(pi, j, y);
                h.set(k + 1, j, x);
            }
            for i in 0..n {
                let (x, y) = (h.get(i, pi).clone(), h.get(i, k + 1).clone());
                h.set(i, pi, y);
                h.set(i, k + 1, x);
            }
        }
        let piv_inv = h.get(k + 1, k).inverse().expect("pivot is nonzero");
        for i in k + 2..n {
            if h.get(i, k).is_zero() {
                h.set(i, k, PadicElem::zero(&ctx));
                continue;
            }
            let m = h.get(i, k) * &piv_inv;
            for j in k..n {
                let v = h.get(i, j) - &(&m * h.get(k + 1, j));
                h.set(i, j, v);
            }
            h.set(i, k, PadicElem::zero(&ctx));
            for r in 0..n {
                if h.get(r, i).is_exact_zero() {
                    continue;
                }
                let v = h.get(r, k + 1) + &(&m * h.get(r, i));
                h.set(r, k + 1, v);
            }
        }
    }
    h
}

fn poly_axpy(acc: &mut [PadicElem], s: &PadicElem, q: &[PadicElem]) {
    for (a, b) in acc.iter_mut().zip(q) {
        if !b.is_exact_zero() && !s.is_exact_zero() {
            *a = &*a + &(s * b);
        }
    }
}

/// `det(x I - A)` as coefficients by degree, through a Hessenberg form.
fn char_poly(a: &PadicMatrix) -> Vec<PadicElem> {
    let ctx = a.context().clone();
    let n = a.rows();
    let h = hessenberg(a);
    let mut polys: Vec<Vec<PadicElem>> = vec![vec![PadicElem::one(&ctx)]];
    for k in 0..n {
        let pk = &polys[k];
        let mut next = vec![PadicElem::zero(&ctx); k + 2];
        for (d, c) in pk.iter().enumerate() {
            next[d + 1] = &next[d + 1] + c;
        }
        poly_axpy(&mut next, &-h.get(k, k), pk);
        let mut prod = PadicElem::one(&ctx);
        for i in (0..k).rev() {
            prod = &prod * h.get(i + 1, i);
            if prod.is_exact_zero() {
                break;
            }
            let coeff = -(h.get(i, k) * &prod);
            poly_axpy(&mut next, &coeff, &polys[i]);
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// `c_0, ..., c_d` of `det(1 - X A)`, so `c_n = (-1)^n` times the sum of principal `n x n` minors.
pub fn char_series(op: &TruncatedOperator, d: usize) -> Result<Vec<PadicElem>, SpectralError> {
    let m = op.dimension();
    if d > m {
        return Err(SpectralError::DegreeTooLarge { degree: d, dim: m });
    }
    let cp = char_poly(&op.entries);
    Ok((0..=d).map(|n| cp[m - n].clone()).collect())
}

/// The same coefficients by summing principal minors expanded with Leibniz' formula.
/// Exponential cost; intended for small dimensions as an independent cross-check.
pub fn char_series_by_minors(op: &TruncatedOperator, d: usize) -> Result<Vec<PadicElem>, SpectralError> {
    let m = op.dimension();
    if d > m {
        return Err(SpectralError::DegreeTooLarge { degree: d, dim: m });
    }
    let ctx = op.context().clone();
    let a = &op.entries;
    let mut out = vec![PadicElem::zero(&ctx); d + 1];
    out[0] = PadicElem::one(&ctx);
    for mask in 1u64..(1u64 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let n = idx.len();
        if n > d {
            continue;
        }
        let minor = leibniz_det(a, &idx);
        let term = if n % 2 == 0 { minor } else { -minor };
        out[n] = &out[n] + &term;
    }
    Ok(out)
}

fn leibniz_det(a: &PadicMatrix, idx: &[usize]) -> PadicElem {
    let ctx = a.context();
    let n = idx.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = PadicElem::zero(ctx);
    loop {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        let mut prod = PadicElem::one(ctx);
        for i in 0..n {
            prod = &prod * a.get(idx[i], idx[perm[i]]);
        }
        total = if inversions % 2 == 0 { &total + &prod } else { &total - &prod };
        // Next permutation in lexicographic order.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    total
}

/// Lower convex hull of `(n, v(c_n))` with slopes listed by multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(usize, Rational)>,
    pub slopes_with_multiplicity: Vec<(Rational, usize)>,
    /// Every coefficient's valuation, including those left out of the hull.
    pub points: Vec<(usize, Valuation)>,
    /// Coefficients from this index on are zero at precision or have fewer than
    /// [`TRUST_DIGITS`] known digits.
    pub reliability_horizon: usize,
    pub untrusted: Vec<usize>,
}

impl NewtonPolygon {
    /// Slopes repeated by multiplicity, in nondecreasing order.
    pub fn slopes(&self) -> Vec<Rational> {
        self.slopes_with_multiplicity
            .iter()
            .flat_map(|&(s, m)| std::iter::repeat_n(s, m))
            .collect()
    }

    /// Number of slopes at most `h`, with multiplicity.
    pub fn count_le(&self, h: Rational) -> usize {
        self.slopes_with_multiplicity.iter().filter(|(s, _)| *s <= h).map(|(_, m)| m).sum()
    }

    /// Whether `(n, v(c_n))` lies on the polygon.
    pub fn on_hull(&self, n: usize) -> bool {
        let Some((_, Valuation::Exact(v))) = self.points.iter().find(|(k, _)| *k == n) else {
            return false;
        };
        let v = Rational::from_integer(*v);
        self.vertices.windows(2).any(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 <= n && n <= x1 && y0 + (y1 - y0) * Rational::new((n - x0) as i64, (x1 - x0) as i64) == v
        }) || self.vertices.iter().any(|&(x, y)| x == n && y == v)
    }
}

fn cross(o: (usize, Rational), a: (usize, Rational), b: (usize, Rational)) -> Rational {
    let (ox, ax, bx) = (o.0 as i64, a.0 as i64, b.0 as i64);
    (a.1 - o.1) * (bx - ox) - (b.1 - o.1) * (ax - ox)
}

pub fn newton_polygon(coeffs: &[PadicElem]) -> NewtonPolygon {
    let points: Vec<(usize, Valuation)> = coeffs.iter().map(|c| c.valuation()).enumerate().collect();
    let untrusted: Vec<usize> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_exact_zero() && c.rel_precision() < TRUST_DIGITS)
        .map(|(n, _)| n)
        .collect();
    let reliability_horizon = untrusted.first().copied().unwrap_or(coeffs.len());
    let support: Vec<(usize, Rational)> = points
        .iter()
        .filter_map(|&(n, v)| v.exact().map(|v| (n, Rational::from_integer(v))))
        .collect();
    let mut hull: Vec<(usize, Rational)> = Vec::new();
    for &pt in &support {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) >= Rational::from_integer(0) {
            hull.pop();
        }
        hull.push(pt);
    }
    let slopes_with_multiplicity = hull
        .windows(2)
        .map(|w| {
            let dx = (w[1].0 - w[0].0) as i64;
            ((w[1].1 - w[0].1) / dx, dx as usize)
        })
        .collect();
    NewtonPolygon { vertices: hull, slopes_with_multiplicity, points, reliability_horizon, untrusted }
}

/// Slope counts along a truncation schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeCount {
    pub h: Rational,
    pub per_truncation: Vec<(usize, usize)>,
    /// The count once two consecutive truncations agree.
    pub dimension: Option<usize>,
    /// The first truncation of the agreeing pair.
    pub stabilized_at: Option<usize>,
}

/// Number of Newton slopes at most `h` for each leading truncation in `schedule`.
pub fn slope_le_dimension(
    op: &TruncatedOperator,
    h: Rational,
    schedule: &[usize],
) -> Result<SlopeCount, SpectralError> {
    let ok = !schedule.is_empty()
        && schedule.windows(2).all(|w| w[0] < w[1])
        && schedule.iter().all(|&m| m >= 1 && m <= op.dimension());
    if !ok {
        return Err(SpectralError::BadSchedule(schedule.to_vec()));
    }
    let counts: Result<Vec<(usize, usize)>, SpectralError> = schedule
        .par_iter()
        .map(|&m| {
            let cs = char_series(&op.truncate(m), m)?;
            Ok((m, newton_polygon(&cs).count_le(h)))
        })
        .collect();
    let per_truncation = counts?;
    let stable = per_truncation.windows(2).find(|w| w[0].1 == w[1].1).map(|w| w[0]);
    Ok(SlopeCount {
        h,
        per_truncation,
        dimension: stable.map(|s| s.1),
        stabilized_at: stable.map(|s| s.0),
    })
}

fn columns_close(lhs: &PadicMatrix, rhs: &PadicMatrix, slack: u32) -> bool {
    let n = lhs.context().precision() as i64;
    (0..lhs.cols()).all(|j| {
        let scale = (0..lhs.rows())
            .map(|i| lhs.get(i, j).valuation().lower_bound().min(rhs.get(i, j).valuation().lower_bound()))
            .min()
            .unwrap_or(i64::MAX);
        (0..lhs.rows()).all(|i| {
            let d = lhs.get(i, j) - rhs.get(i, j);
            d.is_zero() || d.valuation().lower_bound() >= scale.saturating_add(n - slack as i64)
        })
    })
}

/// A basis (as columns) of the invariant subspace on which all slopes are at most `h`,
/// found by normalized subspace iteration and verified through the characteristic
/// series of the restricted operator.
pub fn finite_slope_vectors(op: &TruncatedOperator, h: Rational) -> Result<Vec<Vec<PadicElem>>, SpectralError> {
    let ctx = op.context().clone();
    let dim = op.dimension();
    let np = newton_polygon(&char_series(op, dim)?);
    let k = np.count_le(h);
    if k == 0 {
        return Ok(Vec::new());
    }
    let a = op.entries();
    let below = np.slopes_with_multiplicity.iter().filter(|(s, _)| *s <= h).map(|(s, _)| *s).last();
    let above = np.slopes_with_multiplicity.iter().find(|(s, _)| *s > h).map(|(s, _)| *s);
    let precision = ctx.precision() as i64;
    let max_iter = match (below, above) {
        (Some(b), Some(c)) => ((Rational::from_integer(precision + 4) / (c - b)).ceil().to_integer() as usize) * 2 + 8,
        _ => 4 * dim + 8,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x736c6f70);
    let (mut pivots, mut v) = PadicMatrix::random_integral(&ctx, dim, k, &mut rng).column_basis();
    let mut converged = false;
    for _ in 0..max_iter {
        let (np_rows, nv) = a.mul(&v).column_basis();
        if nv.cols() < k {
            return Err(SpectralError::PrecisionInsufficient { h, detail: "iterate lost rank".into() });
        }
        let same = np_rows == pivots && columns_close(&nv, &v, 2);
        pivots = np_rows;
        v = nv;
        if same {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpectralError::PrecisionInsufficient {
            h,
            detail: format!("subspace iteration did not settle in {max_iter} steps"),
        });
    }
    let av = a.mul(&v);
    let b = av.select_rows(&pivots);
    if !columns_close(&av, &v.mul(&b), 3) {
        return Err(SpectralError::PrecisionInsufficient { h, detail: "subspace is not invariant".into() });
    }
    let restricted = TruncatedOperator::new(b, vec![Rational::from_integer(0); k])?;
    let rnp = newton_polygon(&char_series(&restricted, k)?);
    if rnp.count_le(h) != k {
        return Err(SpectralError::PrecisionInsufficient {
            h,
            detail: format!("restriction has slopes {:?}", rnp.slopes()),
        });
    }
    // Subspace iteration only pins the basis down to the cap relative to each column.
    Ok((0..k)
        .map(|j| {
            let col = v.column(j);
            let scale = col.iter().map(|x| x.valuation().lower_bound()).min().unwrap_or(0);
            col.iter().map(|x| x.truncate_abs(scale + precision)).collect()
        })
        .collect())
}
