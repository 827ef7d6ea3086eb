//! The action of `p^+` and `p^-` on polynomial models in the conjugate variables
//! `z1, z2` (written without bars), over the Gaussian rationals, and the kernel of `p^-`
//! on the quotient by polynomials of degree at most `a - 2`.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, Complex, One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type GaussianRational = Complex<BigRational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GkError {
    #[error("need a >= 1, got {0}")]
    Parameter(i64),
    #[error("degree bound {degree} is below a - 1 = {min}")]
    DegreeTooSmall { degree: u32, min: i64 },
}

pub fn gq(re: i64, im: i64) -> GaussianRational {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn i_unit() -> GaussianRational {
    gq(0, 1)
}

/// Polynomial in `z1, z2` with no stored zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), GaussianRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: [u32; 2],
    pub re: String,
    pub im: String,
}

impl BivarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(m1: u32, m2: u32, c: GaussianRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m1, m2, c);
        p
    }

    pub fn z1() -> Self {
        Self::monomial(1, 0, gq(1, 0))
    }

    pub fn z2() -> Self {
        Self::monomial(0, 1, gq(1, 0))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), GaussianRational)>) -> Self {
        let mut p = Self::zero();
        for ((m1, m2), c) in terms {
            p.add_term(m1, m2, c);
        }
        p
    }

    /// Random polynomial of total degree at most `degree` with small Gaussian integer coefficients.
    pub fn random<R: Rng>(rng: &mut R, degree: u32) -> Self {
        let mut p = Self::zero();
        for d in 0..=degree {
            for m1 in 0..=d {
                p.add_term(m1, d - m1, gq(rng.gen_range(-5..=5), rng.gen_range(-5..=5)));
            }
        }
        p
    }

    fn add_term(&mut self, m1: u32, m2: u32, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((m1, m2)).or_insert_with(GaussianRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(m1, m2));
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), GaussianRational> {
        &self.terms
    }

    pub fn coeff(&self, m1: u32, m2: u32) -> GaussianRational {
        self.terms.get(&(m1, m2)).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        self.terms.keys().all(|(a, b)| a + b == d)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (&(m1, m2), c) in &other.terms {
            p.add_term(m1, m2, c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&gq(-1, 0)))
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, v)| (k, v * c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&(a1, a2), c) in &self.terms {
            for (&(b1, b2), d) in &other.terms {
                p.add_term(a1 + b1, a2 + b2, c * d);
            }
        }
        p
    }

    pub fn d1(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((m1, _), _)| *m1 > 0)
                .map(|(&(m1, m2), c)| ((m1 - 1, m2), c * gq(m1 as i64, 0))),
        )
    }

    pub fn d2(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, m2), _)| *m2 > 0)
                .map(|(&(m1, m2), c)| ((m1, m2 - 1), c * gq(m2 as i64, 0))),
        )
    }

    /// Drops every term of total degree at most `d`.
    pub fn drop_degree_at_most(&self, d: i64) -> Self {
        Self::from_terms(self.terms.iter().filter(|((a, b), _)| (a + b) as i64 > d).map(|(k, v)| (*k, v.clone())))
    }

    /// Largest absolute value among real and imaginary parts of the coefficients.
    pub fn max_coeff(&self) -> BigRational {
        self.terms.values().flat_map(|c| [c.re.abs(), c.im.abs()]).max().unwrap_or_else(BigRational::zero)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(&(m1, m2), c)| TermJson { exponents: [m1, m2], re: c.re.to_string(), im: c.im.to_string() })
            .collect()
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(&(m1, m2), c)| format!("({} + {}i) z1^{m1} z2^{m2}", c.re, c.im)).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// First-order operator `c0 f + c1 d1 f + c2 d2 f` with polynomial coefficients.
fn first_order(f: &BivarPoly, c0: &BivarPoly, c1: &BivarPoly, c2: &BivarPoly) -> BivarPoly {
    c0.mul(f).add(&c1.mul(&f.d1())).add(&c2.mul(&f.d2()))
}

fn int(n: i64) -> BivarPoly {
    BivarPoly::constant(gq(n, 0))
}

/// `N^+ f = -(a-2) z1 f + (z1^2 - 1) d1 f + z1 z2 d2 f`.
pub fn op_nplus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z1 = BivarPoly::z1();
    first_order(f, &z1.scale(&gq(2 - a, 0)), &z1.mul(&z1).sub(&int(1)), &z1.mul(&BivarPoly::z2()))
}

/// `N^- f = -i(a-2) z1 f + i(z1^2 + 1) d1 f + i z1 z2 d2 f`.
pub fn op_nminus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z1 = BivarPoly::z1();
    first_order(f, &z1.scale(&gq(2 - a, 0)), &z1.mul(&z1).add(&int(1)), &z1.mul(&BivarPoly::z2())).scale(&i_unit())
}

/// `M^+ f = -(a-2) z2 f + z1 z2 d1 f + (z2^2 - 1) d2 f`.
pub fn op_mplus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z2 = BivarPoly::z2();
    first_order(f, &z2.scale(&gq(2 - a, 0)), &BivarPoly::z1().mul(&z2), &z2.mul(&z2).sub(&int(1)))
}

/// `M^- f = -i(a-2) z2 f + i z1 z2 d1 f + i(z2^2 + 1) d2 f`.
pub fn op_mminus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z2 = BivarPoly::z2();
    first_order(f, &z2.scale(&gq(2 - a, 0)), &BivarPoly::z1().mul(&z2), &z2.mul(&z2).add(&int(1))).scale(&i_unit())
}

/// `X^- f = -2i d1 f`.
pub fn op_xminus(f: &BivarPoly) -> BivarPoly {
    f.d1().scale(&gq(0, -2))
}

/// `Y^- f = -2i d2 f`.
pub fn op_yminus(f: &BivarPoly) -> BivarPoly {
    f.d2().scale(&gq(0, -2))
}

/// `X^+ f = -2i(a-1) z1 f + 2i z1^2 d1 f + 2i z1 z2 d2 f`.
pub fn op_xplus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z1 = BivarPoly::z1();
    let two_i = gq(0, 2);
    first_order(f, &z1.scale(&gq(0, -2 * (a - 1))), &z1.mul(&z1).scale(&two_i), &z1.mul(&BivarPoly::z2()).scale(&two_i))
}

/// `Y^+ f = -2i(a-1) z2 f + 2i z1 z2 d1 f + 2i z2^2 d2 f`.
pub fn op_yplus(a: i64, f: &BivarPoly) -> BivarPoly {
    let z2 = BivarPoly::z2();
    let two_i = gq(0, 2);
    first_order(f, &z2.scale(&gq(0, -2 * (a - 1))), &BivarPoly::z1().mul(&z2).scale(&two_i), &z2.mul(&z2).scale(&two_i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GkOperator {
    NPlus,
    NMinus,
    MPlus,
    MMinus,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
}

impl GkOperator {
    pub const ALL: [GkOperator; 8] = [
        GkOperator::NPlus,
        GkOperator::NMinus,
        GkOperator::MPlus,
        GkOperator::MMinus,
        GkOperator::XPlus,
        GkOperator::XMinus,
        GkOperator::YPlus,
        GkOperator::YMinus,
    ];

    pub fn apply(self, a: i64, f: &BivarPoly) -> BivarPoly {
        match self {
            GkOperator::NPlus => op_nplus(a, f),
            GkOperator::NMinus => op_nminus(a, f),
            GkOperator::MPlus => op_mplus(a, f),
            GkOperator::MMinus => op_mminus(a, f),
            GkOperator::XPlus => op_xplus(a, f),
            GkOperator::XMinus => op_xminus(f),
            GkOperator::YPlus => op_yplus(a, f),
            GkOperator::YMinus => op_yminus(f),
        }
    }
}

/// Max coefficient of `[op1, op2] f` over all monomials `f` of degree at most `degree`.
pub fn commutator_check(op1: GkOperator, op2: GkOperator, a: i64, degree: u32) -> BigRational {
    let mut worst = BigRational::zero();
    for d in 0..=degree {
        for m1 in 0..=d {
            let f = BivarPoly::monomial(m1, d - m1, gq(1, 0));
            let c = op1.apply(a, &op2.apply(a, &f)).sub(&op2.apply(a, &op1.apply(a, &f)));
            worst = worst.max(c.max_coeff());
        }
    }
    worst
}

fn monomials_in_degrees(lo: i64, hi: i64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for d in lo.max(0)..=hi {
        for m1 in 0..=d as u32 {
            out.push((m1, d as u32 - m1));
        }
    }
    out
}

/// Nullspace of a dense matrix over the Gaussian rationals, by reduction to row echelon form.
pub fn nullspace(mut rows: Vec<Vec<GaussianRational>>, ncols: usize) -> Vec<Vec<GaussianRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, pr);
        let inv = GaussianRational::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&factor * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![GaussianRational::zero(); ncols];
            v[fc] = GaussianRational::one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[k][fc].clone();
            }
            v
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    pub a: i64,
    pub degree_bound: u32,
    pub dimension: usize,
    /// Representatives with no component of degree at most `a - 2`.
    pub basis: Vec<BivarPoly>,
    /// Common degree of the basis when every element is homogeneous of one degree.
    pub homogeneous_degree: Option<u32>,
}

/// Joint kernel of `X^-` and `Y^-` on polynomials of degree at most `degree` modulo
/// polynomials of degree at most `a - 2`.
pub fn pminus_kernel(a: i64, degree: u32) -> Result<KernelReport, GkError> {
    if a < 1 {
        return Err(GkError::Parameter(a));
    }
    if (degree as i64) < a - 1 {
        return Err(GkError::DegreeTooSmall { degree, min: a - 1 });
    }
    let domain = monomials_in_degrees(a - 1, degree as i64);
    let target = monomials_in_degrees(a - 1, degree as i64 - 1);
    let index: BTreeMap<(u32, u32), usize> = target.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let nt = target.len();
    let mut rows = vec![vec![GaussianRational::zero(); domain.len()]; 2 * nt];
    for (col, &(m1, m2)) in domain.iter().enumerate() {
        let f = BivarPoly::monomial(m1, m2, gq(1, 0));
        for (block, image) in [op_xminus(&f), op_yminus(&f)].into_iter().enumerate() {
            for (mono, c) in image.drop_degree_at_most(a - 2).terms() {
                rows[block * nt + index[mono]][col] = c.clone();
            }
        }
    }
    let basis: Vec<BivarPoly> = nullspace(rows, domain.len())
        .into_iter()
        .map(|v| BivarPoly::from_terms(domain.iter().copied().zip(v)))
        .collect();
    let degrees: Vec<Option<u32>> = basis.iter().map(BivarPoly::degree).collect();
    let homogeneous_degree = match degrees.first() {
        Some(Some(d)) if basis.iter().all(|b| b.is_homogeneous_of_degree(*d)) => Some(*d),
        _ => None,
    };
    Ok(KernelReport { a, degree_bound: degree, dimension: basis.len(), basis, homogeneous_degree })
}

/// Rational with integer value `n`, for comparisons with [`commutator_check`].
pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants() {
        let one = BivarPoly::constant(gq(1, 0));
        for a in 1..6 {
            assert_eq!(op_nplus(a, &one), BivarPoly::z1().scale(&gq(2 - a, 0)));
            assert_eq!(op_mminus(a, &one), BivarPoly::z2().scale(&gq(0, 2 - a)));
            assert_eq!(op_yplus(a, &one), BivarPoly::z2().scale(&gq(0, -2 * (a - 1))));
            assert_eq!(op_xplus(a, &one), BivarPoly::z1().scale(&gq(0, -2 * (a - 1))));
        }
        assert!(op_xminus(&one).is_zero());
    }

    #[test]
    fn nplus_on_z1() {
        let a = 4;
        let z1 = BivarPoly::z1();
        let z1sq = z1.mul(&z1);
        let expected = z1sq.scale(&gq(2 - a, 0)).add(&z1sq).sub(&BivarPoly::constant(gq(1, 0)));
        assert_eq!(op_nplus(a, &z1), expected);
    }

    #[test]
    fn power_rule() {
        let z1sq = BivarPoly::monomial(2, 0, gq(1, 0));
        assert_eq!(op_xminus(&z1sq), BivarPoly::z1().scale(&gq(0, -4)));
    }

    #[test]
    fn xminus_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let f = BivarPoly::random(&mut rng, 5);
            let a = rng.gen_range(1..7);
            assert_eq!(op_xminus(&f), op_nplus(a, &f).scale(&i_unit()).sub(&op_nminus(a, &f)));
            assert_eq!(op_yminus(&f), op_mplus(a, &f).scale(&i_unit()).sub(&op_mminus(a, &f)));
        }
    }

    #[test]
    fn kernels() {
        let k = pminus_kernel(1, 4).unwrap();
        assert_eq!((k.dimension, k.homogeneous_degree), (1, Some(0)));
        let k = pminus_kernel(3, 8).unwrap();
        assert_eq!((k.dimension, k.homogeneous_degree), (3, Some(2)));
        assert!(pminus_kernel(3, 1).is_err());
        assert!(pminus_kernel(0, 3).is_err());
    }

    #[test]
    fn commutators() {
        assert!(commutator_check(GkOperator::XMinus, GkOperator::YMinus, 2, 10).is_zero());
        assert!(commutator_check(GkOperator::XMinus, GkOperator::XMinus, 2, 4).is_zero());
        assert!(!commutator_check(GkOperator::XPlus, GkOperator::XMinus, 2, 1).is_zero());
    }

    #[test]
    fn nullspace_small() {
        let rows = vec![vec![gq(1, 0), gq(0, 1)], vec![gq(0, 1), gq(-1, 0)]];
        let ns = nullspace(rows, 2);
        assert_eq!(ns, vec![vec![gq(0, -1), gq(1, 0)]]);
    }
}
