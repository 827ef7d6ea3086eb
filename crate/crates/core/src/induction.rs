//! Truncated model of the locally analytic induction: power series
//! `f(z) = sum c_m (z / p^n)^m` on the ball `p^n O`, the dilation `delta f(z) = f(pz)`
//! (the local model of `U_p`), the BGG map `(d/dz)^(k1-k2+1)` and the finite-slope
//! extension of eigenvectors.

use std::sync::Arc;

use num::rational::Ratio;
use num::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::PadicMatrix;
use crate::padic::{FieldContext, PadicElem, PadicError, PadicJson, Valuation};
use crate::spectral::{Rational, TruncatedOperator};
use crate::weightspace::WeightTriple;

/// Digits of slack allowed when testing `delta f = lambda f`.
pub const EIGEN_SLACK: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InductionError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("weight {0} is not dominant")]
    NotDominant(WeightTriple),
    #[error("truncation {truncation} too small, need more than {needed}")]
    TruncationTooSmall { truncation: usize, needed: usize },
    #[error("not a delta-eigenvector: coefficient {index} has defect of valuation {defect}")]
    NotEigenvector { index: usize, defect: Valuation },
    #[error("eigenvalue is indistinguishable from zero at precision")]
    EigenvalueVanishes,
    #[error("cannot extend {steps} steps from radius index {n}")]
    StepsTooLarge { steps: u32, n: u32 },
    #[error("a function needs at least one coefficient")]
    Empty,
}

/// A function on `p^n O` given by its first `M + 1` coefficients in the normalized coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocAnFun {
    ctx: Arc<FieldContext>,
    kappa: WeightTriple,
    n: u32,
    coeffs: Vec<PadicElem>,
}

/// JSON form `{kappa, n, coeffs, M}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocAnFunJson {
    pub kappa: WeightTriple,
    pub n: u32,
    pub coeffs: Vec<PadicJson>,
    #[serde(rename = "M")]
    pub truncation: usize,
}

impl LocAnFun {
    pub fn new(
        ctx: &Arc<FieldContext>,
        kappa: WeightTriple,
        n: u32,
        coeffs: Vec<PadicElem>,
    ) -> Result<Self, InductionError> {
        if coeffs.is_empty() {
            return Err(InductionError::Empty);
        }
        Ok(LocAnFun { ctx: ctx.clone(), kappa, n, coeffs })
    }

    /// The normalized monomial `(z / p^n)^m` truncated at degree `truncation`.
    pub fn monomial(ctx: &Arc<FieldContext>, kappa: WeightTriple, n: u32, m: usize, truncation: usize) -> Self {
        let mut coeffs = vec![PadicElem::zero(ctx); truncation + 1];
        coeffs[m] = PadicElem::one(ctx);
        LocAnFun { ctx: ctx.clone(), kappa, n, coeffs }
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn kappa(&self) -> WeightTriple {
        self.kappa
    }

    pub fn radius_index(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[PadicElem] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Polynomial of degree at most `k1 - k2`.
    pub fn is_classical(&self) -> bool {
        let r = (self.kappa.k1 - self.kappa.k2).max(-1);
        self.coeffs.iter().enumerate().all(|(m, c)| m as i64 <= r || c.is_zero())
    }

    /// Restriction to `p^(n+steps) O`: `c_m -> p^(m steps) c_m`.
    pub fn restrict(&self, steps: u32) -> LocAnFun {
        let coeffs = self.coeffs.iter().enumerate().map(|(m, c)| c.shift(m as i64 * steps as i64)).collect();
        LocAnFun { ctx: self.ctx.clone(), kappa: self.kappa, n: self.n + steps, coeffs }
    }

    /// The same function in the coordinate of `p^(n-1) O`: `c_m -> p^-m c_m`.
    pub fn widen(&self) -> Option<LocAnFun> {
        if self.n == 0 {
            return None;
        }
        let coeffs = self.coeffs.iter().enumerate().map(|(m, c)| c.shift(-(m as i64))).collect();
        Some(LocAnFun { ctx: self.ctx.clone(), kappa: self.kappa, n: self.n - 1, coeffs })
    }

    /// All coefficients lie in `O`.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero() || c.is_integral())
    }

    pub fn to_json(&self) -> LocAnFunJson {
        LocAnFunJson {
            kappa: self.kappa,
            n: self.n,
            coeffs: self.coeffs.iter().map(PadicElem::to_json).collect(),
            truncation: self.truncation(),
        }
    }

    pub fn from_json(ctx: &Arc<FieldContext>, j: &LocAnFunJson) -> Result<Self, InductionError> {
        let coeffs: Result<Vec<PadicElem>, PadicError> = j.coeffs.iter().map(|c| PadicElem::from_json(ctx, c)).collect();
        let f = Self::new(ctx, j.kappa, j.n, coeffs?)?;
        if f.truncation() != j.truncation {
            return Err(InductionError::TruncationTooSmall { truncation: f.truncation(), needed: j.truncation });
        }
        Ok(f)
    }
}

/// `delta f (z) = f(pz)` on the same ball: `c_m -> p^m c_m`. When `f` is integral the
/// [widened](LocAnFun::widen) image is integral on `p^(n-1) O`.
pub fn delta_apply(f: &LocAnFun) -> LocAnFun {
    let coeffs = f.coeffs.iter().enumerate().map(|(m, c)| c.shift(m as i64)).collect();
    LocAnFun { ctx: f.ctx.clone(), kappa: f.kappa, n: f.n, coeffs }
}

/// `diag(1, p, ..., p^M)` on the monomial basis of degree at most `M`.
pub fn delta_matrix(ctx: &Arc<FieldContext>, _kappa: WeightTriple, truncation: usize) -> TruncatedOperator {
    crate::spectral::delta_model(ctx, truncation + 1)
}

fn check_dominant(kappa: WeightTriple) -> Result<usize, InductionError> {
    if !kappa.is_dominant() {
        return Err(InductionError::NotDominant(kappa));
    }
    Ok((kappa.k1 - kappa.k2 + 1) as usize)
}

/// The weight `(k2 - 1, k1 + 1, k3)` receiving the BGG map.
pub fn bgg_target_weight(kappa: WeightTriple) -> WeightTriple {
    WeightTriple::new(kappa.k2 - 1, kappa.k1 + 1, kappa.k3)
}

fn falling(m: usize, r: usize) -> BigInt {
    (m - r + 1..=m).fold(BigInt::from(1), |acc, x| acc * BigInt::from(x))
}

/// Matrix of `(d/dz)^r`, `r = k1 - k2 + 1`, from degree `<= M` to degree `<= M - r`
/// on the ball `p^n O`.
pub fn bgg_matrix(
    ctx: &Arc<FieldContext>,
    kappa: WeightTriple,
    truncation: usize,
    n: u32,
) -> Result<PadicMatrix, InductionError> {
    let r = check_dominant(kappa)?;
    if truncation < r {
        return Err(InductionError::TruncationTooSmall { truncation, needed: r - 1 });
    }
    let scale = PadicElem::p_power(ctx, -(n as i64) * r as i64);
    Ok(PadicMatrix::from_fn(ctx, truncation - r + 1, truncation + 1, |i, j| {
        if j == i + r {
            &PadicElem::from_bigint(ctx, &falling(j, r)) * &scale
        } else {
            PadicElem::zero(ctx)
        }
    }))
}

/// `d_kappa f = (d/dz)^(k1-k2+1) f`, landing in weight `(k2-1, k1+1, k3)`.
pub fn bgg_apply(kappa: WeightTriple, f: &LocAnFun) -> Result<LocAnFun, InductionError> {
    let d = bgg_matrix(&f.ctx, kappa, f.truncation(), f.n)?;
    Ok(LocAnFun { ctx: f.ctx.clone(), kappa: bgg_target_weight(kappa), n: f.n, coeffs: d.apply(&f.coeffs) })
}

/// A basis of `ker d_kappa` on the truncation of degree `M`, over the fraction field.
pub fn bgg_kernel(
    ctx: &Arc<FieldContext>,
    kappa: WeightTriple,
    truncation: usize,
) -> Result<Vec<Vec<PadicElem>>, InductionError> {
    Ok(bgg_matrix(ctx, kappa, truncation, 0)?.nullspace())
}

/// Checks `delta f = lambda f` coefficientwise up to `slack` digits.
pub fn check_eigenvector(f: &LocAnFun, lambda: &PadicElem, slack: u32) -> Result<(), InductionError> {
    let n = f.ctx.precision() as i64;
    for (m, c) in f.coeffs.iter().enumerate() {
        let lhs = c.shift(m as i64);
        let rhs = lambda * c;
        let d = &lhs - &rhs;
        if d.is_zero() {
            continue;
        }
        let scale = lhs.valuation().lower_bound().min(rhs.valuation().lower_bound());
        if d.valuation().lower_bound() < scale.saturating_add(n - slack as i64) {
            return Err(InductionError::NotEigenvector { index: m, defect: d.valuation() });
        }
    }
    Ok(())
}

/// Extends an eigenvector `delta f = lambda f` from `p^n O` to `p^(n-steps) O` by iterating
/// `f = lambda^-1 delta f`.
pub fn finite_slope_extend(f: &LocAnFun, lambda: &PadicElem, steps: u32) -> Result<LocAnFun, InductionError> {
    if lambda.is_zero() {
        return Err(InductionError::EigenvalueVanishes);
    }
    check_eigenvector(f, lambda, EIGEN_SLACK)?;
    if steps > 0 && steps + 1 > f.n {
        return Err(InductionError::StepsTooLarge { steps, n: f.n });
    }
    let inv = lambda.inverse()?;
    let mut g = f.clone();
    for _ in 0..steps {
        let wide = delta_apply(&g).widen().expect("delta f extends one step");
        g = LocAnFun {
            coeffs: wide.coeffs.iter().map(|c| c * &inv).collect(),
            ..wide
        };
    }
    Ok(g)
}

/// Outcome of the commutation test `delta . d = p^(-r) d . delta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub holds: bool,
    /// Least valuation among the entries of the difference; a lower bound when all vanish.
    pub min_discrepancy: Valuation,
}

/// Checks `U_p . d_kappa = p^(-k1+k2-1) d_kappa . U_p` on the degree-`M` truncation with
/// `U_p` modeled by `delta`.
pub fn commutation_check(
    ctx: &Arc<FieldContext>,
    kappa: WeightTriple,
    truncation: usize,
) -> Result<CommutationReport, InductionError> {
    let r = check_dominant(kappa)?;
    if truncation <= r {
        return Err(InductionError::TruncationTooSmall { truncation, needed: r });
    }
    let big = delta_matrix(ctx, kappa, truncation);
    let small = delta_matrix(ctx, bgg_target_weight(kappa), truncation - r);
    commutation_check_with(ctx, kappa, truncation, big.entries(), small.entries())
}

/// The commutation test against caller-supplied models of `U_p` on source and target.
pub fn commutation_check_with(
    ctx: &Arc<FieldContext>,
    kappa: WeightTriple,
    truncation: usize,
    delta_source: &PadicMatrix,
    delta_target: &PadicMatrix,
) -> Result<CommutationReport, InductionError> {
    let r = check_dominant(kappa)?;
    let d = bgg_matrix(ctx, kappa, truncation, 0)?;
    let lhs = delta_target.mul(&d);
    let rhs = d.mul(delta_source).scale(&PadicElem::p_power(ctx, -(r as i64)));
    let diff = lhs.sub(&rhs);
    Ok(CommutationReport { holds: diff.is_zero(), min_discrepancy: diff.min_valuation() })
}

/// Verdict of the small-slope classicity criterion on one eigenvector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicityVerdict {
    /// Slope below `k1 - k2 + 1` and the function is a polynomial of degree `<= k1 - k2`.
    Classical { slope: i64 },
    /// Slope at least `k1 - k2 + 1`; the criterion says nothing.
    Vacuous { slope: i64 },
    /// Slope below the bound but the function is not classical.
    Violation { slope: i64, offending_degree: usize },
}

impl ClassicityVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, ClassicityVerdict::Violation { .. })
    }
}

/// For an eigenvector `delta f = lambda f`: slope `< k1 - k2 + 1` must force `f` classical.
pub fn classicity_sheaf_check(
    f: &LocAnFun,
    kappa: WeightTriple,
    lambda: &PadicElem,
) -> Result<ClassicityVerdict, InductionError> {
    let r = check_dominant(kappa)?;
    check_eigenvector(f, lambda, EIGEN_SLACK)?;
    let slope = lambda.valuation().exact().ok_or(InductionError::EigenvalueVanishes)?;
    if slope >= r as i64 {
        return Ok(ClassicityVerdict::Vacuous { slope });
    }
    let offending = f.coeffs.iter().enumerate().find(|(m, c)| *m >= r && !c.is_zero()).map(|(m, _)| m);
    Ok(match offending {
        None => ClassicityVerdict::Classical { slope },
        Some(offending_degree) => ClassicityVerdict::Violation { slope, offending_degree },
    })
}

/// Exhaustive scan of the monomial eigenbasis of `delta` at truncation `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicityScan {
    pub kappa: WeightTriple,
    pub truncation: usize,
    pub classical: usize,
    pub vacuous: usize,
    /// Degrees of eigenvectors violating the criterion.
    pub violations: Vec<usize>,
    /// Small-slope eigenvectors not killed by `d_kappa`.
    pub bgg_survivors: Vec<usize>,
}

pub fn classicity_scan(
    ctx: &Arc<FieldContext>,
    kappa: WeightTriple,
    truncation: usize,
) -> Result<ClassicityScan, InductionError> {
    let r = check_dominant(kappa)?;
    let mut scan = ClassicityScan {
        kappa,
        truncation,
        classical: 0,
        vacuous: 0,
        violations: Vec::new(),
        bgg_survivors: Vec::new(),
    };
    for m in 0..=truncation {
        let f = LocAnFun::monomial(ctx, kappa, 0, m, truncation);
        let lambda = PadicElem::p_power(ctx, m as i64);
        match classicity_sheaf_check(&f, kappa, &lambda)? {
            ClassicityVerdict::Classical { .. } => scan.classical += 1,
            ClassicityVerdict::Vacuous { .. } => scan.vacuous += 1,
            ClassicityVerdict::Violation { .. } => scan.violations.push(m),
        }
        if m < r && truncation >= r && !bgg_apply(kappa, &f)?.coeffs.iter().all(PadicElem::is_zero) {
            scan.bgg_survivors.push(m);
        }
    }
    Ok(scan)
}

/// The numerical criterion `3 + v(alpha) < k2 + k3`.
pub fn numerical_classicity_bound(kappa: WeightTriple, v_alpha: Ratio<i64>) -> bool {
    Rational::from_integer(3) + v_alpha < Rational::from_integer(kappa.k2 + kappa.k3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> Arc<FieldContext> {
        FieldContext::new(3, 20).unwrap()
    }

    fn w(k1: i64, k2: i64, k3: i64) -> WeightTriple {
        WeightTriple::new(k1, k2, k3)
    }

    #[test]
    fn delta_on_monomials() {
        let ctx = ctx();
        let f = LocAnFun::monomial(&ctx, w(0, 0, 0), 2, 3, 5);
        let g = delta_apply(&f);
        assert_eq!(g.coeffs()[3], PadicElem::from_int(&ctx, 27));
        let c = LocAnFun::monomial(&ctx, w(0, 0, 0), 2, 0, 5);
        assert_eq!(delta_apply(&c), c);
        let wide = g.widen().unwrap();
        assert!(wide.is_integral());
        assert!(!f.widen().unwrap().is_integral());
        assert_eq!(wide.radius_index(), 1);
        assert_eq!(wide.coeffs()[3], PadicElem::one(&ctx));
    }

    #[test]
    fn delta_matrix_small() {
        let ctx = ctx();
        let d = delta_matrix(&ctx, w(0, 0, 0), 2);
        let want = PadicMatrix::from_diag(&ctx, &[1, 3, 9].map(|x| PadicElem::from_int(&ctx, x)));
        assert_eq!(d.entries(), &want);
    }

    #[test]
    fn bgg_examples() {
        let ctx = ctx();
        let f = LocAnFun::monomial(&ctx, w(1, 0, 0), 0, 1, 4);
        assert!(bgg_apply(w(1, 0, 0), &f).unwrap().coeffs().iter().all(PadicElem::is_zero));
        let g = LocAnFun::monomial(&ctx, w(0, 0, 0), 0, 2, 4);
        let dg = bgg_apply(w(0, 0, 0), &g).unwrap();
        assert_eq!(dg.coeffs()[1], PadicElem::from_int(&ctx, 2));
        assert_eq!(dg.kappa(), w(-1, 1, 0));
        assert_eq!(dg.truncation(), 3);
        assert!(matches!(bgg_apply(w(4, 0, 0), &g), Err(InductionError::TruncationTooSmall { .. })));
        assert!(matches!(bgg_apply(w(0, 1, 0), &g), Err(InductionError::NotDominant(_))));
    }

    #[test]
    fn kernel_dimension() {
        let ctx = ctx();
        let ker = bgg_kernel(&ctx, w(5, 2, 0), 40).unwrap();
        assert_eq!(ker.len(), 4);
        for v in ker {
            assert!(v[4..].iter().all(PadicElem::is_zero));
        }
    }

    #[test]
    fn extend_monomial() {
        let ctx = ctx();
        let f = LocAnFun::monomial(&ctx, w(0, 0, 0), 3, 2, 6);
        let lambda = PadicElem::from_int(&ctx, 9);
        let g = finite_slope_extend(&f, &lambda, 2).unwrap();
        assert_eq!(g.radius_index(), 1);
        assert_eq!(g.restrict(2), f);
        let zero = LocAnFun::new(&ctx, w(0, 0, 0), 3, vec![PadicElem::zero(&ctx); 4]).unwrap();
        assert_eq!(finite_slope_extend(&zero, &lambda, 1).unwrap().restrict(1), zero);
        assert!(matches!(finite_slope_extend(&f, &lambda, 3), Err(InductionError::StepsTooLarge { .. })));
        let mixed = LocAnFun::new(&ctx, w(0, 0, 0), 3, vec![PadicElem::one(&ctx); 3]).unwrap();
        assert!(matches!(finite_slope_extend(&mixed, &lambda, 1), Err(InductionError::NotEigenvector { .. })));
        assert!(matches!(
            finite_slope_extend(&f, &PadicElem::zero(&ctx), 1),
            Err(InductionError::EigenvalueVanishes)
        ));
    }

    #[test]
    fn extend_scaled_eigenvectors() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 0..6 {
            let u = PadicElem::random_integral(&ctx, &mut rng);
            let mut coeffs = vec![PadicElem::zero(&ctx); 8];
            coeffs[m] = u;
            let f = LocAnFun::new(&ctx, w(0, 0, 0), 4, coeffs).unwrap();
            let lambda = PadicElem::p_power(&ctx, m as i64);
            let g = finite_slope_extend(&f, &lambda, 3).unwrap();
            assert_eq!(g.restrict(3), f);
        }
    }

    #[test]
    fn commutation_examples() {
        let ctx = ctx();
        assert!(commutation_check(&ctx, w(0, 0, 0), 20).unwrap().holds);
        let ctx5 = FieldContext::new(5, 20).unwrap();
        assert!(commutation_check(&ctx5, w(3, 1, 0), 25).unwrap().holds);
        let kappa = w(2, 0, 0);
        let mut big = delta_matrix(&ctx, kappa, 10).entries().clone();
        big.set(4, 5, PadicElem::one(&ctx));
        let small = delta_matrix(&ctx, kappa, 7);
        let rep = commutation_check_with(&ctx, kappa, 10, &big, small.entries()).unwrap();
        assert!(!rep.holds);
        // D(1,4) = 4*3*2 has valuation 1, scaled by p^-3.
        assert_eq!(rep.min_discrepancy, Valuation::Exact(-2));
    }

    #[test]
    fn classicity_examples() {
        let ctx = ctx();
        let kappa = w(4, 1, 0);
        let f = LocAnFun::monomial(&ctx, kappa, 0, 2, 10);
        let v = classicity_sheaf_check(&f, kappa, &PadicElem::from_int(&ctx, 9)).unwrap();
        assert_eq!(v, ClassicityVerdict::Classical { slope: 2 });
        let f = LocAnFun::monomial(&ctx, kappa, 0, 6, 10);
        let v = classicity_sheaf_check(&f, kappa, &PadicElem::p_power(&ctx, 6)).unwrap();
        assert_eq!(v, ClassicityVerdict::Vacuous { slope: 6 });
        let scan = classicity_scan(&ctx, kappa, 30).unwrap();
        assert!(scan.violations.is_empty());
        assert!(scan.bgg_survivors.is_empty());
        assert_eq!(scan.classical, 4);
        assert_eq!(scan.vacuous, 27);
    }

    #[test]
    fn numerical_bound() {
        assert!(numerical_classicity_bound(w(5, 4, 3), Ratio::from_integer(0)));
        assert!(!numerical_classicity_bound(w(1, 0, 0), Ratio::from_integer(0)));
        assert!(!numerical_classicity_bound(w(5, 4, 3), Ratio::from_integer(4)));
        assert!(numerical_classicity_bound(w(5, 4, 3), Ratio::new(7, 2)));
    }
}
