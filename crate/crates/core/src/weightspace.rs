//! Continuous characters of `O^x x O^1`: torsion indices, analytic exponents,
//! algebraic weights and analyticity radii.
//!
//! A character is stored intensionally. On `O^x = mu_{p^2-1} x (1+pO)` it is
//! `[x]^i * exp(s1 sigma(log <x>) + s3 log <x>)`; on `O^1 = mu_{p+1} x (1+pO)^1`
//! it is `[y]^j * exp(s2 sigma(log <y>))`. The embedding `tau` is the identity
//! coordinate of `O` and `sigma tau` is the Frobenius.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::rational::Ratio;
use num::{BigInt, Integer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{close, teichmuller_of_residue, FieldContext, PadicElem, PadicError, PadicJson, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("torsion index {index} out of range [0, {max}]")]
    TorsionIndex { index: u64, max: u64 },
    #[error("argument {0} is not a unit")]
    NotUnit(String),
    #[error("argument {0} does not have norm 1")]
    NotNormOne(String),
    #[error("character does not converge at this argument: {0}")]
    Divergent(String),
    #[error("evaluation on {0} is not a torsion character value")]
    DiscreteLog(String),
    #[error("reconstructed character disagrees with the input at {0}")]
    ReconstructionMismatch(String),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("malformed weight triple {0:?}")]
    MalformedWeight(String),
}

/// An integer weight `(k1, k2, k3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 3]", into = "[i64; 3]")]
pub struct WeightTriple {
    pub k1: i64,
    pub k2: i64,
    pub k3: i64,
}

impl From<[i64; 3]> for WeightTriple {
    fn from(k: [i64; 3]) -> Self {
        WeightTriple { k1: k[0], k2: k[1], k3: k[2] }
    }
}

impl From<WeightTriple> for [i64; 3] {
    fn from(k: WeightTriple) -> Self {
        [k.k1, k.k2, k.k3]
    }
}

impl WeightTriple {
    pub fn new(k1: i64, k2: i64, k3: i64) -> Self {
        WeightTriple { k1, k2, k3 }
    }

    /// Classical weights are exactly the dominant ones.
    pub fn is_dominant(&self) -> bool {
        self.k1 >= self.k2
    }

    /// `|k| = k1 + k2 + k3`.
    pub fn size(&self) -> i64 {
        self.k1 + self.k2 + self.k3
    }

    /// The involution `k' = (-k2, -k1, -k3)`, defined on algebraic weights only.
    pub fn dual(&self) -> Self {
        WeightTriple::new(-self.k2, -self.k1, -self.k3)
    }

    /// The weight `(0, 1-a, a)` attached to the character parameter `a`.
    pub fn from_parameter(a: i64) -> Self {
        WeightTriple::new(0, 1 - a, a)
    }
}

impl fmt::Display for WeightTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k1, self.k2, self.k3)
    }
}

impl FromStr for WeightTriple {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Result<Vec<i64>, _> =
            s.trim_matches(|c| c == '(' || c == ')').split(',').map(|x| x.trim().parse()).collect();
        match parts {
            Ok(v) if v.len() == 3 => Ok(WeightTriple::new(v[0], v[1], v[2])),
            _ => Err(WeightError::MalformedWeight(s.to_string())),
        }
    }
}

/// A continuous character of `O^x x O^1`.
#[derive(Clone, Debug)]
pub struct Character {
    ctx: Arc<FieldContext>,
    torsion: (u64, u64),
    s: [PadicElem; 3],
    algebraic: Option<WeightTriple>,
}

/// Number of connected components of weight space, `(p+1)(p^2-1)`.
pub fn component_count(p: u64) -> u64 {
    (p + 1) * (p * p - 1)
}

/// All torsion index pairs `(i, j)`, `i < p^2-1`, `j < p+1`.
pub fn torsion_characters(p: u64) -> Vec<(u64, u64)> {
    (0..p * p - 1).flat_map(|i| (0..=p).map(move |j| (i, j))).collect()
}

fn modulo(a: i64, m: u64) -> u64 {
    a.mod_floor(&(m as i64)) as u64
}

fn sigma_pow(x: &PadicElem, k: i64) -> Result<PadicElem, PadicError> {
    x.frobenius().pow_i64(k)
}

/// The displayed algebraic formula `(sigma tau)(x)^k1 tau(x)^k3 (sigma tau)(y)^k2`.
pub fn algebraic_formula(k: WeightTriple, x: &PadicElem, y: &PadicElem) -> Result<PadicElem, PadicError> {
    Ok(&(&sigma_pow(x, k.k1)? * &x.pow_i64(k.k3)?) * &sigma_pow(y, k.k2)?)
}

impl Character {
    pub fn new(ctx: &Arc<FieldContext>, torsion: (u64, u64), s: [PadicElem; 3]) -> Result<Self, WeightError> {
        let p = ctx.p();
        if torsion.0 > p * p - 2 {
            return Err(WeightError::TorsionIndex { index: torsion.0, max: p * p - 2 });
        }
        if torsion.1 > p {
            return Err(WeightError::TorsionIndex { index: torsion.1, max: p });
        }
        Ok(Character { ctx: ctx.clone(), torsion, s, algebraic: None })
    }

    /// Attaches an algebraic tag after checking agreement with the algebraic formula at 50 points.
    pub fn with_algebraic_tag(mut self, k: WeightTriple) -> Result<Self, WeightError> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x616c67);
        for _ in 0..50 {
            let (x, y) = random_point(&self.ctx, &mut rng);
            let lhs = self.evaluate(&x, &y)?;
            let rhs = algebraic_formula(k, &x, &y)?;
            if !close(&lhs, &rhs, 2) {
                return Err(WeightError::ReconstructionMismatch(format!("x = {x}, y = {y}")));
            }
        }
        self.algebraic = Some(k);
        Ok(self)
    }

    pub fn trivial(ctx: &Arc<FieldContext>) -> Self {
        let z = PadicElem::zero(ctx);
        Character { ctx: ctx.clone(), torsion: (0, 0), s: [z.clone(), z.clone(), z], algebraic: None }
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn torsion(&self) -> (u64, u64) {
        self.torsion
    }

    pub fn analytic_params(&self) -> &[PadicElem; 3] {
        &self.s
    }

    pub fn algebraic_tag(&self) -> Option<WeightTriple> {
        self.algebraic
    }

    /// `chi(x, y)` for a unit `x` and a norm-one unit `y`.
    pub fn evaluate(&self, x: &PadicElem, y: &PadicElem) -> Result<PadicElem, WeightError> {
        if !x.is_unit() {
            return Err(WeightError::NotUnit(x.to_string()));
        }
        if !y.is_unit() {
            return Err(WeightError::NotUnit(y.to_string()));
        }
        if !y.norm().agrees_with(&PadicElem::one(&self.ctx)) {
            return Err(WeightError::NotNormOne(y.to_string()));
        }
        let tx = x.teichmuller()?;
        let ty = y.teichmuller()?;
        let lx = x.checked_div(&tx)?.log()?;
        let ly = y.checked_div(&ty)?.log()?;
        let exponent =
            &(&(&self.s[0] * &lx.frobenius()) + &(&self.s[2] * &lx)) + &(&self.s[1] * &ly.frobenius());
        if exponent.valuation().lower_bound() < 1 {
            return Err(WeightError::Divergent(format!("exponent has valuation {}", exponent.valuation())));
        }
        let torsion = &tx.pow(self.torsion.0) * &ty.pow(self.torsion.1);
        Ok(&torsion * &exponent.exp()?)
    }

    /// Group law: indices add, exponents add.
    pub fn mul(&self, other: &Character) -> Character {
        let p = self.ctx.p();
        let algebraic = match (self.algebraic, other.algebraic) {
            (Some(a), Some(b)) => Some(WeightTriple::new(a.k1 + b.k1, a.k2 + b.k2, a.k3 + b.k3)),
            _ => None,
        };
        Character {
            ctx: self.ctx.clone(),
            torsion: ((self.torsion.0 + other.torsion.0) % (p * p - 1), (self.torsion.1 + other.torsion.1) % (p + 1)),
            s: [&self.s[0] + &other.s[0], &self.s[1] + &other.s[1], &self.s[2] + &other.s[2]],
            algebraic,
        }
    }

    /// Same torsion indices and exponents agreeing to within `slack` digits of the cap.
    pub fn same_as(&self, other: &Character, slack: u32) -> bool {
        self.torsion == other.torsion && self.s.iter().zip(&other.s).all(|(a, b)| close(a, b, slack))
    }

    pub fn to_json(&self) -> CharacterJson {
        CharacterJson {
            torsion: [self.torsion.0, self.torsion.1],
            s: [self.s[0].to_json(), self.s[1].to_json(), self.s[2].to_json()],
            algebraic: self.algebraic,
        }
    }

    pub fn from_json(ctx: &Arc<FieldContext>, j: &CharacterJson) -> Result<Self, WeightError> {
        let s = [
            PadicElem::from_json(ctx, &j.s[0])?,
            PadicElem::from_json(ctx, &j.s[1])?,
            PadicElem::from_json(ctx, &j.s[2])?,
        ];
        let chi = Character::new(ctx, (j.torsion[0], j.torsion[1]), s)?;
        match j.algebraic {
            Some(k) => chi.with_algebraic_tag(k),
            None => Ok(chi),
        }
    }
}

/// JSON form `{torsion: [i, j], s: [s1, s2, s3], algebraic: [k1, k2, k3] | null}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterJson {
    pub torsion: [u64; 2],
    pub s: [PadicJson; 3],
    pub algebraic: Option<WeightTriple>,
}

/// The algebraic character of weight `k`.
pub fn algebraic_character(ctx: &Arc<FieldContext>, k: WeightTriple) -> Character {
    let p = ctx.p();
    let i = modulo(p as i64 * k.k1 + k.k3, p * p - 1);
    let j = modulo(p as i64 * k.k2, p + 1);
    let s = [PadicElem::from_int(ctx, k.k1), PadicElem::from_int(ctx, k.k2), PadicElem::from_int(ctx, k.k3)];
    Character { ctx: ctx.clone(), torsion: (i, j), s, algebraic: Some(k) }
}

/// A random pair `(x, y)` with `x` a unit and `y` a norm-one unit.
pub fn random_point<R: rand::Rng + ?Sized>(ctx: &Arc<FieldContext>, rng: &mut R) -> (PadicElem, PadicElem) {
    let x = PadicElem::random_unit(ctx, rng);
    let z = PadicElem::random_unit(ctx, rng);
    // z / sigma(z) has norm one; every norm-one unit arises this way.
    let y = z.checked_div(&z.frobenius()).expect("units are invertible");
    (x, y)
}

/// Recovers torsion indices and analytic exponents of a character known only through
/// its values, then checks the reconstruction at 100 random points.
pub fn decompose<F>(ctx: &Arc<FieldContext>, eval: F) -> Result<Character, WeightError>
where
    F: Fn(&PadicElem, &PadicElem) -> Result<PadicElem, WeightError>,
{
    let p = ctx.p();
    let one = PadicElem::one(ctx);
    let g = teichmuller_of_residue(ctx, ctx.residue_generator());
    let h = g.pow(p - 1);

    let zeta = eval(&g, &one)?;
    let i = discrete_log(&g, &zeta, p * p - 1).ok_or_else(|| WeightError::DiscreteLog("x-torsion".into()))?;
    let eta = eval(&one, &h)?;
    let j = discrete_log(&h, &eta, p + 1).ok_or_else(|| WeightError::DiscreteLog("y-torsion".into()))?;

    let pt = &PadicElem::gen_t(ctx) * &PadicElem::from_int(ctx, p as i64);
    let u_real = PadicElem::from_int(ctx, 1 + p as i64);
    let u_imag = pt.exp()?;
    let sum13 = eval(&u_real, &one)?.log()?.checked_div(&u_real.log()?)?;
    let diff31 = eval(&u_imag, &one)?.log()?.checked_div(&pt)?;
    let s2 = -eval(&one, &u_imag)?.log()?.checked_div(&pt)?;
    let half = PadicElem::from_int(ctx, 2).inverse()?;
    let s3 = &(&sum13 + &diff31) * &half;
    let s1 = &(&sum13 - &diff31) * &half;
    let chi = Character::new(ctx, (i, j), [s1, s2, s3])?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x646563);
    for _ in 0..100 {
        let (x, y) = random_point(ctx, &mut rng);
        if !close(&chi.evaluate(&x, &y)?, &eval(&x, &y)?, 3) {
            return Err(WeightError::ReconstructionMismatch(format!("x = {x}, y = {y}")));
        }
    }
    Ok(chi)
}

fn discrete_log(base: &PadicElem, target: &PadicElem, order: u64) -> Option<u64> {
    let mut acc = PadicElem::one(base.context());
    for e in 0..order {
        if close(&acc, target, 2) {
            return Some(e);
        }
        acc = &acc * base;
    }
    None
}

/// Least `w` on the grid `{m/(p-1)}` such that the character is a single power series with
/// integral coefficients on `1 + p^ceil(w) O`.
pub fn analyticity_radius(chi: &Character) -> Ratio<i64> {
    let p = chi.ctx.p() as i64;
    let e = chi
        .s
        .iter()
        .filter_map(|s| s.valuation().exact())
        .map(|v| (-v).max(0))
        .max()
        .unwrap_or(0);
    Ratio::new(1, p - 1) + Ratio::from_integer(e)
}

/// `prod_i (1 + p^w X_i)^(S_i p^(-w + 2/(p-1)))` by the binomial series.
///
/// The exponent shift must be an integer and `p^w X_i` must lie in `O`, which on the
/// integer grid happens only for `p = 3`.
pub fn universal_character_eval(
    ctx: &Arc<FieldContext>,
    w: Ratio<i64>,
    s: &[PadicElem; 3],
    x: &[PadicElem; 3],
) -> Result<PadicElem, WeightError> {
    let p = ctx.p() as i64;
    let shift = -w + Ratio::new(2, p - 1);
    if !w.is_integer() || !shift.is_integer() {
        return Err(WeightError::Unsupported(format!(
            "w = {w} needs integral w and integral -w + 2/(p-1) at p = {p}"
        )));
    }
    let w = w.to_integer();
    let shift = shift.to_integer();
    let mut acc = PadicElem::one(ctx);
    for (si, xi) in s.iter().zip(x) {
        if si.is_exact_zero() || xi.is_exact_zero() {
            continue;
        }
        let y = xi.shift(w);
        let e = si.shift(shift);
        let reach = e.valuation().lower_bound().saturating_add(y.valuation().lower_bound());
        if y.valuation().lower_bound() < 1 || reach < 1 {
            return Err(WeightError::Divergent(format!("v(exponent) + v(p^w X) = {reach}")));
        }
        let one_plus = &PadicElem::one(ctx) + &y;
        acc = &acc * &(&e * &one_plus.log()?).exp()?;
    }
    Ok(acc)
}

/// `v(binom(s, n))` for `s` in `Frac(O)`; `None` when some factor vanishes at precision.
pub fn binomial_valuation(s: &PadicElem, n: u64) -> Option<i64> {
    let ctx = s.context();
    let mut v: i64 = 0;
    for k in 0..n {
        let f = s - &PadicElem::from_int(ctx, k as i64);
        match f.valuation() {
            Valuation::Exact(x) => v += x,
            _ => return None,
        }
        v -= crate::padic::int_valuation(&BigInt::from(k + 1), ctx.p()).unwrap() as i64;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<FieldContext> {
        FieldContext::new(3, 20).unwrap()
    }

    #[test]
    fn component_counts() {
        assert_eq!(component_count(3), 32);
        assert_eq!(component_count(5), 144);
        assert_eq!(component_count(7), 384);
        assert_eq!(torsion_characters(3).len(), 32);
    }

    #[test]
    fn trivial_weight_is_trivial() {
        let ctx = ctx();
        let chi = algebraic_character(&ctx, WeightTriple::new(0, 0, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let (x, y) = random_point(&ctx, &mut rng);
            assert_eq!(chi.evaluate(&x, &y).unwrap(), PadicElem::one(&ctx));
        }
    }

    #[test]
    fn weight_100_reads_sigma() {
        let ctx = ctx();
        let chi = algebraic_character(&ctx, WeightTriple::new(1, 0, 0));
        let u = PadicElem::from_coords(&ctx, BigInt::from(4), BigInt::from(1));
        let v = chi.evaluate(&u, &PadicElem::one(&ctx)).unwrap();
        assert!(close(&v, &u.frobenius(), 1));
    }

    #[test]
    fn algebraic_matches_formula() {
        let ctx = ctx();
        for k in [(1, 1, 1), (2, -1, 3), (-2, 4, 0), (5, 2, -3)] {
            let k = WeightTriple::new(k.0, k.1, k.2);
            let chi = algebraic_character(&ctx, k).with_algebraic_tag(k);
            assert!(chi.is_ok(), "{k}");
        }
    }

    #[test]
    fn weight_111_is_norm_times_sigma() {
        let ctx = ctx();
        let chi = algebraic_character(&ctx, WeightTriple::new(1, 1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (x, y) = random_point(&ctx, &mut rng);
            let oracle = &(&x.frobenius() * &x) * &y.frobenius();
            assert!(close(&chi.evaluate(&x, &y).unwrap(), &oracle, 1));
            assert!(close(&oracle, &(&x.norm() * &y.frobenius()), 0));
        }
    }

    #[test]
    fn decompose_trivial_and_algebraic() {
        let ctx = ctx();
        let triv = Character::trivial(&ctx);
        let d = decompose(&ctx, |x, y| triv.evaluate(x, y)).unwrap();
        assert_eq!(d.torsion(), (0, 0));
        assert!(d.analytic_params().iter().all(|s| s.is_zero() || s.valuation().lower_bound() >= 18));

        let chi = algebraic_character(&ctx, WeightTriple::new(1, 0, 0));
        let d = decompose(&ctx, |x, y| chi.evaluate(x, y)).unwrap();
        assert_eq!(d.torsion(), (3, 0));
        assert!(d.same_as(&chi, 3));
    }

    #[test]
    fn decompose_rejects_discontinuous() {
        let ctx = ctx();
        // Depends on the digit of x beyond the residue: not a character.
        let bad = |x: &PadicElem, _y: &PadicElem| -> Result<PadicElem, WeightError> {
            let (a0, _) = x.coords().unwrap();
            Ok(PadicElem::from_bigint(x.context(), &(a0 % BigInt::from(9) + BigInt::from(1))))
        };
        assert!(decompose(&ctx, bad).is_err());
    }

    #[test]
    fn radius_grid() {
        let ctx = ctx();
        let alg = algebraic_character(&ctx, WeightTriple::new(3, -2, 1));
        assert!(analyticity_radius(&alg) <= Ratio::from_integer(1));
        assert_eq!(analyticity_radius(&Character::trivial(&ctx)), Ratio::new(1, 2));
        let s1 = PadicElem::p_power(&ctx, -1);
        let wide = Character::new(&ctx, (0, 0), [s1, PadicElem::zero(&ctx), PadicElem::zero(&ctx)]).unwrap();
        assert!(analyticity_radius(&wide) > analyticity_radius(&alg));
    }

    #[test]
    fn universal_trivial_inputs() {
        let ctx = ctx();
        let z = PadicElem::zero(&ctx);
        let one = PadicElem::one(&ctx);
        let s = [one.clone(), one.clone(), one.clone()];
        let zs = [z.clone(), z.clone(), z.clone()];
        assert_eq!(universal_character_eval(&ctx, Ratio::from_integer(1), &zs, &s).unwrap(), one);
        assert_eq!(universal_character_eval(&ctx, Ratio::from_integer(1), &s, &zs).unwrap(), one);
        let ctx5 = FieldContext::new(5, 10).unwrap();
        let one5 = PadicElem::one(&ctx5);
        let s5 = [one5.clone(), one5.clone(), one5.clone()];
        assert!(matches!(
            universal_character_eval(&ctx5, Ratio::from_integer(1), &s5, &s5),
            Err(WeightError::Unsupported(_))
        ));
    }

    #[test]
    fn weight_parsing() {
        assert_eq!("1,-2,3".parse::<WeightTriple>().unwrap(), WeightTriple::new(1, -2, 3));
        assert_eq!("(0,0,0)".parse::<WeightTriple>().unwrap(), WeightTriple::new(0, 0, 0));
        assert!("1,2".parse::<WeightTriple>().is_err());
        assert_eq!(WeightTriple::new(1, 2, 3).dual(), WeightTriple::new(-2, -1, -3));
    }
}
