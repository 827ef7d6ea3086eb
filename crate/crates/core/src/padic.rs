//! Arithmetic in the unramified quadratic extension `O = Z_p[t]/(t^2 - c)` and its
//! fraction field.
//!
//! Elements carry a capped relative precision: a nonzero element is stored as
//! `p^ord * (a0 + a1 t)` with a unit part known modulo `p^rel`, `rel <= N`.
//! An element whose digits vanish at its precision is a "zero at precision"
//! and reports its valuation as a lower bound, never as infinity. Only values
//! built structurally (the additive identity, structural zeros of matrices)
//! are exact zeros.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const EXACT_ZERO_ORD: i64 = i64::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = 2 is not supported")]
    EvenPrime,
    #[error("precision must be positive")]
    ZeroPrecision,
    #[error("t^2 - {c} is reducible modulo {p}")]
    ReducibleModulus { p: u64, c: u64 },
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("element is not a unit")]
    NotUnit,
    #[error("element is not congruent to 1 modulo p")]
    NotPrincipalUnit,
    #[error("division by an element indistinguishable from zero")]
    DivisionByZero,
    #[error("series diverges: {0}")]
    Divergent(String),
    #[error("malformed p-adic digits: {0}")]
    MalformedDigits(String),
}

/// The ring `O` at a fixed precision cap `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext {
    p: u64,
    precision: u32,
    c: u64,
    pows: Vec<BigInt>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn is_nonresidue(c: u64, p: u64) -> bool {
    c % p != 0 && pow_mod(c, (p - 1) / 2, p) == p - 1
}

impl FieldContext {
    /// Builds `O` with modulus `t^2 - c`, `c` the least positive non-residue mod `p`.
    pub fn new(p: u64, precision: u32) -> Result<Arc<Self>, PadicError> {
        Self::check_prime(p)?;
        let c = (2..p).find(|&c| is_nonresidue(c, p)).expect("odd primes have non-residues");
        Self::with_modulus(p, precision, c)
    }

    pub fn with_modulus(p: u64, precision: u32, c: u64) -> Result<Arc<Self>, PadicError> {
        Self::check_prime(p)?;
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if !is_nonresidue(c, p) {
            return Err(PadicError::ReducibleModulus { p, c });
        }
        let pb = BigInt::from(p);
        let mut pows = Vec::with_capacity(precision as usize + 1);
        let mut acc = BigInt::one();
        for _ in 0..=precision {
            pows.push(acc.clone());
            acc *= &pb;
        }
        Ok(Arc::new(FieldContext { p, precision, c, pows }))
    }

    fn check_prime(p: u64) -> Result<(), PadicError> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        if p == 2 {
            return Err(PadicError::EvenPrime);
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// The constant `c` of the modulus `t^2 - c`.
    pub fn modulus_constant(&self) -> u64 {
        self.c
    }

    /// Coefficients `(m0, m1, m2)` of the modulus `m0 + m1 t + m2 t^2`.
    pub fn modulus(&self) -> (i64, i64, i64) {
        (-(self.c as i64), 0, 1)
    }

    /// `p^k` for `k <= N`, computed on demand beyond.
    pub fn p_pow(&self, k: u32) -> BigInt {
        match self.pows.get(k as usize) {
            Some(v) => v.clone(),
            None => num::pow(BigInt::from(self.p), k as usize),
        }
    }

    fn p_pow_ref(&self, k: u32) -> &BigInt {
        &self.pows[k as usize]
    }

    /// Multiplication in the residue field `F_{p^2}`.
    pub fn residue_mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let p = self.p as u128;
        let (x0, x1, y0, y1) = (x.0 as u128, x.1 as u128, y.0 as u128, y.1 as u128);
        let r0 = (x0 * y0 + (self.c as u128) * ((x1 * y1) % p)) % p;
        let r1 = (x0 * y1 + x1 * y0) % p;
        (r0 as u64, r1 as u64)
    }

    pub fn residue_pow(&self, mut x: (u64, u64), mut e: u64) -> (u64, u64) {
        let mut r = (1, 0);
        while e > 0 {
            if e & 1 == 1 {
                r = self.residue_mul(r, x);
            }
            x = self.residue_mul(x, x);
            e >>= 1;
        }
        r
    }

    /// All units of `F_{p^2}` in a fixed order.
    pub fn residue_units(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::with_capacity((self.p * self.p - 1) as usize);
        for a1 in 0..self.p {
            for a0 in 0..self.p {
                if (a0, a1) != (0, 0) {
                    out.push((a0, a1));
                }
            }
        }
        out
    }

    /// The least (in enumeration order) generator of `F_{p^2}^x`.
    pub fn residue_generator(&self) -> (u64, u64) {
        let q1 = self.p * self.p - 1;
        let primes: Vec<u64> = (2..=q1).filter(|&l| q1 % l == 0 && is_prime(l)).collect();
        self.residue_units()
            .into_iter()
            .find(|&g| primes.iter().all(|&l| self.residue_pow(g, q1 / l) != (1, 0)))
            .expect("F_{p^2}^x is cyclic")
    }
}

/// Valuation of an element, normalized by `v(p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Exact(i64),
    /// The element vanishes at its precision; only a lower bound is known.
    AtLeast(i64),
    /// Structural zero.
    Infinite,
}

impl Valuation {
    pub fn exact(self) -> Option<i64> {
        match self {
            Valuation::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
            Valuation::Infinite => i64::MAX,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// An element `p^ord (a0 + a1 t)` of `Frac(O)`.
#[derive(Clone)]
pub struct PadicElem {
    ctx: Arc<FieldContext>,
    ord: i64,
    rel: u32,
    a0: BigInt,
    a1: BigInt,
}

fn vp(x: &BigInt, p: &BigInt) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        y = q;
        v += 1;
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

impl PadicElem {
    /// Normalizes `p^ord (a0 + a1 t)` known modulo `p^abs`.
    fn normalize(ctx: &Arc<FieldContext>, ord: i64, abs: i64, a0: BigInt, a1: BigInt) -> Self {
        if abs <= ord {
            return Self::zero_at(ctx, abs);
        }
        let k = (abs - ord).min(ctx.precision as i64) as u32;
        let m = ctx.p_pow_ref(k);
        let mut a0 = a0.mod_floor(m);
        let mut a1 = a1.mod_floor(m);
        if a0.is_zero() && a1.is_zero() {
            return Self::zero_at(ctx, ord + k as i64);
        }
        let pb = BigInt::from(ctx.p);
        let v = vp(&a0, &pb).min(vp(&a1, &pb));
        if v > 0 {
            let d = ctx.p_pow_ref(v);
            a0 /= d;
            a1 /= d;
        }
        PadicElem { ctx: ctx.clone(), ord: ord + v as i64, rel: k - v, a0, a1 }
    }

    fn zero_at(ctx: &Arc<FieldContext>, abs: i64) -> Self {
        PadicElem { ctx: ctx.clone(), ord: abs, rel: 0, a0: BigInt::zero(), a1: BigInt::zero() }
    }

    /// The structural zero.
    pub fn zero(ctx: &Arc<FieldContext>) -> Self {
        Self::zero_at(ctx, EXACT_ZERO_ORD)
    }

    /// An element known to vanish modulo `p^abs`.
    pub fn zero_with_precision(ctx: &Arc<FieldContext>, abs: i64) -> Self {
        Self::zero_at(ctx, abs)
    }

    pub fn one(ctx: &Arc<FieldContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn from_int(ctx: &Arc<FieldContext>, n: i64) -> Self {
        Self::from_bigint(ctx, &BigInt::from(n))
    }

    pub fn from_bigint(ctx: &Arc<FieldContext>, n: &BigInt) -> Self {
        Self::from_coords(ctx, n.clone(), BigInt::zero())
    }

    /// `a0 + a1 t` for integers known exactly; the result carries the full cap `N`.
    pub fn from_coords(ctx: &Arc<FieldContext>, a0: BigInt, a1: BigInt) -> Self {
        if a0.is_zero() && a1.is_zero() {
            return Self::zero(ctx);
        }
        let pb = BigInt::from(ctx.p);
        let v = vp(&a0, &pb).min(vp(&a1, &pb));
        let d = ctx.p_pow(v);
        let (a0, a1) = (a0 / &d, a1 / &d);
        Self::normalize(ctx, v as i64, v as i64 + ctx.precision as i64, a0, a1)
    }

    /// `p^ord (a0 + a1 t)` known modulo `p^abs`.
    pub fn with_precision(ctx: &Arc<FieldContext>, ord: i64, abs: i64, a0: BigInt, a1: BigInt) -> Self {
        Self::normalize(ctx, ord, abs, a0, a1)
    }

    pub fn from_rational(ctx: &Arc<FieldContext>, q: &BigRational) -> Result<Self, PadicError> {
        Self::from_bigint(ctx, q.numer()).checked_div(&Self::from_bigint(ctx, q.denom()))
    }

    /// The generator `t` with `t^2 = c`.
    pub fn gen_t(ctx: &Arc<FieldContext>) -> Self {
        Self::from_coords(ctx, BigInt::zero(), BigInt::one())
    }

    /// `p^k`, with `k` possibly negative.
    pub fn p_power(ctx: &Arc<FieldContext>, k: i64) -> Self {
        Self::normalize(ctx, k, k + ctx.precision as i64, BigInt::one(), BigInt::zero())
    }

    pub fn from_residue(ctx: &Arc<FieldContext>, r: (u64, u64)) -> Self {
        Self::from_coords(ctx, BigInt::from(r.0), BigInt::from(r.1))
    }

    /// A random element of `O` with full precision, zero excluded.
    pub fn random_integral<R: Rng + ?Sized>(ctx: &Arc<FieldContext>, rng: &mut R) -> Self {
        let m = ctx.p_pow(ctx.precision);
        loop {
            let a0 = random_below(rng, &m);
            let a1 = random_below(rng, &m);
            if !(a0.is_zero() && a1.is_zero()) {
                return Self::normalize(ctx, 0, ctx.precision as i64, a0, a1);
            }
        }
    }

    /// A random unit of `O` with full precision.
    pub fn random_unit<R: Rng + ?Sized>(ctx: &Arc<FieldContext>, rng: &mut R) -> Self {
        loop {
            let x = Self::random_integral(ctx, rng);
            if x.is_unit() {
                return x;
            }
        }
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn is_exact_zero(&self) -> bool {
        self.ord == EXACT_ZERO_ORD
    }

    /// True for structural zeros and for elements vanishing at their precision.
    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    pub fn is_unit(&self) -> bool {
        self.rel > 0 && self.ord == 0
    }

    pub fn is_integral(&self) -> bool {
        self.ord >= 0
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_exact_zero() {
            Valuation::Infinite
        } else if self.rel == 0 {
            Valuation::AtLeast(self.ord)
        } else {
            Valuation::Exact(self.ord)
        }
    }

    /// Number of known digits of the unit part.
    pub fn rel_precision(&self) -> u32 {
        self.rel
    }

    /// The element is known modulo `p^abs`; `None` for structural zeros.
    pub fn abs_precision(&self) -> Option<i64> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.ord + self.rel as i64)
        }
    }

    /// Coordinates of the unit part, reduced modulo `p^rel`.
    pub fn unit_coords(&self) -> (&BigInt, &BigInt) {
        (&self.a0, &self.a1)
    }

    /// Integral coordinates `(a0, a1)` of an element of `O`, or `None` if not integral.
    pub fn coords(&self) -> Option<(BigInt, BigInt)> {
        if self.is_zero() {
            return Some((BigInt::zero(), BigInt::zero()));
        }
        if self.ord < 0 {
            return None;
        }
        let s = self.ctx.p_pow(self.ord as u32);
        Some((&self.a0 * &s, &self.a1 * &s))
    }

    /// Reduction modulo `p` of an integral element.
    pub fn residue(&self) -> Option<(u64, u64)> {
        if self.ord < 0 {
            return None;
        }
        if self.ord > 0 || self.rel == 0 {
            return Some((0, 0));
        }
        let pb = BigInt::from(self.ctx.p);
        let r0 = self.a0.mod_floor(&pb).to_u64().unwrap();
        let r1 = self.a1.mod_floor(&pb).to_u64().unwrap();
        Some((r0, r1))
    }

    /// Rational integer value of an element of `Z_p`, symmetric residue at its precision.
    pub fn to_bigint_symmetric(&self) -> Option<BigInt> {
        let (a0, a1) = self.coords()?;
        if !a1.is_zero() {
            return None;
        }
        let abs = self.abs_precision()?;
        let m = self.ctx.p_pow(abs.max(0) as u32);
        let r = a0.mod_floor(&m);
        if &r * 2 > m {
            Some(r - m)
        } else {
            Some(r)
        }
    }

    fn same_ctx(&self, other: &Self) -> Result<(), PadicError> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(PadicError::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_ctx(other)?;
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        let abs = (self.ord + self.rel as i64).min(other.ord + other.rel as i64);
        let o = self.ord.min(other.ord);
        if abs <= o {
            return Ok(Self::zero_at(&self.ctx, abs));
        }
        let width = abs - o;
        let mut a0 = BigInt::zero();
        let mut a1 = BigInt::zero();
        for x in [self, other] {
            if x.rel == 0 {
                continue;
            }
            let shift = x.ord - o;
            if shift >= width {
                continue;
            }
            let s = self.ctx.p_pow(shift as u32);
            a0 += &x.a0 * &s;
            a1 += &x.a1 * &s;
        }
        Ok(Self::normalize(&self.ctx, o, abs, a0, a1))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_ctx(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(Self::zero(&self.ctx));
        }
        if self.rel == 0 || other.rel == 0 {
            return Ok(Self::zero_at(&self.ctx, self.ord + other.ord));
        }
        let rel = self.rel.min(other.rel);
        let c = BigInt::from(self.ctx.c);
        let a0 = &self.a0 * &other.a0 + c * &self.a1 * &other.a1;
        let a1 = &self.a0 * &other.a1 + &self.a1 * &other.a0;
        let ord = self.ord + other.ord;
        Ok(Self::normalize(&self.ctx, ord, ord + rel as i64, a0, a1))
    }

    fn neg_ref(&self) -> Self {
        if self.rel == 0 {
            return self.clone();
        }
        let m = self.ctx.p_pow_ref(self.rel);
        PadicElem {
            ctx: self.ctx.clone(),
            ord: self.ord,
            rel: self.rel,
            a0: (-&self.a0).mod_floor(m),
            a1: (-&self.a1).mod_floor(m),
        }
    }

    pub fn inverse(&self) -> Result<Self, PadicError> {
        if self.rel == 0 {
            return Err(PadicError::DivisionByZero);
        }
        let m = self.ctx.p_pow_ref(self.rel);
        let c = BigInt::from(self.ctx.c);
        let n = (&self.a0 * &self.a0 - c * &self.a1 * &self.a1).mod_floor(m);
        let ninv = mod_inverse(&n, m).ok_or(PadicError::NotUnit)?;
        let a0 = &self.a0 * &ninv;
        let a1 = -&self.a1 * &ninv;
        Ok(Self::normalize(&self.ctx, -self.ord, -self.ord + self.rel as i64, a0, a1))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_ctx(other)?;
        self.try_mul(&other.inverse()?)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn pow_i64(&self, e: i64) -> Result<Self, PadicError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    /// Multiplication by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_exact_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.ord += k;
        out
    }

    /// Forgets digits beyond absolute precision `abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        match self.abs_precision() {
            Some(a) if a <= abs => self.clone(),
            _ if self.is_exact_zero() => Self::zero_at(&self.ctx, abs),
            _ => Self::normalize(&self.ctx, self.ord, abs, self.a0.clone(), self.a1.clone()),
        }
    }

    /// True when `self - other` vanishes at precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    /// The Frobenius `a0 + a1 t -> a0 - a1 t`.
    pub fn frobenius(&self) -> Self {
        if self.rel == 0 {
            return self.clone();
        }
        let m = self.ctx.p_pow_ref(self.rel);
        PadicElem {
            ctx: self.ctx.clone(),
            ord: self.ord,
            rel: self.rel,
            a0: self.a0.clone(),
            a1: (-&self.a1).mod_floor(m),
        }
    }

    pub fn norm(&self) -> Self {
        self * &self.frobenius()
    }

    pub fn trace(&self) -> Self {
        self + &self.frobenius()
    }

    /// The root of unity of order prime to `p` congruent to `self` modulo `p`.
    pub fn teichmuller(&self) -> Result<Self, PadicError> {
        if !self.is_unit() {
            return Err(PadicError::NotUnit);
        }
        let r = self.residue().expect("units are integral");
        Ok(teichmuller_of_residue(&self.ctx, r))
    }

    /// `log(1 + y)` for `v(y) >= 1`.
    pub fn log(&self) -> Result<Self, PadicError> {
        let y = self - &Self::one(&self.ctx);
        if y.is_exact_zero() {
            return Ok(y);
        }
        if y.ord < 1 {
            return Err(PadicError::NotPrincipalUnit);
        }
        if y.rel == 0 {
            return Ok(y);
        }
        let abs = y.ord + y.rel as i64;
        let p = self.ctx.p as i64;
        let mut sum = Self::zero(&self.ctx);
        let mut power = y.clone();
        let mut n: i64 = 1;
        loop {
            let mut log_n = 0;
            let mut t = n;
            while t >= p {
                t /= p;
                log_n += 1;
            }
            if n * y.ord - log_n >= abs {
                break;
            }
            let term = power.checked_div(&Self::from_int(&self.ctx, n))?;
            sum = if n % 2 == 1 { &sum + &term } else { &sum - &term };
            power = &power * &y;
            n += 1;
        }
        Ok(sum.truncate_abs(abs))
    }

    /// `exp(y)` for `v(y) >= 1`.
    pub fn exp(&self) -> Result<Self, PadicError> {
        if self.is_exact_zero() {
            return Ok(Self::one(&self.ctx));
        }
        if self.ord < 1 {
            return Err(PadicError::Divergent(format!(
                "exp needs valuation at least 1, got {}",
                self.valuation()
            )));
        }
        let target = self.ctx.precision as i64 + 1;
        let p = self.ctx.p as i64;
        let mut sum = Self::one(&self.ctx);
        let mut term = Self::one(&self.ctx);
        let mut n: i64 = 1;
        while n * self.ord - (n - 1) / (p - 1) < target {
            term = (&term * self).checked_div(&Self::from_int(&self.ctx, n))?;
            sum = &sum + &term;
            n += 1;
        }
        Ok(sum)
    }

    /// Base-`p` digits of the unit part and the valuation shift.
    pub fn to_json(&self) -> PadicJson {
        let p = BigInt::from(self.ctx.p);
        let digits = |x: &BigInt| {
            let mut v = Vec::with_capacity(self.rel as usize);
            let mut y = x.clone();
            for _ in 0..self.rel {
                let (q, r) = y.div_mod_floor(&p);
                v.push(r.to_u64().unwrap());
                y = q;
            }
            v
        };
        PadicJson {
            digits: digits(&self.a0),
            t_digits: digits(&self.a1),
            val_shift: if self.is_exact_zero() { None } else { Some(self.ord) },
        }
    }

    pub fn from_json(ctx: &Arc<FieldContext>, j: &PadicJson) -> Result<Self, PadicError> {
        let Some(shift) = j.val_shift else {
            if j.digits.is_empty() && j.t_digits.is_empty() {
                return Ok(Self::zero(ctx));
            }
            return Err(PadicError::MalformedDigits("structural zero with digits".into()));
        };
        if j.digits.len() != j.t_digits.len() {
            return Err(PadicError::MalformedDigits("digit lists differ in length".into()));
        }
        if j.digits.len() > ctx.precision as usize {
            return Err(PadicError::MalformedDigits("more digits than the precision cap".into()));
        }
        let p = BigInt::from(ctx.p);
        let undigit = |d: &[u64]| -> Result<BigInt, PadicError> {
            let mut acc = BigInt::zero();
            for &x in d.iter().rev() {
                if x >= ctx.p {
                    return Err(PadicError::MalformedDigits(format!("digit {x} out of range")));
                }
                acc = acc * &p + BigInt::from(x);
            }
            Ok(acc)
        };
        let a0 = undigit(&j.digits)?;
        let a1 = undigit(&j.t_digits)?;
        let abs = shift + j.digits.len() as i64;
        let out = Self::normalize(ctx, shift, abs, a0, a1);
        if !j.digits.is_empty() && (out.ord != shift || out.rel as usize != j.digits.len()) {
            return Err(PadicError::MalformedDigits("leading digits divisible by p".into()));
        }
        Ok(out)
    }
}

fn random_below<R: Rng + ?Sized>(rng: &mut R, m: &BigInt) -> BigInt {
    let bytes = (m.bits() / 8 + 2) as usize;
    let buf: Vec<u8> = (0..bytes).map(|_| rng.gen()).collect();
    BigInt::from_bytes_le(Sign::Plus, &buf).mod_floor(m)
}

/// Teichmuller lift of a unit of `F_{p^2}` by Newton iteration on `y^(p^2-1) = 1`.
pub fn teichmuller_of_residue(ctx: &Arc<FieldContext>, r: (u64, u64)) -> PadicElem {
    assert!(r != (0, 0), "the residue must be a unit");
    let q1 = ctx.p * ctx.p - 1;
    let one = PadicElem::one(ctx);
    let q1e = PadicElem::from_int(ctx, q1 as i64);
    let mut y = PadicElem::from_residue(ctx, r);
    for _ in 0..64 {
        let yq2 = y.pow(q1 - 1);
        let f = &(&yq2 * &y) - &one;
        if f.is_zero() {
            break;
        }
        let step = f.checked_div(&(&q1e * &yq2)).expect("derivative is a unit");
        y = &y - &step;
    }
    y
}

/// JSON form of a p-adic number: base-`p` digits (least significant first) of the
/// two coordinates of the unit part, and the valuation shift (`null` for structural zero).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicJson {
    pub digits: Vec<u64>,
    pub t_digits: Vec<u64>,
    pub val_shift: Option<i64>,
}

impl PartialEq for PadicElem {
    fn eq(&self, other: &Self) -> bool {
        self.same_ctx(other).is_ok()
            && self.ord == other.ord
            && self.rel == other.rel
            && self.a0 == other.a0
            && self.a1 == other.a1
    }
}

impl Eq for PadicElem {}

impl fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        if self.rel == 0 {
            return write!(f, "O({}^{})", self.ctx.p, self.ord);
        }
        let unit = if self.a1.is_zero() {
            format!("{}", self.a0)
        } else if self.a0.is_zero() {
            format!("{}*t", self.a1)
        } else {
            format!("({} + {}*t)", self.a0, self.a1)
        };
        let abs = self.ord + self.rel as i64;
        if self.ord == 0 {
            write!(f, "{unit} + O({}^{abs})", self.ctx.p)
        } else {
            write!(f, "{}^{}*{unit} + O({}^{abs})", self.ctx.p, self.ord, self.ctx.p)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr<&PadicElem> for &PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: &PadicElem) -> PadicElem {
                self.$try(rhs).expect("operands belong to different field contexts")
            }
        }
        impl $tr<PadicElem> for PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: PadicElem) -> PadicElem {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&PadicElem> for PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: &PadicElem) -> PadicElem {
                (&self).$m(rhs)
            }
        }
        impl $tr<PadicElem> for &PadicElem {
            type Output = PadicElem;
            fn $m(self, rhs: PadicElem) -> PadicElem {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        self.neg_ref()
    }
}

impl Neg for PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        self.neg_ref()
    }
}

/// `a` and `b` agree to within `slack` digits of the precision cap, relative to their size.
pub fn close(a: &PadicElem, b: &PadicElem, slack: u32) -> bool {
    let d = a - b;
    if d.is_zero() {
        return true;
    }
    let scale = a.valuation().lower_bound().min(b.valuation().lower_bound());
    d.valuation().lower_bound() >= scale.saturating_add(a.context().precision() as i64 - slack as i64)
}

/// `v_p(n)` for a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        None
    } else {
        Some(vp(&n.abs(), &BigInt::from(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx3() -> Arc<FieldContext> {
        FieldContext::new(3, 20).unwrap()
    }

    #[test]
    fn modulus_is_least_nonresidue() {
        assert_eq!(FieldContext::new(3, 5).unwrap().modulus_constant(), 2);
        assert_eq!(FieldContext::new(5, 5).unwrap().modulus_constant(), 2);
        assert_eq!(FieldContext::new(7, 5).unwrap().modulus_constant(), 3);
        assert_eq!(FieldContext::new(17, 5).unwrap().modulus_constant(), 3);
    }

    #[test]
    fn rejects_bad_primes() {
        assert_eq!(FieldContext::new(4, 5).unwrap_err(), PadicError::NotPrime(4));
        assert_eq!(FieldContext::new(2, 5).unwrap_err(), PadicError::EvenPrime);
        assert_eq!(FieldContext::new(3, 0).unwrap_err(), PadicError::ZeroPrecision);
        assert!(matches!(
            FieldContext::with_modulus(5, 5, 4),
            Err(PadicError::ReducibleModulus { .. })
        ));
    }

    #[test]
    fn frobenius_fixes_base() {
        let ctx = ctx3();
        let x = PadicElem::from_int(&ctx, 1234);
        assert_eq!(x.frobenius(), x);
    }

    #[test]
    fn frobenius_is_involution() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = PadicElem::random_integral(&ctx, &mut rng);
            assert_eq!(x.frobenius().frobenius(), x);
        }
    }

    #[test]
    fn frobenius_of_teichmuller_is_pth_power() {
        let ctx = ctx3();
        let g = ctx.residue_generator();
        let tg = teichmuller_of_residue(&ctx, g);
        let expected = teichmuller_of_residue(&ctx, ctx.residue_pow(g, 3));
        assert_eq!(tg.frobenius(), expected);
        for r in ctx.residue_units() {
            let tr = teichmuller_of_residue(&ctx, r);
            assert_eq!(tr.frobenius(), teichmuller_of_residue(&ctx, ctx.residue_pow(r, 3)));
        }
    }

    #[test]
    fn norm_and_trace() {
        let ctx = ctx3();
        let p = PadicElem::from_int(&ctx, 3);
        assert_eq!(p.norm(), PadicElem::from_int(&ctx, 9));
        let t = PadicElem::gen_t(&ctx);
        // x + sigma(x) for x = t is -m1 = 0 for the modulus t^2 - c.
        assert!(t.trace().is_zero());
        assert_eq!(t.norm(), PadicElem::from_int(&ctx, -(ctx.modulus_constant() as i64)));
        let u = PadicElem::from_coords(&ctx, BigInt::from(2), BigInt::from(1));
        assert_eq!(u.norm().valuation(), Valuation::Exact(0));
        assert_eq!(u.trace(), PadicElem::from_int(&ctx, 4));
    }

    #[test]
    fn teichmuller_basics() {
        let ctx = FieldContext::new(3, 15).unwrap();
        let one = PadicElem::one(&ctx);
        assert_eq!(one.teichmuller().unwrap(), one);
        assert_eq!(PadicElem::from_int(&ctx, 3).teichmuller().unwrap_err(), PadicError::NotUnit);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = PadicElem::random_unit(&ctx, &mut rng);
            let y = x.teichmuller().unwrap();
            assert_eq!(y.pow(8), one);
            assert_eq!(y.residue(), x.residue());
            // Oracle: x -> x^(p^2) converges to the lift, gaining a digit per step.
            let mut z = x.clone();
            for _ in 0..15 {
                z = z.pow(9);
            }
            assert_eq!(z, y);
            assert_eq!(y.frobenius(), x.frobenius().teichmuller().unwrap());
        }
    }

    #[test]
    fn valuations() {
        let ctx = ctx3();
        assert_eq!(PadicElem::from_int(&ctx, 9).valuation(), Valuation::Exact(2));
        assert_eq!(PadicElem::from_int(&ctx, 7).valuation(), Valuation::Exact(0));
        let x = &PadicElem::from_int(&ctx, 3 * 5) + &PadicElem::from_int(&ctx, 27);
        assert_eq!(x.valuation(), Valuation::Exact(1));
        let a = PadicElem::from_int(&ctx, 5);
        let d = &a - &a;
        assert_eq!(d.valuation(), Valuation::AtLeast(20));
        assert_eq!(PadicElem::zero(&ctx).valuation(), Valuation::Infinite);
    }

    #[test]
    fn capped_relative_keeps_small_elements() {
        let ctx = FieldContext::new(3, 10).unwrap();
        let x = PadicElem::p_power(&ctx, 100);
        let y = &x + &PadicElem::p_power(&ctx, 101);
        assert_eq!(y.valuation(), Valuation::Exact(100));
        assert_eq!(y.rel_precision(), 10);
        let z = PadicElem::p_power(&ctx, -3).inverse().unwrap();
        assert_eq!(z, PadicElem::p_power(&ctx, 3));
    }

    #[test]
    fn inverse_and_division() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let one = PadicElem::one(&ctx);
        for _ in 0..50 {
            let x = PadicElem::random_integral(&ctx, &mut rng);
            assert!((&x * &x.inverse().unwrap()).agrees_with(&one));
        }
        assert_eq!(PadicElem::zero(&ctx).inverse().unwrap_err(), PadicError::DivisionByZero);
    }

    #[test]
    fn log_exp_roundtrip() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let y = PadicElem::random_integral(&ctx, &mut rng).shift(1);
            let e = y.exp().unwrap();
            assert!(e.log().unwrap().agrees_with(&y));
        }
        let a = PadicElem::from_int(&ctx, 4);
        let b = PadicElem::from_int(&ctx, 7);
        let lhs = (&a * &b).log().unwrap();
        let rhs = &a.log().unwrap() + &b.log().unwrap();
        assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn json_roundtrip() {
        let ctx = ctx3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in -3..4 {
            let x = PadicElem::random_integral(&ctx, &mut rng).shift(k);
            assert_eq!(PadicElem::from_json(&ctx, &x.to_json()).unwrap(), x);
        }
        let z = PadicElem::zero(&ctx);
        assert_eq!(PadicElem::from_json(&ctx, &z.to_json()).unwrap(), z);
        let zp = PadicElem::zero_with_precision(&ctx, 7);
        assert_eq!(PadicElem::from_json(&ctx, &zp.to_json()).unwrap(), zp);
    }

    #[test]
    fn residue_generator_has_full_order() {
        for p in [3u64, 5, 7, 11] {
            let ctx = FieldContext::new(p, 4).unwrap();
            let g = ctx.residue_generator();
            let mut seen = std::collections::HashSet::new();
            let mut x = (1, 0);
            for _ in 0..p * p - 1 {
                seen.insert(x);
                x = ctx.residue_mul(x, g);
            }
            assert_eq!(seen.len() as u64, p * p - 1);
        }
    }
}
