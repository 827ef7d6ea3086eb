//! Hecke operators at `p`: normalized versus classical eigenvalues, the accessible
//! refinements of the endoscopic point, the Weyl action, and the dictionaries between
//! weights and Hodge-Tate weights.
//!
//! Unramified characters enter only through their value at `p`. The polarization
//! `chi^perp = chi |.|^-1` becomes `chi^perp(p) = p^f chi(p)` with `f` the residue degree.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{FieldContext, PadicElem, PadicError, Valuation};
use crate::weightspace::WeightTriple;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("{0} must be invertible")]
    NotInvertible(&'static str),
    #[error("expected {expected} eigenvalues, got {found}")]
    Shape { expected: usize, found: usize },
    #[error("operation needs {0} data")]
    WrongBehavior(PrimeBehavior),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeBehavior {
    Inert,
    Split,
}

impl PrimeBehavior {
    /// Residue degree of the place of the CM field above `p`.
    pub fn residue_degree(self) -> i64 {
        match self {
            PrimeBehavior::Inert => 2,
            PrimeBehavior::Split => 1,
        }
    }
}

impl fmt::Display for PrimeBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeBehavior::Inert => "inert",
            PrimeBehavior::Split => "split",
        })
    }
}

/// Normalized eigenvalues: `(lambda, mu)` for `(U_p, S_p)` when inert,
/// `(u0, u1, u2, u3)` for `U_0..U_3` when split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeEigensystem {
    pub behavior: PrimeBehavior,
    pub kappa: WeightTriple,
    pub eigenvalues: Vec<PadicElem>,
}

impl HeckeEigensystem {
    pub fn inert(kappa: WeightTriple, lambda: PadicElem, mu: PadicElem) -> Result<Self, HeckeError> {
        if mu.is_zero() {
            return Err(HeckeError::NotInvertible("S_p eigenvalue"));
        }
        Ok(HeckeEigensystem { behavior: PrimeBehavior::Inert, kappa, eigenvalues: vec![lambda, mu] })
    }

    pub fn split(kappa: WeightTriple, u: Vec<PadicElem>) -> Result<Self, HeckeError> {
        if u.len() != 4 {
            return Err(HeckeError::Shape { expected: 4, found: u.len() });
        }
        if u[0].is_zero() || u[3].is_zero() {
            return Err(HeckeError::NotInvertible("U_0 and U_3 eigenvalues"));
        }
        Ok(HeckeEigensystem { behavior: PrimeBehavior::Split, kappa, eigenvalues: u })
    }

    pub fn valuations(&self) -> Vec<Valuation> {
        self.eigenvalues.iter().map(PadicElem::valuation).collect()
    }
}

fn ctx_of(x: &PadicElem) -> &Arc<FieldContext> {
    x.context()
}

/// `(lambda^c, mu^c) = (p^k2 lambda, p^|k| mu)`.
pub fn classical_from_normalized_inert(
    lambda: &PadicElem,
    mu: &PadicElem,
    kappa: WeightTriple,
) -> (PadicElem, PadicElem) {
    (lambda.shift(kappa.k2), mu.shift(kappa.size()))
}

pub fn normalized_from_classical_inert(
    lambda_c: &PadicElem,
    mu_c: &PadicElem,
    kappa: WeightTriple,
) -> (PadicElem, PadicElem) {
    (lambda_c.shift(-kappa.k2), mu_c.shift(-kappa.size()))
}

/// Exponents `(k3, 0, k2, k1 + k2)` relating `U_i^c = p^e_i U_i`.
pub fn split_exponents(kappa: WeightTriple) -> [i64; 4] {
    [kappa.k3, 0, kappa.k2, kappa.k1 + kappa.k2]
}

pub fn classical_from_normalized_split(u: &[PadicElem; 4], kappa: WeightTriple) -> [PadicElem; 4] {
    let e = split_exponents(kappa);
    std::array::from_fn(|i| u[i].shift(e[i]))
}

pub fn normalized_from_classical_split(uc: &[PadicElem; 4], kappa: WeightTriple) -> [PadicElem; 4] {
    let e = split_exponents(kappa);
    std::array::from_fn(|i| uc[i].shift(-e[i]))
}

/// `w . (chi1, chi2) = (chi1^perp, chi2 (chi1 o N))` on values at `p`, where
/// `chi1^perp(p) = chi1(p)^-1` since conjugation fixes `p`, and `N(p) = p^2`.
pub fn weyl_conjugate_inert(chi1: &PadicElem, chi2: &PadicElem) -> Result<(PadicElem, PadicElem), HeckeError> {
    let first = chi1.inverse().map_err(|_| HeckeError::NotInvertible("chi1(p)"))?;
    let second = chi2 * &(chi1 * chi1);
    Ok((first, second))
}

/// `chi^perp(p) = p^f chi(p)` from `chi^perp = chi |.|^-1`.
pub fn perp_value(chi_p: &PadicElem, behavior: PrimeBehavior) -> PadicElem {
    chi_p.shift(behavior.residue_degree())
}

/// Inert polarization forces `chi(p)^2 = p^-2` up to a unit, so `v(chi(p)) = -1`.
/// The split condition couples two places and is not visible on `chi_v(p)` alone.
pub fn valuation_polarized(chi_p: &PadicElem, behavior: PrimeBehavior) -> bool {
    match behavior {
        PrimeBehavior::Inert => chi_p.valuation() == Valuation::Exact(-1),
        PrimeBehavior::Split => true,
    }
}

/// An ordering of the crystalline Frobenius data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub behavior: PrimeBehavior,
    /// `w` in the inert case; `1`, `(3,2)` or `(3,2,1)` in the split case.
    pub ordering: &'static str,
    pub frobenius_tuple: [PadicElem; 3],
    /// Value of the similitude component.
    pub similitude: PadicElem,
    /// The twisted Satake class the ordering corresponds to.
    pub associated_class: [PadicElem; 3],
}

impl Refinement {
    pub fn tuple_valuations(&self) -> [Valuation; 3] {
        std::array::from_fn(|i| self.frobenius_tuple[i].valuation())
    }
}

/// The accessible refinements of the endoscopic point: one when inert, three when split.
pub fn accessible_refinements(chi_p: &PadicElem, behavior: PrimeBehavior) -> Vec<Refinement> {
    let ctx = ctx_of(chi_p);
    let one = PadicElem::one(ctx);
    let perp = perp_value(chi_p, behavior);
    let abs_p = PadicElem::p_power(ctx, -behavior.residue_degree());
    let chi = chi_p.clone();
    let make = |ordering, tuple: [&PadicElem; 3], class: [&PadicElem; 3]| Refinement {
        behavior,
        ordering,
        frobenius_tuple: tuple.map(Clone::clone),
        similitude: chi.clone(),
        associated_class: class.map(Clone::clone),
    };
    match behavior {
        PrimeBehavior::Inert => vec![make("w", [&perp, &one, &chi], [&one, &chi, &abs_p])],
        PrimeBehavior::Split => vec![
            make("1", [&one, &perp, &chi], [&chi, &one, &abs_p]),
            make("(3,2)", [&perp, &one, &chi], [&one, &chi, &abs_p]),
            make("(3,2,1)", [&perp, &chi, &one], [&one, &abs_p, &chi]),
        ],
    }
}

/// Inert eigensystem with `lambda = p^-k2 psi1^2 psi2` and `mu = p^-|k| psi1 psi2`.
pub fn inert_eigensystem_from_characters(
    kappa: WeightTriple,
    psi1: &PadicElem,
    psi2: &PadicElem,
) -> Result<HeckeEigensystem, HeckeError> {
    let lambda = (&(psi1 * psi1) * psi2).shift(-kappa.k2);
    let mu = (psi1 * psi2).shift(-kappa.size());
    HeckeEigensystem::inert(kappa, lambda, mu)
}

/// Split eigensystem with `u3 = 1` and `F_i = u_(i-1) / u3` satisfying `p^h_i F_i = tuple_i`.
pub fn split_eigensystem_from_refinement(
    kappa: WeightTriple,
    refinement: &Refinement,
    h: [i64; 3],
) -> Result<HeckeEigensystem, HeckeError> {
    if refinement.behavior != PrimeBehavior::Split {
        return Err(HeckeError::WrongBehavior(PrimeBehavior::Split));
    }
    let ctx = ctx_of(&refinement.similitude);
    let t = &refinement.frobenius_tuple;
    let u = vec![t[0].shift(-h[0]), t[1].shift(-h[1]), t[2].shift(-h[2]), PadicElem::one(ctx)];
    HeckeEigensystem::split(kappa, u)
}

/// `F1 = p^-1 lambda / mu` and, given Hodge-Tate weights, `psi1^sigma(p) = p^(h1-h3) F1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementValue {
    pub f1: PadicElem,
    pub psi1: Option<PadicElem>,
}

pub fn refinement_function_f1(eig: &HeckeEigensystem, h: Option<[i64; 3]>) -> Result<RefinementValue, HeckeError> {
    if eig.behavior != PrimeBehavior::Inert {
        return Err(HeckeError::WrongBehavior(PrimeBehavior::Inert));
    }
    let (lambda, mu) = (&eig.eigenvalues[0], &eig.eigenvalues[1]);
    let f1 = lambda.checked_div(mu).map_err(|_| HeckeError::NotInvertible("S_p eigenvalue"))?.shift(-1);
    let psi1 = h.map(|h| f1.shift(h[0] - h[2]));
    Ok(RefinementValue { f1, psi1 })
}

/// `F_i = u_(i-1) / u3` for split data.
pub fn refinement_functions_split(eig: &HeckeEigensystem) -> Result<[PadicElem; 3], HeckeError> {
    if eig.behavior != PrimeBehavior::Split {
        return Err(HeckeError::WrongBehavior(PrimeBehavior::Split));
    }
    let u = &eig.eigenvalues;
    let inv = u[3].inverse().map_err(|_| HeckeError::NotInvertible("U_3 eigenvalue"))?;
    Ok([&u[0] * &inv, &u[1] * &inv, &u[2] * &inv])
}

/// Hodge-Tate weights `(1 + w3, -1 - w1, -w2)` of a point of `p`-weight `w`.
pub fn hodge_tate_from_pweight(w: [i64; 3]) -> [i64; 3] {
    [1 + w[2], -1 - w[0], -w[1]]
}

/// `tau`-Hodge-Tate weights `(1 - k3, k2 - 1, k1)` of a classical form of weight `k`.
pub fn hodge_tate_from_autweight(k: WeightTriple) -> [i64; 3] {
    [1 - k.k3, k.k2 - 1, k.k1]
}

/// The dictionary `w = (-k2, -k1, -k3)`.
pub fn pweight_from_autweight(k: WeightTriple) -> [i64; 3] {
    [-k.k2, -k.k1, -k.k3]
}

/// Coordinates in which a point of the family curve is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvePoint {
    /// `p`-weight: `w2 = 0`, `2 w1 + w3 = a - 2`.
    PWeight([i64; 3]),
    /// Hodge-Tate weights: `h3 = 0`, `h1 - 2 h2 = 1 + a`.
    HodgeTate([i64; 3]),
}

pub fn family_curve_membership(point: CurvePoint, a: i64) -> bool {
    match point {
        CurvePoint::PWeight(w) => w[1] == 0 && 2 * w[0] + w[2] == a - 2,
        CurvePoint::HodgeTate(h) => h[2] == 0 && h[0] - 2 * h[1] == 1 + a,
    }
}

/// `v(psi1^sigma(p)) = v(lambda) - v(mu) - k1 - k3`.
pub fn unramified_slope_from_eigs(lambda: &PadicElem, mu: &PadicElem, kappa: WeightTriple) -> Option<i64> {
    Some(lambda.valuation().exact()? - mu.valuation().exact()? - kappa.k1 - kappa.k3)
}

/// Valuation of the Frobenius eigenvalue (`phi^f`) of a crystalline character, read off
/// its Hodge-Tate weights over all embeddings; the cyclotomic character has weight `-1`.
pub fn crystalline_frobenius_valuation(weights: &[i64]) -> i64 {
    weights.iter().sum()
}

/// The point `pi^n(chi)` for the parameter `a`: weight `(0, 1-a, a)`, its Hodge-Tate
/// weights, the value `chi(p)` (a power of `p` with the valuation dictated by the
/// Hodge-Tate weights of `chi`) and its accessible refinements.
#[derive(Debug, Clone)]
pub struct EndoscopicPoint {
    pub a: i64,
    pub behavior: PrimeBehavior,
    pub kappa: WeightTriple,
    pub hodge_tate: [i64; 3],
    pub chi_p: PadicElem,
    pub refinements: Vec<Refinement>,
}

pub fn endoscopic_point(ctx: &Arc<FieldContext>, a: i64, behavior: PrimeBehavior) -> EndoscopicPoint {
    let kappa = WeightTriple::from_parameter(a);
    let h = hodge_tate_from_autweight(kappa);
    // chi carries the middle tau-weight; when inert its sigma-tau weight is minus the
    // tau-weight of chi^perp.
    let weights = match behavior {
        PrimeBehavior::Inert => vec![h[1], -h[0]],
        PrimeBehavior::Split => vec![h[1]],
    };
    let chi_p = PadicElem::p_power(ctx, crystalline_frobenius_valuation(&weights));
    let refinements = accessible_refinements(&chi_p, behavior);
    EndoscopicPoint { a, behavior, kappa, hodge_tate: h, chi_p, refinements }
}
