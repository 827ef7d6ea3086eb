//! Weak admissibility for filtered phi-modules of rank at most 3, described by their
//! Hodge-Tate weight and Frobenius slope multisets, and the valuation predicates used to
//! rule out reducible Galois representations.
//!
//! Slopes are valuations of eigenvalues of `phi^f` (not divided by `f`). Hodge-Tate weights
//! follow the convention in which the cyclotomic character has weight `-1`, so a rank-one
//! crystalline module is admissible iff its slope equals the sum of its weights.
//!
//! The filtration is not modelled beyond its weights. The test applied is the necessary
//! condition that any `s` slopes sum to at least the `s` smallest weights per embedding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdmissibilityError {
    #[error("rank must be 1, 2 or 3, got {0}")]
    Rank(usize),
    #[error("{what} has {found} entries, rank is {rank}")]
    Size { what: &'static str, found: usize, rank: usize },
    #[error("residue degree must be 1 or 2, got {0}")]
    ResidueDegree(u8),
    #[error("Hodge-Tate weights must be strictly increasing")]
    NotIncreasing,
    #[error("need h1 < h3, got h1 = {h1}, h3 = {h3}")]
    Order { h1: i64, h3: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredPhiModule {
    /// `tau`-weights.
    pub hodge: Vec<i64>,
    /// `sigma tau`-weights when `f = 2`; `None` derives them as the negated reverse of `hodge`.
    #[serde(default)]
    pub sigma_hodge: Option<Vec<i64>>,
    pub slopes: Vec<Rational>,
    #[serde(rename = "f")]
    pub residue_degree: u8,
}

impl FilteredPhiModule {
    pub fn new(hodge: Vec<i64>, slopes: Vec<Rational>, residue_degree: u8) -> Result<Self, AdmissibilityError> {
        let m = FilteredPhiModule { hodge, sigma_hodge: None, slopes, residue_degree };
        m.validate()?;
        Ok(m)
    }

    pub fn with_sigma_weights(mut self, sigma: Vec<i64>) -> Result<Self, AdmissibilityError> {
        self.sigma_hodge = Some(sigma);
        self.validate()?;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.hodge.len()
    }

    pub fn validate(&self) -> Result<(), AdmissibilityError> {
        let r = self.rank();
        if !(1..=3).contains(&r) {
            return Err(AdmissibilityError::Rank(r));
        }
        if self.slopes.len() != r {
            return Err(AdmissibilityError::Size { what: "slopes", found: self.slopes.len(), rank: r });
        }
        if let Some(s) = &self.sigma_hodge {
            if s.len() != r {
                return Err(AdmissibilityError::Size { what: "sigma weights", found: s.len(), rank: r });
            }
        }
        if !(1..=2).contains(&self.residue_degree) {
            return Err(AdmissibilityError::ResidueDegree(self.residue_degree));
        }
        Ok(())
    }

    /// Weights per embedding: `tau` only when `f = 1`, `tau` and `sigma tau` when `f = 2`.
    pub fn weights_per_embedding(&self) -> Vec<Vec<i64>> {
        let mut out = vec![self.hodge.clone()];
        if self.residue_degree == 2 {
            let sigma = self
                .sigma_hodge
                .clone()
                .unwrap_or_else(|| self.hodge.iter().rev().map(|h| -h).collect());
            out.push(sigma);
        }
        out
    }

    /// Direct sum.
    pub fn direct_sum(&self, other: &Self) -> Option<Self> {
        if self.residue_degree != other.residue_degree || self.rank() + other.rank() > 3 {
            return None;
        }
        let sigma = match self.residue_degree {
            1 => None,
            _ => {
                let mut s = self.weights_per_embedding()[1].clone();
                s.extend(other.weights_per_embedding()[1].iter().copied());
                Some(s)
            }
        };
        Some(FilteredPhiModule {
            hodge: self.hodge.iter().chain(&other.hodge).copied().collect(),
            sigma_hodge: sigma,
            slopes: self.slopes.iter().chain(&other.slopes).copied().collect(),
            residue_degree: self.residue_degree,
        })
    }
}

fn smallest_sum(weights: &[i64], s: usize) -> i64 {
    let mut w = weights.to_vec();
    w.sort_unstable();
    w[..s].iter().sum()
}

/// Hodge number of a would-be subobject of rank `s`: the least value it can take.
fn hodge_bound(m: &FilteredPhiModule, s: usize) -> Rational {
    Rational::from_integer(m.weights_per_embedding().iter().map(|w| smallest_sum(w, s)).sum())
}

pub fn weakly_admissible(m: &FilteredPhiModule) -> bool {
    if m.validate().is_err() {
        return false;
    }
    let r = m.rank();
    let total: Rational = m.slopes.iter().sum();
    if total != hodge_bound(m, r) {
        return false;
    }
    (1..(1u32 << r) - 1).all(|mask| {
        let chosen: Vec<Rational> = (0..r).filter(|i| mask & (1 << i) != 0).map(|i| m.slopes[i]).collect();
        chosen.iter().sum::<Rational>() >= hodge_bound(m, chosen.len())
    })
}

/// All 1-based pairs `(i, j)` with `h_i = h_j + alpha_j`.
pub fn character_sub_slots(h: [i64; 3], alpha: [Rational; 3]) -> Result<Vec<(usize, usize)>, AdmissibilityError> {
    if !(h[0] < h[1] && h[1] < h[2]) {
        return Err(AdmissibilityError::NotIncreasing);
    }
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if Rational::from_integer(h[i]) == Rational::from_integer(h[j]) + alpha[j] {
                out.push((i + 1, j + 1));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EliminationVerdict {
    Eliminated,
    /// Holds for the trivial reason `alpha = 0`; `matching[k]` is the position on the
    /// right matched with entry `k` on the left.
    NotEliminated { matching: [usize; 3] },
    /// Holds through the relation `alpha = 2 (h3 - h1)`.
    Degenerate { matching: [usize; 3], relation: String },
}

impl EliminationVerdict {
    pub fn is_eliminated(&self) -> bool {
        matches!(self, EliminationVerdict::Eliminated)
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Decides `{d + alpha, 0, -d - alpha} = {d, 0, -d}` for `d = h1 - h3` by trying every matching.
pub fn split_111_elimination(h1: i64, h3: i64, alpha1: Rational) -> Result<EliminationVerdict, AdmissibilityError> {
    if h1 >= h3 {
        return Err(AdmissibilityError::Order { h1, h3 });
    }
    let d = Rational::from_integer(h1 - h3);
    let zero = Rational::from_integer(0);
    let left = [d + alpha1, zero, -d - alpha1];
    let right = [d, zero, -d];
    let Some(matching) = PERMUTATIONS.into_iter().find(|perm| (0..3).all(|k| left[k] == right[perm[k]])) else {
        return Ok(EliminationVerdict::Eliminated);
    };
    if alpha1 == zero {
        Ok(EliminationVerdict::NotEliminated { matching })
    } else {
        Ok(EliminationVerdict::Degenerate {
            matching,
            relation: format!("h3 - h1 = {} = alpha1 / 2", h3 - h1),
        })
    }
}

/// True iff `u` differs from every slope listed.
pub fn crys_line_distinctness(slopes: &[Rational], u: Rational) -> bool {
    slopes.iter().all(|s| *s != u)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case: String,
    /// Whether the case is ruled out (or, for checks, whether the check passes).
    pub eliminated: bool,
    pub detail: String,
}

/// Default point on the family curve used by the case table: `h = (1 + a - 2t, -t, 0)`
/// with `t = 10a + 2`, so that both gaps exceed `a`.
pub fn default_family_weights(a: i64) -> [i64; 3] {
    let t = 10 * a + 2;
    [1 + a - 2 * t, -t, 0]
}

/// Runs the case table for parameter `a` and weights `h` (strictly increasing).
/// `u` is the valuation of `chi^perp(p)` at the inert endoscopic point.
pub fn elimination_table(a: i64, h: [i64; 3], u: Rational) -> Result<Vec<CaseVerdict>, AdmissibilityError> {
    let ra = Rational::from_integer(a);
    let zero = Rational::from_integer(0);
    let mut out = Vec::new();

    let v = split_111_elimination(h[0], h[2], ra)?;
    out.push(CaseVerdict {
        case: "split type (1,1,1)".into(),
        eliminated: v.is_eliminated(),
        detail: format!("{v:?}"),
    });

    let slots = character_sub_slots(h, [zero, ra, -ra])?;
    let shown = format!("{slots:?}");
    out.push(CaseVerdict {
        case: "rank-one sub with alpha_j != 0".into(),
        eliminated: slots.iter().all(|&(_, j)| j == 1),
        detail: shown.clone(),
    });
    out.push(CaseVerdict {
        case: "rank-one sub other than i = j = 1".into(),
        eliminated: slots == vec![(1, 1)],
        detail: shown,
    });

    let two = Rational::from_integer(2);
    out.push(CaseVerdict {
        case: "phi^2 = u line against slope u - 2".into(),
        eliminated: crys_line_distinctness(&[u - two], u),
        detail: format!("u = {u}"),
    });
    out.push(CaseVerdict {
        case: "phi^2 = 1 line against slope u".into(),
        eliminated: crys_line_distinctness(&[zero], u),
        detail: format!("u = {u}"),
    });
    out.push(CaseVerdict {
        case: "distinct Hodge-Tate weights".into(),
        eliminated: h[0] != h[1] && h[1] != h[2] && h[0] != h[2],
        detail: format!("h = {h:?}"),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn rank_one() {
        for h in -4..5 {
            assert!(weakly_admissible(&FilteredPhiModule::new(vec![h], vec![q(h)], 1).unwrap()));
            assert!(!weakly_admissible(&FilteredPhiModule::new(vec![h], vec![q(h - 1)], 1).unwrap()));
        }
    }

    #[test]
    fn inert_rank_one_sums_embeddings() {
        let m = FilteredPhiModule::new(vec![-2], vec![q(-1)], 2).unwrap().with_sigma_weights(vec![1]).unwrap();
        assert!(weakly_admissible(&m));
        let polarized = FilteredPhiModule::new(vec![-1, 0, 3], vec![q(-2), q(0), q(2)], 2).unwrap();
        assert!(weakly_admissible(&polarized));
    }

    #[test]
    fn newton_below_hodge_fails() {
        let m = FilteredPhiModule::new(vec![0, 2], vec![q(-1), q(3)], 1).unwrap();
        assert!(!weakly_admissible(&m));
        let ok = FilteredPhiModule::new(vec![0, 2], vec![q(1), q(1)], 1).unwrap();
        assert!(weakly_admissible(&ok));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(FilteredPhiModule::new(vec![], vec![], 1), Err(AdmissibilityError::Rank(0)));
        assert!(FilteredPhiModule::new(vec![1, 2], vec![q(1)], 1).is_err());
        assert_eq!(FilteredPhiModule::new(vec![1], vec![q(1)], 3), Err(AdmissibilityError::ResidueDegree(3)));
    }

    #[test]
    fn slots() {
        assert_eq!(character_sub_slots([0, 1, 2], [q(0); 3]).unwrap(), vec![(1, 1), (2, 2), (3, 3)]);
        let a = 2;
        let h = default_family_weights(a);
        assert_eq!(character_sub_slots(h, [q(0), q(a), q(-a)]).unwrap(), vec![(1, 1)]);
        assert_eq!(character_sub_slots([0, 0, 1], [q(0); 3]), Err(AdmissibilityError::NotIncreasing));
    }

    #[test]
    fn split_111() {
        assert!(matches!(split_111_elimination(-5, 0, q(0)).unwrap(), EliminationVerdict::NotEliminated { .. }));
        assert!(split_111_elimination(-5, 0, q(2)).unwrap().is_eliminated());
        assert!(matches!(split_111_elimination(-1, 0, q(2)).unwrap(), EliminationVerdict::Degenerate { .. }));
        assert!(split_111_elimination(0, 0, q(1)).is_err());
    }

    #[test]
    fn line_distinctness() {
        let u = q(1);
        assert!(crys_line_distinctness(&[u - q(2)], u));
        assert!(!crys_line_distinctness(&[u], u));
        assert!(!crys_line_distinctness(&[q(0)], q(0)));
    }

    #[test]
    fn table_all_eliminated() {
        for a in 1..6 {
            let rows = elimination_table(a, default_family_weights(a), q(1)).unwrap();
            assert_eq!(rows.len(), 6);
            assert!(rows.iter().all(|r| r.eliminated), "{rows:?}");
        }
    }
}
