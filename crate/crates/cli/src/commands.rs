//! One function per subcommand. Each returns a [`Report`] embedding the run configuration;
//! failed identities are recorded as violations rather than errors.

use std::sync::Arc;

use num::rational::Ratio;
use pel_core::admissibility::{
    default_family_weights, elimination_table, weakly_admissible, CaseVerdict, FilteredPhiModule,
};
use pel_core::gkcoh::{commutator_check, pminus_kernel, GkOperator, TermJson};
use pel_core::hecke::{
    classical_from_normalized_inert, classical_from_normalized_split, endoscopic_point, family_curve_membership,
    hodge_tate_from_autweight, hodge_tate_from_pweight, inert_eigensystem_from_characters, perp_value,
    pweight_from_autweight, refinement_function_f1, refinement_functions_split, split_eigensystem_from_refinement,
    unramified_slope_from_eigs, valuation_polarized, CurvePoint, HeckeEigensystem, PrimeBehavior, Refinement,
};
use pel_core::induction::{bgg_kernel, classicity_scan, commutation_check, ClassicityScan, CommutationReport};
use pel_core::padic::{teichmuller_of_residue, FieldContext, PadicElem, PadicJson, Valuation};
use pel_core::spectral::{char_series, delta_model, newton_polygon, slope_le_dimension, NewtonPolygon, Rational, SlopeCount};
use pel_core::weightspace::{
    algebraic_character, analyticity_radius, component_count, decompose, torsion_characters, Character,
    CharacterJson, WeightTriple,
};
use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::config::RunConfig;
use crate::report::{Report, Table};
use crate::CliError;

/// Exhaustive enumeration of torsion characters is skipped above this many components.
const ENUMERATION_LIMIT: u64 = 5000;

fn vals(xs: &[PadicElem]) -> Vec<String> {
    xs.iter().map(|x| x.valuation().to_string()).collect()
}

fn rational_list(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(Rational::to_string).collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(input: &str) -> Result<T, CliError> {
    serde_json::from_str(input).map_err(|e| CliError::Input(format!("malformed JSON input: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct HodgeTateDictionary {
    pub kappa: WeightTriple,
    pub pweight: [i64; 3],
    pub from_autweight: [i64; 3],
    pub from_pweight: [i64; 3],
    pub agree: bool,
}

pub fn hodge_tate_dictionary(kappa: WeightTriple) -> HodgeTateDictionary {
    let pweight = pweight_from_autweight(kappa);
    let from_autweight = hodge_tate_from_autweight(kappa);
    let from_pweight = hodge_tate_from_pweight(pweight);
    HodgeTateDictionary { kappa, pweight, from_autweight, from_pweight, agree: from_autweight == from_pweight }
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterRow {
    pub label: String,
    pub torsion: [u64; 2],
    pub s: [PadicJson; 3],
    pub radius: String,
    /// `ok`, `mismatch`, or the error met while decomposing.
    pub decomposition: String,
    pub hodge_tate: Option<HodgeTateDictionary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightsResult {
    pub component_count: u64,
    /// Torsion characters told apart by their values, when the enumeration is small enough.
    pub distinct_torsion_characters: Option<u64>,
    pub characters: Vec<CharacterRow>,
}

#[derive(Debug, Deserialize)]
struct WeightsInput {
    characters: Vec<CharacterJson>,
}

fn distinct_torsion_characters(ctx: &Arc<FieldContext>) -> Result<u64, CliError> {
    let p = ctx.p();
    let gx = teichmuller_of_residue(ctx, ctx.residue_generator());
    let gy = gx.pow(p - 1);
    let one = PadicElem::one(ctx);
    let zero = || PadicElem::zero(ctx);
    let mut seen: Vec<(PadicElem, PadicElem)> = Vec::new();
    for t in torsion_characters(p) {
        let chi = Character::new(ctx, t, [zero(), zero(), zero()]).map_err(CliError::input)?;
        let vx = chi.evaluate(&gx, &one).map_err(CliError::input)?;
        let vy = chi.evaluate(&one, &gy).map_err(CliError::input)?;
        if !seen.iter().any(|(a, b)| a.agrees_with(&vx) && b.agrees_with(&vy)) {
            seen.push((vx, vy));
        }
    }
    Ok(seen.len() as u64)
}

fn character_row(label: String, chi: &Character) -> CharacterRow {
    let decomposition = match decompose(chi.context(), |x, y| chi.evaluate(x, y)) {
        Ok(d) if d.torsion() == chi.torsion() && d.same_as(chi, 3) => "ok".to_string(),
        Ok(_) => "mismatch".to_string(),
        Err(e) => format!("error: {e}"),
    };
    let j = chi.to_json();
    CharacterRow {
        label,
        torsion: j.torsion,
        s: j.s,
        radius: analyticity_radius(chi).to_string(),
        decomposition,
        hodge_tate: chi.algebraic_tag().map(hodge_tate_dictionary),
    }
}

/// Component count, torsion enumeration, and decomposition of characters: the algebraic
/// character of `(0, 1-a, a)`, of `--kappa` if given, and any supplied as JSON.
pub fn weights(cfg: &RunConfig, kappa: Option<WeightTriple>, input: Option<&str>) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let count = component_count(cfg.p);
    let distinct = if count <= ENUMERATION_LIMIT { Some(distinct_torsion_characters(&ctx)?) } else { None };

    let mut chars = Vec::new();
    let base = WeightTriple::from_parameter(cfg.a);
    chars.push((format!("algebraic {base}"), algebraic_character(&ctx, base)));
    if let Some(k) = kappa {
        chars.push((format!("algebraic {k}"), algebraic_character(&ctx, k)));
    }
    if let Some(text) = input {
        let parsed: WeightsInput = parse_json(text)?;
        for (i, j) in parsed.characters.iter().enumerate() {
            let chi = Character::from_json(&ctx, j).map_err(CliError::input)?;
            chars.push((format!("input {i}"), chi));
        }
    }
    let rows: Vec<CharacterRow> = chars.iter().map(|(l, c)| character_row(l.clone(), c)).collect();

    let mut table = Table::new(&["label", "torsion_i", "torsion_j", "radius", "decomposition"]);
    for r in &rows {
        table.push(vec![
            r.label.clone(),
            r.torsion[0].to_string(),
            r.torsion[1].to_string(),
            r.radius.clone(),
            r.decomposition.clone(),
        ]);
    }
    let result = WeightsResult { component_count: count, distinct_torsion_characters: distinct, characters: rows };
    let mut report = Report::new("weights", cfg, &result, table)?;
    if distinct.is_some_and(|d| d != count) {
        report.violation(format!("{} distinct torsion characters, expected {count}", distinct.unwrap_or(0)));
    }
    for r in &result.characters {
        if r.decomposition == "mismatch" {
            report.violation(format!("{}: decomposition does not reproduce the character", r.label));
        }
        if r.hodge_tate.as_ref().is_some_and(|h| !h.agree) {
            report.violation(format!("{}: Hodge-Tate maps disagree", r.label));
        }
    }
    Ok(report)
}

fn require_dominant(kappa: WeightTriple) -> Result<usize, CliError> {
    if !kappa.is_dominant() {
        return Err(CliError::Input(format!("kappa = {kappa} is not dominant")));
    }
    Ok((kappa.k1 - kappa.k2 + 1) as usize)
}

/// Characteristic series and Newton polygon of one truncation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeTable {
    pub truncation: usize,
    pub char_series: Vec<PadicJson>,
    pub polygon: NewtonPolygon,
}

fn slope_table(ctx: &Arc<FieldContext>, m: usize) -> Result<SlopeTable, CliError> {
    let cs = char_series(&delta_model(ctx, m), m).map_err(CliError::input)?;
    Ok(SlopeTable { truncation: m, char_series: cs.iter().map(PadicElem::to_json).collect(), polygon: newton_polygon(&cs) })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopesResult {
    pub kappa: WeightTriple,
    pub tables: Vec<SlopeTable>,
    pub slopes: Vec<(usize, Vec<String>)>,
    pub stabilized_slopes: Option<Vec<String>>,
    pub stabilized_at: Option<usize>,
    pub count_below_first: SlopeCount,
    pub commutation: CommutationReport,
    pub classicity: ClassicityScan,
    /// `disabled`, `miss`, `hit` or `stale`.
    pub cache: String,
}

fn slope_tables(cfg: &RunConfig, ctx: &Arc<FieldContext>, kappa: WeightTriple) -> Result<(Vec<SlopeTable>, String), CliError> {
    let compute = || cfg.schedule.iter().map(|&m| slope_table(ctx, m)).collect::<Result<Vec<_>, _>>();
    let Some(dir) = &cfg.cache_dir else {
        return Ok((compute()?, "disabled".into()));
    };
    let cache = Cache::new(dir);
    let key = Cache::key(&("spectral", "slope_tables", "delta_model", cfg.p, cfg.precision, &cfg.schedule, kappa))?;
    if let Some(cached) = cache.load::<Vec<SlopeTable>>(&key)? {
        // Spot check against a fresh computation at the smallest truncation.
        let fresh = slope_table(ctx, cfg.schedule[0])?;
        if cached.len() == cfg.schedule.len() && cached[0] == fresh {
            return Ok((cached, "hit".into()));
        }
        let tables = compute()?;
        cache.store(&key, &tables)?;
        return Ok((tables, "stale".into()));
    }
    let tables = compute()?;
    cache.store(&key, &tables)?;
    Ok((tables, "miss".into()))
}

/// Newton polygons of the delta-model along the schedule, stabilization, and the
/// commutation and classicity checks at `kappa`.
pub fn slopes(cfg: &RunConfig, kappa: WeightTriple) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let r = require_dominant(kappa)?;
    let top = *cfg.schedule.last().expect("validated schedule");
    if top <= r {
        return Err(CliError::Input(format!("schedule {:?} too small for kappa = {kappa}: need M > {r}", cfg.schedule)));
    }
    let (tables, cache_status) = slope_tables(cfg, &ctx, kappa)?;
    let slope_lists: Vec<(usize, Vec<Rational>)> = tables.iter().map(|t| (t.truncation, t.polygon.slopes())).collect();
    let stable = slope_lists.windows(2).find(|w| w[1].1.starts_with(&w[0].1)).map(|w| (w[0].0, w[0].1.clone()));

    let op = delta_model(&ctx, top);
    let h = Rational::from_integer(cfg.schedule[0] as i64 - 1);
    let count = slope_le_dimension(&op, h, &cfg.schedule).map_err(CliError::input)?;
    let commutation = commutation_check(&ctx, kappa, top).map_err(CliError::input)?;
    let classicity = classicity_scan(&ctx, kappa, top).map_err(CliError::input)?;

    let mut table = Table::new(&["m", "n", "v", "on_hull"]);
    for t in &tables {
        for (n, v) in &t.polygon.points {
            table.push(vec![t.truncation.to_string(), n.to_string(), v.to_string(), t.polygon.on_hull(*n).to_string()]);
        }
    }
    let result = SlopesResult {
        kappa,
        slopes: slope_lists.iter().map(|(m, s)| (*m, rational_list(s))).collect(),
        stabilized_slopes: stable.as_ref().map(|s| rational_list(&s.1)),
        stabilized_at: stable.map(|s| s.0),
        tables,
        count_below_first: count,
        commutation,
        classicity,
        cache: cache_status,
    };
    let mut report = Report::new("slopes", cfg, &result, table)?;
    for t in &result.tables {
        for (n, v) in &t.polygon.points {
            let want = (n * n.saturating_sub(1) / 2) as i64;
            if *v != Valuation::Exact(want) {
                report.violation(format!("M = {}: v(c_{n}) = {v}, expected {want}", t.truncation));
            }
        }
    }
    if !result.commutation.holds {
        report.violation(format!("commutation identity fails: discrepancy {}", result.commutation.min_discrepancy));
    }
    if !result.classicity.violations.is_empty() || !result.classicity.bgg_survivors.is_empty() {
        report.violation(format!("classicity scan: {:?}", result.classicity));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicityRow {
    pub truncation: usize,
    pub scan: ClassicityScan,
    pub bgg_kernel_dimension: usize,
}

/// Classicity scans and BGG kernel dimensions for every truncation in the schedule.
pub fn classicity(cfg: &RunConfig, kappa: WeightTriple) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let r = require_dominant(kappa)?;
    if cfg.schedule[0] < r {
        return Err(CliError::Input(format!("schedule {:?} too small for kappa = {kappa}: need M >= {r}", cfg.schedule)));
    }
    let mut rows = Vec::new();
    for &m in &cfg.schedule {
        let scan = classicity_scan(&ctx, kappa, m).map_err(CliError::input)?;
        let dim = bgg_kernel(&ctx, kappa, m).map_err(CliError::input)?.len();
        rows.push(ClassicityRow { truncation: m, scan, bgg_kernel_dimension: dim });
    }
    let mut table = Table::new(&["m", "classical", "vacuous", "violations", "bgg_survivors", "bgg_kernel_dimension"]);
    for row in &rows {
        table.push(vec![
            row.truncation.to_string(),
            row.scan.classical.to_string(),
            row.scan.vacuous.to_string(),
            row.scan.violations.len().to_string(),
            row.scan.bgg_survivors.len().to_string(),
            row.bgg_kernel_dimension.to_string(),
        ]);
    }
    let mut report = Report::new("classicity", cfg, &rows, table)?;
    for row in &rows {
        if !row.scan.violations.is_empty() || !row.scan.bgg_survivors.is_empty() {
            report.violation(format!("M = {}: small-slope eigenvector outside the classical subspace", row.truncation));
        }
        if row.bgg_kernel_dimension != r {
            report.violation(format!("M = {}: ker d_kappa has dimension {}, expected {r}", row.truncation, row.bgg_kernel_dimension));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub ordering: String,
    pub tuple: [PadicJson; 3],
    pub tuple_valuations: Vec<String>,
    pub similitude_valuation: String,
    pub class_valuations: Vec<String>,
    pub eigenvalue_valuations: Vec<String>,
    pub f_valuations: Vec<String>,
    pub unramified_slope: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndoscopicResult {
    pub behavior: PrimeBehavior,
    pub a: i64,
    pub kappa: WeightTriple,
    pub hodge_tate: [i64; 3],
    pub chi_p: PadicJson,
    pub chi_valuation: String,
    pub perp_valuation: String,
    pub polarized: bool,
    pub refinements: Vec<RefinementRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub behavior: PrimeBehavior,
    pub kappa: WeightTriple,
    pub eigenvalue_valuations: Vec<String>,
    pub classical_valuations: Vec<String>,
    pub f_valuations: Vec<String>,
    pub psi1_valuation: Option<String>,
    pub unramified_slope: Option<i64>,
}

#[derive(Debug, Deserialize)]
struct EigenInput {
    kappa: WeightTriple,
    eigenvalues: Vec<PadicJson>,
}

fn refinement_row(pt_kappa: WeightTriple, h: [i64; 3], r: &Refinement) -> Result<RefinementRow, CliError> {
    let (eig, f, slope) = match r.behavior {
        PrimeBehavior::Inert => {
            let eig = inert_eigensystem_from_characters(pt_kappa, &r.frobenius_tuple[0], &r.similitude)
                .map_err(CliError::input)?;
            let f1 = refinement_function_f1(&eig, Some(h)).map_err(CliError::input)?.f1;
            let slope = unramified_slope_from_eigs(&eig.eigenvalues[0], &eig.eigenvalues[1], pt_kappa);
            (eig, vec![f1], slope)
        }
        PrimeBehavior::Split => {
            let eig = split_eigensystem_from_refinement(pt_kappa, r, h).map_err(CliError::input)?;
            let f = refinement_functions_split(&eig).map_err(CliError::input)?;
            (eig, f.to_vec(), None)
        }
    };
    Ok(RefinementRow {
        ordering: r.ordering.to_string(),
        tuple: r.frobenius_tuple.clone().map(|x| x.to_json()),
        tuple_valuations: vals(&r.frobenius_tuple),
        similitude_valuation: r.similitude.valuation().to_string(),
        class_valuations: vals(&r.associated_class),
        eigenvalue_valuations: vals(&eig.eigenvalues),
        f_valuations: vals(&f),
        unramified_slope: slope,
    })
}

fn refine_eigen(cfg: &RunConfig, ctx: &Arc<FieldContext>, text: &str) -> Result<Report, CliError> {
    let input: EigenInput = parse_json(text)?;
    let eigs: Vec<PadicElem> =
        input.eigenvalues.iter().map(|j| PadicElem::from_json(ctx, j)).collect::<Result<_, _>>().map_err(CliError::input)?;
    let k = input.kappa;
    let h = hodge_tate_from_autweight(k);
    let result = match cfg.prime_behavior {
        PrimeBehavior::Inert => {
            let [l, m] = <[PadicElem; 2]>::try_from(eigs)
                .map_err(|v| CliError::Input(format!("inert data needs 2 eigenvalues, got {}", v.len())))?;
            let eig = HeckeEigensystem::inert(k, l.clone(), m.clone()).map_err(CliError::input)?;
            let v = refinement_function_f1(&eig, Some(h)).map_err(CliError::input)?;
            let (lc, mc) = classical_from_normalized_inert(&l, &m, k);
            EigenResult {
                behavior: PrimeBehavior::Inert,
                kappa: k,
                eigenvalue_valuations: vals(&[l.clone(), m.clone()]),
                classical_valuations: vals(&[lc, mc]),
                f_valuations: vals(&[v.f1]),
                psi1_valuation: v.psi1.map(|x| x.valuation().to_string()),
                unramified_slope: unramified_slope_from_eigs(&l, &m, k),
            }
        }
        PrimeBehavior::Split => {
            let u = <[PadicElem; 4]>::try_from(eigs)
                .map_err(|v| CliError::Input(format!("split data needs 4 eigenvalues, got {}", v.len())))?;
            let eig = HeckeEigensystem::split(k, u.to_vec()).map_err(CliError::input)?;
            let f = refinement_functions_split(&eig).map_err(CliError::input)?;
            EigenResult {
                behavior: PrimeBehavior::Split,
                kappa: k,
                eigenvalue_valuations: vals(&u),
                classical_valuations: vals(&classical_from_normalized_split(&u, k)),
                f_valuations: vals(&f),
                psi1_valuation: None,
                unramified_slope: None,
            }
        }
    };
    let mut table = Table::new(&["behavior", "kappa", "eigenvalue_valuations", "f_valuations", "unramified_slope"]);
    table.push(vec![
        result.behavior.to_string(),
        result.kappa.to_string(),
        result.eigenvalue_valuations.join(" "),
        result.f_valuations.join(" "),
        result.unramified_slope.map(|s| s.to_string()).unwrap_or_default(),
    ]);
    Report::new("refine", cfg, &result, table)
}

/// Refinements at the endoscopic point for `a`, or refinement functions of supplied
/// eigenvalues when `input` is given.
pub fn refine(cfg: &RunConfig, input: Option<&str>) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    if let Some(text) = input {
        return refine_eigen(cfg, &ctx, text);
    }
    let b = cfg.prime_behavior;
    let pt = endoscopic_point(&ctx, cfg.a, b);
    let rows: Vec<RefinementRow> =
        pt.refinements.iter().map(|r| refinement_row(pt.kappa, pt.hodge_tate, r)).collect::<Result<_, _>>()?;
    let result = EndoscopicResult {
        behavior: b,
        a: cfg.a,
        kappa: pt.kappa,
        hodge_tate: pt.hodge_tate,
        chi_p: pt.chi_p.to_json(),
        chi_valuation: pt.chi_p.valuation().to_string(),
        perp_valuation: perp_value(&pt.chi_p, b).valuation().to_string(),
        polarized: valuation_polarized(&pt.chi_p, b),
        refinements: rows,
    };
    let mut table = Table::new(&["ordering", "tuple_valuations", "class_valuations", "f_valuations", "unramified_slope"]);
    for r in &result.refinements {
        table.push(vec![
            r.ordering.clone(),
            r.tuple_valuations.join(" "),
            r.class_valuations.join(" "),
            r.f_valuations.join(" "),
            r.unramified_slope.map(|s| s.to_string()).unwrap_or_default(),
        ]);
    }
    let mut report = Report::new("refine", cfg, &result, table)?;
    let a = cfg.a;
    let (count, expect, ordering) = match b {
        PrimeBehavior::Inert => (1, vec![a.to_string()], "w"),
        PrimeBehavior::Split => (3, vec!["0".into(), a.to_string(), (-a).to_string()], "(3,2)"),
    };
    if result.refinements.len() != count {
        report.violation(format!("{} refinements, expected {count}", result.refinements.len()));
    }
    match result.refinements.iter().find(|r| r.ordering == ordering) {
        Some(r) if r.f_valuations == expect => {}
        Some(r) => report.violation(format!("ordering {ordering}: v(F) = {:?}, expected {expect:?}", r.f_valuations)),
        None => report.violation(format!("ordering {ordering} missing")),
    }
    Ok(report)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SlopeValue {
    Int(i64),
    Text(String),
}

impl SlopeValue {
    fn to_rational(&self) -> Result<Rational, CliError> {
        match self {
            SlopeValue::Int(n) => Ok(Rational::from_integer(*n)),
            SlopeValue::Text(s) => {
                let bad = || CliError::Input(format!("malformed slope {s:?}"));
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
                    None => (s.trim().parse().map_err(|_| bad())?, 1),
                };
                if d == 0 {
                    return Err(bad());
                }
                Ok(Ratio::new(n, d))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct AdmissibleInput {
    rank: Option<usize>,
    hodge: Vec<i64>,
    #[serde(default)]
    sigma_hodge: Option<Vec<i64>>,
    slopes: Vec<SlopeValue>,
    f: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleResult {
    pub module: FilteredPhiModule,
    pub weights_per_embedding: Vec<Vec<i64>>,
    pub slope_total: String,
    pub weakly_admissible: bool,
}

/// Parses `{rank, hodge, slopes, f}` (slopes as integers or `"n/d"` strings).
pub fn parse_module(text: &str) -> Result<FilteredPhiModule, CliError> {
    let input: AdmissibleInput = parse_json(text)?;
    if let Some(r) = input.rank {
        if r != input.hodge.len() {
            return Err(CliError::Input(format!("rank {r} but {} Hodge-Tate weights", input.hodge.len())));
        }
    }
    let slopes = input.slopes.iter().map(SlopeValue::to_rational).collect::<Result<Vec<_>, _>>()?;
    let m = FilteredPhiModule::new(input.hodge, slopes, input.f).map_err(CliError::input)?;
    match input.sigma_hodge {
        Some(s) => m.with_sigma_weights(s).map_err(CliError::input),
        None => Ok(m),
    }
}

pub fn admissible_module(cfg: &RunConfig, m: FilteredPhiModule) -> Result<Report, CliError> {
    let total: Rational = m.slopes.iter().sum();
    let result = AdmissibleResult {
        weights_per_embedding: m.weights_per_embedding(),
        slope_total: total.to_string(),
        weakly_admissible: weakly_admissible(&m),
        module: m,
    };
    let mut table = Table::new(&["rank", "f", "hodge", "slopes", "weakly_admissible"]);
    table.push(vec![
        result.module.rank().to_string(),
        result.module.residue_degree.to_string(),
        format!("{:?}", result.module.hodge),
        rational_list(&result.module.slopes).join(" "),
        result.weakly_admissible.to_string(),
    ]);
    Report::new("admissible", cfg, &result, table)
}

/// Weak admissibility of a module given as JSON.
pub fn admissible(cfg: &RunConfig, input: &str) -> Result<Report, CliError> {
    cfg.validate()?;
    admissible_module(cfg, parse_module(input)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminationResult {
    pub a: i64,
    pub h: [i64; 3],
    pub on_family_curve: bool,
    pub u: String,
    pub cases: Vec<CaseVerdict>,
}

/// The reducibility case table at weights `h` (default: a point on the family curve with
/// both gaps larger than `a`).
pub fn eliminate(cfg: &RunConfig, h: Option<[i64; 3]>) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let h = h.unwrap_or_else(|| default_family_weights(cfg.a));
    let pt = endoscopic_point(&ctx, cfg.a, PrimeBehavior::Inert);
    let u = perp_value(&pt.chi_p, PrimeBehavior::Inert)
        .valuation()
        .exact()
        .ok_or_else(|| CliError::Input("chi^perp(p) vanishes at precision".into()))?;
    let u = Rational::from_integer(u);
    let cases = elimination_table(cfg.a, h, u).map_err(CliError::input)?;
    let mut table = Table::new(&["case", "eliminated", "detail"]);
    for c in &cases {
        table.push(vec![c.case.clone(), c.eliminated.to_string(), c.detail.clone()]);
    }
    let result = EliminationResult {
        a: cfg.a,
        h,
        on_family_curve: family_curve_membership(CurvePoint::HodgeTate(h), cfg.a),
        u: u.to_string(),
        cases,
    };
    Report::new("eliminate", cfg, &result, table)
}

#[derive(Debug, Clone, Serialize)]
pub struct GkResult {
    pub a: i64,
    pub degree: u32,
    pub dimension: usize,
    pub homogeneous_degree: Option<u32>,
    pub basis: Vec<Vec<TermJson>>,
    /// Whether the basis is unchanged at degree bound `degree + 1`.
    pub stable: bool,
    /// Largest coefficient of `[X-, Y-]` on monomials up to `degree`.
    pub commutator_xminus_yminus: String,
}

/// The kernel of `p^-` on the quotient by degree at most `a - 2`.
pub fn gk_kernel(cfg: &RunConfig, degree: Option<u32>) -> Result<Report, CliError> {
    cfg.validate()?;
    let a = cfg.a;
    let degree = degree.unwrap_or((a + 2) as u32);
    let k = pminus_kernel(a, degree).map_err(CliError::input)?;
    let next = pminus_kernel(a, degree + 1).map_err(CliError::input)?;
    let comm = commutator_check(GkOperator::XMinus, GkOperator::YMinus, a, degree);
    let mut table = Table::new(&["index", "m1", "m2", "re", "im"]);
    for (i, b) in k.basis.iter().enumerate() {
        for t in b.to_json() {
            table.push(vec![i.to_string(), t.exponents[0].to_string(), t.exponents[1].to_string(), t.re, t.im]);
        }
    }
    let result = GkResult {
        a,
        degree,
        dimension: k.dimension,
        homogeneous_degree: k.homogeneous_degree,
        basis: k.basis.iter().map(|b| b.to_json()).collect(),
        stable: k.basis == next.basis,
        commutator_xminus_yminus: comm.to_string(),
    };
    let mut report = Report::new("gk-kernel", cfg, &result, table)?;
    if result.dimension != a as usize {
        report.violation(format!("kernel dimension {}, expected {a}", result.dimension));
    }
    if result.homogeneous_degree != Some(a as u32 - 1) {
        report.violation(format!("kernel not homogeneous of degree {}", a - 1));
    }
    if !result.stable {
        report.violation("kernel changes with the degree bound");
    }
    if result.commutator_xminus_yminus != "0" {
        report.violation(format!("[X-, Y-] has coefficient {}", result.commutator_xminus_yminus));
    }
    Ok(report)
}
