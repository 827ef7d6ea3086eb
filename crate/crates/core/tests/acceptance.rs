//! Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.

use std::sync::Arc;
use std::time::Instant;

use num::Zero;
use pel_core::admissibility::{split_111_elimination, weakly_admissible, FilteredPhiModule};
use pel_core::gkcoh::{commutator_check, pminus_kernel, GkOperator};
use pel_core::hecke::{
    endoscopic_point, hodge_tate_from_autweight, hodge_tate_from_pweight, inert_eigensystem_from_characters,
    perp_value, pweight_from_autweight, refinement_function_f1, refinement_functions_split,
    split_eigensystem_from_refinement, PrimeBehavior,
};
use pel_core::induction::{bgg_kernel, classicity_scan, commutation_check};
use pel_core::padic::{teichmuller_of_residue, FieldContext, PadicElem, Valuation};
use pel_core::spectral::{char_series, delta_model, newton_polygon, Rational};
use pel_core::weightspace::{component_count, torsion_characters, Character, WeightTriple};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ctx(p: u64, n: u32) -> Result<Arc<FieldContext>, String> {
    FieldContext::new(p, n).map_err(|e| e.to_string())
}

fn random_dominant(rng: &mut ChaCha8Rng, max_gap: i64) -> WeightTriple {
    let k2 = rng.gen_range(-5..=5);
    WeightTriple::new(k2 + rng.gen_range(0..=max_gap), k2, rng.gen_range(-5..=5))
}

fn weight_space_count() -> Outcome {
    for p in [3u64, 5, 7] {
        let c = ctx(p, 8)?;
        let expected = (p + 1) * (p * p - 1);
        ensure(component_count(p) == expected, || format!("component_count({p}) = {}", component_count(p)))?;
        // Distinct torsion characters, told apart by their values on generators of both factors.
        let gx = teichmuller_of_residue(&c, c.residue_generator());
        let gy = gx.pow(p - 1);
        let one = PadicElem::one(&c);
        let mut seen: Vec<(PadicElem, PadicElem)> = Vec::new();
        for t in torsion_characters(p) {
            let chi = Character::new(&c, t, std::array::from_fn(|_| PadicElem::zero(&c))).map_err(|e| e.to_string())?;
            let vx = chi.evaluate(&gx, &one).map_err(|e| e.to_string())?;
            let vy = chi.evaluate(&one, &gy).map_err(|e| e.to_string())?;
            if !seen.iter().any(|(a, b)| a.agrees_with(&vx) && b.agrees_with(&vy)) {
                seen.push((vx, vy));
            }
        }
        ensure(seen.len() as u64 == expected, || format!("p = {p}: {} distinct characters", seen.len()))?;
    }
    Ok("p = 3, 5, 7 give 32, 144, 384 distinct components".into())
}

fn delta_spectrum() -> Outcome {
    for p in [3u64, 5] {
        let c = ctx(p, 20)?;
        let cs = char_series(&delta_model(&c, 40), 40).map_err(|e| e.to_string())?;
        for (n, coeff) in cs.iter().enumerate() {
            let want = (n * (n.max(1) - 1) / 2) as i64;
            ensure(coeff.valuation() == Valuation::Exact(want), || {
                format!("p = {p}: v(c_{n}) = {}, want {want}", coeff.valuation())
            })?;
        }
        let np = newton_polygon(&cs);
        let want: Vec<(Rational, usize)> = (0..40).map(|s| (Rational::from_integer(s), 1)).collect();
        ensure(np.slopes_with_multiplicity == want, || format!("p = {p}: slopes {:?}", np.slopes_with_multiplicity))?;
    }
    Ok("slopes 0..39, v(c_n) = n(n-1)/2 at p = 3, 5".into())
}

fn commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10 {
        let p = if i % 2 == 0 { 3 } else { 5 };
        let c = ctx(p, 25)?;
        let kappa = random_dominant(&mut rng, 6);
        let rep = commutation_check(&c, kappa, 30).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("kappa = {kappa}: discrepancy {}", rep.min_discrepancy))?;
    }
    Ok("10 random kappa at N = 25, M = 30".into())
}

fn bgg_kernel_dimension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = ctx(3, 20)?;
    for _ in 0..10 {
        let kappa = random_dominant(&mut rng, 8);
        for m in [20usize, 40] {
            let dim = bgg_kernel(&c, kappa, m).map_err(|e| e.to_string())?.len();
            let want = (kappa.k1 - kappa.k2 + 1) as usize;
            ensure(dim == want, || format!("kappa = {kappa}, M = {m}: dim {dim}, want {want}"))?;
        }
    }
    Ok("dim ker d_kappa = k1 - k2 + 1 at M = 20, 40".into())
}

fn classicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = ctx(5, 20)?;
    for _ in 0..5 {
        let kappa = random_dominant(&mut rng, 6);
        let scan = classicity_scan(&c, kappa, 30).map_err(|e| e.to_string())?;
        let r = (kappa.k1 - kappa.k2 + 1) as usize;
        ensure(scan.violations.is_empty() && scan.bgg_survivors.is_empty(), || format!("{scan:?}"))?;
        ensure(scan.classical == r && scan.vacuous == 31 - r, || format!("{scan:?}"))?;
    }
    Ok("no small-slope eigenvector outside the classical subspace at 5 kappa".into())
}

fn refinements() -> Outcome {
    let c = ctx(5, 20)?;
    let one = PadicElem::one(&c);
    for a in 1..=5 {
        let inert = endoscopic_point(&c, a, PrimeBehavior::Inert);
        let chi = inert.chi_p.clone();
        let perp = perp_value(&chi, PrimeBehavior::Inert);
        ensure(inert.refinements.len() == 1, || format!("a = {a}: {} inert refinements", inert.refinements.len()))?;
        let r = &inert.refinements[0];
        ensure(r.frobenius_tuple == [perp.clone(), one.clone(), chi.clone()], || format!("a = {a}: inert tuple"))?;
        let eig = inert_eigensystem_from_characters(inert.kappa, &r.frobenius_tuple[0], &r.similitude)
            .map_err(|e| e.to_string())?;
        let f1 = refinement_function_f1(&eig, Some(inert.hodge_tate)).map_err(|e| e.to_string())?.f1;
        ensure(f1.valuation() == Valuation::Exact(a), || format!("a = {a}: v(F1) = {}", f1.valuation()))?;

        let split = endoscopic_point(&c, a, PrimeBehavior::Split);
        let chi = split.chi_p.clone();
        let perp = perp_value(&chi, PrimeBehavior::Split);
        let tables = [
            ("1", [one.clone(), perp.clone(), chi.clone()]),
            ("(3,2)", [perp.clone(), one.clone(), chi.clone()]),
            ("(3,2,1)", [perp.clone(), chi.clone(), one.clone()]),
        ];
        ensure(split.refinements.len() == 3, || format!("a = {a}: {} split refinements", split.refinements.len()))?;
        for (r, (name, tuple)) in split.refinements.iter().zip(&tables) {
            ensure(r.ordering == *name && r.frobenius_tuple == *tuple, || format!("a = {a}: ordering {}", r.ordering))?;
        }
        let eig = split_eigensystem_from_refinement(split.kappa, &split.refinements[1], split.hodge_tate)
            .map_err(|e| e.to_string())?;
        let f = refinement_functions_split(&eig).map_err(|e| e.to_string())?;
        let v: Vec<Valuation> = f.iter().map(PadicElem::valuation).collect();
        let want = vec![Valuation::Exact(0), Valuation::Exact(a), Valuation::Exact(-a)];
        ensure(v == want, || format!("a = {a}: split valuations {v:?}"))?;
    }
    Ok("1 inert and 3 split refinements; v(F1) = a, v(F) = (0, a, -a) for a = 1..5".into())
}

fn multiset_oracle(d: i64, alpha: i64) -> bool {
    let mut l = [d + alpha, 0, -d - alpha];
    let mut r = [d, 0, -d];
    l.sort_unstable();
    r.sort_unstable();
    l == r
}

fn elimination() -> Outcome {
    let mut points = 0;
    for a in 1..=5i64 {
        for gap in a + 1..=10 * a {
            let (h1, h3) = (-gap, 0);
            let v = split_111_elimination(h1, h3, Rational::from_integer(a)).map_err(|e| e.to_string())?;
            ensure(v.is_eliminated(), || format!("a = {a}, gap = {gap}: {v:?}"))?;
            ensure(v.is_eliminated() == !multiset_oracle(h1 - h3, a), || format!("oracle disagrees at a = {a}, gap = {gap}"))?;
            points += 1;
        }
    }
    Ok(format!("{points} grid points eliminated, oracle agrees"))
}

fn rank_one(h: i64) -> FilteredPhiModule {
    FilteredPhiModule::new(vec![h], vec![Rational::from_integer(h)], 1).expect("rank one")
}

fn admissibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let hs: Vec<i64> = (0..3).map(|_| rng.gen_range(-10..=10)).collect();
        let m = rank_one(hs[0]).direct_sum(&rank_one(hs[1])).and_then(|x| x.direct_sum(&rank_one(hs[2]))).unwrap();
        ensure(weakly_admissible(&m), || format!("sum of rank-one pieces {hs:?} rejected"))?;
        for k in 0..3 {
            for delta in [-1, 1] {
                let mut w = m.clone();
                w.hodge[k] += delta;
                ensure(!weakly_admissible(&w), || format!("weight perturbation accepted: {w:?}"))?;
                let mut s = m.clone();
                s.slopes[k] += Rational::from_integer(delta);
                ensure(!weakly_admissible(&s), || format!("slope perturbation accepted: {s:?}"))?;
            }
        }
    }
    let mut admissible = 0;
    for _ in 0..1000 {
        let f = rng.gen_range(1..=2u8);
        let hodge: Vec<i64> = (0..3).map(|_| rng.gen_range(-4..=4)).collect();
        let mut slopes: Vec<Rational> = (0..2).map(|_| Rational::new(rng.gen_range(-12..=12), rng.gen_range(1..=2))).collect();
        let total: i64 = if f == 1 { hodge.iter().sum() } else { 0 };
        slopes.push(Rational::from_integer(total) - slopes[0] - slopes[1]);
        let m = FilteredPhiModule::new(hodge, slopes, f).map_err(|e| e.to_string())?;
        let mut perm = [0usize, 1, 2];
        perm.shuffle(&mut rng);
        let mut q = m.clone();
        q.hodge = perm.iter().map(|&i| m.hodge[i]).collect();
        q.slopes = perm.iter().map(|&i| m.slopes[i]).collect();
        ensure(weakly_admissible(&m) == weakly_admissible(&q), || format!("permutation changes verdict on {m:?}"))?;
        admissible += weakly_admissible(&m) as usize;
    }
    Ok(format!("sums pass, 2400 perturbations fail, 1000 permutations agree ({admissible} admissible)"))
}

fn gk_kernel() -> Outcome {
    for a in 1..=6i64 {
        let mut first = None;
        for d in a..=a + 5 {
            let k = pminus_kernel(a, d as u32).map_err(|e| e.to_string())?;
            ensure(k.dimension == a as usize, || format!("a = {a}, D = {d}: dim {}", k.dimension))?;
            ensure(k.homogeneous_degree == Some(a as u32 - 1), || format!("a = {a}, D = {d}: {:?}", k.homogeneous_degree))?;
            match &first {
                None => first = Some(k.basis),
                Some(b) => ensure(*b == k.basis, || format!("a = {a}: basis changes at D = {d}"))?,
            }
        }
    }
    let c = commutator_check(GkOperator::XMinus, GkOperator::YMinus, 2, 10);
    ensure(c.is_zero(), || format!("[X-, Y-] has coefficient {c}"))?;
    Ok("dim a, degree a - 1, stable in D for a = 1..6; [X-, Y-] = 0 to degree 10".into())
}

fn hodge_tate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let k = WeightTriple::new(rng.gen_range(-20..=20), rng.gen_range(-20..=20), rng.gen_range(-20..=20));
        let lhs = hodge_tate_from_pweight(pweight_from_autweight(k));
        let rhs = hodge_tate_from_autweight(k);
        ensure(lhs == rhs, || format!("kappa = {k}: {lhs:?} vs {rhs:?}"))?;
    }
    for a in 1..=5 {
        let h = hodge_tate_from_autweight(WeightTriple::from_parameter(a));
        ensure(h == [1 - a, -a, 0], || format!("a = {a}: {h:?}"))?;
    }
    Ok("maps agree on 100 kappa; (0, 1-a, a) -> (1-a, -a, 0)".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("weight-space component count", weight_space_count),
        ("delta spectrum", delta_spectrum),
        ("commutation identity", commutation),
        ("BGG kernel dimension", bgg_kernel_dimension),
        ("finite-slope classicity", classicity),
        ("refinement tables", refinements),
        ("elimination grid", elimination),
        ("weak admissibility", admissibility),
        ("(g,K) kernel", gk_kernel),
        ("Hodge-Tate dictionary", hodge_tate),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
