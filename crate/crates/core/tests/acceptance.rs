//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. All comparisons are exact.

use std::time::{Duration, Instant};

use crossint_core::arith::{int, ratio};
use crossint_core::bounds::{build_counterexample, product_trick_holds, CounterexampleSpec, ReductionProfile};
use crossint_core::checks::{run_suite, suite_names, MIN_TRIALS};
use crossint_core::labeled::{gen_labeled, IpSequence, LabeledSet, PairEncoder};
use crossint_core::search::{k_family_search_keys, KMethod, SearchOptions};
use crossint_core::setcore::{gen_k_subsets, power_set, t_star};
use crossint_core::verify::{verify_k, verify_multi, verify_nrs, verify_seq, verify_weighted};
use crossint_core::weights::{build_weight, WeightSpec};
use crossint_core::{Family, IntersectionParams, Ratio, Result, SetBits};

const SEED: u64 = 20240917;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { ok, detail: detail.into() })
}

fn opts() -> SearchOptions {
    SearchOptions::default()
}

fn prof(m: usize, r: usize, t: usize, u: i64) -> ReductionProfile {
    ReductionProfile::new(m, m, r, r, t, int(u)).unwrap()
}

fn c1_nrs_desk() -> Result<Outcome> {
    let v = verify_nrs(&prof(6, 2, 1, 2), &opts())?;
    // independent star list: pairs of the six stars of C([6],2)
    let g = gen_k_subsets(6, 2)?;
    let mut stars: Vec<Family> = (1..=6).map(|i| t_star(&g, &SetBits::new(6, &[i]).unwrap()).unwrap()).collect();
    stars.sort_by_key(|f| f.lists());
    let mut found: Vec<Family> = v
        .report
        .families(&[&g, &g])
        .into_iter()
        .filter(|p| p[0] == p[1])
        .map(|p| p[0].clone())
        .collect();
    found.sort_by_key(|f| f.lists());
    let ok = v.hypothesis_ok && v.search_max == int(25) && v.report.maximizers.len() == 6 && found == stars;
    outcome(ok, format!("max {} over {} maximizers, all star pairs: {}", v.search_max, v.maximizer_count, found == stars))
}

fn c2_below_threshold() -> Result<Outcome> {
    let v = verify_nrs(&prof(4, 2, 1, 2), &opts())?;
    let g = gen_k_subsets(4, 2)?;
    let triangle = Family::from_lists(4, &[&[1, 2], &[1, 3], &[2, 3]])?;
    let pairs = v.report.families(&[&g, &g]);
    let has_triangle = pairs.iter().any(|p| p[0] == triangle && p[1] == triangle);
    let ok = !v.hypothesis_ok && v.search_max == int(9) && has_triangle && !v.maximizers_are_stars;
    outcome(ok, format!("max {}, {} maximizers, triangle pair present: {has_triangle}", v.search_max, v.maximizer_count))
}

fn c3_weighted() -> Result<Outcome> {
    let g = power_set(5)?;
    let w = build_weight(&WeightSpec::ProductMeasure { p: ratio(2, 9) }, &g)?;
    let params = IntersectionParams::new(2, ratio(3, 2))?;
    let v = verify_weighted(&g, &g, &w, &w, &params, &opts())?;
    let star = w.star_weight(&SetBits::new(5, &[1, 2])?)?;
    let ok = v.verified() && v.search_max == &star * &star && v.search_max == ratio(16, 6561);
    outcome(ok, format!("max {} = star weight squared, {} maximizers", v.search_max, v.maximizer_count))
}

fn c4_remark2() -> Result<Outcome> {
    let rep = build_counterexample(&CounterexampleSpec::Remark2 { n: 5, t: 3, x: 1 })?;
    let ok = rep.left_closed == int(6)
        && rep.left_enumerated == int(6)
        && rep.right_enumerated == int(6)
        && rep.left_star_closed == int(4)
        && rep.left_star_enumerated == int(4)
        && rep.pair_value == int(36)
        && rep.star_value == int(16)
        && rep.cross_t_intersecting;
    outcome(ok, format!("pair {} > star {}", rep.pair_value, rep.star_value))
}

fn c5_seq() -> Result<Outcome> {
    let c = IpSequence::constant(3, 4)?;
    let v = verify_seq(&c, &c, 2, 2, 1, &int(2), &opts())?;
    // every maximizer side must be the full star of one labeled point
    let fam = gen_labeled(&c, 2)?;
    let enc = PairEncoder::for_families(&[&fam])?;
    let keys: Vec<u64> = enc.encode_family(&fam).iter().map(|s| s.bits()).collect();
    let mut star_sides: Vec<Vec<usize>> = Vec::new();
    for x in 1..=3 {
        for y in 1..=4 {
            let centre = enc.encode(&LabeledSet::new(vec![(x, y)])?).bits();
            star_sides.push((0..keys.len()).filter(|&i| keys[i] & centre == centre).collect());
        }
    }
    let all_stars = v
        .report
        .maximizers
        .iter()
        .all(|m| m.left() == m.right() && star_sides.iter().any(|s| s.as_slice() == m.left()));
    let ok = v.verified() && v.search_max == int(64) && v.maximizer_count == 12 && all_stars;
    outcome(ok, format!("max {} over {} maximizers, all labeled stars: {all_stars}", v.search_max, v.maximizer_count))
}

fn c6_multi() -> Result<Outcome> {
    let v = verify_multi(&prof(5, 2, 1, 2), &opts())?;
    let ok = v.verified() && v.search_max == int(25) && v.maximizer_count == 5 && v.maximizers_are_stars;
    outcome(ok, format!("max {} over {} support-star maximizers", v.search_max, v.maximizer_count))
}

fn c7_multiset_counterexample() -> Result<Outcome> {
    let rep = build_counterexample(&CounterexampleSpec::MultisetLowN { n: 5, t: 2, r: 4 })?;
    // (t+2) C(n+r-t-3, r-t-1) + C(n+r-t-3, r-t-2) = 4 * 4 + 1
    let ok = rep.left_closed == int(17)
        && rep.left_enumerated == int(17)
        && rep.star_value == int(225)
        && rep.pair_value > int(225)
        && rep.cross_t_intersecting;
    outcome(ok, format!("pair {} > star {}", rep.pair_value, rep.star_value))
}

fn c8_properties() -> Result<Outcome> {
    let mut failed = Vec::new();
    let names: Vec<&str> = suite_names().into_iter().filter(|n| *n != "oracle").collect();
    for name in &names {
        let o = run_suite(name, SEED, MIN_TRIALS * 2)?;
        if !o.passed() {
            failed.push(format!("{name}: {}", o.first_failure.unwrap_or_default()));
        }
    }
    let detail = if failed.is_empty() {
        format!("{} suites x {} trials", names.len(), MIN_TRIALS * 2)
    } else {
        failed.join("; ")
    };
    outcome(failed.is_empty(), detail)
}

fn c9_oracle() -> Result<Outcome> {
    let o = run_suite("oracle", SEED, 200)?;
    outcome(o.passed(), format!("{} instances, {} mismatches", o.trials, o.failures))
}

fn c10_three_families() -> Result<Outcome> {
    let v = verify_k(&[(6, 2); 3], 1, &int(2), KMethod::Concept, &opts())?;
    let keys: Vec<u64> = gen_k_subsets(6, 2)?.iter().map(|s| s.bits()).collect();
    let fams = vec![keys.clone(), keys.clone(), keys];
    let ones: Vec<Vec<Ratio>> = fams.iter().map(|f| vec![int(1); f.len()]).collect();
    // the default per-family cap of 14 refuses C([6],2); this run lifts it to 15
    let brute_opts = SearchOptions { brute_force_cap: 15, ..opts() };
    let brute = k_family_search_keys(&fams, 1, &ones, KMethod::BruteForce, &brute_opts)?;
    // pairwise bound 25 for each of the three pairs, then the product identity
    let pair = verify_nrs(&prof(6, 2, 1, 2), &opts())?;
    let pairwise = pair.search_max == int(25);
    // (|A||B||C|)^2 is the product of the three pairwise products, so it is at most 25^3 = 125^2
    let cube = &pair.search_max * &pair.search_max * &pair.search_max;
    let trick = product_trick_holds(&[5.into(), 5.into(), 5.into()]) && cube == int(125 * 125);
    let ok = v.verified()
        && v.search_max == int(125)
        && brute.max_value == int(125)
        && brute.maximizers == v.report.maximizers
        && pairwise
        && trick;
    outcome(
        ok,
        format!(
            "concept {} ({} maximizers), close-last-family enumeration {}, pairwise max {}",
            v.search_max,
            v.maximizer_count,
            brute.max_value,
            pair.search_max
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "star pairs are the unique maximizers on C([6],2)", c1_nrs_desk, Duration::from_secs(5)),
        (2, "below the threshold non-star pairs tie", c2_below_threshold, Duration::from_secs(1)),
        (3, "weighted product measure on 2^[5]", c3_weighted, Duration::from_secs(30)),
        (4, "geometric-weight counterexample", c4_remark2, Duration::from_secs(1)),
        (5, "labeled sets with caps (4,4,4)", c5_seq, Duration::from_secs(60)),
        (6, "multisets over [5]", c6_multi, Duration::from_secs(10)),
        (7, "multiset counterexample below the threshold", c7_multiset_counterexample, Duration::from_secs(5)),
        (8, "randomized property suites", c8_properties, Duration::from_secs(600)),
        (9, "concept search against the exhaustive oracle", c9_oracle, Duration::from_secs(600)),
        (10, "three families over C([6],2)", c10_three_families, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let res = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match res {
            Ok(o) => (o.ok && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {}: {name} ({detail}; {:.3}s of {}s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
