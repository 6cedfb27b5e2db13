//! End-to-end checks of the star-product bounds: hypotheses first, then an
//! exact search, then comparison with the closed form and, where the bound is
//! claimed to be attained only by stars, with the full list of star
//! configurations.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{binom, from_bigint, int, ratio_str, Ratio};
use crate::bounds::{
    k_family_bound, seq_hypothesis_ok, thm_multi_bound, thm_multi_threshold, thm_nrs_bound,
    thm_nrs_threshold, thm_seq_bound, threshold_min_ground, ReductionProfile,
};
use crate::error::{param, Result};
use crate::labeled::{gen_labeled, sum_of_products, IpSequence, LabeledFamily, LabeledSet, PairEncoder};
use crate::multiset::MultisetFamily;
use crate::search::{
    k_family_search_keys, max_product_pair_keys, max_t_intersecting_keys, weights_for, KMethod,
    SearchOptions, SearchReport,
};
use crate::setcore::{gen_k_subsets, is_compressed, is_hereditary, Family, IntersectionParams, SetBits};
use crate::weights::{check_condition_a, check_condition_b, WeightFn};

/// Result of one verification run.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub check: &'static str,
    pub hypothesis_ok: bool,
    /// Why the hypotheses fail; empty when they hold.
    pub hypothesis: String,
    #[serde(with = "ratio_str")]
    pub bound: Ratio,
    #[serde(with = "ratio_str")]
    pub search_max: Ratio,
    /// Bound and search maximum coincide.
    pub agrees: bool,
    /// The maximizer set is exactly the set of optimal star configurations.
    pub maximizers_are_stars: bool,
    /// Whether the hypotheses promise that only stars attain the bound.
    pub uniqueness_claimed: bool,
    pub maximizer_count: usize,
    pub star_count: usize,
    pub nodes: u64,
    #[serde(skip)]
    pub report: SearchReport,
    /// Candidate members of each part, in the setting's own notation.
    #[serde(skip)]
    pub labels: Vec<Vec<String>>,
}

impl Verification {
    /// Maximizers written out member by member.
    pub fn maximizer_labels(&self) -> Vec<Vec<Vec<String>>> {
        self.report
            .maximizers
            .iter()
            .map(|m| m.parts.iter().zip(&self.labels).map(|(idx, l)| idx.iter().map(|&i| l[i].clone()).collect()).collect())
            .collect()
    }

    /// The theorem's conclusion holds on this instance. Instances outside the
    /// hypotheses never count as verified.
    pub fn verified(&self) -> bool {
        self.hypothesis_ok && self.agrees && (!self.uniqueness_claimed || self.maximizers_are_stars)
    }

    /// Hypotheses hold but the conclusion does not.
    pub fn violated(&self) -> bool {
        self.hypothesis_ok && !self.verified()
    }
}

fn show(r: &Ratio) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn regime_problem(t: usize, u: &Ratio) -> Option<String> {
    let p = IntersectionParams { t, u: u.clone() };
    (!p.in_proven_regime()).then(|| format!("u = {} is not above (6 - t)/3 = {}", show(u), show(&Ratio::new((6 - t as i64).into(), 3.into()))))
}

fn ground_problem(min_ground: usize, threshold: &Ratio) -> Option<String> {
    (int(min_ground as i64) < *threshold).then(|| {
        let shown = if threshold.is_integer() {
            show(threshold)
        } else {
            format!("{} (least integer {})", show(threshold), threshold_min_ground(threshold))
        };
        format!("min ground {min_ground} < threshold {shown}")
    })
}

fn join(problems: Vec<Option<String>>) -> String {
    problems.into_iter().flatten().collect::<Vec<_>>().join("; ")
}

fn star_indices(keys: &[u64], centre: u64) -> Vec<usize> {
    (0..keys.len()).filter(|&i| keys[i] & centre == centre).collect()
}

/// Sorted, distinct star configurations for the given centres.
fn star_configs(parts: &[&[u64]], centres: &[u64]) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> =
        centres.iter().map(|&c| parts.iter().map(|k| star_indices(k, c)).collect()).collect();
    out.sort();
    out.dedup();
    out
}

fn finish(
    check: &'static str,
    hypothesis: String,
    bound: Ratio,
    report: SearchReport,
    stars: Vec<Vec<Vec<usize>>>,
    uniqueness_claimed: bool,
    labels: Vec<Vec<String>>,
) -> Verification {
    let found: Vec<Vec<Vec<usize>>> = report.maximizers.iter().map(|m| m.parts.clone()).collect();
    Verification {
        check,
        hypothesis_ok: hypothesis.is_empty(),
        hypothesis,
        agrees: report.max_value == bound,
        maximizers_are_stars: !report.truncated && found == stars,
        search_max: report.max_value.clone(),
        bound,
        uniqueness_claimed,
        maximizer_count: found.len(),
        star_count: stars.len(),
        nodes: report.node_count,
        report,
        labels,
    }
}

fn t_subsets_keys(ground: usize, t: usize) -> Result<Vec<u64>> {
    Ok(gen_k_subsets(ground, t)?.iter().map(|s| s.bits()).collect())
}

fn keys(f: &Family) -> Vec<u64> {
    f.iter().map(|s| s.bits()).collect()
}

fn labels<T: std::fmt::Debug>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|x| format!("{x:?}")).collect()
}

/// `C([m], r)` against `C([n], s)` with uniform weights.
pub fn verify_nrs(p: &ReductionProfile, opts: &SearchOptions) -> Result<Verification> {
    if p.r > p.m || p.s > p.n {
        return param(format!("need r <= m and s <= n, got r={} m={} s={} n={}", p.r, p.m, p.s, p.n));
    }
    let hypothesis = join(vec![
        regime_problem(p.t, &p.u),
        ground_problem(p.min_ground(), &thm_nrs_threshold(p.r, p.s, p.t, &p.u)),
    ]);
    let (g, h) = (gen_k_subsets(p.m, p.r)?, gen_k_subsets(p.n, p.s)?);
    let (kg, kh) = (keys(&g), keys(&h));
    let report = max_product_pair_keys(&kg, &kh, p.t, &vec![int(1); kg.len()], &vec![int(1); kh.len()], opts)?;
    let stars = star_configs(&[&kg, &kh], &t_subsets_keys(p.min_ground(), p.t)?);
    Ok(finish("thm-nrs", hypothesis, from_bigint(thm_nrs_bound(p)), report, stars, p.u > Ratio::zero(), vec![labels(&g), labels(&h)]))
}

/// Weighted pair over compressed hereditary families on a common ground.
pub fn verify_weighted(
    g: &Family,
    h: &Family,
    gw: &WeightFn,
    hw: &WeightFn,
    params: &IntersectionParams,
    opts: &SearchOptions,
) -> Result<Verification> {
    let n = g.ground();
    if h.ground() != n {
        return param(format!("families must share a ground, got {n} and {}", h.ground()));
    }
    let t = params.t;
    if g.is_empty() || h.is_empty() {
        return param("families must be non-empty");
    }
    if t > n {
        return param(format!("t = {t} exceeds the ground size {n}"));
    }
    let gv = weights_for(g, gw)?;
    let hv = weights_for(h, hw)?;
    let gr = WeightFn::from_values(g.clone(), gv.clone())?;
    let hr = WeightFn::from_values(h.clone(), hv.clone())?;
    let mut problems = vec![regime_problem(t, &params.u)];
    for (name, fam, w) in [("first", g, &gr), ("second", h, &hr)] {
        if !is_hereditary(fam) {
            problems.push(Some(format!("{name} family is not hereditary")));
        }
        if !is_compressed(fam) {
            problems.push(Some(format!("{name} family is not compressed")));
        }
        if let Some((a, b)) = check_condition_a(w, params).witness {
            problems.push(Some(format!("{name} weight fails the decay condition at {a:?} ⊊ {b:?}")));
        }
        // hereditary and compressed families contain every compression image
        if is_hereditary(fam) && is_compressed(fam) {
            if let Some((c, i, j)) = check_condition_b(w)?.witness {
                problems.push(Some(format!("{name} weight decreases under δ_{{{i},{j}}} at {c:?}")));
            }
        }
    }
    let hypothesis = join(problems);
    let (kg, kh) = (keys(g), keys(h));
    let report = max_product_pair_keys(&kg, &kh, t, &gv, &hv, opts)?;
    let centre = SetBits::prefix(n, t)?;
    let gs = gr.star_weight(&centre)?;
    let hs = hr.star_weight(&centre)?;
    let bound = &gs * &hs;
    // optimal centres: t-sets whose stars weigh as much as those of [t]
    let centres: Vec<u64> = gen_k_subsets(n, t)?
        .iter()
        .filter(|c| gr.star_weight(c).ok() == Some(gs.clone()) && hr.star_weight(c).ok() == Some(hs.clone()))
        .map(|c| c.bits())
        .collect();
    let stars = star_configs(&[&kg, &kh], &centres);
    let big_enough = g.iter().any(|a| a.len() >= t) && h.iter().any(|a| a.len() >= t);
    let uniq = params.u > Ratio::zero() && big_enough;
    Ok(finish("thm-weighted", hypothesis, bound, report, stars, uniq, vec![labels(g), labels(h)]))
}

/// Labeled `t`-sets valid for every sequence, with optimal star counts in each.
fn optimal_labeled_centres(fams: &[&LabeledFamily], t: usize) -> Result<Vec<LabeledSet>> {
    let len = fams.iter().map(|f| f.caps().len()).min().unwrap_or(0);
    let caps: Vec<usize> = (1..=len).map(|x| fams.iter().map(|f| f.caps().cap(x)).min().unwrap()).collect();
    let common = IpSequence::new(caps)?;
    let first = LabeledSet::first_level(t);
    let count = |f: &LabeledFamily, c: &LabeledSet| f.members().iter().filter(|m| c.is_subset(m)).count();
    let best: Vec<usize> = fams.iter().map(|f| count(f, &first)).collect();
    Ok(gen_labeled(&common, t)?
        .members()
        .iter()
        .filter(|c| fams.iter().zip(&best).all(|(f, &b)| count(f, c) == b))
        .cloned()
        .collect())
}

/// `S_{c,r}` against `S_{d,s}` with uniform weights.
pub fn verify_seq(
    c: &IpSequence,
    d: &IpSequence,
    r: usize,
    s: usize,
    t: usize,
    u: &Ratio,
    opts: &SearchOptions,
) -> Result<Verification> {
    let bound = from_bigint(thm_seq_bound(c, d, r, s, t)?);
    if t < 1 {
        return param("t must be at least 1");
    }
    let cap_problem = (!seq_hypothesis_ok(c, d, t, u)).then(|| {
        format!("first capacities {} and {} are below t + u + 1 = {}", c.first(), d.first(), show(&(int(t as i64 + 1) + u)))
    });
    let hypothesis = join(vec![regime_problem(t, u), cap_problem]);
    let a = gen_labeled(c, r)?;
    let b = gen_labeled(d, s)?;
    let enc = PairEncoder::for_families(&[&a, &b])?;
    let ka: Vec<u64> = enc.encode_family(&a).iter().map(|x| x.bits()).collect();
    let kb: Vec<u64> = enc.encode_family(&b).iter().map(|x| x.bits()).collect();
    let report = max_product_pair_keys(&ka, &kb, t, &vec![int(1); ka.len()], &vec![int(1); kb.len()], opts)?;
    let centres: Vec<u64> = optimal_labeled_centres(&[&a, &b], t)?.iter().map(|x| enc.encode(x).bits()).collect();
    let stars = star_configs(&[&ka, &kb], &centres);
    Ok(finish("thm-seq", hypothesis, bound, report, stars, *u > Ratio::zero(), vec![labels(a.members()), labels(b.members())]))
}

/// `M_{m,r}` against `M_{n,s}`, intersections measured on supports.
pub fn verify_multi(p: &ReductionProfile, opts: &SearchOptions) -> Result<Verification> {
    let hypothesis = join(vec![
        regime_problem(p.t, &p.u),
        ground_problem(p.min_ground(), &thm_multi_threshold(p.r, p.s, p.t, &p.u)),
    ]);
    let a = MultisetFamily::all(p.m, p.r)?;
    let b = MultisetFamily::all(p.n, p.s)?;
    let ka: Vec<u64> = a.supports().iter().map(|x| x.bits()).collect();
    let kb: Vec<u64> = b.supports().iter().map(|x| x.bits()).collect();
    let report = max_product_pair_keys(&ka, &kb, p.t, &vec![int(1); ka.len()], &vec![int(1); kb.len()], opts)?;
    let stars = star_configs(&[&ka, &kb], &t_subsets_keys(p.min_ground(), p.t)?);
    let bound = from_bigint(thm_multi_bound(p.m, p.n, p.r, p.s, p.t));
    Ok(finish("thm-multi", hypothesis, bound, report, stars, p.u > Ratio::zero(), vec![labels(a.members()), labels(b.members())]))
}

/// `k` families `C([n_i], r_i)` with uniform weights; each profile is `(n_i, r_i)`.
pub fn verify_k(profiles: &[(usize, usize)], t: usize, u: &Ratio, method: KMethod, opts: &SearchOptions) -> Result<Verification> {
    let kb = k_family_bound(profiles, t, u)?;
    let min_n = profiles.iter().map(|p| p.0).min().unwrap_or(0);
    let threshold_problem = (!kb.threshold_ok).then(|| ground_problem(min_n, &kb.threshold)).flatten();
    let hypothesis = join(vec![regime_problem(t, u), threshold_problem]);
    let fams: Vec<Vec<u64>> = profiles
        .iter()
        .map(|&(n, r)| gen_k_subsets(n, r).map(|f| keys(&f)))
        .collect::<Result<_>>()?;
    let weights: Vec<Vec<Ratio>> = fams.iter().map(|f| vec![int(1); f.len()]).collect();
    let report = k_family_search_keys(&fams, t, &weights, method, opts)?;
    let parts: Vec<&[u64]> = fams.iter().map(|f| f.as_slice()).collect();
    let stars = star_configs(&parts, &t_subsets_keys(min_n, t)?);
    let names = profiles.iter().map(|&(n, r)| gen_k_subsets(n, r).map(|f| labels(&f))).collect::<Result<_>>()?;
    Ok(finish("thm-k", hypothesis, from_bigint(kb.bound), report, stars, *u > Ratio::zero(), names))
}

/// Which single-family setting an EKR-type check runs on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EkrKind {
    Sets { n: usize, r: usize },
    Multi { n: usize, r: usize },
    Seq { c: IpSequence, r: usize },
}

/// Largest `t`-intersecting subfamily against the star size.
pub fn verify_ekr(kind: &EkrKind, t: usize, u: &Ratio, opts: &SearchOptions) -> Result<Verification> {
    if t < 1 {
        return param("t must be at least 1");
    }
    let (fam_keys, bound, threshold, centres, names): (Vec<u64>, BigInt, Option<String>, Vec<u64>, Vec<String>) = match kind {
        EkrKind::Sets { n, r } => {
            ReductionProfile::new(*n, *n, *r, *r, t, u.clone())?;
            let f = gen_k_subsets(*n, *r)?;
            let thr = ground_problem(*n, &thm_nrs_threshold(*r, *r, t, u));
            (keys(&f), binom((*n - t) as i64, (*r - t) as i64), thr, t_subsets_keys(*n, t)?, labels(&f))
        }
        EkrKind::Multi { n, r } => {
            if t > *r {
                return param(format!("need t <= r, got t={t} r={r}"));
            }
            let f = MultisetFamily::all(*n, *r)?;
            let thr = (int(t as i64 + 2) + u) * int((*r - t) as i64);
            (
                f.supports().iter().map(|x| x.bits()).collect(),
                crate::multiset::star_count(*n, *r, t),
                ground_problem(*n, &thr),
                t_subsets_keys(*n, t)?,
                labels(f.members()),
            )
        }
        EkrKind::Seq { c, r } => {
            if t > *r || *r > c.len() {
                return param(format!("need t <= r <= n, got t={t} r={r} n={}", c.len()));
            }
            let f = gen_labeled(c, *r)?;
            let enc = PairEncoder::for_families(&[&f])?;
            let bound = sum_of_products(c, t + 1..=c.len(), *r - t);
            let thr = (!seq_hypothesis_ok(c, c, t, u))
                .then(|| format!("first capacity {} is below t + u + 1 = {}", c.first(), show(&(int(t as i64 + 1) + u))));
            let centres = optimal_labeled_centres(&[&f], t)?.iter().map(|x| enc.encode(x).bits()).collect();
            (enc.encode_family(&f).iter().map(|x| x.bits()).collect(), bound, thr, centres, labels(f.members()))
        }
    };
    let hypothesis = join(vec![regime_problem(t, u), threshold]);
    let report = max_t_intersecting_keys(&fam_keys, t, &vec![int(1); fam_keys.len()], opts)?;
    let stars = star_configs(&[&fam_keys], &centres);
    Ok(finish("ekr", hypothesis, from_bigint(bound), report, stars, *u > Ratio::zero(), vec![names]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::setcore::{gen_upto_r, power_set};
    use crate::weights::{build_weight, WeightSpec};

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    fn prof(m: usize, n: usize, r: usize, s: usize, t: usize, u: i64) -> ReductionProfile {
        ReductionProfile::new(m, n, r, s, t, int(u)).unwrap()
    }

    #[test]
    fn nrs_at_threshold() {
        let v = verify_nrs(&prof(6, 6, 2, 2, 1, 2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(25));
        assert_eq!(v.maximizer_count, 6);
        assert_eq!(v.maximizer_labels()[0][0][0], "{1,2}");
    }

    #[test]
    fn nrs_below_threshold() {
        let v = verify_nrs(&prof(4, 4, 2, 2, 1, 2), &opts()).unwrap();
        assert!(!v.hypothesis_ok);
        assert_eq!(v.hypothesis, "min ground 4 < threshold 6");
        assert_eq!(v.search_max, int(9));
        assert!(!v.maximizers_are_stars);
        assert!(!v.verified() && !v.violated());
    }

    #[test]
    fn nrs_unequal_grounds() {
        let v = verify_nrs(&prof(6, 7, 2, 2, 1, 2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(30));
    }

    #[test]
    fn weighted_product_measure() {
        let g = power_set(5).unwrap();
        let w = build_weight(&WeightSpec::ProductMeasure { p: ratio(2, 9) }, &g).unwrap();
        let params = IntersectionParams::new(2, ratio(3, 2)).unwrap();
        let v = verify_weighted(&g, &g, &w, &w, &params, &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.bound, ratio(16, 6561));
        assert_eq!(v.maximizer_count, 10);
    }

    #[test]
    fn weighted_hypothesis_failures() {
        let g = power_set(4).unwrap();
        let w = build_weight(&WeightSpec::ProductMeasure { p: ratio(1, 2) }, &g).unwrap();
        let params = IntersectionParams::new(2, ratio(3, 2)).unwrap();
        let v = verify_weighted(&g, &g, &w, &w, &params, &opts()).unwrap();
        assert!(!v.hypothesis_ok);
        assert!(v.hypothesis.contains("decay"));
        let not_hered = Family::from_lists(3, &[&[1, 2]]).unwrap();
        let wu = WeightFn::uniform(not_hered.clone());
        let v = verify_weighted(&not_hered, &not_hered, &wu, &wu, &params, &opts()).unwrap();
        assert!(v.hypothesis.contains("not hereditary"));
    }

    #[test]
    fn weighted_completion_weights() {
        // the reduction weights on the window [r+s-t]
        let (m, r, s, t) = (8, 2, 2, 1);
        let p = r + s - t;
        let gdom = gen_upto_r(p, r).unwrap();
        let gw = build_weight(&WeightSpec::BinomialCompletion { m, r, p_window: p }, &gdom).unwrap();
        let params = IntersectionParams::new(t, int(2)).unwrap();
        let v = verify_weighted(&gdom, &gdom, &gw, &gw, &params, &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.bound, int(49));
    }

    #[test]
    fn seq_desk_instance() {
        let c = IpSequence::constant(3, 4).unwrap();
        let v = verify_seq(&c, &c, 2, 2, 1, &int(2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(64));
        assert_eq!(v.maximizer_count, 12);
    }

    #[test]
    fn seq_low_caps_fail_hypothesis() {
        let c = IpSequence::constant(3, 3).unwrap();
        let v = verify_seq(&c, &c, 2, 2, 1, &int(2), &opts()).unwrap();
        assert!(!v.hypothesis_ok);
    }

    #[test]
    fn multi_desk_instance() {
        let v = verify_multi(&prof(5, 5, 2, 2, 1, 2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(25));
        assert_eq!(v.maximizer_count, 5);
        let below = verify_multi(&prof(4, 4, 2, 2, 1, 2), &opts()).unwrap();
        assert!(!below.hypothesis_ok);
    }

    #[test]
    fn k_family_desk_instance() {
        let v = verify_k(&[(6, 2); 3], 1, &int(2), KMethod::Concept, &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(125));
        assert_eq!(v.maximizer_count, 6);
    }

    #[test]
    fn ekr_instances() {
        let v = verify_ekr(&EkrKind::Sets { n: 6, r: 2 }, 1, &int(2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(5));
        let v = verify_ekr(&EkrKind::Multi { n: 5, r: 2 }, 1, &int(2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        let c = IpSequence::constant(3, 4).unwrap();
        let v = verify_ekr(&EkrKind::Seq { c, r: 2 }, 1, &int(2), &opts()).unwrap();
        assert!(v.verified(), "{v:?}");
        assert_eq!(v.search_max, int(8));
    }
}
