//! Seeded randomized property suites. Every suite is exact: a single
//! counterexample is a failure, and the first one is kept for the report.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{binom, from_bigint, int, ratio, Ratio};
use crate::bounds::product_trick_holds;
use crate::compress::{co_compress_traced, compress_family, compress_to_fixpoint_traced, potential};
use crate::error::{param, Result};
use crate::labeled::{
    first_level_meet, gamma_cascade, gen_labeled, projection_weight, Gamma, IpSequence, LabeledFamily, LabeledSet,
};
use crate::multiset::count_with_supports;
use crate::search::{brute_force_pair_keys, is_closed_pair, max_product_pair_keys, CompatRelation, SearchOptions};
use crate::setcore::{
    gen_k_subsets, gen_upto_r, is_compressed, is_cross_t_intersecting, power_set, Family, SetBits,
};
use crate::weights::{build_weight, check_condition_b, check_decay, WeightFn, WeightSpec};

/// Smallest trial count a suite accepts.
pub const MIN_TRIALS: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

type Trial = fn(&mut ChaCha8Rng) -> Result<Option<String>>;

const SUITES: &[(&str, Trial)] = &[
    ("delta-size", delta_size),
    ("cross-preservation", cross_preservation),
    ("window", window),
    ("fixpoint", fixpoint),
    ("star-dominance", star_dominance),
    ("gamma-cascade", gamma_cascade_trial),
    ("gamma-guard", gamma_guard),
    ("projection-decay", projection_decay),
    ("projection-monotone", projection_monotone),
    ("multiset-count", multiset_count),
    ("product-measure", product_measure),
    ("completion-stars", completion_stars),
    ("product-trick", product_trick),
    ("oracle", oracle),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs one suite. Each suite draws from its own stream derived from `seed`.
pub fn run_suite(name: &str, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    if trials < MIN_TRIALS {
        return param(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    let (k, &(name, trial)) = SUITES
        .iter()
        .enumerate()
        .find(|(_, s)| s.0 == name)
        .ok_or_else(|| crate::Error::Parameter(format!("unknown suite {name:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let mut out = SuiteOutcome { name, trials, failures: 0, first_failure: None };
    for i in 0..trials {
        if let Some(msg) = trial(&mut rng)? {
            out.failures += 1;
            out.first_failure.get_or_insert(format!("trial {i}: {msg}"));
        }
    }
    Ok(out)
}

pub fn run_all(seed: u64, trials: usize) -> Result<Vec<SuiteOutcome>> {
    SUITES.iter().map(|s| run_suite(s.0, seed, trials)).collect()
}

fn random_family(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> Family {
    let len = rng.gen_range(0..=max_len);
    let sets = (0..len).map(|_| SetBits::from_bits(n, rng.gen_range(0..1u64 << n) << 1).unwrap());
    Family::new(n, sets).unwrap()
}

fn sample<T: Clone>(rng: &mut ChaCha8Rng, pool: &[T], p: f64) -> Vec<T> {
    pool.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// A random pair `(A, B)` with every `a ∈ A`, `b ∈ B` related: a small seed
/// for `A`, a random part of what it allows for `B`, then `A` grown inside
/// what `B` allows. Retries a few times to avoid an empty side.
fn related_pair<T: Clone + PartialEq>(
    rng: &mut ChaCha8Rng,
    left: &[T],
    right: &[T],
    ok: impl Fn(&T, &T) -> bool,
) -> (Vec<T>, Vec<T>) {
    let mut last = (Vec::new(), Vec::new());
    for _ in 0..40 {
        let mut a: Vec<T> = (0..rng.gen_range(1..=2)).filter_map(|_| left.choose(rng).cloned()).collect();
        let allowed: Vec<T> = right.iter().filter(|b| a.iter().all(|x| ok(x, b))).cloned().collect();
        let b = sample(rng, &allowed, 0.6);
        let grow: Vec<T> = left.iter().filter(|x| b.iter().all(|y| ok(x, y))).cloned().collect();
        a.extend(sample(rng, &grow, 0.5));
        if !b.is_empty() {
            return (a, b);
        }
        last = (a, b);
    }
    last
}

fn set_pair(rng: &mut ChaCha8Rng, left: &Family, right: &Family, t: usize) -> (Family, Family) {
    let (a, b) = related_pair(rng, left.members(), right.members(), |x, y| x.t_intersects(y, t));
    (Family::new(left.ground(), a).unwrap(), Family::new(right.ground(), b).unwrap())
}

fn fail(cond: bool, msg: impl FnOnce() -> String) -> Option<String> {
    (!cond).then(msg)
}

fn delta_size(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(2..=10);
    let fam = random_family(rng, n, 30);
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            let img = compress_family(&fam, i, j)?;
            if img.len() != fam.len() {
                return Ok(Some(format!("{fam:?} under ({i},{j}) has {} members", img.len())));
            }
        }
    }
    Ok(None)
}

fn cross_preservation(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(3..=7);
    let t = rng.gen_range(1..=2);
    let all = power_set(n)?;
    let (a, b) = set_pair(rng, &all, &all, t);
    let (out, steps) = co_compress_traced(&[a.clone(), b.clone()], t)?;
    let mut cur = vec![a, b];
    for s in &steps {
        cur = cur.iter().map(|f| compress_family(f, s.i, s.j)).collect::<Result<_>>()?;
        if !is_cross_t_intersecting(&cur, t) {
            return Ok(Some(format!("lost cross-{t}-intersection after ({},{})", s.i, s.j)));
        }
    }
    Ok(fail(cur == out, || "replayed steps disagree with the co-compression".into()))
}

fn window(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(3..=8);
    let t = rng.gen_range(1..=2);
    let r = rng.gen_range(t..=n.min(4));
    let s = rng.gen_range(r..=n.min(5));
    let (a, b) = set_pair(rng, &gen_upto_r(n, r)?, &gen_upto_r(n, s)?, t);
    let out = co_compress_traced(&[a, b], t)?.0;
    let win = SetBits::prefix(n, (r + s - t).min(n))?;
    for x in out[0].iter() {
        for y in out[1].iter() {
            if x.intersect(y).intersect(&win).len() < t {
                return Ok(Some(format!("{x:?} and {y:?} meet in fewer than {t} points of the window")));
            }
        }
    }
    Ok(None)
}

fn fixpoint(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(2..=8);
    let fam = random_family(rng, n, 25);
    let (out, steps) = compress_to_fixpoint_traced(&fam);
    if !is_compressed(&out) {
        return Ok(Some(format!("fixpoint of {fam:?} is not compressed")));
    }
    let mut last = potential(&fam);
    for s in &steps {
        if s.potential >= last {
            return Ok(Some(format!("potential did not drop at ({},{})", s.i, s.j)));
        }
        last = s.potential;
    }
    if steps.len() as u64 > potential(&fam) {
        return Ok(Some("more steps than the starting potential".into()));
    }
    Ok(fail(compress_to_fixpoint_traced(&out).1.is_empty(), || "second run changed the result".into()))
}

fn random_ratio(rng: &mut ChaCha8Rng, max: i64) -> Ratio {
    ratio(rng.gen_range(1..=max), rng.gen_range(1..=max))
}

fn star_dominance(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(3..=8);
    let t = rng.gen_range(1..=3.min(n));
    let h = compress_to_fixpoint_traced(&random_family(rng, n, 40)).0;
    if h.is_empty() {
        return Ok(None);
    }
    // h(|A|) times a product of non-increasing per-element factors
    let by_size: Vec<Ratio> = (0..=n).map(|_| random_ratio(rng, 9)).collect();
    let mut lambda: Vec<Ratio> = (0..n).map(|_| random_ratio(rng, 9)).collect();
    lambda.sort_by(|a, b| b.cmp(a));
    let values = h
        .iter()
        .map(|a| a.elements().iter().fold(by_size[a.len()].clone(), |acc, &e| acc * &lambda[e - 1]))
        .collect();
    let w = WeightFn::from_values(h.clone(), values)?;
    if let Some((a, i, j)) = check_condition_b(&w)?.witness {
        return Ok(Some(format!("product weight fails δ-monotonicity at {a:?}, ({i},{j})")));
    }
    let best = w.star_weight(&SetBits::prefix(n, t)?)?;
    for c in gen_k_subsets(n, t)?.iter() {
        let v = w.star_weight(c)?;
        if v > best {
            return Ok(Some(format!("star of {c:?} outweighs the first star in {h:?}")));
        }
    }
    Ok(None)
}

fn random_caps(rng: &mut ChaCha8Rng, max_len: usize, max_cap: usize) -> IpSequence {
    let n = rng.gen_range(1..=max_len);
    let mut caps: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_cap)).collect();
    caps.sort_unstable();
    IpSequence::new(caps).unwrap()
}

fn labeled_pool(caps: &IpSequence) -> Result<Vec<LabeledSet>> {
    let mut pool = vec![LabeledSet::empty()];
    for r in 1..=caps.len() {
        pool.extend(gen_labeled(caps, r)?.members().iter().cloned());
    }
    Ok(pool)
}

fn labeled_pair(
    rng: &mut ChaCha8Rng,
    ok: impl Fn(&LabeledSet, &LabeledSet) -> bool,
) -> Result<(LabeledFamily, LabeledFamily)> {
    let (c, d) = (random_caps(rng, 3, 3), random_caps(rng, 3, 3));
    let (pc, pd) = (labeled_pool(&c)?, labeled_pool(&d)?);
    let (a, b) = related_pair(rng, &pc, &pd, ok);
    Ok((LabeledFamily::new(c.clone(), c.len(), a)?, LabeledFamily::new(d.clone(), d.len(), b)?))
}

fn gamma_cascade_trial(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let t = rng.gen_range(1..=2);
    let (a, b) = labeled_pair(rng, |x, y| x.meet(y) >= t)?;
    let out = gamma_cascade(&[a.clone(), b.clone()], t)?;
    if out[0].len() != a.len() || out[1].len() != b.len() {
        return Ok(Some("cascade changed a family size".into()));
    }
    let l = a.caps().len().max(b.caps().len());
    for x in out[0].members() {
        for y in out[1].members() {
            if first_level_meet(x, y, l) < t {
                return Ok(Some(format!("{x:?} and {y:?} share fewer than {t} first-level pairs")));
            }
        }
    }
    Ok(None)
}

fn meet_outside(a: &LabeledSet, b: &LabeledSet, guard: &[(usize, usize)]) -> usize {
    a.pairs().iter().filter(|p| b.contains(**p) && !guard.contains(p)).count()
}

fn gamma_guard(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let t = rng.gen_range(1..=2);
    let (l, h) = (3, 3);
    let guard: Vec<(usize, usize)> =
        (1..=l).flat_map(|x| (2..=h).map(move |y| (x, y))).filter(|_| rng.gen_bool(0.3)).collect();
    let (a, b) = labeled_pair(rng, |x, y| meet_outside(x, y, &guard) >= t)?;
    let (x, y) = (rng.gen_range(1..=l), rng.gen_range(2..=h));
    let (c, d) = (Gamma(&a, x, y)?, Gamma(&b, x, y)?);
    let mut wider = guard.clone();
    wider.push((x, y));
    for p in c.members() {
        for q in d.members() {
            if meet_outside(p, q, &wider) < t {
                return Ok(Some(format!("{p:?} and {q:?} after Γ at ({x},{y}) with guard {guard:?}")));
            }
        }
    }
    Ok(None)
}

fn projection_setup(rng: &mut ChaCha8Rng) -> Result<(IpSequence, usize, WeightFn)> {
    // zero-count sets appear only with a unit first capacity
    let lifted = random_caps(rng, 4, 4).caps().iter().map(|&c| c.max(2)).collect();
    let caps = IpSequence::new(lifted)?;
    let r = rng.gen_range(1..=caps.len());
    let w = projection_weight(&caps, r)?;
    Ok((caps, r, w))
}

fn projection_decay(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (caps, r, w) = projection_setup(rng)?;
    let factor = int(caps.first() as i64 - 1);
    if let Some((a, b)) = check_decay(&w, 0, &factor).witness {
        return Ok(Some(format!("caps {:?}, r={r}: decay by {factor} fails at {a:?} ⊊ {b:?}", caps.caps())));
    }
    let total = from_bigint(BigInt::from(gen_labeled(&caps, r)?.len()));
    Ok(fail(w.total() == total, || format!("caps {:?}, r={r}: total weight differs from the family size", caps.caps())))
}

fn projection_monotone(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (caps, r, w) = projection_setup(rng)?;
    Ok(check_condition_b(&w)?
        .witness
        .map(|(a, i, j)| format!("caps {:?}, r={r}: δ_{{{i},{j}}} lowers the weight of {a:?}", caps.caps())))
}

fn multiset_count(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(2..=6);
    let r = rng.gen_range(1..=5);
    let fam = random_family(rng, n, 20).filter(|s| !s.is_empty() && s.len() <= r);
    let before = count_with_supports(n, r, &fam)?;
    let i = rng.gen_range(1..=n);
    let j = (1..=n).filter(|&j| j != i).collect::<Vec<_>>()[rng.gen_range(0..n - 1)];
    let after = count_with_supports(n, r, &compress_family(&fam, i, j)?)?;
    Ok(fail(before == after, || format!("{fam:?} with r={r} under ({i},{j}): {before} vs {after}")))
}

fn product_measure(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(1..=10);
    let den = rng.gen_range(2..=50);
    let p = ratio(rng.gen_range(1..den), den);
    let w = build_weight(&WeightSpec::ProductMeasure { p: p.clone() }, &power_set(n)?)?;
    Ok(fail(w.total().is_one(), || format!("n={n}, p={p}: total {}", w.total())))
}

fn completion_stars(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let t = rng.gen_range(1..=3);
    let r = rng.gen_range(t..=t + 2);
    let s = rng.gen_range(r..=r + 2);
    let p = r + s - t;
    let m = rng.gen_range(p + r..=p + r + 4);
    let dom = gen_upto_r(p, r)?;
    let centre = SetBits::prefix(p, t)?;
    let (mi, ri, ti) = (m as i64, r as i64, t as i64);
    let binomial = build_weight(&WeightSpec::BinomialCompletion { m, r, p_window: p }, &dom)?;
    if binomial.star_weight(&centre)? != from_bigint(binom(mi - ti, ri - ti)) {
        return Ok(Some(format!("binomial completion star, m={m} r={r} s={s} t={t}")));
    }
    let multi = build_weight(&WeightSpec::MultisetCompletion { m, r, p_window: p }, &dom)?;
    Ok(fail(multi.star_weight(&centre)? == from_bigint(binom(mi + ri - ti - 1, ri - ti)), || {
        format!("multiset completion star, m={m} r={r} s={s} t={t}")
    }))
}

fn product_trick(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let k = rng.gen_range(2..=5);
    let values: Vec<BigInt> = (0..k)
        .map(|_| {
            let n = rng.gen_range(4..=40);
            let r = rng.gen_range(1..=n / 2);
            let t = rng.gen_range(1..=r);
            binom((n - t) as i64, (r - t) as i64)
        })
        .collect();
    Ok(fail(product_trick_holds(&values), || format!("values {values:?}")))
}

/// Concept enumeration against the exhaustive oracle on small random instances.
fn oracle(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let n = rng.gen_range(2..=6);
    let t = rng.gen_range(1..=2);
    let pick = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        let mut keys: Vec<u64> = (0..rng.gen_range(1..=12)).map(|_| rng.gen_range(1..1u64 << n) << 1).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    };
    let (left, right) = (pick(rng), pick(rng));
    let gw: Vec<Ratio> = left.iter().map(|_| random_ratio(rng, 7)).collect();
    let hw: Vec<Ratio> = right.iter().map(|_| random_ratio(rng, 7)).collect();
    let opts = SearchOptions { parallel: rng.gen_bool(0.5), ..SearchOptions::default() };
    let fast = max_product_pair_keys(&left, &right, t, &gw, &hw, &opts)?;
    let slow = brute_force_pair_keys(&left, &right, t, &gw, &hw, &opts)?;
    if fast.max_value != slow.max_value || fast.maximizers != slow.maximizers {
        return Ok(Some(format!("left {left:?}, right {right:?}, t={t}: {} vs {}", fast.max_value, slow.max_value)));
    }
    let rel = CompatRelation::from_keys(left.clone(), right.clone(), t);
    for m in &fast.maximizers {
        let value: Ratio = m.left().iter().map(|&i| &gw[i]).sum::<Ratio>() * m.right().iter().map(|&j| &hw[j]).sum::<Ratio>();
        if !is_closed_pair(&rel, m.left(), m.right()) || value != fast.max_value {
            return Ok(Some(format!("maximizer {m:?} is not a closed pair of the reported value")));
        }
    }
    Ok(fail(!fast.max_value.is_zero() || fast.maximizers.is_empty(), || "zero maximum with maximizers".into()))
}
