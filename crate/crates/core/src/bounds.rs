//! Closed-form star-product bounds, ground-size thresholds, the conjectured
//! maxima over the window families, and the counterexample constructions.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{bigint_str, binom, ceil_to_int, from_bigint, int, ratio_str, Ratio};
use crate::error::{param, Error, Result};
use crate::labeled::{
    gen_labeled, is_labeled_cross_t_intersecting, sum_of_products, IpSequence, LabeledFamily,
    LabeledSet,
};
use crate::multiset::{
    is_multiset_cross_t_intersecting, multiset_frankl_count, multiset_frankl_family, star_count,
    MultisetFamily,
};
use crate::setcore::{is_t_intersecting, power_set, t_star, Family, SetBits};
use crate::weights::{build_weight, WeightFn, WeightSpec};

/// Parameters of a two-family problem over grounds `[m]` and `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionProfile {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    #[serde(with = "ratio_str")]
    pub u: Ratio,
    /// `r + s - t`, the window the reduction weights live on.
    pub p_window: usize,
}

impl ReductionProfile {
    pub fn new(m: usize, n: usize, r: usize, s: usize, t: usize, u: Ratio) -> Result<Self> {
        if !(1 <= t && t <= r && r <= s) {
            return param(format!("need 1 <= t <= r <= s, got t={t} r={r} s={s}"));
        }
        if u < Ratio::zero() {
            return param("u must be non-negative");
        }
        Ok(ReductionProfile { m, n, r, s, t, u, p_window: r + s - t })
    }

    pub fn min_ground(&self) -> usize {
        self.m.min(self.n)
    }

    pub fn nrs_bound(&self) -> BigInt {
        thm_nrs_bound(self)
    }

    pub fn nrs_threshold_ok(&self) -> bool {
        int(self.min_ground() as i64) >= thm_nrs_threshold(self.r, self.s, self.t, &self.u)
    }

    pub fn multi_bound(&self) -> BigInt {
        thm_multi_bound(self.m, self.n, self.r, self.s, self.t)
    }

    pub fn multi_threshold_ok(&self) -> bool {
        int(self.min_ground() as i64) >= thm_multi_threshold(self.r, self.s, self.t, &self.u)
    }
}

fn b(a: usize, k: usize) -> BigInt {
    binom(a as i64, k as i64)
}

fn bi(a: i64, k: i64) -> BigInt {
    binom(a, k)
}

/// `C(m-t, r-t) · C(n-t, s-t)`.
pub fn thm_nrs_bound(p: &ReductionProfile) -> BigInt {
    bi(p.m as i64 - p.t as i64, (p.r - p.t) as i64) * bi(p.n as i64 - p.t as i64, (p.s - p.t) as i64)
}

/// `(t+u+2)(s-t) + r - 1`, exact.
pub fn thm_nrs_threshold(r: usize, s: usize, t: usize, u: &Ratio) -> Ratio {
    (int(t as i64 + 2) + u) * int(s as i64 - t as i64) + int(r as i64 - 1)
}

/// Least integer ground size meeting a rational threshold.
pub fn threshold_min_ground(threshold: &Ratio) -> BigInt {
    ceil_to_int(threshold)
}

/// `(Σ_{I ⊆ [t+1,m], |I| = r-t} Π c_i) · (Σ_{J ⊆ [t+1,n], |J| = s-t} Π d_j)`.
pub fn thm_seq_bound(c: &IpSequence, d: &IpSequence, r: usize, s: usize, t: usize) -> Result<BigInt> {
    let (m, n) = (c.len(), d.len());
    if r > m || s > n || t > r.min(s) {
        return param(format!("need r <= m, s <= n, t <= min(r,s); got r={r} m={m} s={s} n={n} t={t}"));
    }
    Ok(sum_of_products(c, t + 1..=m, r - t) * sum_of_products(d, t + 1..=n, s - t))
}

/// `c_1 >= t+u+1` and `d_1 >= t+u+1`.
pub fn seq_hypothesis_ok(c: &IpSequence, d: &IpSequence, t: usize, u: &Ratio) -> bool {
    let need = int(t as i64 + 1) + u;
    int(c.first() as i64) >= need && int(d.first() as i64) >= need
}

/// `C(m+r-t-1, r-t) · C(n+s-t-1, s-t)`.
pub fn thm_multi_bound(m: usize, n: usize, r: usize, s: usize, t: usize) -> BigInt {
    star_count(m, r, t) * star_count(n, s, t)
}

/// `(t+u+1)(s-t) + r - t`, exact.
pub fn thm_multi_threshold(r: usize, s: usize, t: usize, u: &Ratio) -> Ratio {
    (int(t as i64 + 1) + u) * int(s as i64 - t as i64) + int(r as i64 - t as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KFamilyBound {
    #[serde(with = "bigint_str")]
    pub bound: BigInt,
    #[serde(with = "ratio_str")]
    pub threshold: Ratio,
    pub threshold_ok: bool,
}

/// `Π C(n_i - t, r_i - t)` with the threshold `(t+u+2)(r_k - t) + r_{k-1} - 1`
/// taken over the two largest `r_i`. Each profile is `(n_i, r_i)`.
pub fn k_family_bound(profiles: &[(usize, usize)], t: usize, u: &Ratio) -> Result<KFamilyBound> {
    if profiles.len() < 2 {
        return param("need at least two families");
    }
    if let Some(&(n, r)) = profiles.iter().find(|&&(n, r)| t < 1 || r < t || r > n) {
        return param(format!("need 1 <= t <= r_i <= n_i, got t={t} r={r} n={n}"));
    }
    let bound = profiles.iter().map(|&(n, r)| b(n - t, r - t)).product();
    let mut rs: Vec<usize> = profiles.iter().map(|p| p.1).collect();
    rs.sort_unstable();
    let (rk, rk1) = (rs[rs.len() - 1], rs[rs.len() - 2]);
    let threshold = (int(t as i64 + 2) + u) * int((rk - t) as i64) + int(rk1 as i64 - 1);
    let min_n = profiles.iter().map(|p| p.0).min().expect("non-empty");
    let threshold_ok = int(min_n as i64) >= threshold;
    Ok(KFamilyBound { bound, threshold, threshold_ok })
}

/// `(Π a_i)^{k-1} = Π_{i<j} a_i a_j`.
pub fn product_trick_holds(values: &[BigInt]) -> bool {
    let k = values.len();
    if k == 0 {
        return true;
    }
    let total: BigInt = values.iter().product();
    let lhs = num_traits::pow(total, k - 1);
    let mut rhs = BigInt::one();
    for i in 0..k {
        for j in (i + 1)..k {
            rhs *= &values[i] * &values[j];
        }
    }
    lhs == rhs
}

/// `|{A ∈ C([n], r) : |A ∩ [t+i+j]| >= t+i}|`.
pub fn frankl_count(n: usize, r: usize, t: usize, i: usize, j: usize) -> BigInt {
    let w = t + i + j;
    (t + i..=w.min(r)).map(|k| b(w, k) * bi(n as i64 - w as i64, (r - k) as i64)).sum()
}

/// `|{A ∈ S_{c,r} : |A ∩ ([t+i+j] × [1])| >= t+i}|`.
pub fn labeled_frankl_count(c: &IpSequence, r: usize, t: usize, i: usize, j: usize) -> BigInt {
    let w = t + i + j;
    // dp[size][first-level hits inside the window]
    let mut dp = vec![vec![BigInt::zero(); w + 1]; r + 1];
    dp[0][0] = BigInt::one();
    for x in 1..=c.len() {
        let cap = c.cap(x);
        let mut next = dp.clone();
        for size in 0..r {
            for k in 0..=w {
                if dp[size][k].is_zero() {
                    continue;
                }
                let cur = dp[size][k].clone();
                if x <= w {
                    next[size + 1][k + 1] += &cur;
                    next[size + 1][k] += cur * BigInt::from(cap - 1);
                } else {
                    next[size + 1][k] += cur * BigInt::from(cap);
                }
            }
        }
        dp = next;
    }
    (t + i..=w).map(|k| dp[r][k].clone()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjectureKind {
    Sets { m: usize, n: usize, r: usize, s: usize },
    Seq { c: IpSequence, d: IpSequence, r: usize, s: usize },
    Multi { m: usize, n: usize, r: usize, s: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureMax {
    #[serde(with = "bigint_str")]
    pub value: BigInt,
    pub argmax: Vec<(usize, usize)>,
}

/// Maximum over admissible `(i, j)` of the left window family size at `(i, j)`
/// times the right one at `(j, i)`; every attaining pair is listed in lex order.
pub fn conjecture_max(kind: &ConjectureKind, t: usize) -> Result<ConjectureMax> {
    let (m, n, r, s) = match kind {
        ConjectureKind::Sets { m, n, r, s } | ConjectureKind::Multi { m, n, r, s } => (*m, *n, *r, *s),
        ConjectureKind::Seq { c, d, r, s } => (c.len(), d.len(), *r, *s),
    };
    if t < 1 || t > r.min(s) {
        return param(format!("need 1 <= t <= min(r, s), got t={t}"));
    }
    if matches!(kind, ConjectureKind::Sets { .. } | ConjectureKind::Seq { .. }) && (r > m || s > n) {
        return param(format!("need r <= m and s <= n, got r={r} m={m} s={s} n={n}"));
    }
    let lim = m.min(n);
    if t > lim {
        return param(format!("t = {t} exceeds min(m, n) = {lim}"));
    }
    let side = |i: usize, j: usize| -> BigInt {
        match kind {
            ConjectureKind::Sets { m, n, r, s } => frankl_count(*m, *r, t, i, j) * frankl_count(*n, *s, t, j, i),
            ConjectureKind::Seq { c, d, r, s } => {
                labeled_frankl_count(c, *r, t, i, j) * labeled_frankl_count(d, *s, t, j, i)
            }
            ConjectureKind::Multi { m, n, r, s } => {
                multiset_frankl_count(*m, *r, t, i, j) * multiset_frankl_count(*n, *s, t, j, i)
            }
        }
    };
    let mut best = ConjectureMax { value: BigInt::zero(), argmax: Vec::new() };
    for i in 0..=lim - t {
        for j in 0..=lim - t - i {
            let v = side(i, j);
            if v > best.value {
                best = ConjectureMax { value: v, argmax: vec![(i, j)] };
            } else if v == best.value {
                best.argmax.push((i, j));
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CounterexampleSpec {
    /// Geometric weights `x^{n-|A|}` on `2^[n]`, `1 <= x < t <= n-2`.
    Remark2 { n: usize, t: usize, x: usize },
    /// Full labeled sets with caps `x+1` on one side and `t+1` on the other.
    SeqLowCap { n: usize, t: usize, x: usize },
    /// Multisets with `n < t(r-t)+2`.
    MultisetLowN { n: usize, t: usize, r: usize },
}

#[derive(Clone, Debug)]
pub enum CounterexampleFamilies {
    Sets { family: Family, weight: WeightFn, spec: WeightSpec },
    Labeled { a: LabeledFamily, b: LabeledFamily },
    Multiset { family: MultisetFamily },
}

/// Both closed forms and enumerated values for one construction; the
/// enumerated values are computed from the materialized families.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub spec: CounterexampleSpec,
    #[serde(with = "ratio_str")]
    pub left_closed: Ratio,
    #[serde(with = "ratio_str")]
    pub right_closed: Ratio,
    #[serde(with = "ratio_str")]
    pub left_star_closed: Ratio,
    #[serde(with = "ratio_str")]
    pub right_star_closed: Ratio,
    #[serde(with = "ratio_str")]
    pub left_enumerated: Ratio,
    #[serde(with = "ratio_str")]
    pub right_enumerated: Ratio,
    #[serde(with = "ratio_str")]
    pub left_star_enumerated: Ratio,
    #[serde(with = "ratio_str")]
    pub right_star_enumerated: Ratio,
    #[serde(with = "ratio_str")]
    pub pair_value: Ratio,
    #[serde(with = "ratio_str")]
    pub star_value: Ratio,
    #[serde(with = "ratio_str")]
    pub margin: Ratio,
    pub cross_t_intersecting: bool,
    #[serde(skip)]
    pub families: CounterexampleFamilies,
}

impl CounterexampleReport {
    pub fn closed_forms_match(&self) -> bool {
        self.left_closed == self.left_enumerated
            && self.right_closed == self.right_enumerated
            && self.left_star_closed == self.left_star_enumerated
            && self.right_star_closed == self.right_star_enumerated
    }

    pub fn beats_star(&self) -> bool {
        self.pair_value > self.star_value
    }
}

/// Largest number of member pairs the constructor will test for cross-intersection.
pub const COUNTEREXAMPLE_PAIR_CAP: usize = 50_000_000;

fn pair_cap(a: usize, b: usize) -> Result<()> {
    let size = a.saturating_mul(b);
    if size > COUNTEREXAMPLE_PAIR_CAP {
        return Err(Error::CapExceeded { what: "counterexample pair check", size, cap: COUNTEREXAMPLE_PAIR_CAP });
    }
    Ok(())
}

fn pow(base: usize, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), e)
}

/// `(x+1)^{n-t-2} (tx + 2x + 1)`.
fn window_side(n: usize, t: usize, x: usize) -> BigInt {
    pow(x + 1, n - t - 2) * BigInt::from(t * x + 2 * x + 1)
}

pub fn validate_counterexample(spec: &CounterexampleSpec) -> Result<()> {
    match *spec {
        CounterexampleSpec::Remark2 { n, t, x } => {
            if !(1 <= x && x < t && t + 2 <= n) {
                return param(format!("need 1 <= x < t <= n-2, got x={x} t={t} n={n}"));
            }
        }
        CounterexampleSpec::SeqLowCap { n, t, x } => {
            if !(1 <= x && x < t && t + 2 <= n) {
                return param(format!("need caps x+1 < t+1 with x >= 1 and n >= t+2, got x={x} t={t} n={n}"));
            }
        }
        CounterexampleSpec::MultisetLowN { n, t, r } => {
            if !(t >= 1 && r >= t + 1 && n >= t + 2) {
                return param(format!("need t >= 1, r >= t+1, n >= t+2, got t={t} r={r} n={n}"));
            }
            if n >= t * (r - t) + 2 {
                return param(format!("need n < t(r-t)+2 = {}, got n={n}", t * (r - t) + 2));
            }
        }
    }
    Ok(())
}

/// Builds the families of a counterexample and evaluates them both ways.
pub fn build_counterexample(spec: &CounterexampleSpec) -> Result<CounterexampleReport> {
    validate_counterexample(spec)?;
    match *spec {
        CounterexampleSpec::Remark2 { n, t, x } => {
            let ground = power_set(n)?;
            pair_cap(ground.len(), ground.len())?;
            let wspec = WeightSpec::Geometric { x: int(x as i64) };
            let weight = build_weight(&wspec, &ground)?;
            let window = SetBits::prefix(n, t + 2)?;
            let family = ground.filter(|a| a.meet(&window) >= t + 1);
            let side = weight.total_weight(&family)?;
            let star = weight.total_weight(&t_star(&ground, &SetBits::prefix(n, t)?)?)?;
            let closed = from_bigint(window_side(n, t, x));
            let star_closed = from_bigint(pow(x + 1, n - t));
            let cross = is_t_intersecting(&family, t);
            Ok(CounterexampleReport {
                spec: *spec,
                left_closed: closed.clone(),
                right_closed: closed,
                left_star_closed: star_closed.clone(),
                right_star_closed: star_closed,
                left_enumerated: side.clone(),
                right_enumerated: side.clone(),
                left_star_enumerated: star.clone(),
                right_star_enumerated: star.clone(),
                pair_value: &side * &side,
                star_value: &star * &star,
                margin: &side * &side - &star * &star,
                cross_t_intersecting: cross,
                families: CounterexampleFamilies::Sets { family, weight, spec: wspec },
            })
        }
        CounterexampleSpec::SeqLowCap { n, t, x } => {
            let c = IpSequence::constant(n, x + 1)?;
            let d = IpSequence::constant(n, t + 1)?;
            pair_cap(pow(x + 1, n).try_into().unwrap_or(usize::MAX), pow(t + 1, n).try_into().unwrap_or(usize::MAX))?;
            let window_hits = |l: &LabeledSet| l.pairs().iter().filter(|&&(p, v)| v == 1 && p <= t + 2).count();
            let full_c = gen_labeled(&c, n)?;
            let full_d = gen_labeled(&d, n)?;
            let pick = |full: &LabeledFamily| {
                let members: Vec<LabeledSet> =
                    full.members().iter().filter(|l| window_hits(l) >= t + 1).cloned().collect();
                LabeledFamily::new(full.caps().clone(), n, members)
            };
            let a = pick(&full_c)?;
            let bfam = pick(&full_d)?;
            let centre = LabeledSet::first_level(t);
            let star_a = full_c.members().iter().filter(|l| centre.is_subset(l)).count();
            let star_b = full_d.members().iter().filter(|l| centre.is_subset(l)).count();
            let cross = is_labeled_cross_t_intersecting(&[a.clone(), bfam.clone()], t);
            let le = int(a.len() as i64);
            let re = int(bfam.len() as i64);
            let lse = int(star_a as i64);
            let rse = int(star_b as i64);
            Ok(CounterexampleReport {
                spec: *spec,
                left_closed: from_bigint(window_side(n, t, x)),
                right_closed: from_bigint(window_side(n, t, t)),
                left_star_closed: from_bigint(pow(x + 1, n - t)),
                right_star_closed: from_bigint(pow(t + 1, n - t)),
                pair_value: &le * &re,
                star_value: &lse * &rse,
                margin: &le * &re - &lse * &rse,
                left_enumerated: le,
                right_enumerated: re,
                left_star_enumerated: lse,
                right_star_enumerated: rse,
                cross_t_intersecting: cross,
                families: CounterexampleFamilies::Labeled { a, b: bfam },
            })
        }
        CounterexampleSpec::MultisetLowN { n, t, r } => {
            let total = b(n + r - 1, r);
            let total: usize = total.try_into().unwrap_or(usize::MAX);
            pair_cap(total, total)?;
            let family = multiset_frankl_family(n, r, t, 1, 1)?;
            let star = MultisetFamily::all(n, r)?.star(&SetBits::prefix(n, t)?).len();
            let closed = from_bigint(
                BigInt::from(t + 2) * bi((n + r) as i64 - t as i64 - 3, (r - t) as i64 - 1)
                    + bi((n + r) as i64 - t as i64 - 3, (r - t) as i64 - 2),
            );
            let star_closed = from_bigint(star_count(n, r, t));
            let cross = is_multiset_cross_t_intersecting(&family, &family, t);
            let e = int(family.len() as i64);
            let se = int(star as i64);
            Ok(CounterexampleReport {
                spec: *spec,
                left_closed: closed.clone(),
                right_closed: closed,
                left_star_closed: star_closed.clone(),
                right_star_closed: star_closed,
                pair_value: &e * &e,
                star_value: &se * &se,
                margin: &e * &e - &se * &se,
                left_enumerated: e.clone(),
                right_enumerated: e,
                left_star_enumerated: se.clone(),
                right_star_enumerated: se,
                cross_t_intersecting: cross,
                families: CounterexampleFamilies::Multiset { family },
            })
        }
    }
}
