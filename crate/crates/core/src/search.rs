//! Exact maximization of weight products over cross-`t`-intersecting families.
//!
//! Members are addressed by their index in the canonical order of the input
//! families, and compared through `u64` keys whose common bits count the
//! intersection. Plain sets use their bitmask; labeled sets and multisets are
//! encoded by the callers (pair encoding, supports).
//!
//! With strictly positive weights every maximizing pair `(A, B)` is closed:
//! `A = compat(B)` and `B = compat(A)`, since enlarging either side to the
//! compatible set never lowers its weight. The pair search therefore only
//! visits closed pairs, each exactly once (close-by-one with a canonicity
//! test), and prunes a subtree when the largest product it could still reach
//! falls below the best value found.

use std::ops::{AddAssign, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{format_ratio, Ratio};
use crate::error::{param, Error, Result};
use crate::setcore::Family;
use crate::weights::WeightFn;

/// Default number of maximizers kept in a report.
pub const REPORT_CAP: usize = 10_000;

/// Largest family the brute-force paths accept by default.
pub const BRUTE_FORCE_CAP: usize = 14;

/// Fixed-length bit vector over member indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn ones(n: usize) -> Self {
        let mut b = Bits::zeros(n);
        for i in 0..n {
            b.set(i);
        }
        b
    }

    fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::zeros(n);
        for i in idx {
            b.set(i);
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Agreement on indices below `j`.
    fn eq_below(&self, other: &Bits, j: usize) -> bool {
        let full = j / 64;
        if self.0[..full] != other.0[..full] {
            return false;
        }
        let rem = j % 64;
        rem == 0 || (self.0[full] ^ other.0[full]) & ((1u64 << rem) - 1) == 0
    }

    fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }

    fn indices(&self) -> Vec<usize> {
        self.ones_iter().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The bipartite relation "`|A ∩ B| >= t`" between two candidate lists.
#[derive(Clone, Debug)]
pub struct CompatRelation {
    left: Vec<u64>,
    right: Vec<u64>,
    t: usize,
    rows: Vec<Bits>,
    cols: Vec<Bits>,
    families: Option<(Family, Family)>,
}

impl CompatRelation {
    pub fn from_keys(left: Vec<u64>, right: Vec<u64>, t: usize) -> Self {
        let (nl, nr) = (left.len(), right.len());
        let mut rows = vec![Bits::zeros(nr); nl];
        let mut cols = vec![Bits::zeros(nl); nr];
        for (i, a) in left.iter().enumerate() {
            for (j, b) in right.iter().enumerate() {
                if (a & b).count_ones() as usize >= t {
                    rows[i].set(j);
                    cols[j].set(i);
                }
            }
        }
        CompatRelation { left, right, t, rows, cols, families: None }
    }

    pub fn new(left: &Family, right: &Family, t: usize) -> Self {
        let keys = |f: &Family| f.iter().map(|s| s.bits()).collect();
        let mut rel = Self::from_keys(keys(left), keys(right), t);
        rel.families = Some((left.clone(), right.clone()));
        rel
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn compatible(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    fn extent(&self, right: &Bits) -> Bits {
        let mut a = Bits::ones(self.left.len());
        for j in right.ones_iter() {
            a.and_assign(&self.cols[j]);
        }
        a
    }

    fn intent(&self, left: &Bits) -> Bits {
        let mut b = Bits::ones(self.right.len());
        for i in left.ones_iter() {
            b.and_assign(&self.rows[i]);
        }
        b
    }

    /// Indices on the other side compatible with every listed index on `side`.
    pub fn compat_indices(&self, sub: &[usize], side: Side) -> Vec<usize> {
        match side {
            Side::Left => self.intent(&Bits::from_indices(self.left.len(), sub.iter().copied())).indices(),
            Side::Right => self.extent(&Bits::from_indices(self.right.len(), sub.iter().copied())).indices(),
        }
    }
}

/// Members of the other side that `t`-intersect every member of `sub`;
/// `compat(∅)` is the whole other side.
pub fn compat(rel: &CompatRelation, sub: &Family, side: Side) -> Result<Family> {
    let Some((left, right)) = &rel.families else {
        return param("relation was built from raw keys; use compat_indices");
    };
    let (this, other) = match side {
        Side::Left => (left, right),
        Side::Right => (right, left),
    };
    let mut idx = Vec::with_capacity(sub.len());
    for s in sub {
        match this.index_of(s) {
            Some(k) => idx.push(k),
            None => return param(format!("{s:?} is not a member of the indicated side")),
        }
    }
    Ok(other.select(&rel.compat_indices(&idx, side)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Concept,
    BruteForce,
    BranchAndBound,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Concept => "concept",
            Method::BruteForce => "brute_force",
            Method::BranchAndBound => "branch_and_bound",
        }
    }
}

/// One optimal configuration: member indices per family, ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Maximizer {
    pub parts: Vec<Vec<usize>>,
}

impl Maximizer {
    pub fn left(&self) -> &[usize] {
        &self.parts[0]
    }

    pub fn right(&self) -> &[usize] {
        &self.parts[1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    /// Best positive value, or 0 when no configuration has all parts non-empty.
    pub max_value: Ratio,
    /// All configurations attaining a positive `max_value`, canonically ordered.
    pub maximizers: Vec<Maximizer>,
    pub node_count: u64,
    pub method: Method,
    pub truncated: bool,
}

impl SearchReport {
    /// JSON report; `render(part, index)` turns a member index into its JSON form.
    pub fn to_json_with(&self, render: impl Fn(usize, usize) -> Value) -> Value {
        let maximizers: Vec<Value> = self
            .maximizers
            .iter()
            .map(|m| {
                Value::Array(
                    m.parts
                        .iter()
                        .enumerate()
                        .map(|(p, idx)| Value::Array(idx.iter().map(|&k| render(p, k)).collect()))
                        .collect(),
                )
            })
            .collect();
        json!({
            "max": format_ratio(&self.max_value),
            "maximizers": maximizers,
            "nodes": self.node_count,
            "method": self.method.name(),
            "truncated": self.truncated,
        })
    }

    /// JSON report for plain families, members written as element lists.
    pub fn to_json(&self, fams: &[&Family]) -> Value {
        self.to_json_with(|p, k| json!(fams[p].members()[k].elements()))
    }

    /// Maximizers as families over the inputs.
    pub fn families(&self, fams: &[&Family]) -> Vec<Vec<Family>> {
        self.maximizers
            .iter()
            .map(|m| m.parts.iter().zip(fams).map(|(idx, f)| f.select(idx)).collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub report_cap: usize,
    /// Explore top-level subtrees on the rayon pool.
    pub parallel: bool,
    /// Per-family size limit for the brute-force paths.
    pub brute_force_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { report_cap: REPORT_CAP, parallel: true, brute_force_cap: BRUTE_FORCE_CAP }
    }
}

/// Accumulator for scaled integer weights.
trait Acc:
    Clone + Ord + Send + Sync + Zero + for<'a> AddAssign<&'a Self> + for<'a> Mul<&'a Self, Output = Self>
{
    fn to_big(&self) -> BigInt;
}

impl Acc for u128 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Acc for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Integer numerators over a common denominator.
struct Scaled {
    ints: Vec<BigInt>,
    den: BigInt,
}

fn scale(ws: &[Ratio]) -> Scaled {
    let den = ws.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let ints = ws.iter().map(|w| w.numer() * (&den / w.denom())).collect();
    Scaled { ints, den }
}

fn check_positive(ws: &[Ratio]) -> Result<()> {
    if let Some(k) = ws.iter().position(|w| *w <= Ratio::zero()) {
        return Err(Error::Weight(format!("weight at index {k} is not positive")));
    }
    Ok(())
}

/// Whether every product of one partial sum per side fits in `u128`.
fn fits_u128(sides: &[&Scaled]) -> bool {
    let bits: u64 = sides.iter().map(|s| s.ints.iter().sum::<BigInt>().bits().max(1)).sum();
    bits <= 127
}

fn to_u128(s: &Scaled) -> Vec<u128> {
    s.ints.iter().map(|v| v.to_u128().expect("checked to fit")).collect()
}

fn sum_bits<W: Acc>(w: &[W], b: &Bits) -> W {
    let mut s = W::zero();
    for i in b.ones_iter() {
        s += &w[i];
    }
    s
}

/// Best value and its witnesses within one part of the search.
struct Local<W> {
    best: W,
    found: Vec<Vec<Vec<usize>>>,
    truncated: bool,
    nodes: u64,
    cap: usize,
}

impl<W: Acc> Local<W> {
    fn new(best: W, cap: usize) -> Self {
        Local { best, found: Vec::new(), truncated: false, nodes: 0, cap }
    }

    fn record(&mut self, v: W, parts: impl FnOnce() -> Vec<Vec<usize>>) {
        if v.is_zero() {
            return;
        }
        if v > self.best {
            self.best = v;
            self.found.clear();
            self.truncated = false;
        } else if v < self.best {
            return;
        }
        if self.found.len() < self.cap {
            self.found.push(parts());
        } else {
            self.truncated = true;
        }
    }
}

/// Merges part results into one canonical result.
fn merge<W: Acc>(parts: Vec<Local<W>>, cap: usize) -> Local<W> {
    let nodes = parts.iter().map(|p| p.nodes).sum();
    let best = parts.iter().map(|p| p.best.clone()).max().unwrap_or_else(W::zero);
    let mut out = Local::new(best, cap);
    out.nodes = nodes;
    for p in parts {
        if p.best == out.best && !p.found.is_empty() {
            out.truncated |= p.truncated;
            out.found.extend(p.found);
        }
    }
    out.found.sort();
    out.found.dedup();
    if out.found.len() > cap {
        out.found.truncate(cap);
        out.truncated = true;
    }
    out
}

struct PairEngine<'a, W> {
    rel: &'a CompatRelation,
    wl: &'a [W],
    wr: &'a [W],
    /// `suffix[j]` = total left weight of indices `>= j`.
    suffix: Vec<W>,
}

impl<'a, W: Acc> PairEngine<'a, W> {
    fn new(rel: &'a CompatRelation, wl: &'a [W], wr: &'a [W]) -> Self {
        let mut suffix = vec![W::zero(); wl.len() + 1];
        for j in (0..wl.len()).rev() {
            let mut s = suffix[j + 1].clone();
            s += &wl[j];
            suffix[j] = s;
        }
        PairEngine { rel, wl, wr, suffix }
    }

    fn value(&self, a: &Bits, b: &Bits) -> W {
        sum_bits(self.wl, a) * &sum_bits(self.wr, b)
    }

    /// Largest value reachable below the child of `a` generated by `j`.
    fn child_bound(&self, a: &Bits, j: usize, b2: &Bits) -> W {
        let mut left = self.suffix[j].clone();
        for i in a.ones_iter().take_while(|&i| i < j) {
            left += &self.wl[i];
        }
        left * &sum_bits(self.wr, b2)
    }

    /// Canonical child generated from `(a, b)` by adding left index `j`.
    fn child(&self, a: &Bits, b: &Bits, j: usize, best: &W, nodes: &mut u64) -> Option<(Bits, Bits)> {
        let b2 = b.and(&self.rel.rows[j]);
        if b2.is_empty() || self.child_bound(a, j, &b2) < *best {
            return None;
        }
        *nodes += 1;
        let a2 = self.rel.extent(&b2);
        a2.eq_below(a, j).then_some((a2, b2))
    }

    fn visit(&self, a: &Bits, b: &Bits, next: usize, local: &mut Local<W>) {
        for j in next..self.wl.len() {
            if a.get(j) {
                continue;
            }
            let best = local.best.clone();
            if let Some((a2, b2)) = self.child(a, b, j, &best, &mut local.nodes) {
                local.record(self.value(&a2, &b2), || vec![a2.indices(), b2.indices()]);
                self.visit(&a2, &b2, j + 1, local);
            }
        }
    }

    fn run(&self, opts: &SearchOptions) -> Local<W> {
        let nl = self.wl.len();
        let b0 = Bits::ones(self.wr.len());
        let a0 = self.rel.extent(&b0);
        let mut root = Local::new(W::zero(), opts.report_cap);
        root.nodes = 1;
        root.record(self.value(&a0, &b0), || vec![a0.indices(), b0.indices()]);
        // top-level children, evaluated once to seed every subtree's bound
        let mut children = Vec::new();
        let mut seed = root.best.clone();
        for j in 0..nl {
            if a0.get(j) {
                continue;
            }
            if let Some((a2, b2)) = self.child(&a0, &b0, j, &W::zero(), &mut root.nodes) {
                let v = self.value(&a2, &b2);
                if v > seed {
                    seed = v;
                }
                children.push((j, a2, b2));
            }
        }
        let explore = |(j, a2, b2): &(usize, Bits, Bits)| {
            let mut local = Local::new(seed.clone(), opts.report_cap);
            if self.child_bound(&a0, *j, b2) < seed {
                return local;
            }
            local.record(self.value(a2, b2), || vec![a2.indices(), b2.indices()]);
            self.visit(a2, b2, j + 1, &mut local);
            local
        };
        let mut parts: Vec<Local<W>> = if opts.parallel {
            children.par_iter().map(explore).collect()
        } else {
            children.iter().map(explore).collect()
        };
        parts.push(root);
        merge(parts, opts.report_cap)
    }
}

fn finish<W: Acc>(local: Local<W>, den: BigInt, method: Method) -> SearchReport {
    let max_value = if local.found.is_empty() { Ratio::zero() } else { Ratio::new(local.best.to_big(), den) };
    SearchReport {
        max_value,
        maximizers: local.found.into_iter().map(|parts| Maximizer { parts }).collect(),
        node_count: local.nodes,
        method,
        truncated: local.truncated,
    }
}

/// Weight values for the members of `fam`, looked up in `w`.
pub fn weights_for(fam: &Family, w: &WeightFn) -> Result<Vec<Ratio>> {
    fam.iter()
        .map(|s| {
            w.value(s)
                .cloned()
                .ok_or_else(|| Error::Parameter(format!("{s:?} is outside the weight's domain")))
        })
        .collect()
}

/// Maximum of `g(A) h(B)` over cross-`t`-intersecting `A ⊆ left`, `B ⊆ right`,
/// given as keys with positive weights.
pub fn max_product_pair_keys(
    left: &[u64],
    right: &[u64],
    t: usize,
    gw: &[Ratio],
    hw: &[Ratio],
    opts: &SearchOptions,
) -> Result<SearchReport> {
    if gw.len() != left.len() || hw.len() != right.len() {
        return param("weight lists must match the candidate lists");
    }
    check_positive(gw)?;
    check_positive(hw)?;
    let rel = CompatRelation::from_keys(left.to_vec(), right.to_vec(), t);
    let (sl, sr) = (scale(gw), scale(hw));
    let den = &sl.den * &sr.den;
    Ok(if fits_u128(&[&sl, &sr]) {
        let (wl, wr) = (to_u128(&sl), to_u128(&sr));
        finish(PairEngine::new(&rel, &wl, &wr).run(opts), den, Method::Concept)
    } else {
        finish(PairEngine::new(&rel, &sl.ints, &sr.ints).run(opts), den, Method::Concept)
    })
}

fn family_keys(f: &Family) -> Vec<u64> {
    f.iter().map(|s| s.bits()).collect()
}

/// Maximum of `g(A) h(B)` over cross-`t`-intersecting `A ⊆ G`, `B ⊆ H`.
pub fn max_product_pair(g: &Family, h: &Family, t: usize, gw: &WeightFn, hw: &WeightFn) -> Result<SearchReport> {
    max_product_pair_with(g, h, t, gw, hw, &SearchOptions::default())
}

pub fn max_product_pair_with(
    g: &Family,
    h: &Family,
    t: usize,
    gw: &WeightFn,
    hw: &WeightFn,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    max_product_pair_keys(&family_keys(g), &family_keys(h), t, &weights_for(g, gw)?, &weights_for(h, hw)?, opts)
}

fn cap_check(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        return Err(Error::CapExceeded { what: "brute-force family size", size: len, cap });
    }
    Ok(())
}

/// Exhaustive oracle: every subset `A` of the left list with `B = compat(A)`,
/// reported after closing `A` to `compat(B)`.
pub fn brute_force_pair_keys(
    left: &[u64],
    right: &[u64],
    t: usize,
    gw: &[Ratio],
    hw: &[Ratio],
    opts: &SearchOptions,
) -> Result<SearchReport> {
    cap_check(left.len(), opts.brute_force_cap)?;
    cap_check(right.len(), opts.brute_force_cap)?;
    if gw.len() != left.len() || hw.len() != right.len() {
        return param("weight lists must match the candidate lists");
    }
    check_positive(gw)?;
    check_positive(hw)?;
    let rel = CompatRelation::from_keys(left.to_vec(), right.to_vec(), t);
    let (sl, sr) = (scale(gw), scale(hw));
    let mut local = Local::new(BigInt::zero(), usize::MAX);
    for mask in 0u64..(1 << left.len()) {
        local.nodes += 1;
        let a = Bits::from_indices(left.len(), (0..left.len()).filter(|i| mask >> i & 1 == 1));
        let b = rel.intent(&a);
        let v = sum_bits(&sl.ints, &a) * sum_bits(&sr.ints, &b);
        local.record(v, || vec![rel.extent(&b).indices(), b.indices()]);
    }
    let local = merge(vec![local], opts.report_cap);
    Ok(finish(local, &sl.den * &sr.den, Method::BruteForce))
}

pub fn brute_force_pair(g: &Family, h: &Family, t: usize, gw: &WeightFn, hw: &WeightFn) -> Result<SearchReport> {
    brute_force_pair_keys(
        &family_keys(g),
        &family_keys(h),
        t,
        &weights_for(g, gw)?,
        &weights_for(h, hw)?,
        &SearchOptions::default(),
    )
}

struct CliqueEngine<'a, W> {
    adj: Vec<Bits>,
    w: &'a [W],
}

impl<W: Acc> CliqueEngine<'_, W> {
    fn expand(&self, cur: &mut Vec<usize>, cur_w: &W, cand: &Bits, local: &mut Local<W>) {
        let order: Vec<usize> = cand.indices();
        // suffix sums of the candidates in scan order
        let mut rest = vec![W::zero(); order.len() + 1];
        for k in (0..order.len()).rev() {
            let mut s = rest[k + 1].clone();
            s += &self.w[order[k]];
            rest[k] = s;
        }
        for (k, &v) in order.iter().enumerate() {
            let mut bound = cur_w.clone();
            bound += &rest[k];
            if bound < local.best {
                break;
            }
            local.nodes += 1;
            let mut nw = cur_w.clone();
            nw += &self.w[v];
            cur.push(v);
            local.record(nw.clone(), || vec![cur.clone()]);
            let mut next = cand.and(&self.adj[v]);
            for &u in &order[..=k] {
                next.0[u / 64] &= !(1 << (u % 64));
            }
            self.expand(cur, &nw, &next, local);
            cur.pop();
        }
    }
}

/// Maximum total weight of a `t`-intersecting subfamily (a member counts
/// only if it `t`-intersects itself, i.e. has at least `t` elements).
pub fn max_t_intersecting_keys(keys: &[u64], t: usize, w: &[Ratio], opts: &SearchOptions) -> Result<SearchReport> {
    if w.len() != keys.len() {
        return param("weight list must match the member list");
    }
    check_positive(w)?;
    let n = keys.len();
    let ok = |a: u64, b: u64| (a & b).count_ones() as usize >= t;
    let adj: Vec<Bits> = keys
        .iter()
        .map(|&a| Bits::from_indices(n, (0..n).filter(|&j| ok(a, keys[j]))))
        .collect();
    let cand = Bits::from_indices(n, (0..n).filter(|&i| ok(keys[i], keys[i])));
    let s = scale(w);
    let mut cur = Vec::new();
    let local = if fits_u128(&[&s]) {
        let wu = to_u128(&s);
        let eng = CliqueEngine { adj, w: &wu };
        let mut local = Local::new(0u128, usize::MAX);
        eng.expand(&mut cur, &0, &cand, &mut local);
        let l = merge(vec![local], opts.report_cap);
        Local { best: l.best.to_big(), found: l.found, truncated: l.truncated, nodes: l.nodes, cap: l.cap }
    } else {
        let eng = CliqueEngine { adj, w: &s.ints };
        let mut local = Local::new(BigInt::zero(), usize::MAX);
        eng.expand(&mut cur, &BigInt::zero(), &cand, &mut local);
        merge(vec![local], opts.report_cap)
    };
    Ok(finish(local, s.den, Method::BranchAndBound))
}

pub fn max_t_intersecting(f: &Family, t: usize, w: &WeightFn) -> Result<SearchReport> {
    max_t_intersecting_keys(&family_keys(f), t, &weights_for(f, w)?, &SearchOptions::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KMethod {
    /// Closed-pair enumeration on the first family against the rest, recursing
    /// on the restricted remaining families.
    Concept,
    /// Subsets of the first `k - 1` families, each nested inside the
    /// compatible part of the previous ones; the last family is closed.
    BruteForce,
}

/// One family of a k-family instance: member keys and their scaled weights.
#[derive(Clone)]
struct KPart<W> {
    keys: Vec<u64>,
    w: Vec<W>,
    /// Index in the caller's family.
    orig: Vec<usize>,
}

fn restrict<W: Clone>(p: &KPart<W>, keep: impl Fn(u64) -> bool) -> KPart<W> {
    let idx: Vec<usize> = (0..p.keys.len()).filter(|&i| keep(p.keys[i])).collect();
    KPart {
        keys: idx.iter().map(|&i| p.keys[i]).collect(),
        w: idx.iter().map(|&i| p.w[i].clone()).collect(),
        orig: idx.iter().map(|&i| p.orig[i]).collect(),
    }
}

fn total<W: Acc>(w: &[W]) -> W {
    let mut s = W::zero();
    for v in w {
        s += v;
    }
    s
}

fn meets_all(key: u64, others: &[u64], t: usize) -> bool {
    others.iter().all(|&o| (key & o).count_ones() as usize >= t)
}

/// Concept-method k-family search; found parts hold caller indices.
fn k_concept<W: Acc>(parts: &[KPart<W>], t: usize, cap: usize, local: &mut Local<W>) {
    let k = parts.len();
    if parts.iter().any(|p| p.keys.is_empty()) {
        return;
    }
    if k == 1 {
        local.nodes += 1;
        local.record(total(&parts[0].w), || vec![parts[0].orig.clone()]);
        return;
    }
    if k == 2 {
        let rel = CompatRelation::from_keys(parts[0].keys.clone(), parts[1].keys.clone(), t);
        let eng = PairEngine::new(&rel, &parts[0].w, &parts[1].w);
        let opts = SearchOptions { report_cap: cap, parallel: false, brute_force_cap: 0 };
        let mut sub = eng.run(&opts);
        local.nodes += sub.nodes;
        for f in sub.found.drain(..) {
            let v = sub.best.clone();
            local.record(v, || {
                vec![
                    f[0].iter().map(|&i| parts[0].orig[i]).collect(),
                    f[1].iter().map(|&i| parts[1].orig[i]).collect(),
                ]
            });
        }
        local.truncated |= sub.truncated && sub.best == local.best;
        return;
    }
    // first family against the disjoint union of the rest
    let first = &parts[0];
    let rest: Vec<u64> = parts[1..].iter().flat_map(|p| p.keys.iter().copied()).collect();
    let rel = CompatRelation::from_keys(first.keys.clone(), rest.clone(), t);
    let mut offsets = vec![0];
    for p in &parts[1..] {
        offsets.push(offsets.last().unwrap() + p.keys.len());
    }
    let nl = first.keys.len();
    let mut suffix = vec![W::zero(); nl + 1];
    for j in (0..nl).rev() {
        let mut s = suffix[j + 1].clone();
        s += &first.w[j];
        suffix[j] = s;
    }
    // product of the remaining families' weights inside `b`
    let rest_bound = |b: &Bits| -> W {
        let mut prod: Option<W> = None;
        for (q, p) in parts[1..].iter().enumerate() {
            let mut s = W::zero();
            for i in offsets[q]..offsets[q + 1] {
                if b.get(i) {
                    s += &p.w[i - offsets[q]];
                }
            }
            prod = Some(match prod {
                None => s,
                Some(acc) => acc * &s,
            });
        }
        prod.expect("k >= 3")
    };
    let solve = |a: &Bits, b: &Bits, local: &mut Local<W>| {
        if a.is_empty() {
            return;
        }
        let sub_parts: Vec<KPart<W>> = parts[1..]
            .iter()
            .enumerate()
            .map(|(q, p)| {
                let idx: Vec<usize> = (0..p.keys.len()).filter(|&i| b.get(offsets[q] + i)).collect();
                KPart {
                    keys: idx.iter().map(|&i| p.keys[i]).collect(),
                    w: idx.iter().map(|&i| p.w[i].clone()).collect(),
                    orig: idx.iter().map(|&i| p.orig[i]).collect(),
                }
            })
            .collect();
        let wa = sum_bits(&first.w, a);
        let mut sub = Local::new(W::zero(), cap);
        k_concept(&sub_parts, t, cap, &mut sub);
        local.nodes += sub.nodes;
        if sub.found.is_empty() {
            return;
        }
        let v = wa * &sub.best;
        let head: Vec<usize> = a.ones_iter().map(|i| first.orig[i]).collect();
        let before = local.best.clone();
        for f in sub.found {
            local.record(v.clone(), || {
                let mut parts = vec![head.clone()];
                parts.extend(f);
                parts
            });
        }
        if local.best == v && (before <= v) {
            local.truncated |= sub.truncated;
        }
    };
    fn walk<W: Acc>(
        rel: &CompatRelation,
        first_w: &[W],
        suffix: &[W],
        rest_bound: &dyn Fn(&Bits) -> W,
        solve: &dyn Fn(&Bits, &Bits, &mut Local<W>),
        a: &Bits,
        b: &Bits,
        next: usize,
        local: &mut Local<W>,
    ) {
        for j in next..first_w.len() {
            if a.get(j) {
                continue;
            }
            let b2 = b.and(&rel.rows[j]);
            let mut left = suffix[j].clone();
            for i in a.ones_iter().take_while(|&i| i < j) {
                left += &first_w[i];
            }
            if b2.is_empty() || left * &rest_bound(&b2) < local.best {
                continue;
            }
            local.nodes += 1;
            let a2 = rel.extent(&b2);
            if !a2.eq_below(a, j) {
                continue;
            }
            solve(&a2, &b2, local);
            walk(rel, first_w, suffix, rest_bound, solve, &a2, &b2, j + 1, local);
        }
    }
    let b0 = Bits::ones(rest.len());
    let a0 = rel.extent(&b0);
    local.nodes += 1;
    solve(&a0, &b0, local);
    walk(&rel, &first.w, &suffix, &rest_bound, &solve, &a0, &b0, 0, local);
}

/// Brute-force k-family search; found parts hold caller indices.
fn k_brute<W: Acc>(parts: &[KPart<W>], t: usize, chosen: &mut Vec<Vec<usize>>, acc: &W, local: &mut Local<W>) {
    let depth = chosen.len();
    let k = parts.len();
    let p = &parts[depth];
    if depth == k - 1 {
        // close the last family
        local.nodes += 1;
        let idx: Vec<usize> = (0..p.keys.len()).collect();
        if idx.is_empty() {
            return;
        }
        let v = acc.clone() * &total(&p.w);
        local.record(v, || {
            let mut out = chosen.clone();
            out.push(p.orig.clone());
            out
        });
        return;
    }
    let n = p.keys.len();
    for mask in 1u64..(1 << n) {
        local.nodes += 1;
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let picked: Vec<u64> = idx.iter().map(|&i| p.keys[i]).collect();
        let mut wsum = W::zero();
        for &i in &idx {
            wsum += &p.w[i];
        }
        // later families shrink to the part compatible with this choice
        let mut next_parts: Vec<KPart<W>> = parts[..=depth].to_vec();
        for q in &parts[depth + 1..] {
            next_parts.push(restrict(q, |key| meets_all(key, &picked, t)));
        }
        if next_parts[depth + 1..].iter().any(|q| q.keys.is_empty()) {
            continue;
        }
        chosen.push(idx.iter().map(|&i| p.orig[i]).collect());
        let nacc = acc.clone() * &wsum;
        k_brute(&next_parts, t, chosen, &nacc, local);
        chosen.pop();
    }
}

/// Maximum of `Π w_i(A_i)` over cross-`t`-intersecting `A_i ⊆ F_i`, keys given per family.
pub fn k_family_search_keys(
    keys: &[Vec<u64>],
    t: usize,
    weights: &[Vec<Ratio>],
    method: KMethod,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    let k = keys.len();
    if !(2..=4).contains(&k) {
        return param(format!("k-family search supports 2 <= k <= 4 families, got {k}"));
    }
    if weights.len() != k || keys.iter().zip(weights).any(|(f, w)| f.len() != w.len()) {
        return param("weight lists must match the families");
    }
    for w in weights {
        check_positive(w)?;
    }
    if method == KMethod::BruteForce {
        for f in &keys[..k - 1] {
            cap_check(f.len(), opts.brute_force_cap)?;
        }
    }
    let scaled: Vec<Scaled> = weights.iter().map(|w| scale(w)).collect();
    let den: BigInt = scaled.iter().map(|s| s.den.clone()).product();
    let build = |ws: Vec<Vec<BigInt>>| -> Vec<KPart<BigInt>> {
        keys.iter()
            .zip(ws)
            .map(|(kk, w)| KPart { keys: kk.clone(), w, orig: (0..kk.len()).collect() })
            .collect()
    };
    let run = |parts: &[KPart<BigInt>]| -> Local<BigInt> {
        let mut local = Local::new(BigInt::zero(), usize::MAX);
        match method {
            KMethod::Concept => k_concept(parts, t, usize::MAX, &mut local),
            KMethod::BruteForce => k_brute(parts, t, &mut Vec::new(), &BigInt::one(), &mut local),
        }
        merge(vec![local], opts.report_cap)
    };
    let local = if fits_u128(&scaled.iter().collect::<Vec<_>>()) {
        let parts: Vec<KPart<u128>> = keys
            .iter()
            .zip(&scaled)
            .map(|(kk, s)| KPart { keys: kk.clone(), w: to_u128(s), orig: (0..kk.len()).collect() })
            .collect();
        let mut local = Local::new(0u128, usize::MAX);
        match method {
            KMethod::Concept => k_concept(&parts, t, usize::MAX, &mut local),
            KMethod::BruteForce => k_brute(&parts, t, &mut Vec::new(), &1u128, &mut local),
        }
        let l = merge(vec![local], opts.report_cap);
        Local { best: l.best.to_big(), found: l.found, truncated: l.truncated, nodes: l.nodes, cap: l.cap }
    } else {
        run(&build(scaled.iter().map(|s| s.ints.clone()).collect()))
    };
    let m = match method {
        KMethod::Concept => Method::Concept,
        KMethod::BruteForce => Method::BruteForce,
    };
    Ok(finish(local, den, m))
}

pub fn k_family_search(fams: &[&Family], t: usize, weights: &[&WeightFn], method: KMethod) -> Result<SearchReport> {
    k_family_search_with(fams, t, weights, method, &SearchOptions::default())
}

pub fn k_family_search_with(
    fams: &[&Family],
    t: usize,
    weights: &[&WeightFn],
    method: KMethod,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    if fams.len() != weights.len() {
        return param("need one weight function per family");
    }
    let keys: Vec<Vec<u64>> = fams.iter().map(|f| family_keys(f)).collect();
    let ws = fams.iter().zip(weights).map(|(f, w)| weights_for(f, w)).collect::<Result<Vec<_>>>()?;
    k_family_search_keys(&keys, t, &ws, method, opts)
}

/// Pairs `(A, B)` with `A` and `B` both closed and cross-`t`-intersecting.
pub fn is_closed_pair(rel: &CompatRelation, left: &[usize], right: &[usize]) -> bool {
    rel.compat_indices(left, Side::Left) == right && rel.compat_indices(right, Side::Right) == left
}
