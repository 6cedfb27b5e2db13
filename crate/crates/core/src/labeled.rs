//! Labeled sets `{(x, y)}` with distinct positions, the families `S_{c,r}`
//! of an IP sequence `c`, the value compression `Γ_{x,y}` and the projection
//! of labeled families onto plain sets of first-level positions.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{from_bigint, Ratio};
use crate::error::{param, Error, Result};
use crate::setcore::{gen_upto_r, Family, SetBits, MAX_GROUND};
use crate::weights::WeightFn;

/// An increasing positive sequence of capacities `1 <= c_1 <= ... <= c_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IpSequence(Vec<usize>);

impl IpSequence {
    pub fn new(caps: Vec<usize>) -> Result<Self> {
        if caps.is_empty() {
            return param("IP sequence must be non-empty");
        }
        if caps[0] < 1 {
            return param("IP sequence entries must be positive");
        }
        if caps.windows(2).any(|w| w[0] > w[1]) {
            return param(format!("IP sequence {caps:?} is not increasing"));
        }
        Ok(IpSequence(caps))
    }

    pub fn constant(n: usize, c: usize) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `c_x` for a 1-based position.
    pub fn cap(&self, x: usize) -> usize {
        self.0[x - 1]
    }

    pub fn caps(&self) -> &[usize] {
        &self.0
    }

    pub fn max_cap(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }
}

impl TryFrom<Vec<usize>> for IpSequence {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        IpSequence::new(v)
    }
}

impl From<IpSequence> for Vec<usize> {
    fn from(c: IpSequence) -> Vec<usize> {
        c.0
    }
}

/// A set of position/value pairs with pairwise distinct positions, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct LabeledSet(Vec<(usize, usize)>);

impl LabeledSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return param(format!("labeled set {pairs:?} repeats a position"));
        }
        if pairs.iter().any(|&(x, y)| x == 0 || y == 0) {
            return param("positions and values are 1-based");
        }
        Ok(LabeledSet(pairs))
    }

    pub fn empty() -> Self {
        LabeledSet(Vec::new())
    }

    /// `[t] × [1]`.
    pub fn first_level(t: usize) -> Self {
        LabeledSet((1..=t).map(|x| (x, 1)).collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.0.binary_search(&pair).is_ok()
    }

    pub fn is_subset(&self, other: &LabeledSet) -> bool {
        self.0.iter().all(|&p| other.contains(p))
    }

    /// Number of common pairs.
    pub fn meet(&self, other: &LabeledSet) -> usize {
        self.0.iter().filter(|&&p| other.contains(p)).count()
    }

    pub fn is_valid_for(&self, caps: &IpSequence) -> bool {
        self.0.iter().all(|&(x, y)| x <= caps.len() && y <= caps.cap(x))
    }

    /// Positions carrying value 1.
    pub fn first_level_support(&self, ground: usize) -> Result<SetBits> {
        let xs: Vec<usize> = self.0.iter().filter(|p| p.1 == 1).map(|p| p.0).collect();
        SetBits::new(ground, &xs)
    }

    /// The partial-sequence view: entry `x` is the value at position `x`, 0 if absent.
    pub fn as_partial_sequence(&self, n: usize) -> Vec<usize> {
        let mut seq = vec![0; n];
        for &(x, y) in &self.0 {
            if x <= n {
                seq[x - 1] = y;
            }
        }
        seq
    }
}

impl TryFrom<Vec<(usize, usize)>> for LabeledSet {
    type Error = Error;
    fn try_from(v: Vec<(usize, usize)>) -> Result<Self> {
        LabeledSet::new(v)
    }
}

impl From<LabeledSet> for Vec<(usize, usize)> {
    fn from(s: LabeledSet) -> Self {
        s.0
    }
}

impl fmt::Debug for LabeledSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (x, y)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({x},{y})")?;
        }
        write!(f, "}}")
    }
}

/// Canonically ordered, duplicate-free labeled sets valid against `caps`,
/// each with at most `r` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LabeledFamilyJson", into = "LabeledFamilyJson")]
pub struct LabeledFamily {
    caps: IpSequence,
    r: usize,
    members: Vec<LabeledSet>,
}

#[derive(Serialize, Deserialize)]
struct LabeledFamilyJson {
    caps: IpSequence,
    r: usize,
    members: Vec<LabeledSet>,
}

impl TryFrom<LabeledFamilyJson> for LabeledFamily {
    type Error = Error;
    fn try_from(raw: LabeledFamilyJson) -> Result<Self> {
        LabeledFamily::new(raw.caps, raw.r, raw.members)
    }
}

impl From<LabeledFamily> for LabeledFamilyJson {
    fn from(f: LabeledFamily) -> Self {
        LabeledFamilyJson { caps: f.caps, r: f.r, members: f.members }
    }
}

impl LabeledFamily {
    pub fn new(caps: IpSequence, r: usize, mut members: Vec<LabeledSet>) -> Result<Self> {
        for m in &members {
            if !m.is_valid_for(&caps) {
                return param(format!("{m:?} is not valid for caps {:?}", caps.caps()));
            }
            if m.len() > r {
                return param(format!("{m:?} has more than {r} pairs"));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(LabeledFamily { caps, r, members })
    }

    fn with_members(&self, members: Vec<LabeledSet>) -> Self {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        LabeledFamily { caps: self.caps.clone(), r: self.r, members }
    }

    pub fn caps(&self) -> &IpSequence {
        &self.caps
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn members(&self) -> &[LabeledSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &LabeledSet) -> bool {
        self.members.binary_search(s).is_ok()
    }

    pub fn select(&self, indices: &[usize]) -> LabeledFamily {
        self.with_members(indices.iter().map(|&k| self.members[k].clone()).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("labeled family json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

/// All labeled sets of size `r` valid against `caps`.
pub fn gen_labeled(caps: &IpSequence, r: usize) -> Result<LabeledFamily> {
    let n = caps.len();
    if r < 1 || r > n {
        return param(format!("need 1 <= r <= n = {n}, got r = {r}"));
    }
    let mut members = Vec::new();
    let mut positions = Vec::with_capacity(r);
    fn rec(
        caps: &IpSequence,
        r: usize,
        start: usize,
        positions: &mut Vec<usize>,
        out: &mut Vec<LabeledSet>,
    ) {
        if positions.len() == r {
            // every labeling of the chosen positions
            let mut ys = vec![1usize; r];
            loop {
                out.push(LabeledSet(positions.iter().copied().zip(ys.iter().copied()).collect()));
                let mut k = r;
                loop {
                    if k == 0 {
                        return;
                    }
                    k -= 1;
                    if ys[k] < caps.cap(positions[k]) {
                        ys[k] += 1;
                        break;
                    }
                    ys[k] = 1;
                }
            }
        }
        for x in start..=caps.len() {
            positions.push(x);
            rec(caps, r, x + 1, positions, out);
            positions.pop();
        }
    }
    rec(caps, r, 1, &mut positions, &mut members);
    LabeledFamily::new(caps.clone(), r, members)
}

/// Members containing `centre`.
pub fn labeled_star(fam: &LabeledFamily, centre: &LabeledSet) -> LabeledFamily {
    fam.with_members(fam.members.iter().filter(|m| centre.is_subset(m)).cloned().collect())
}

fn check_gamma(y: usize) -> Result<()> {
    if y < 2 {
        return param(format!("Γ_{{x,y}} needs y >= 2, got y = {y}"));
    }
    Ok(())
}

fn gamma_raw(a: &LabeledSet, x: usize, y: usize) -> LabeledSet {
    match a.0.binary_search(&(x, y)) {
        Ok(k) => {
            let mut pairs = a.0.clone();
            pairs[k] = (x, 1);
            LabeledSet(pairs)
        }
        Err(_) => a.clone(),
    }
}

/// `γ_{x,y}(A)`: replace `(x, y)` by `(x, 1)` when present.
pub fn gamma(a: &LabeledSet, x: usize, y: usize) -> Result<LabeledSet> {
    check_gamma(y)?;
    Ok(gamma_raw(a, x, y))
}

fn big_gamma_raw(fam: &LabeledFamily, x: usize, y: usize) -> LabeledFamily {
    let present: HashSet<&LabeledSet> = fam.members.iter().collect();
    let members = fam
        .members
        .iter()
        .map(|m| {
            let img = gamma_raw(m, x, y);
            if present.contains(&img) {
                m.clone()
            } else {
                img
            }
        })
        .collect();
    fam.with_members(members)
}

/// `Γ_{x,y}(F)`, the family-level compression; preserves size.
#[allow(non_snake_case)]
pub fn Gamma(fam: &LabeledFamily, x: usize, y: usize) -> Result<LabeledFamily> {
    check_gamma(y)?;
    Ok(big_gamma_raw(fam, x, y))
}

/// Cross-`t`-intersection of labeled families (common pairs).
pub fn labeled_cross_witness(
    fams: &[LabeledFamily],
    t: usize,
) -> Option<(usize, LabeledSet, usize, LabeledSet)> {
    for i in 0..fams.len() {
        for j in (i + 1)..fams.len() {
            for a in &fams[i].members {
                for b in &fams[j].members {
                    if a.meet(b) < t {
                        return Some((i, a.clone(), j, b.clone()));
                    }
                }
            }
        }
    }
    None
}

pub fn is_labeled_cross_t_intersecting(fams: &[LabeledFamily], t: usize) -> bool {
    labeled_cross_witness(fams, t).is_none()
}

/// `(l, h)`: the longest sequence length and the largest capacity among the families.
pub fn cascade_extent(fams: &[LabeledFamily]) -> (usize, usize) {
    let l = fams.iter().map(|f| f.caps.len()).max().unwrap_or(0);
    let h = fams.iter().map(|f| f.caps.max_cap()).max().unwrap_or(0);
    (l, h)
}

/// The full composition `Γ_{l,h} ∘ … ∘ Γ_{1,2}` applied to every family,
/// positions outermost and values `2..=h` innermost.
pub fn gamma_cascade(fams: &[LabeledFamily], t: usize) -> Result<Vec<LabeledFamily>> {
    if let Some((i, a, j, b)) = labeled_cross_witness(fams, t) {
        return Err(Error::Precondition(format!(
            "labeled families {i} and {j} are not cross-{t}-intersecting: {a:?} and {b:?}"
        )));
    }
    let (l, h) = cascade_extent(fams);
    let mut out = fams.to_vec();
    for x in 1..=l {
        for y in 2..=h {
            out = out.iter().map(|f| big_gamma_raw(f, x, y)).collect();
        }
    }
    Ok(out)
}

/// `|A ∩ B ∩ ([l] × [1])|`.
pub fn first_level_meet(a: &LabeledSet, b: &LabeledSet, l: usize) -> usize {
    a.0.iter().filter(|&&(x, y)| y == 1 && x <= l && b.contains((x, 1))).count()
}

/// Elementary symmetric sum `e_k` of `vals`.
fn elementary_symmetric(vals: &[BigInt], k: usize) -> BigInt {
    let mut e = vec![BigInt::zero(); k + 1];
    e[0] = BigInt::one();
    for v in vals {
        for d in (1..=k).rev() {
            let add = &e[d - 1] * v;
            e[d] += add;
        }
    }
    e[k].clone()
}

/// Number of members of `S_{c,r}` whose first-level positions are exactly `A`:
/// choose the remaining `r - |A|` positions outside `A`, each with a value `>= 2`.
pub fn projection_count(caps: &IpSequence, r: usize, a: &SetBits) -> BigInt {
    if a.len() > r {
        return BigInt::zero();
    }
    let outside: Vec<BigInt> = (1..=caps.len())
        .filter(|x| !a.contains(*x))
        .map(|x| BigInt::from(caps.cap(x) - 1))
        .collect();
    elementary_symmetric(&outside, r - a.len())
}

/// The weight `w(A) = #{L ∈ S_{c,r} : L ∩ ([n] × [1]) = A × [1]}` on `C([n], <= r)`.
///
/// Sets with a zero count (possible only when `c_1 = 1`) are dropped from the
/// domain with a warning, so the result is always a valid positive weight.
pub fn projection_weight(caps: &IpSequence, r: usize) -> Result<WeightFn> {
    let n = caps.len();
    if r > n {
        return param(format!("r = {r} exceeds the sequence length {n}"));
    }
    if n > MAX_GROUND {
        return param(format!("sequence length {n} exceeds the ground cap"));
    }
    let full = gen_upto_r(n, r)?;
    let mut kept = Vec::new();
    let mut values = Vec::new();
    let mut dropped = 0usize;
    for a in &full {
        let v = projection_count(caps, r, a);
        if v.is_zero() {
            dropped += 1;
        } else {
            kept.push(*a);
            values.push(from_bigint(v));
        }
    }
    if dropped > 0 {
        log::warn!(
            "projection weight for caps {:?}, r = {r}: dropped {dropped} zero-count sets from the domain",
            caps.caps()
        );
    }
    WeightFn::from_values(Family::new(n, kept)?, values)
}

/// First-level supports of the members, as a plain family over `[n]`.
pub fn project_to_sets(fam: &LabeledFamily) -> Family {
    let n = fam.caps.len();
    let sets = fam
        .members
        .iter()
        .map(|m| m.first_level_support(n).expect("valid members stay in [n]"));
    Family::new(n, sets).expect("supports share the ground")
}

/// Maps pairs `(x, y)` to ground elements `(x - 1) * stride + y`, so that
/// labeled intersections become plain bitset intersections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairEncoder {
    positions: usize,
    stride: usize,
}

impl PairEncoder {
    pub fn for_families(fams: &[&LabeledFamily]) -> Result<Self> {
        let positions = fams.iter().map(|f| f.caps.len()).max().unwrap_or(0);
        let stride = fams.iter().map(|f| f.caps.max_cap()).max().unwrap_or(0);
        if positions * stride > MAX_GROUND {
            return param(format!(
                "{positions} positions × {stride} values exceeds the {MAX_GROUND}-element ground cap"
            ));
        }
        Ok(PairEncoder { positions, stride })
    }

    pub fn ground(&self) -> usize {
        self.positions * self.stride
    }

    pub fn encode(&self, s: &LabeledSet) -> SetBits {
        let elems: Vec<usize> = s.0.iter().map(|&(x, y)| (x - 1) * self.stride + y).collect();
        SetBits::new(self.ground(), &elems).expect("pair inside the encoder's range")
    }

    pub fn encode_family(&self, fam: &LabeledFamily) -> Vec<SetBits> {
        fam.members.iter().map(|m| self.encode(m)).collect()
    }
}

/// `Σ_{I ∈ C(positions, k)} Π_{i ∈ I} c_i` over the given positions.
pub fn sum_of_products(caps: &IpSequence, positions: impl IntoIterator<Item = usize>, k: usize) -> BigInt {
    let vals: Vec<BigInt> = positions.into_iter().map(|x| BigInt::from(caps.cap(x))).collect();
    if k > vals.len() {
        return BigInt::zero();
    }
    elementary_symmetric(&vals, k)
}

pub fn count_as_ratio(v: usize) -> Ratio {
    Ratio::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{check_condition_a, check_condition_b};
    use crate::IntersectionParams;

    fn ls(pairs: &[(usize, usize)]) -> LabeledSet {
        LabeledSet::new(pairs.to_vec()).unwrap()
    }

    fn caps(c: &[usize]) -> IpSequence {
        IpSequence::new(c.to_vec()).unwrap()
    }

    fn lfam(c: &[usize], r: usize, members: &[&[(usize, usize)]]) -> LabeledFamily {
        LabeledFamily::new(caps(c), r, members.iter().map(|m| ls(m)).collect()).unwrap()
    }

    /// Brute-force oracle: scan every partial sequence.
    fn brute_labeled(c: &IpSequence, r: usize) -> Vec<LabeledSet> {
        let n = c.len();
        let mut out = Vec::new();
        let mut seq = vec![0usize; n];
        loop {
            let pairs: Vec<(usize, usize)> =
                (0..n).filter(|&i| seq[i] > 0).map(|i| (i + 1, seq[i])).collect();
            if pairs.len() == r {
                out.push(LabeledSet::new(pairs).unwrap());
            }
            let mut k = 0;
            loop {
                if k == n {
                    out.sort();
                    return out;
                }
                if seq[k] < c.cap(k + 1) {
                    seq[k] += 1;
                    break;
                }
                seq[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn ip_sequence_validation() {
        assert!(IpSequence::new(vec![]).is_err());
        assert!(IpSequence::new(vec![0, 1]).is_err());
        assert!(IpSequence::new(vec![3, 2]).is_err());
        assert_eq!(caps(&[1, 2, 2]).max_cap(), 2);
        assert!(LabeledSet::new(vec![(1, 1), (1, 2)]).is_err());
    }

    #[test]
    fn gen_examples() {
        assert_eq!(gen_labeled(&caps(&[2, 2]), 1).unwrap().len(), 4);
        assert_eq!(gen_labeled(&caps(&[4, 4, 4]), 2).unwrap().len(), 48);
        let f = gen_labeled(&caps(&[1, 1]), 2).unwrap();
        assert_eq!(f.members(), &[ls(&[(1, 1), (2, 1)])]);
        assert!(gen_labeled(&caps(&[2, 2]), 0).is_err());
        assert!(gen_labeled(&caps(&[2, 2]), 3).is_err());
    }

    #[test]
    fn gen_matches_brute_force_and_count_formula() {
        for c in [vec![1, 2, 3], vec![2, 2, 2, 3], vec![1, 1, 4], vec![3, 3, 3, 3]] {
            let c = caps(&c);
            for r in 1..=c.len() {
                let fam = gen_labeled(&c, r).unwrap();
                assert_eq!(fam.members(), brute_labeled(&c, r).as_slice());
                assert_eq!(BigInt::from(fam.len()), sum_of_products(&c, 1..=c.len(), r));
            }
        }
    }

    #[test]
    fn star_examples() {
        let f = gen_labeled(&caps(&[4, 4, 4]), 2).unwrap();
        assert_eq!(labeled_star(&f, &LabeledSet::first_level(1)).len(), 8);
        assert_eq!(labeled_star(&f, &LabeledSet::empty()), f);
        let g = gen_labeled(&caps(&[2, 2]), 1).unwrap();
        assert_eq!(labeled_star(&g, &ls(&[(1, 2)])).members(), &[ls(&[(1, 2)])]);
    }

    #[test]
    fn first_level_star_size_formula() {
        for c in [vec![2, 3, 3, 4], vec![4, 4, 4], vec![1, 2, 5]] {
            let c = caps(&c);
            let n = c.len();
            for r in 1..=n {
                let fam = gen_labeled(&c, r).unwrap();
                for t in 1..=r {
                    let star = labeled_star(&fam, &LabeledSet::first_level(t));
                    assert_eq!(BigInt::from(star.len()), sum_of_products(&c, t + 1..=n, r - t));
                }
            }
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&ls(&[(1, 2), (2, 1)]), 1, 2).unwrap(), ls(&[(1, 1), (2, 1)]));
        assert_eq!(gamma(&ls(&[(2, 3)]), 1, 2).unwrap(), ls(&[(2, 3)]));
        assert!(gamma(&ls(&[(2, 3)]), 1, 1).is_err());
        let f = lfam(&[2], 1, &[&[(1, 2)], &[(1, 1)]]);
        let g = Gamma(&f, 1, 2).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn cascade_examples() {
        let single = lfam(&[2], 1, &[&[(1, 2)]]);
        let out = gamma_cascade(&[single], 1).unwrap();
        assert_eq!(out[0].members(), &[ls(&[(1, 1)])]);

        let a = lfam(&[2, 2, 2], 2, &[&[(1, 2), (2, 1)]]);
        let b = lfam(&[2, 2, 2], 2, &[&[(1, 2), (3, 1)]]);
        let out = gamma_cascade(&[a, b], 1).unwrap();
        assert_eq!(out[0].members(), &[ls(&[(1, 1), (2, 1)])]);
        assert_eq!(out[1].members(), &[ls(&[(1, 1), (3, 1)])]);
        assert!(first_level_meet(&out[0].members()[0], &out[1].members()[0], 3) >= 1);

        let flat = vec![lfam(&[3, 3], 2, &[&[(1, 1), (2, 1)]]), lfam(&[3, 3], 2, &[&[(1, 1), (2, 3)]])];
        assert_eq!(gamma_cascade(&flat, 1).unwrap()[0], flat[0]);

        let bad = vec![lfam(&[2], 1, &[&[(1, 1)]]), lfam(&[2], 1, &[&[(1, 2)]])];
        assert!(matches!(gamma_cascade(&bad, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn projection_examples() {
        let w = projection_weight(&caps(&[2, 2]), 1).unwrap();
        let s = |e: &[usize]| SetBits::new(2, e).unwrap();
        assert_eq!(w.domain().len(), 3);
        assert_eq!(w.value(&s(&[])).unwrap(), &count_as_ratio(2));
        assert_eq!(w.value(&s(&[1])).unwrap(), &count_as_ratio(1));
        assert_eq!(w.value(&s(&[2])).unwrap(), &count_as_ratio(1));

        let w = projection_weight(&caps(&[1, 1]), 2).unwrap();
        assert_eq!(w.domain().lists(), vec![vec![1, 2]]);
        assert_eq!(w.values(), &[count_as_ratio(1)]);

        let c = caps(&[4, 4, 4]);
        let w = projection_weight(&c, 2).unwrap();
        let star = w.star_weight(&SetBits::new(3, &[1]).unwrap()).unwrap();
        let direct = labeled_star(&gen_labeled(&c, 2).unwrap(), &LabeledSet::first_level(1)).len();
        assert_eq!(star, count_as_ratio(direct));
        assert_eq!(star, count_as_ratio(8));
    }

    #[test]
    fn projection_counts_match_enumeration() {
        for c in [vec![2, 3], vec![2, 2, 3], vec![3, 3, 4, 4], vec![1, 2, 2]] {
            let c = caps(&c);
            let n = c.len();
            for r in 1..=n {
                let fam = gen_labeled(&c, r).unwrap();
                for a in &gen_upto_r(n, r).unwrap() {
                    let direct = fam
                        .members()
                        .iter()
                        .filter(|l| l.first_level_support(n).unwrap() == *a)
                        .count();
                    assert_eq!(projection_count(&c, r, a), BigInt::from(direct));
                }
                let w = projection_weight(&c, r).unwrap();
                assert_eq!(w.total(), count_as_ratio(fam.len()));
            }
        }
    }

    #[test]
    fn projection_weight_hypotheses() {
        let c = caps(&[2, 3]);
        let w = projection_weight(&c, 1).unwrap();
        assert!(check_condition_b(&w).unwrap().holds);
        let p = IntersectionParams::parse(1, "0").unwrap();
        assert!(check_condition_a(&w, &p).holds);
    }

    #[test]
    fn project_examples() {
        let f = lfam(&[3, 3], 2, &[&[(1, 1), (2, 3)]]);
        assert_eq!(project_to_sets(&f).lists(), vec![vec![1]]);
        let f = lfam(&[2], 1, &[&[(1, 2)]]);
        assert_eq!(project_to_sets(&f).lists(), vec![Vec::<usize>::new()]);
        let f = gen_labeled(&caps(&[2, 2]), 1).unwrap();
        assert_eq!(project_to_sets(&f).lists(), vec![vec![], vec![1], vec![2]]);
    }

    #[test]
    fn encoder_preserves_meets() {
        let c = caps(&[2, 3, 3]);
        let f = gen_labeled(&c, 2).unwrap();
        let enc = PairEncoder::for_families(&[&f]).unwrap();
        let keys = enc.encode_family(&f);
        for (a, ka) in f.members().iter().zip(&keys) {
            for (b, kb) in f.members().iter().zip(&keys) {
                assert_eq!(a.meet(b), ka.meet(kb));
            }
        }
        let wide = IpSequence::constant(8, 8).unwrap();
        let g = LabeledFamily::new(wide, 1, vec![]).unwrap();
        assert!(PairEncoder::for_families(&[&g]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = lfam(&[2, 3], 2, &[&[(1, 2), (2, 3)], &[(1, 1)]]);
        let text = f.to_json();
        assert_eq!(text, r#"{"caps":[2,3],"r":2,"members":[[[1,1]],[[1,2],[2,3]]]}"#);
        assert_eq!(LabeledFamily::from_json(&text).unwrap(), f);
        assert!(LabeledFamily::from_json(r#"{"caps":[2],"r":1,"members":[[[1,3]]]}"#).is_err());
        assert_eq!(ls(&[(2, 3)]).as_partial_sequence(3), vec![0, 3, 0]);
    }
}
