//! Subsets of a small ground set `[n]` as machine words, and ordered families of them.
//!
//! Elements are 1-based: element `i` lives in bit `i`, bit 0 is never set.
//! Families keep their members sorted by numeric bitmask and free of duplicates.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{parse_ratio, Ratio};
use crate::error::{param, Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND: usize = 62;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SetBits {
    bits: u64,
    ground: u8,
}

fn ground_mask(n: usize) -> u64 {
    // bits 1..=n
    if n == 0 {
        0
    } else {
        ((1u64 << n) - 1) << 1
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_GROUND {
        return param(format!("ground size {n} exceeds the cap of {MAX_GROUND}"));
    }
    Ok(())
}

impl SetBits {
    pub fn new(ground: usize, elems: &[usize]) -> Result<Self> {
        check_ground(ground)?;
        let mut bits = 0u64;
        for &e in elems {
            if e == 0 || e > ground {
                return param(format!("element {e} outside ground set [{ground}]"));
            }
            bits |= 1 << e;
        }
        Ok(SetBits { bits, ground: ground as u8 })
    }

    pub fn from_bits(ground: usize, bits: u64) -> Result<Self> {
        check_ground(ground)?;
        if bits & !ground_mask(ground) != 0 {
            return param(format!("bitmask {bits:#x} has bits outside [{ground}]"));
        }
        Ok(SetBits { bits, ground: ground as u8 })
    }

    pub(crate) fn from_bits_unchecked(ground: usize, bits: u64) -> Self {
        debug_assert!(bits & !ground_mask(ground) == 0);
        SetBits { bits, ground: ground as u8 }
    }

    pub fn empty(ground: usize) -> Result<Self> {
        Self::from_bits(ground, 0)
    }

    /// The interval `[lo, hi]`; empty when `lo > hi`.
    pub fn interval(ground: usize, lo: usize, hi: usize) -> Result<Self> {
        let elems: Vec<usize> = (lo.max(1)..=hi).collect();
        Self::new(ground, &elems)
    }

    /// `[k] = {1, ..., k}`.
    pub fn prefix(ground: usize, k: usize) -> Result<Self> {
        Self::interval(ground, 1, k)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn ground(&self) -> usize {
        self.ground as usize
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, e: usize) -> bool {
        e <= MAX_GROUND && self.bits & (1 << e) != 0
    }

    pub fn elements(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut b = self.bits;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }

    pub fn is_subset(&self, other: &SetBits) -> bool {
        self.bits & !other.bits == 0
    }

    /// `|A ∩ B|`, computed on common positions.
    pub fn meet(&self, other: &SetBits) -> usize {
        (self.bits & other.bits).count_ones() as usize
    }

    pub fn t_intersects(&self, other: &SetBits, t: usize) -> bool {
        self.meet(other) >= t
    }

    pub fn with(&self, e: usize) -> SetBits {
        SetBits { bits: self.bits | (1 << e), ground: self.ground }
    }

    pub fn without(&self, e: usize) -> SetBits {
        SetBits { bits: self.bits & !(1 << e), ground: self.ground }
    }

    pub fn intersect(&self, other: &SetBits) -> SetBits {
        SetBits { bits: self.bits & other.bits, ground: self.ground }
    }

    /// Same elements viewed in a different ground set.
    pub fn regrounded(&self, ground: usize) -> Result<SetBits> {
        Self::from_bits(ground, self.bits)
    }

    /// Sum of the elements, the potential used for compression termination.
    pub fn element_sum(&self) -> u64 {
        self.elements().iter().map(|&e| e as u64).sum()
    }
}

impl PartialOrd for SetBits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SetBits {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits).then(self.ground.cmp(&other.ground))
    }
}

impl fmt::Debug for SetBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, e) in self.elements().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Ordered, duplicate-free collection of subsets of one ground set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Family {
    ground: usize,
    members: Vec<SetBits>,
}

impl Family {
    /// Builds a family; members are sorted canonically and duplicates merged.
    pub fn new(ground: usize, sets: impl IntoIterator<Item = SetBits>) -> Result<Self> {
        check_ground(ground)?;
        let mut members = Vec::new();
        for s in sets {
            if s.ground() != ground {
                return param(format!(
                    "member {s:?} has ground {} but the family has ground {ground}",
                    s.ground()
                ));
            }
            members.push(s);
        }
        members.sort_unstable();
        members.dedup();
        Ok(Family { ground, members })
    }

    pub fn from_lists(ground: usize, lists: &[&[usize]]) -> Result<Self> {
        let sets = lists
            .iter()
            .map(|l| SetBits::new(ground, l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ground, sets)
    }

    pub fn empty(ground: usize) -> Result<Self> {
        Self::new(ground, [])
    }

    pub(crate) fn from_sorted_unchecked(ground: usize, members: Vec<SetBits>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { ground, members }
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn members(&self) -> &[SetBits] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SetBits> {
        self.members.iter()
    }

    pub fn index_of(&self, s: &SetBits) -> Option<usize> {
        self.members.binary_search(s).ok()
    }

    pub fn contains(&self, s: &SetBits) -> bool {
        self.index_of(s).is_some()
    }

    pub fn contains_bits(&self, bits: u64) -> bool {
        self.members.binary_search_by(|m| m.bits.cmp(&bits)).is_ok()
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    pub fn filter(&self, pred: impl Fn(&SetBits) -> bool) -> Family {
        let members = self.members.iter().copied().filter(|m| pred(m)).collect();
        Family::from_sorted_unchecked(self.ground, members)
    }

    /// The members selected by `indices` (which must be valid positions).
    pub fn select(&self, indices: &[usize]) -> Family {
        let mut members: Vec<SetBits> = indices.iter().map(|&i| self.members[i]).collect();
        members.sort_unstable();
        members.dedup();
        Family::from_sorted_unchecked(self.ground, members)
    }

    pub fn lists(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|m| m.elements()).collect()
    }

    /// Writes the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("ground {}\n", self.ground);
        for m in &self.members {
            if m.is_empty() {
                out.push('-');
            } else {
                let parts: Vec<String> = m.elements().iter().map(|e| e.to_string()).collect();
                out.push_str(&parts.join(" "));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the line-oriented text format: a `ground N` header, one set per
    /// line as ascending integers, `-` for the empty set, `#` comments.
    pub fn from_text(text: &str) -> Result<Family> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut ground: Option<usize> = None;
        let mut members = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                return Err(perr(line_no, "blank line (write the empty set as \"-\")".into()));
            }
            let Some(n) = ground else {
                let rest = line
                    .strip_prefix("ground")
                    .ok_or_else(|| perr(line_no, "expected header \"ground N\"".into()))?;
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| perr(line_no, format!("bad ground size {:?}", rest.trim())))?;
                check_ground(n).map_err(|e| perr(line_no, e.to_string()))?;
                ground = Some(n);
                continue;
            };
            let set = if line == "-" {
                SetBits::from_bits_unchecked(n, 0)
            } else {
                let mut elems = Vec::new();
                for tok in line.split_whitespace() {
                    let e: usize = tok
                        .parse()
                        .map_err(|_| perr(line_no, format!("bad element {tok:?}")))?;
                    if let Some(&prev) = elems.last() {
                        if e <= prev {
                            return Err(perr(line_no, "elements must be strictly ascending".into()));
                        }
                    }
                    elems.push(e);
                }
                SetBits::new(n, &elems).map_err(|e| perr(line_no, e.to_string()))?
            };
            members.push((line_no, set));
        }
        let n = ground.ok_or_else(|| perr(1, "missing \"ground N\" header".into()))?;
        let mut seen = std::collections::HashSet::new();
        for (line_no, s) in &members {
            if !seen.insert(s.bits) {
                return Err(perr(*line_no, format!("duplicate set {s:?}")));
            }
        }
        Family::new(n, members.into_iter().map(|(_, s)| s))
    }

    /// Canonical compact JSON `{"ground":n,"sets":[[...],...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&FamilyJson { ground: self.ground, sets: self.lists() })
            .expect("family json")
    }

    pub fn from_json(text: &str) -> Result<Family> {
        let raw: FamilyJson = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        raw.try_into()
    }

    /// Reads either format, choosing JSON when the first non-blank byte is `{`.
    pub fn parse_any(text: &str) -> Result<Family> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.ground)?;
        f.debug_list().entries(self.members.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a Family {
    type Item = &'a SetBits;
    type IntoIter = std::slice::Iter<'a, SetBits>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[derive(Serialize, Deserialize)]
pub struct FamilyJson {
    pub ground: usize,
    pub sets: Vec<Vec<usize>>,
}

impl TryFrom<FamilyJson> for Family {
    type Error = Error;
    fn try_from(raw: FamilyJson) -> Result<Family> {
        let sets = raw
            .sets
            .iter()
            .map(|l| SetBits::new(raw.ground, l))
            .collect::<Result<Vec<_>>>()?;
        let fam = Family::new(raw.ground, sets)?;
        if fam.len() != raw.sets.len() {
            return Err(Error::Parse { line: 1, msg: "duplicate sets in family".into() });
        }
        Ok(fam)
    }
}

/// The intersection parameters `t >= 1` and `u >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionParams {
    pub t: usize,
    #[serde(with = "crate::arith::ratio_str")]
    pub u: Ratio,
}

impl IntersectionParams {
    pub fn new(t: usize, u: Ratio) -> Result<Self> {
        if t == 0 {
            return param("t must be at least 1");
        }
        if u < Ratio::from_integer(0.into()) {
            return param(format!("u must be non-negative, got {u}"));
        }
        Ok(IntersectionParams { t, u })
    }

    pub fn parse(t: usize, u: &str) -> Result<Self> {
        Self::new(t, parse_ratio(u)?)
    }

    /// `t + u` as an exact rational.
    pub fn t_plus_u(&self) -> Ratio {
        Ratio::from_integer((self.t as i64).into()) + &self.u
    }

    /// Whether `u > (6 - t) / 3`, the regime in which the weighted bound is proven.
    pub fn in_proven_regime(&self) -> bool {
        let lhs = &self.u * Ratio::from_integer(3.into());
        lhs > Ratio::from_integer((6 - self.t as i64).into())
    }
}

fn check_nr(n: usize, r: usize) -> Result<()> {
    check_ground(n)?;
    if r > n {
        return param(format!("r = {r} exceeds n = {n}"));
    }
    Ok(())
}

/// Next larger integer with the same popcount (Gosper's hack).
fn next_same_popcount(v: u64) -> Option<u64> {
    let c = v & v.wrapping_neg();
    let r = v.checked_add(c)?;
    Some((((r ^ v) >> 2) / c) | r)
}

fn k_subset_masks(n: usize, r: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if r == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u64 << n;
    let mut v = (1u64 << r) - 1;
    while v < limit {
        out.push(v << 1);
        match next_same_popcount(v) {
            Some(next) => v = next,
            None => break,
        }
    }
    out
}

/// All `r`-subsets of `[n]`.
pub fn gen_k_subsets(n: usize, r: usize) -> Result<Family> {
    check_nr(n, r)?;
    let members = k_subset_masks(n, r)
        .into_iter()
        .map(|b| SetBits::from_bits_unchecked(n, b))
        .collect();
    Ok(Family::from_sorted_unchecked(n, members))
}

/// All subsets of `[n]` with at most `r` elements (`2^[n]` when `r = n`).
pub fn gen_upto_r(n: usize, r: usize) -> Result<Family> {
    check_nr(n, r)?;
    let mut members: Vec<SetBits> = (0..=r)
        .flat_map(|k| k_subset_masks(n, k))
        .map(|b| SetBits::from_bits_unchecked(n, b))
        .collect();
    members.sort_unstable();
    Ok(Family::from_sorted_unchecked(n, members))
}

pub fn power_set(n: usize) -> Result<Family> {
    gen_upto_r(n, n)
}

/// `F(T) = {F in fam : T ⊆ F}`.
pub fn t_star(fam: &Family, t_set: &SetBits) -> Result<Family> {
    if t_set.ground() != fam.ground() {
        return param(format!(
            "star centre has ground {} but the family has ground {}",
            t_set.ground(),
            fam.ground()
        ));
    }
    Ok(fam.filter(|f| t_set.is_subset(f)))
}

/// Every member of one family `t`-intersects every member of each other family.
pub fn is_cross_t_intersecting(fams: &[Family], t: usize) -> bool {
    cross_t_witness(fams, t).is_none()
}

/// First violating `(i, A, j, B)` in canonical scan order, if any.
pub fn cross_t_witness(fams: &[Family], t: usize) -> Option<(usize, SetBits, usize, SetBits)> {
    for i in 0..fams.len() {
        for j in (i + 1)..fams.len() {
            for a in &fams[i] {
                for b in &fams[j] {
                    if !a.t_intersects(b, t) {
                        return Some((i, *a, j, *b));
                    }
                }
            }
        }
    }
    None
}

/// Every two members, a member with itself included, share at least `t` elements.
pub fn is_t_intersecting(fam: &Family, t: usize) -> bool {
    let m = fam.members();
    (0..m.len()).all(|i| (i..m.len()).all(|j| m[i].t_intersects(&m[j], t)))
}

/// Closed under taking subsets.
pub fn is_hereditary(fam: &Family) -> bool {
    fam.iter().all(|f| f.elements().into_iter().all(|e| fam.contains(&f.without(e))))
}

/// Invariant under every left-compression: `(F \ {j}) ∪ {i}` is a member
/// whenever `i < j`, `j ∈ F` and `i ∉ F`.
pub fn is_compressed(fam: &Family) -> bool {
    fam.iter().all(|f| {
        f.elements().into_iter().all(|j| {
            (1..j).all(|i| f.contains(i) || fam.contains(&f.without(j).with(i)))
        })
    })
}

/// `{A ∈ C([n], r) : |A ∩ [t+i+j]| >= t+i}`.
pub fn frankl_family(n: usize, r: usize, t: usize, i: usize, j: usize) -> Result<Family> {
    if !(1 <= t && t <= r && r <= n) {
        return param(format!("need 1 <= t <= r <= n, got t={t} r={r} n={n}"));
    }
    if t + i + j > n {
        return param(format!("need t+i+j <= n, got {} > {n}", t + i + j));
    }
    let window = SetBits::prefix(n, t + i + j)?;
    Ok(gen_k_subsets(n, r)?.filter(|a| a.meet(&window) >= t + i))
}
