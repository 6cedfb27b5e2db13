//! Multisets over `[n]` as non-decreasing tuples; intersection is measured
//! on supports.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::binom;
use crate::error::{param, Error, Result};
use crate::setcore::{Family, SetBits, MAX_GROUND};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultisetSeq(Vec<usize>);

impl MultisetSeq {
    /// Entries are sorted on construction.
    pub fn new(n: usize, mut entries: Vec<usize>) -> Result<Self> {
        if let Some(&e) = entries.iter().find(|&&e| e == 0 || e > n) {
            return param(format!("entry {e} outside [{n}]"));
        }
        entries.sort_unstable();
        Ok(MultisetSeq(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiplicity of `e`.
    pub fn count(&self, e: usize) -> usize {
        self.0.iter().filter(|&&x| x == e).count()
    }
}

impl fmt::Debug for MultisetSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// The set of distinct entries.
pub fn support(a: &MultisetSeq, n: usize) -> SetBits {
    SetBits::new(n, &a.0).expect("entries lie in [n]")
}

pub fn multiset_t_intersect(a: &MultisetSeq, b: &MultisetSeq, t: usize) -> bool {
    let n = a.0.iter().chain(&b.0).copied().max().unwrap_or(0);
    support(a, n).t_intersects(&support(b, n), t)
}

fn check_nr(n: usize, r: usize) -> Result<()> {
    if n < 1 || r < 1 {
        return param(format!("need n, r >= 1, got n={n} r={r}"));
    }
    if n > MAX_GROUND {
        return param(format!("n = {n} exceeds the ground cap {MAX_GROUND}"));
    }
    Ok(())
}

/// All `C(n+r-1, r)` members of `M_{n,r}` in lexicographic order.
pub fn gen_multisets(n: usize, r: usize) -> Result<Vec<MultisetSeq>> {
    check_nr(n, r)?;
    let mut out = Vec::new();
    let mut cur = vec![1usize; r];
    loop {
        out.push(MultisetSeq(cur.clone()));
        // rightmost entry that can grow
        let Some(k) = (0..r).rev().find(|&k| cur[k] < n) else {
            return Ok(out);
        };
        let v = cur[k] + 1;
        for e in &mut cur[k..] {
            *e = v;
        }
    }
}

/// Number of members of `M_{n,r}` with support exactly `s`.
pub fn count_with_support(r: usize, s: &SetBits) -> BigInt {
    if s.is_empty() {
        return BigInt::zero();
    }
    binom(r as i64 - 1, s.len() as i64 - 1)
}

/// `|{A ∈ M_{n,r} : S_A ∈ supports}|`.
pub fn count_with_supports(n: usize, r: usize, supports: &Family) -> Result<BigInt> {
    if supports.ground() != n {
        return param(format!("supports have ground {} but n = {n}", supports.ground()));
    }
    Ok(supports.iter().map(|s| count_with_support(r, s)).sum())
}

/// `|{A ∈ M_{n,r} : T ⊆ S_A}|` for `|T| = t`.
pub fn star_count(n: usize, r: usize, t: usize) -> BigInt {
    binom((n + r) as i64 - t as i64 - 1, r as i64 - t as i64)
}

/// `{A ∈ M_{n,r} : |S_A ∩ [t+i+j]| >= t+i}`.
pub fn multiset_frankl_family(n: usize, r: usize, t: usize, i: usize, j: usize) -> Result<MultisetFamily> {
    if t + i + j > n {
        return param(format!("need t+i+j <= n, got {} > {n}", t + i + j));
    }
    let window = SetBits::prefix(n, t + i + j)?;
    let members = gen_multisets(n, r)?
        .into_iter()
        .filter(|a| support(a, n).meet(&window) >= t + i)
        .collect();
    MultisetFamily::new(n, r, members)
}

/// Closed form for `|multiset_frankl_family(n, r, t, i, j)|`.
pub fn multiset_frankl_count(n: usize, r: usize, t: usize, i: usize, j: usize) -> BigInt {
    let w = (t + i + j) as i64;
    let (n, r) = (n as i64, r as i64);
    ((t + i) as i64..=w.min(r))
        .map(|k| binom(w, k) * binom(n - w + r - 1, r - k))
        .sum()
}

/// Sorted, duplicate-free members of `M_{n,r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MultisetFamilyJson", into = "MultisetFamilyJson")]
pub struct MultisetFamily {
    n: usize,
    r: usize,
    members: Vec<MultisetSeq>,
}

#[derive(Serialize, Deserialize)]
struct MultisetFamilyJson {
    n: usize,
    r: usize,
    members: Vec<Vec<usize>>,
}

impl TryFrom<MultisetFamilyJson> for MultisetFamily {
    type Error = Error;
    fn try_from(raw: MultisetFamilyJson) -> Result<Self> {
        let members = raw
            .members
            .into_iter()
            .map(|m| {
                if m.windows(2).any(|w| w[0] > w[1]) {
                    return param(format!("multiset {m:?} is not sorted"));
                }
                MultisetSeq::new(raw.n, m)
            })
            .collect::<Result<Vec<_>>>()?;
        MultisetFamily::new(raw.n, raw.r, members)
    }
}

impl From<MultisetFamily> for MultisetFamilyJson {
    fn from(f: MultisetFamily) -> Self {
        MultisetFamilyJson { n: f.n, r: f.r, members: f.members.into_iter().map(|m| m.0).collect() }
    }
}

impl MultisetFamily {
    pub fn new(n: usize, r: usize, mut members: Vec<MultisetSeq>) -> Result<Self> {
        check_nr(n, r)?;
        for m in &members {
            if m.len() != r {
                return param(format!("{m:?} does not have {r} entries"));
            }
            if m.0.iter().any(|&e| e > n) {
                return param(format!("{m:?} has entries outside [{n}]"));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(MultisetFamily { n, r, members })
    }

    pub fn all(n: usize, r: usize) -> Result<Self> {
        Ok(MultisetFamily { n, r, members: gen_multisets(n, r)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn members(&self) -> &[MultisetSeq] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> MultisetFamily {
        let members = indices.iter().map(|&k| self.members[k].clone()).collect();
        MultisetFamily::new(self.n, self.r, members).expect("subfamily of a valid family")
    }

    /// Supports of the members, one per member and in member order.
    pub fn supports(&self) -> Vec<SetBits> {
        self.members.iter().map(|m| support(m, self.n)).collect()
    }

    /// Members whose support contains `centre`.
    pub fn star(&self, centre: &SetBits) -> MultisetFamily {
        let members = self
            .members
            .iter()
            .filter(|m| centre.is_subset(&support(m, self.n)))
            .cloned()
            .collect();
        MultisetFamily { n: self.n, r: self.r, members }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("multiset family json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

pub fn is_multiset_cross_t_intersecting(a: &MultisetFamily, b: &MultisetFamily, t: usize) -> bool {
    let sb = b.supports();
    a.supports().iter().all(|x| sb.iter().all(|y| x.meet(y) >= t))
}
