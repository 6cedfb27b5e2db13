//! Exact positive weight functions on families, the two weight hypotheses
//! (geometric decay along inclusions, monotonicity under left-compression),
//! and total / star weights.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{binom, format_ratio, from_bigint, ratio_str, Ratio};
use crate::error::{param, Error, Result};
use crate::setcore::{t_star, Family, IntersectionParams, SetBits};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitEntry {
    pub set: Vec<usize>,
    #[serde(with = "ratio_str")]
    pub w: Ratio,
}

/// Constructors for the weight families used throughout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Uniform,
    /// `p^{|A|} (1-p)^{n-|A|}`, `0 < p < 1`.
    ProductMeasure {
        #[serde(with = "ratio_str")]
        p: Ratio,
    },
    /// `x^{n-|A|}`, `x > 0`.
    Geometric {
        #[serde(with = "ratio_str")]
        x: Ratio,
    },
    /// `C(m - p, r - |G|)` on subsets of the window `[p]`.
    BinomialCompletion { m: usize, r: usize, p_window: usize },
    /// `C(m + r - p - 1, r - |G|)` on subsets of the window `[p]`.
    MultisetCompletion { m: usize, r: usize, p_window: usize },
    Explicit { values: Vec<ExplicitEntry> },
}

impl WeightSpec {
    pub fn from_json(text: &str) -> Result<WeightSpec> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight spec json")
    }
}

/// A total map from a family's members to positive rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFn {
    domain: Family,
    values: Vec<Ratio>,
}

impl WeightFn {
    /// `values[k]` is the weight of `domain.members()[k]`; all must be positive.
    pub fn from_values(domain: Family, values: Vec<Ratio>) -> Result<WeightFn> {
        if values.len() != domain.len() {
            return param(format!(
                "{} weights for a family of {} members",
                values.len(),
                domain.len()
            ));
        }
        for (m, v) in domain.iter().zip(&values) {
            if !v.is_positive() {
                return Err(Error::Weight(format!(
                    "member {m:?} would get non-positive weight {}",
                    format_ratio(v)
                )));
            }
        }
        Ok(WeightFn { domain, values })
    }

    pub fn uniform(domain: Family) -> WeightFn {
        let values = vec![Ratio::one(); domain.len()];
        WeightFn { domain, values }
    }

    pub fn domain(&self) -> &Family {
        &self.domain
    }

    pub fn values(&self) -> &[Ratio] {
        &self.values
    }

    pub fn value(&self, s: &SetBits) -> Option<&Ratio> {
        self.domain.index_of(s).map(|k| &self.values[k])
    }

    pub fn value_at(&self, k: usize) -> &Ratio {
        &self.values[k]
    }

    /// `w(sub)`; zero for the empty subfamily.
    pub fn total_weight(&self, sub: &Family) -> Result<Ratio> {
        let mut acc = Ratio::zero();
        for m in sub {
            match self.value(m) {
                Some(v) => acc += v,
                None => return param(format!("{m:?} is not in the weight's domain")),
            }
        }
        Ok(acc)
    }

    pub fn total(&self) -> Ratio {
        self.values.iter().fold(Ratio::zero(), |a, v| a + v)
    }

    /// `w(D(T))` for the domain `D`.
    pub fn star_weight(&self, centre: &SetBits) -> Result<Ratio> {
        self.total_weight(&t_star(&self.domain, centre)?)
    }

    /// Sum of weights at member positions `indices`.
    pub fn sum_indices(&self, indices: &[usize]) -> Ratio {
        indices.iter().fold(Ratio::zero(), |a, &k| a + &self.values[k])
    }
}

fn check_completion_domain(domain: &Family, r: usize, p_window: usize) -> Result<()> {
    for m in domain {
        if m.len() > r {
            return param(format!("member {m:?} has more than r = {r} elements"));
        }
        if m.elements().last().is_some_and(|&e| e > p_window) {
            return param(format!("member {m:?} leaves the window [{p_window}]"));
        }
    }
    Ok(())
}

/// Evaluates a [`WeightSpec`] on every member of `domain`.
pub fn build_weight(spec: &WeightSpec, domain: &Family) -> Result<WeightFn> {
    let n = domain.ground() as i32;
    let values: Vec<Ratio> = match spec {
        WeightSpec::Uniform => return Ok(WeightFn::uniform(domain.clone())),
        WeightSpec::ProductMeasure { p } => {
            if !(p.is_positive() && *p < Ratio::one()) {
                return param(format!("product measure needs 0 < p < 1, got {}", format_ratio(p)));
            }
            let q = Ratio::one() - p;
            domain
                .iter()
                .map(|a| {
                    let k = a.len() as i32;
                    num_traits::pow(p.clone(), k as usize) * num_traits::pow(q.clone(), (n - k) as usize)
                })
                .collect()
        }
        WeightSpec::Geometric { x } => {
            if !x.is_positive() {
                return param(format!("geometric weight needs x > 0, got {}", format_ratio(x)));
            }
            domain
                .iter()
                .map(|a| num_traits::pow(x.clone(), (n as usize) - a.len()))
                .collect()
        }
        WeightSpec::BinomialCompletion { m, r, p_window } => {
            check_completion_domain(domain, *r, *p_window)?;
            let top = *m as i64 - *p_window as i64;
            domain
                .iter()
                .map(|g| from_bigint(binom(top, *r as i64 - g.len() as i64)))
                .collect()
        }
        WeightSpec::MultisetCompletion { m, r, p_window } => {
            check_completion_domain(domain, *r, *p_window)?;
            let top = *m as i64 + *r as i64 - *p_window as i64 - 1;
            domain
                .iter()
                .map(|g| from_bigint(binom(top, *r as i64 - g.len() as i64)))
                .collect()
        }
        WeightSpec::Explicit { values } => {
            let mut map = HashMap::new();
            for e in values {
                let s = SetBits::new(domain.ground(), &e.set)?;
                if map.insert(s, e.w.clone()).is_some() {
                    return param(format!("explicit weight lists {s:?} twice"));
                }
            }
            let mut out = Vec::with_capacity(domain.len());
            for m in domain {
                match map.remove(m) {
                    Some(v) => out.push(v),
                    None => return Err(Error::Weight(format!("no explicit weight for {m:?}"))),
                }
            }
            if let Some(extra) = map.keys().min() {
                return param(format!("explicit weight for {extra:?} outside the domain"));
            }
            out
        }
    };
    WeightFn::from_values(domain.clone(), values)
}

/// Outcome of a hypothesis check; `witness` is the first violation in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionOutcome<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

impl<W> ConditionOutcome<W> {
    fn ok() -> Self {
        ConditionOutcome { holds: true, witness: None }
    }
    fn fail(w: W) -> Self {
        ConditionOutcome { holds: false, witness: Some(w) }
    }
}

/// `w(A) >= (t+u) w(B)` for all members `A ⊊ B` with `|A| >= t`.
/// Witness: the pair `(A, B)`.
pub fn check_condition_a(
    w: &WeightFn,
    params: &IntersectionParams,
) -> ConditionOutcome<(SetBits, SetBits)> {
    check_decay(w, params.t, &params.t_plus_u())
}

/// `w(A) >= factor · w(B)` for all members `A ⊊ B` with `|A| >= t`; the
/// decay condition with an arbitrary factor in place of `t + u`.
pub fn check_decay(w: &WeightFn, t: usize, factor: &Ratio) -> ConditionOutcome<(SetBits, SetBits)> {
    let dom = w.domain();
    let n = dom.ground();
    let full = if n == 0 { 0 } else { ((1u64 << n) - 1) << 1 };
    for (ka, a) in dom.iter().enumerate() {
        if a.len() < t {
            continue;
        }
        let need = factor;
        let wa = &w.values[ka];
        let comp = full & !a.bits();
        let free = comp.count_ones() as usize;
        let check = |kb: usize| -> bool { *wa >= need * &w.values[kb] };
        if free < 63 && (1usize << free) <= dom.len() {
            // walk strict supersets of A in ascending order
            let mut s: u64 = 0;
            loop {
                s = s.wrapping_sub(comp) & comp;
                if s == 0 {
                    break;
                }
                let b = SetBits::from_bits_unchecked(n, a.bits() | s);
                if let Some(kb) = dom.index_of(&b) {
                    if !check(kb) {
                        return ConditionOutcome::fail((*a, b));
                    }
                }
            }
        } else {
            for (kb, b) in dom.iter().enumerate() {
                if b != a && a.is_subset(b) && !check(kb) {
                    return ConditionOutcome::fail((*a, *b));
                }
            }
        }
    }
    ConditionOutcome::ok()
}

/// `w(δ_{i,j}(C)) >= w(C)` for every member `C` and `i < j`.
/// Witness: `(C, i, j)`. The domain must contain every image.
pub fn check_condition_b(w: &WeightFn) -> Result<ConditionOutcome<(SetBits, usize, usize)>> {
    let dom = w.domain();
    for (kc, c) in dom.iter().enumerate() {
        for j in c.elements() {
            for i in 1..j {
                if c.contains(i) {
                    continue;
                }
                let img = c.without(j).with(i);
                let Some(ki) = dom.index_of(&img) else {
                    return Err(Error::Precondition(format!(
                        "δ_{{{i},{j}}}({c:?}) = {img:?} lies outside the weight's domain"
                    )));
                };
                if w.values[ki] < w.values[kc] {
                    return Ok(ConditionOutcome::fail((*c, i, j)));
                }
            }
        }
    }
    Ok(ConditionOutcome::ok())
}

/// Convenience: both hypotheses hold.
pub fn satisfies_hypotheses(w: &WeightFn, params: &IntersectionParams) -> Result<bool> {
    Ok(check_condition_a(w, params).holds && check_condition_b(w)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, parse_ratio, ratio};
    use crate::setcore::{gen_k_subsets, gen_upto_r, power_set};

    fn s(n: usize, e: &[usize]) -> SetBits {
        SetBits::new(n, e).unwrap()
    }

    fn params(t: usize, u: &str) -> IntersectionParams {
        IntersectionParams::parse(t, u).unwrap()
    }

    #[test]
    fn product_measure_values() {
        let w = build_weight(&WeightSpec::ProductMeasure { p: ratio(1, 3) }, &power_set(2).unwrap())
            .unwrap();
        assert_eq!(w.value(&s(2, &[])).unwrap(), &ratio(4, 9));
        assert_eq!(w.value(&s(2, &[1])).unwrap(), &ratio(2, 9));
        assert_eq!(w.value(&s(2, &[2])).unwrap(), &ratio(2, 9));
        assert_eq!(w.value(&s(2, &[1, 2])).unwrap(), &ratio(1, 9));
        assert!(build_weight(&WeightSpec::ProductMeasure { p: int(1) }, &power_set(2).unwrap()).is_err());
    }

    #[test]
    fn geometric_and_completion_values() {
        let w = build_weight(&WeightSpec::Geometric { x: int(1) }, &power_set(3).unwrap()).unwrap();
        assert!(w.values().iter().all(|v| *v == int(1)));

        let dom = gen_upto_r(3, 2).unwrap();
        let spec = WeightSpec::BinomialCompletion { m: 6, r: 2, p_window: 3 };
        let w = build_weight(&spec, &dom).unwrap();
        assert_eq!(w.value(&s(3, &[])).unwrap(), &int(3));
        for e in 1..=3 {
            assert_eq!(w.value(&s(3, &[e])).unwrap(), &int(3));
        }
        assert_eq!(w.value(&s(3, &[1, 2])).unwrap(), &int(1));
        assert_eq!(w.star_weight(&s(3, &[1])).unwrap(), int(5));
    }

    #[test]
    fn zero_completion_names_member() {
        // C(1, 2) = 0 for the empty set
        let spec = WeightSpec::BinomialCompletion { m: 4, r: 2, p_window: 3 };
        let err = build_weight(&spec, &gen_upto_r(3, 2).unwrap()).unwrap_err();
        match err {
            Error::Weight(msg) => assert!(msg.contains("{}")),
            other => panic!("unexpected {other:?}"),
        }
        let spec = WeightSpec::BinomialCompletion { m: 6, r: 1, p_window: 3 };
        assert!(build_weight(&spec, &gen_upto_r(3, 2).unwrap()).is_err());
    }

    #[test]
    fn spec_json() {
        let spec = WeightSpec::from_json(r#"{"kind":"product_measure","p":"1/3"}"#).unwrap();
        assert_eq!(spec, WeightSpec::ProductMeasure { p: ratio(1, 3) });
        assert_eq!(spec.to_json(), r#"{"kind":"product_measure","p":"1/3"}"#);
        let spec = WeightSpec::from_json(
            r#"{"kind":"explicit","values":[{"set":[1],"w":"1"},{"set":[2],"w":"2"}]}"#,
        )
        .unwrap();
        let dom = Family::from_lists(2, &[&[1], &[2]]).unwrap();
        let w = build_weight(&spec, &dom).unwrap();
        assert_eq!(w.value(&s(2, &[2])).unwrap(), &int(2));
        assert!(WeightSpec::from_json(r#"{"kind":"nope"}"#).is_err());
        assert!(WeightSpec::from_json(r#"{"kind":"geometric","x":"1/0"}"#).is_err());
    }

    #[test]
    fn condition_a_examples() {
        let w = WeightFn::uniform(power_set(3).unwrap());
        assert!(check_condition_a(&w, &params(1, "0")).holds);
        let out = check_condition_a(&w, &params(1, "2"));
        assert!(!out.holds);
        assert_eq!(out.witness, Some((s(3, &[1]), s(3, &[1, 2]))));

        let pm = build_weight(&WeightSpec::ProductMeasure { p: ratio(1, 3) }, &power_set(4).unwrap())
            .unwrap();
        assert!(check_condition_a(&pm, &params(2, "0")).holds);
        // ratio (1-p)/p = 2 < 3 = t+u
        assert!(!check_condition_a(&pm, &params(2, "1")).holds);
    }

    #[test]
    fn condition_a_scan_paths_agree() {
        // sparse domain over a wide ground takes the member-scan path
        let dom = Family::from_lists(20, &[&[1], &[1, 2], &[1, 2, 3], &[4]]).unwrap();
        let vals = vec![int(9), int(3), int(2), int(1)];
        let w = WeightFn::from_values(dom, vals).unwrap();
        let out = check_condition_a(&w, &params(1, "2"));
        assert_eq!(out.witness, Some((s(20, &[1, 2]), s(20, &[1, 2, 3]))));
    }

    #[test]
    fn condition_b_examples() {
        for spec in [
            WeightSpec::Uniform,
            WeightSpec::ProductMeasure { p: ratio(2, 9) },
            WeightSpec::Geometric { x: int(3) },
        ] {
            let w = build_weight(&spec, &power_set(4).unwrap()).unwrap();
            assert!(check_condition_b(&w).unwrap().holds);
        }
        let w = build_weight(
            &WeightSpec::BinomialCompletion { m: 7, r: 2, p_window: 3 },
            &gen_upto_r(3, 2).unwrap(),
        )
        .unwrap();
        assert!(check_condition_b(&w).unwrap().holds);

        let dom = Family::from_lists(2, &[&[1], &[2]]).unwrap();
        let w = WeightFn::from_values(dom, vec![int(1), int(2)]).unwrap();
        let out = check_condition_b(&w).unwrap();
        assert_eq!(out.witness, Some((s(2, &[2]), 1, 2)));

        let not_closed = WeightFn::uniform(Family::from_lists(2, &[&[2]]).unwrap());
        assert!(matches!(check_condition_b(&not_closed), Err(Error::Precondition(_))));
    }

    #[test]
    fn totals() {
        let w = WeightFn::uniform(power_set(3).unwrap());
        assert_eq!(w.star_weight(&s(3, &[1])).unwrap(), int(4));
        for n in 1..=6 {
            let pm = build_weight(
                &WeightSpec::ProductMeasure { p: parse_ratio("3/7").unwrap() },
                &power_set(n).unwrap(),
            )
            .unwrap();
            assert_eq!(pm.total(), int(1));
        }
        let other = gen_k_subsets(4, 2).unwrap();
        assert!(w.total_weight(&other).is_err());
        assert_eq!(w.total_weight(&Family::empty(3).unwrap()).unwrap(), int(0));
    }

    #[test]
    fn non_positive_values_rejected() {
        let dom = Family::from_lists(2, &[&[1]]).unwrap();
        assert!(WeightFn::from_values(dom.clone(), vec![int(0)]).is_err());
        assert!(WeightFn::from_values(dom, vec![]).is_err());
    }
}
