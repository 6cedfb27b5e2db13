//! Left-compressions `δ_{i,j}` / `Δ_{i,j}` and their fixpoints.
//!
//! A fixpoint loop scans pairs `(i, j)`, `i < j`, lexicographically and restarts
//! the scan after every effective compression. Each effective step strictly
//! lowers the element-sum potential, so loops terminate.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::setcore::{cross_t_witness, Family, SetBits};

fn check_index(n: usize, i: usize, j: usize) -> Result<()> {
    if i == 0 || j == 0 || i > n || j > n {
        return param(format!("compression index ({i},{j}) outside [{n}]"));
    }
    if i == j {
        return param(format!("compression index needs i != j, got ({i},{j})"));
    }
    Ok(())
}

/// `δ_{i,j}(A)`: swap `j` for `i` when `j ∈ A` and `i ∉ A`.
pub fn delta(a: &SetBits, i: usize, j: usize) -> Result<SetBits> {
    check_index(a.ground(), i, j)?;
    Ok(delta_raw(a, i, j))
}

fn delta_raw(a: &SetBits, i: usize, j: usize) -> SetBits {
    if a.contains(j) && !a.contains(i) {
        a.without(j).with(i)
    } else {
        *a
    }
}

/// `Δ_{i,j}(F)`: images of members whose image is new, members kept otherwise.
pub fn compress_family(fam: &Family, i: usize, j: usize) -> Result<Family> {
    check_index(fam.ground(), i, j)?;
    Ok(compress_raw(fam, i, j))
}

fn compress_raw(fam: &Family, i: usize, j: usize) -> Family {
    let present: HashSet<u64> = fam.iter().map(|m| m.bits()).collect();
    let members = fam.iter().map(|m| {
        let img = delta_raw(m, i, j);
        if present.contains(&img.bits()) {
            *m
        } else {
            img
        }
    });
    Family::new(fam.ground(), members).expect("compression stays in the ground set")
}

/// Sum over members of the sum of their elements.
pub fn potential(fam: &Family) -> u64 {
    fam.iter().map(|m| m.element_sum()).sum()
}

/// One effective left-compression in a fixpoint run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub i: usize,
    pub j: usize,
    /// Potential after the step (summed over all families for tuples).
    pub potential: u64,
}

fn first_effective(fams: &[Family], n: usize) -> Option<(usize, usize, Vec<Family>)> {
    for i in 1..=n {
        for j in (i + 1)..=n {
            let next: Vec<Family> = fams.iter().map(|f| compress_raw(f, i, j)).collect();
            if next.iter().zip(fams).any(|(a, b)| a != b) {
                return Some((i, j, next));
            }
        }
    }
    None
}

fn run_fixpoint(mut fams: Vec<Family>, n: usize) -> (Vec<Family>, Vec<Step>) {
    let mut steps = Vec::new();
    while let Some((i, j, next)) = first_effective(&fams, n) {
        fams = next;
        let pot = fams.iter().map(potential).sum();
        steps.push(Step { i, j, potential: pot });
    }
    (fams, steps)
}

/// Applies left-compressions until the family is compressed.
/// Returns the result and the number of effective steps.
pub fn compress_to_fixpoint(fam: &Family) -> (Family, usize) {
    let (out, steps) = compress_to_fixpoint_traced(fam);
    (out, steps.len())
}

pub fn compress_to_fixpoint_traced(fam: &Family) -> (Family, Vec<Step>) {
    let (mut out, steps) = run_fixpoint(vec![fam.clone()], fam.ground());
    (out.pop().expect("one family"), steps)
}

/// Simultaneous compression of cross-`t`-intersecting families: each effective
/// left-compression is applied to every family at once.
pub fn co_compress(fams: &[Family], t: usize) -> Result<Vec<Family>> {
    Ok(co_compress_traced(fams, t)?.0)
}

pub fn co_compress_traced(fams: &[Family], t: usize) -> Result<(Vec<Family>, Vec<Step>)> {
    let n = fams.iter().map(|f| f.ground()).max().unwrap_or(0);
    if fams.iter().any(|f| f.ground() != n) {
        return param("co-compression needs all families over the same ground set");
    }
    if let Some((i, a, j, b)) = cross_t_witness(fams, t) {
        return Err(Error::Precondition(format!(
            "families {i} and {j} are not cross-{t}-intersecting: {a:?} and {b:?}"
        )));
    }
    Ok(run_fixpoint(fams.to_vec(), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setcore::{gen_upto_r, is_compressed, is_cross_t_intersecting, is_hereditary};

    fn s(n: usize, e: &[usize]) -> SetBits {
        SetBits::new(n, e).unwrap()
    }

    fn fam(n: usize, lists: &[&[usize]]) -> Family {
        Family::from_lists(n, lists).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&s(4, &[3, 4]), 1, 3).unwrap(), s(4, &[1, 4]));
        assert_eq!(delta(&s(4, &[1, 3]), 1, 3).unwrap(), s(4, &[1, 3]));
        assert_eq!(delta(&s(4, &[2]), 1, 3).unwrap(), s(4, &[2]));
        assert!(delta(&s(4, &[2]), 1, 5).is_err());
        assert!(delta(&s(4, &[2]), 2, 2).is_err());
        assert!(delta(&s(4, &[2]), 0, 2).is_err());
    }

    #[test]
    fn big_delta_examples() {
        assert_eq!(compress_family(&fam(3, &[&[2, 3]]), 1, 2).unwrap(), fam(3, &[&[1, 3]]));
        let both = fam(3, &[&[2, 3], &[1, 3]]);
        assert_eq!(compress_family(&both, 1, 2).unwrap(), both);
        let singles = fam(3, &[&[2], &[1]]);
        assert_eq!(compress_family(&singles, 1, 2).unwrap(), fam(3, &[&[1], &[2]]));
    }

    #[test]
    fn fixpoint_examples() {
        let (out, steps) = compress_to_fixpoint(&fam(3, &[&[2, 3]]));
        assert_eq!(out, fam(3, &[&[1, 2]]));
        assert_eq!(steps, 2);
        let (_, trace) = compress_to_fixpoint_traced(&fam(3, &[&[2, 3]]));
        assert_eq!(
            trace,
            vec![Step { i: 1, j: 2, potential: 4 }, Step { i: 2, j: 3, potential: 3 }]
        );
        let (out, steps) = compress_to_fixpoint(&fam(3, &[&[1, 2]]));
        assert_eq!((out, steps), (fam(3, &[&[1, 2]]), 0));
        let e = Family::empty(3).unwrap();
        assert_eq!(compress_to_fixpoint(&e), (e, 0));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential(&fam(3, &[&[2, 3]])), 5);
        assert_eq!(potential(&Family::empty(3).unwrap()), 0);
        assert_eq!(potential(&fam(3, &[&[1], &[1, 2]])), 4);
    }

    #[test]
    fn co_compress_examples() {
        let out = co_compress(&[fam(3, &[&[2]]), fam(3, &[&[2, 3]])], 1).unwrap();
        assert_eq!(out, vec![fam(3, &[&[1]]), fam(3, &[&[1, 2]])]);
        let same = vec![fam(3, &[&[1]]), fam(3, &[&[1]])];
        assert_eq!(co_compress(&same, 1).unwrap(), same);
        let out = co_compress(&[fam(3, &[&[2, 3]]), fam(3, &[&[2, 3]])], 2).unwrap();
        assert_eq!(out, vec![fam(3, &[&[1, 2]]), fam(3, &[&[1, 2]])]);
        let err = co_compress(&[fam(3, &[&[1]]), fam(3, &[&[2]])], 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn compression_keeps_hereditary_families_hereditary() {
        let h = fam(4, &[&[], &[3], &[4], &[3, 4]]);
        assert!(is_hereditary(&h));
        let (out, _) = compress_to_fixpoint(&h);
        assert!(is_hereditary(&out) && is_compressed(&out));
        assert_eq!(out, fam(4, &[&[], &[1], &[2], &[1, 2]]));
        assert!(is_cross_t_intersecting(&[out.clone(), out], 0));
        let g = gen_upto_r(4, 2).unwrap();
        assert_eq!(compress_to_fixpoint(&g), (g, 0));
    }
}
