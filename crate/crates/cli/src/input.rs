//! Reading inputs: family files, weight specs, capacity sequences and
//! integer lists such as `4-7` or `2,3,5`.

use std::fs;
use std::io::Read;
use std::path::Path;

use crossint_core::arith::parse_ratio;
use crossint_core::labeled::{IpSequence, LabeledFamily};
use crossint_core::multiset::MultisetFamily;
use crossint_core::{Family, Ratio, WeightSpec};

use crate::Failure;

/// A family file in any of the supported formats.
#[derive(Debug)]
pub enum Input {
    Sets(Family),
    Labeled(LabeledFamily),
    Multi(MultisetFamily),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Sets(_) => "set",
            Input::Labeled(_) => "labeled",
            Input::Multi(_) => "multiset",
        }
    }
}

/// Reads a file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("reading standard input: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

/// Set families come as text or JSON; labeled and multiset families as JSON,
/// told apart by their keys.
pub fn parse_input(text: &str, path: &Path) -> Result<Input, Failure> {
    if !text.trim_start().starts_with('{') {
        return Family::from_text(text).map(Input::Sets).map_err(|e| located(path, e));
    }
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| located(path, e))?;
    if v.get("caps").is_some() {
        LabeledFamily::from_json(text).map(Input::Labeled).map_err(|e| located(path, e))
    } else if v.get("n").is_some() && v.get("members").is_some() {
        MultisetFamily::from_json(text).map(Input::Multi).map_err(|e| located(path, e))
    } else {
        Family::from_json(text).map(Input::Sets).map_err(|e| located(path, e))
    }
}

pub fn read_input(path: &Path) -> Result<Input, Failure> {
    parse_input(&read_text(path)?, path)
}

pub fn read_family(path: &Path) -> Result<Family, Failure> {
    match read_input(path)? {
        Input::Sets(f) => Ok(f),
        other => Err(Failure::Usage(format!("{}: expected a set family, found a {} family", path.display(), other.kind()))),
    }
}

/// Inline JSON, or `@path` for a file.
pub fn weight_spec(arg: &str) -> Result<WeightSpec, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(p) => read_text(Path::new(p))?,
        None => arg.to_string(),
    };
    WeightSpec::from_json(&text).map_err(|e| Failure::Usage(format!("weight spec: {e}")))
}

pub fn rational(s: &str) -> Result<Ratio, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

/// `4,4,4` or the shorthand `3x4`.
pub fn caps(s: &str) -> Result<IpSequence, String> {
    let values: Vec<usize> = if let Some((n, c)) = s.split_once('x') {
        let n: usize = n.trim().parse().map_err(|_| format!("bad length in {s:?}"))?;
        let c: usize = c.trim().parse().map_err(|_| format!("bad capacity in {s:?}"))?;
        vec![c; n]
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad capacity {p:?} in {s:?}")))
            .collect::<Result<_, _>>()?
    };
    IpSequence::new(values).map_err(|e| e.to_string())
}

/// `n:r`, one family `C([n], r)`.
pub fn profile(s: &str) -> Result<(usize, usize), String> {
    let (n, r) = s.split_once(':').ok_or_else(|| format!("expected n:r, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad number {x:?} in {s:?}"));
    Ok((parse(n)?, parse(r)?))
}

/// A parsed `int_list` argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

pub fn int_list_arg(s: &str) -> Result<IntList, String> {
    int_list(s).map(IntList)
}

/// Comma-separated items, each a number or an inclusive range `a-b`.
/// A range with `b < a` is empty.
pub fn int_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad number {x:?} in {s:?}"));
        match part.split_once('-') {
            Some((a, b)) => out.extend(parse(a)?..=parse(b)?),
            None => out.push(parse(part)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(int_list("4-7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(int_list("3,1,2-3").unwrap(), vec![1, 2, 3]);
        assert!(int_list("5-4").unwrap().is_empty());
        assert!(int_list("x").is_err());
    }

    #[test]
    fn caps_forms() {
        assert_eq!(caps("3x4").unwrap().caps(), &[4, 4, 4]);
        assert_eq!(caps("2, 3").unwrap().caps(), &[2, 3]);
        assert!(caps("3,2").is_err());
    }

    #[test]
    fn detects_input_kind() {
        let p = Path::new("x");
        assert_eq!(parse_input("ground 3\n1 2\n", p).unwrap().kind(), "set");
        assert_eq!(parse_input(r#"{"ground":3,"sets":[[1]]}"#, p).unwrap().kind(), "set");
        assert_eq!(parse_input(r#"{"caps":[2,2],"r":1,"members":[[[1,2]]]}"#, p).unwrap().kind(), "labeled");
        assert_eq!(parse_input(r#"{"n":3,"r":2,"members":[[1,1]]}"#, p).unwrap().kind(), "multiset");
        let err = parse_input("ground 3\n1 9\n", p).unwrap_err();
        assert!(matches!(err, Failure::Usage(m) if m.contains("line 2")));
    }
}
