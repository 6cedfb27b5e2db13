//! `crossint`: generators, compression, bounds, exact searches, theorem
//! checks, counterexamples and sweeps.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a check failed or its
//! hypotheses are not met.

mod input;
mod sweep;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crossint_core::arith::format_ratio;
use crossint_core::bounds::{
    build_counterexample, conjecture_max, k_family_bound, seq_hypothesis_ok, thm_multi_threshold, thm_nrs_threshold,
    thm_seq_bound, threshold_min_ground, ConjectureKind, CounterexampleFamilies, CounterexampleSpec, ReductionProfile,
};
use crossint_core::checks::{run_suite, suite_names, SuiteOutcome, MIN_TRIALS};
use crossint_core::compress::{co_compress_traced, compress_to_fixpoint_traced, Step};
use crossint_core::labeled::{gen_labeled, IpSequence, PairEncoder};
use crossint_core::multiset::{multiset_frankl_family, MultisetFamily};
use crossint_core::search::{
    brute_force_pair_keys, max_product_pair_keys, max_t_intersecting_keys, weights_for, KMethod, SearchOptions,
    SearchReport, REPORT_CAP,
};
use crossint_core::setcore::{frankl_family, gen_k_subsets, gen_upto_r, power_set};
use crossint_core::verify::{verify_ekr, verify_k, verify_multi, verify_nrs, verify_seq, verify_weighted, EkrKind, Verification};
use crossint_core::weights::build_weight;
use crossint_core::{Family, IntersectionParams, Ratio, WeightFn};
use serde_json::{json, Value};

use input::{caps, int_list_arg, profile, rational, read_family, read_input, weight_spec, Input, IntList};

/// Why a run stopped short of success.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or malformed input; exit 1.
    Usage(String),
    /// A check failed or its hypotheses do not hold; exit 2.
    Check(String),
}

impl From<crossint_core::Error> for Failure {
    fn from(e: crossint_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "crossint", version, about = "Exact cross-t-intersection calculus")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized property suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for the searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a family.
    Gen(GenArgs),
    /// Compress a family to its fixpoint, or co-compress two families.
    Compress(CompressArgs),
    /// Closed-form bounds and thresholds.
    Bounds {
        #[command(subcommand)]
        which: BoundsCmd,
    },
    /// Exact maximum-product search over two families, or maximum t-intersecting subfamily.
    Search(SearchArgs),
    /// Check a theorem on one instance by exact search.
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Build a counterexample family and compare it with the star value.
    Counterexample {
        #[command(subcommand)]
        which: CounterexampleCmd,
    },
    /// Run a grid of uniform instances and record the outcomes.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    /// `C([n], r)`
    Subsets,
    /// Sets of size at most r
    Upto,
    /// All subsets of `[n]`
    Power,
    /// Window family: r-sets with at least t+i elements in `[t+i+j]`
    Frankl,
    /// Labeled sets of size r for `--caps`
    Labeled,
    /// All multisets of size r over `[n]`
    Multisets,
    /// Multiset window family
    MultisetFrankl,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 0)]
    i: usize,
    #[arg(long, default_value_t = 0)]
    j: usize,
    /// Capacities, e.g. `4,4,4` or `3x4`.
    #[arg(long, value_parser = caps)]
    caps: Option<IpSequence>,
}

#[derive(Args)]
struct CompressArgs {
    /// Family file (`-` for standard input).
    input: PathBuf,
    /// Second family for simultaneous compression; needs `--t`.
    #[arg(long)]
    with: Option<PathBuf>,
    #[arg(long)]
    t: Option<usize>,
    /// Print every effective step to standard error as a JSON line.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Clone)]
struct Intersect {
    #[arg(long)]
    t: usize,
    /// Rational, e.g. `2` or `3/2`.
    #[arg(long, value_parser = rational, default_value = "2")]
    u: Ratio,
}

#[derive(Args, Clone)]
struct Grounds {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    s: usize,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Uniform families `C([m], r)` and `C([n], s)`.
    Nrs {
        #[command(flatten)]
        g: Grounds,
        #[command(flatten)]
        x: Intersect,
    },
    /// Multisets of size r over `[m]` and of size s over `[n]`.
    Multi {
        #[command(flatten)]
        g: Grounds,
        #[command(flatten)]
        x: Intersect,
    },
    /// Labeled sets for capacity sequences c and d.
    Seq {
        #[arg(long, value_parser = caps)]
        c: IpSequence,
        #[arg(long, value_parser = caps)]
        d: IpSequence,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        x: Intersect,
    },
    /// Several uniform families, each given as `n:r`.
    K {
        #[arg(long = "family", value_parser = profile, required = true)]
        families: Vec<(usize, usize)>,
        #[command(flatten)]
        x: Intersect,
    },
    /// Best pair of window families.
    Conjecture {
        #[arg(long, value_enum, default_value = "sets")]
        kind: ConjKind,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = caps)]
        c: Option<IpSequence>,
        #[arg(long, value_parser = caps)]
        d: Option<IpSequence>,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConjKind {
    Sets,
    Seq,
    Multi,
}

#[derive(Args)]
struct SearchArgs {
    /// Left family file.
    #[arg(long)]
    left: PathBuf,
    /// Right family file (default: the left one).
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    t: usize,
    /// Weight spec as JSON, or `@file`; set families only.
    #[arg(long)]
    left_weight: Option<String>,
    /// Defaults to the left weight spec.
    #[arg(long)]
    right_weight: Option<String>,
    /// Largest t-intersecting subfamily of the left family instead of a pair.
    #[arg(long)]
    clique: bool,
    /// Exhaustive search instead of closed-pair enumeration.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = REPORT_CAP)]
    report_cap: usize,
    #[arg(long, default_value_t = crossint_core::search::BRUTE_FORCE_CAP)]
    brute_force_cap: usize,
}

#[derive(Args, Clone)]
struct VerifyCommon {
    /// Report instead of refusing when the hypotheses do not hold.
    #[arg(long)]
    allow_below_threshold: bool,
    #[arg(long, default_value_t = REPORT_CAP)]
    report_cap: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KMethodArg {
    Concept,
    BruteForce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EkrArg {
    Sets,
    Multi,
    Seq,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// `C([m], r)` against `C([n], s)`.
    ThmNrs {
        #[command(flatten)]
        g: Grounds,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Weighted hereditary families; defaults to two copies of `2^[n]`.
    ThmWeighted {
        #[arg(long, required_unless_present = "g")]
        n: Option<usize>,
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long)]
        g_weight: String,
        #[arg(long)]
        h_weight: Option<String>,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Labeled sets for capacity sequences c and d.
    ThmSeq {
        #[arg(long, value_parser = caps)]
        c: IpSequence,
        #[arg(long, value_parser = caps)]
        d: IpSequence,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Multisets, intersections taken on supports.
    ThmMulti {
        #[command(flatten)]
        g: Grounds,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Two to four uniform families, each `n:r`.
    ThmK {
        #[arg(long = "family", value_parser = profile, required = true)]
        families: Vec<(usize, usize)>,
        #[arg(long, value_enum, default_value = "concept")]
        method: KMethodArg,
        #[arg(long, default_value_t = crossint_core::search::BRUTE_FORCE_CAP)]
        brute_force_cap: usize,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Largest t-intersecting family against the star.
    Ekr {
        #[arg(long, value_enum)]
        kind: EkrArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = caps)]
        caps: Option<IpSequence>,
        #[command(flatten)]
        x: Intersect,
        #[command(flatten)]
        common: VerifyCommon,
    },
    /// Seeded randomized property suites.
    Properties {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Run only these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

#[derive(Subcommand)]
enum CounterexampleCmd {
    /// Geometric weights on `2^[n]`.
    Remark2 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        with_families: bool,
    },
    /// Labeled sets with a low first capacity on one side.
    SeqLowcap {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        with_families: bool,
    },
    /// Multisets over a ground set below the threshold.
    MultiLown {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        with_families: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "nrs")]
    kind: sweep::SweepKind,
    /// Ground sizes, e.g. `4-7` or `4,6`.
    #[arg(long, value_parser = int_list_arg)]
    m: IntList,
    /// Second ground sizes; without it `n = m`.
    #[arg(long, value_parser = int_list_arg)]
    n: Option<IntList>,
    #[arg(long, value_parser = int_list_arg)]
    r: IntList,
    /// Without it `s = r`.
    #[arg(long, value_parser = int_list_arg)]
    s: Option<IntList>,
    #[arg(long, value_parser = int_list_arg, default_value = "1")]
    t: IntList,
    #[arg(long, value_parser = rational, default_value = "2")]
    u: Ratio,
    /// Largest family searched; bigger points are recorded as skipped.
    #[arg(long, default_value_t = 200)]
    cap: usize,
    /// Recompute points already present in the output file.
    #[arg(long)]
    force: bool,
}

/// Where and how the main result is written.
struct Sink {
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Sink {
    fn format(&self, default: Format, allowed: &[Format]) -> Res<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::Usage(format!("--format {f:?} is not available for this command").to_lowercase()))
        }
    }

    fn emit(&self, text: &str) -> Res<()> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json(&self, v: &Value) -> Res<()> {
        self.emit(&serde_json::to_string_pretty(v).expect("json values serialize"))
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Res<T> {
    v.ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
}

fn family_out(sink: &Sink, f: &Family) -> Res<()> {
    match sink.format(Format::Text, &[Format::Text, Format::Json])? {
        Format::Text => sink.emit(&f.to_text()),
        _ => sink.emit(&f.to_json()),
    }
}

fn gen(a: GenArgs, sink: &Sink) -> Res<()> {
    let n = || need(a.n, "n");
    let r = || need(a.r, "r");
    match a.kind {
        GenKind::Subsets => family_out(sink, &gen_k_subsets(n()?, r()?)?),
        GenKind::Upto => family_out(sink, &gen_upto_r(n()?, r()?)?),
        GenKind::Power => family_out(sink, &power_set(n()?)?),
        GenKind::Frankl => family_out(sink, &frankl_family(n()?, r()?, need(a.t, "t")?, a.i, a.j)?),
        GenKind::Labeled => {
            sink.format(Format::Json, &[Format::Json])?;
            sink.emit(&gen_labeled(&need(a.caps, "caps")?, r()?)?.to_json())
        }
        GenKind::Multisets => {
            sink.format(Format::Json, &[Format::Json])?;
            sink.emit(&MultisetFamily::all(n()?, r()?)?.to_json())
        }
        GenKind::MultisetFrankl => {
            sink.format(Format::Json, &[Format::Json])?;
            sink.emit(&multiset_frankl_family(n()?, r()?, need(a.t, "t")?, a.i, a.j)?.to_json())
        }
    }
}

fn trace(steps: &[Step]) {
    for s in steps {
        eprintln!("{}", serde_json::to_string(s).expect("steps serialize"));
    }
}

fn compress(a: CompressArgs, sink: &Sink) -> Res<()> {
    let first = read_family(&a.input)?;
    let Some(other) = a.with else {
        let (out, steps) = compress_to_fixpoint_traced(&first);
        if a.trace {
            trace(&steps);
        }
        return family_out(sink, &out);
    };
    let t = need(a.t, "t")?;
    let second = read_family(&other)?;
    let (out, steps) = co_compress_traced(&[first, second], t)?;
    if a.trace {
        trace(&steps);
    }
    match sink.format(Format::Json, &[Format::Text, Format::Json])? {
        Format::Text => sink.emit(&format!("# first\n{}# second\n{}", out[0].to_text(), out[1].to_text())),
        _ => {
            let fams: Vec<Value> = out.iter().map(|f| serde_json::from_str(&f.to_json()).expect("family json")).collect();
            sink.json(&json!({ "families": fams, "steps": steps.len() }))
        }
    }
}

fn threshold_json(bound: impl ToString, threshold: &Ratio, min_ground: usize) -> Value {
    let least = threshold_min_ground(threshold);
    json!({
        "bound": bound.to_string(),
        "threshold": format_ratio(threshold),
        "threshold_ok": Ratio::from_integer((min_ground as i64).into()) >= *threshold,
        "threshold_min_ground": least.to_string().parse::<i64>().unwrap_or(i64::MAX),
    })
}

fn bounds(which: BoundsCmd, sink: &Sink) -> Res<()> {
    sink.format(Format::Json, &[Format::Json])?;
    let v = match which {
        BoundsCmd::Nrs { g, x } => {
            let p = ReductionProfile::new(g.m, g.n, g.r, g.s, x.t, x.u.clone())?;
            threshold_json(p.nrs_bound(), &thm_nrs_threshold(g.r, g.s, x.t, &x.u), p.min_ground())
        }
        BoundsCmd::Multi { g, x } => {
            let p = ReductionProfile::new(g.m, g.n, g.r, g.s, x.t, x.u.clone())?;
            threshold_json(p.multi_bound(), &thm_multi_threshold(g.r, g.s, x.t, &x.u), p.min_ground())
        }
        BoundsCmd::Seq { c, d, r, s, x } => {
            let bound = thm_seq_bound(&c, &d, r, s, x.t)?;
            let need_cap = Ratio::from_integer((x.t as i64 + 1).into()) + &x.u;
            json!({
                "bound": bound.to_string(),
                "threshold": format_ratio(&need_cap),
                "threshold_ok": seq_hypothesis_ok(&c, &d, x.t, &x.u),
                "threshold_min_first_cap": threshold_min_ground(&need_cap).to_string().parse::<i64>().unwrap_or(i64::MAX),
            })
        }
        BoundsCmd::K { families, x } => {
            let kb = k_family_bound(&families, x.t, &x.u)?;
            let min_n = families.iter().map(|p| p.0).min().unwrap_or(0);
            threshold_json(kb.bound, &kb.threshold, min_n)
        }
        BoundsCmd::Conjecture { kind, m, n, c, d, r, s, t } => {
            let kind = match kind {
                ConjKind::Sets => ConjectureKind::Sets { m: need(m, "m")?, n: need(n, "n")?, r, s },
                ConjKind::Multi => ConjectureKind::Multi { m: need(m, "m")?, n: need(n, "n")?, r, s },
                ConjKind::Seq => ConjectureKind::Seq { c: need(c, "c")?, d: need(d, "d")?, r, s },
            };
            serde_json::to_value(conjecture_max(&kind, t)?).expect("conjecture serializes")
        }
    };
    sink.json(&v)
}

fn search_opts(report_cap: usize, brute_force_cap: usize) -> SearchOptions {
    SearchOptions { report_cap, brute_force_cap, ..SearchOptions::default() }
}

fn report_text(rep: &SearchReport, render: impl Fn(usize, usize) -> String) -> String {
    let mut out = format!(
        "max {}\nmethod {}\nnodes {}\nmaximizers {}{}\n",
        format_ratio(&rep.max_value),
        rep.method.name(),
        rep.node_count,
        rep.maximizers.len(),
        if rep.truncated { " (truncated)" } else { "" }
    );
    for m in &rep.maximizers {
        let parts: Vec<String> = m
            .parts
            .iter()
            .enumerate()
            .map(|(p, idx)| format!("[{}]", idx.iter().map(|&k| render(p, k)).collect::<Vec<_>>().join(" ")))
            .collect();
        out.push_str(&parts.join(" | "));
        out.push('\n');
    }
    out
}

fn search(a: SearchArgs, sink: &Sink) -> Res<()> {
    let fmt = sink.format(Format::Json, &[Format::Json, Format::Text])?;
    let opts = search_opts(a.report_cap, a.brute_force_cap);
    let left = read_input(&a.left)?;
    let right = match (&a.right, a.clique) {
        (Some(_), true) => return Err(Failure::Usage("--clique takes a single family".into())),
        (Some(p), false) => read_input(p)?,
        (None, _) => read_input(&a.left)?,
    };
    if a.clique && a.oracle {
        return Err(Failure::Usage("--oracle is available for pair searches only".into()));
    }
    let weighted = a.left_weight.is_some() || a.right_weight.is_some();
    // keys, weights and member renderings for each side
    let (keys, weights, shown): (Vec<Vec<u64>>, Vec<Vec<Ratio>>, Vec<Vec<(Value, String)>>) = match (&left, &right) {
        (Input::Sets(g), Input::Sets(h)) => {
            let spec_l = a.left_weight.as_deref().map(weight_spec).transpose()?;
            let spec_r = match a.right_weight.as_deref() {
                Some(s) => Some(weight_spec(s)?),
                None => spec_l.clone(),
            };
            let w = |f: &Family, spec: &Option<crossint_core::WeightSpec>| -> Res<Vec<Ratio>> {
                let wf = match spec {
                    Some(s) => build_weight(s, f)?,
                    None => WeightFn::uniform(f.clone()),
                };
                Ok(weights_for(f, &wf)?)
            };
            let show = |f: &Family| f.iter().map(|s| (json!(s.elements()), format!("{s:?}"))).collect();
            (
                vec![f_keys(g), f_keys(h)],
                vec![w(g, &spec_l)?, w(h, &spec_r)?],
                vec![show(g), show(h)],
            )
        }
        _ if weighted => return Err(Failure::Usage("weights apply to set families only".into())),
        (Input::Labeled(g), Input::Labeled(h)) => {
            let enc = PairEncoder::for_families(&[g, h])?;
            let k = |f| enc.encode_family(f).iter().map(|s| s.bits()).collect::<Vec<u64>>();
            let show = |f: &crossint_core::labeled::LabeledFamily| {
                f.members().iter().map(|m| (json!(m.pairs()), format!("{m:?}"))).collect()
            };
            (vec![k(g), k(h)], vec![ones(g.len()), ones(h.len())], vec![show(g), show(h)])
        }
        (Input::Multi(g), Input::Multi(h)) => {
            let k = |f: &MultisetFamily| f.supports().iter().map(|s| s.bits()).collect::<Vec<u64>>();
            let show =
                |f: &MultisetFamily| f.members().iter().map(|m| (json!(m.entries()), format!("{m:?}"))).collect();
            (vec![k(g), k(h)], vec![ones(g.len()), ones(h.len())], vec![show(g), show(h)])
        }
        (l, r) => return Err(Failure::Usage(format!("cannot pair a {} family with a {} family", l.kind(), r.kind()))),
    };
    let rep = if a.clique {
        max_t_intersecting_keys(&keys[0], a.t, &weights[0], &opts)?
    } else if a.oracle {
        brute_force_pair_keys(&keys[0], &keys[1], a.t, &weights[0], &weights[1], &opts)?
    } else {
        max_product_pair_keys(&keys[0], &keys[1], a.t, &weights[0], &weights[1], &opts)?
    };
    match fmt {
        Format::Text => sink.emit(&report_text(&rep, |p, k| shown[p][k].1.clone())),
        _ => sink.json(&rep.to_json_with(|p, k| shown[p][k].0.clone())),
    }
}

fn f_keys(f: &Family) -> Vec<u64> {
    f.iter().map(|s| s.bits()).collect()
}

fn ones(n: usize) -> Vec<Ratio> {
    vec![Ratio::from_integer(1.into()); n]
}

fn verification_json(v: &Verification) -> Value {
    let mut out = serde_json::to_value(v).expect("verification serializes");
    out["verified"] = json!(v.verified());
    out["method"] = json!(v.report.method.name());
    out["truncated"] = json!(v.report.truncated);
    out["maximizers"] = json!(v.maximizer_labels());
    out
}

fn verification_text(v: &Verification) -> String {
    let mut out = format!(
        "check {}\nhypotheses {}\nbound {}\nsearch max {}\nagrees {}\nmaximizers {} (stars {}, only stars {})\nverified {}\n",
        v.check,
        if v.hypothesis_ok { "hold".to_string() } else { format!("fail: {}", v.hypothesis) },
        format_ratio(&v.bound),
        format_ratio(&v.search_max),
        v.agrees,
        v.maximizer_count,
        v.star_count,
        v.maximizers_are_stars,
        v.verified()
    );
    for m in v.maximizer_labels() {
        let parts: Vec<String> = m.iter().map(|p| format!("[{}]", p.join(" "))).collect();
        out.push_str(&parts.join(" | "));
        out.push('\n');
    }
    out
}

fn finish_verification(v: Verification, common: &VerifyCommon, sink: &Sink) -> Res<()> {
    let fmt = sink.format(Format::Json, &[Format::Json, Format::Text])?;
    if !v.hypothesis_ok && !common.allow_below_threshold {
        return Err(Failure::Check(format!("hypothesis not satisfied: {}", v.hypothesis)));
    }
    match fmt {
        Format::Text => sink.emit(&verification_text(&v))?,
        _ => sink.json(&verification_json(&v))?,
    }
    if v.violated() {
        let why = if v.agrees { "maximizers are not exactly the stars" } else { "search maximum differs from the bound" };
        return Err(Failure::Check(format!("{} failed: {why}", v.check)));
    }
    Ok(())
}

fn verify(which: VerifyCmd, seed: u64, sink: &Sink) -> Res<()> {
    match which {
        VerifyCmd::ThmNrs { g, x, common } => {
            let p = ReductionProfile::new(g.m, g.n, g.r, g.s, x.t, x.u)?;
            let v = verify_nrs(&p, &search_opts(common.report_cap, 0))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::ThmWeighted { n, g, h, g_weight, h_weight, x, common } => {
            let gf = match (&g, n) {
                (Some(p), _) => read_family(p)?,
                (None, Some(n)) => power_set(n)?,
                (None, None) => return Err(Failure::Usage("need --g or --n".into())),
            };
            let hf = match &h {
                Some(p) => read_family(p)?,
                None => gf.clone(),
            };
            let gs = weight_spec(&g_weight)?;
            let hs = match &h_weight {
                Some(s) => weight_spec(s)?,
                None => gs.clone(),
            };
            let (gw, hw) = (build_weight(&gs, &gf)?, build_weight(&hs, &hf)?);
            let params = IntersectionParams::new(x.t, x.u)?;
            let v = verify_weighted(&gf, &hf, &gw, &hw, &params, &search_opts(common.report_cap, 0))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::ThmSeq { c, d, r, s, x, common } => {
            let v = verify_seq(&c, &d, r, s, x.t, &x.u, &search_opts(common.report_cap, 0))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::ThmMulti { g, x, common } => {
            let p = ReductionProfile::new(g.m, g.n, g.r, g.s, x.t, x.u)?;
            let v = verify_multi(&p, &search_opts(common.report_cap, 0))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::ThmK { families, method, brute_force_cap, x, common } => {
            let method = match method {
                KMethodArg::Concept => KMethod::Concept,
                KMethodArg::BruteForce => KMethod::BruteForce,
            };
            let v = verify_k(&families, x.t, &x.u, method, &search_opts(common.report_cap, brute_force_cap))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::Ekr { kind, n, r, caps, x, common } => {
            let kind = match kind {
                EkrArg::Sets => EkrKind::Sets { n: need(n, "n")?, r },
                EkrArg::Multi => EkrKind::Multi { n: need(n, "n")?, r },
                EkrArg::Seq => EkrKind::Seq { c: need(caps, "caps")?, r },
            };
            let v = verify_ekr(&kind, x.t, &x.u, &search_opts(common.report_cap, 0))?;
            finish_verification(v, &common, sink)
        }
        VerifyCmd::Properties { trials, suites } => properties(trials, suites, seed, sink),
    }
}

fn properties(trials: usize, suites: Vec<String>, seed: u64, sink: &Sink) -> Res<()> {
    let fmt = sink.format(Format::Text, &[Format::Json, Format::Text])?;
    if trials < MIN_TRIALS {
        return Err(Failure::Usage(format!("--trials must be at least {MIN_TRIALS}")));
    }
    let names: Vec<String> = if suites.is_empty() { suite_names().into_iter().map(String::from).collect() } else { suites };
    let outcomes: Vec<SuiteOutcome> = names.iter().map(|n| run_suite(n, seed, trials)).collect::<Result<_, _>>()?;
    match fmt {
        Format::Json => sink.json(&json!({ "seed": seed, "suites": outcomes }))?,
        _ => {
            let lines: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    let status = if o.passed() { "PASS" } else { "FAIL" };
                    let first = o.first_failure.as_deref().map(|f| format!(" first failure: {f}")).unwrap_or_default();
                    format!("{status} {} ({} trials, {} failures){first}", o.name, o.trials, o.failures)
                })
                .collect();
            sink.emit(&lines.join("\n"))?
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} property suite(s) failed")));
    }
    Ok(())
}

fn counterexample(which: CounterexampleCmd, sink: &Sink) -> Res<()> {
    sink.format(Format::Json, &[Format::Json])?;
    let (spec, with_families) = match which {
        CounterexampleCmd::Remark2 { n, t, x, with_families } => (CounterexampleSpec::Remark2 { n, t, x }, with_families),
        CounterexampleCmd::SeqLowcap { n, t, x, with_families } => {
            (CounterexampleSpec::SeqLowCap { n, t, x }, with_families)
        }
        CounterexampleCmd::MultiLown { n, t, r, with_families } => {
            (CounterexampleSpec::MultisetLowN { n, t, r }, with_families)
        }
    };
    let rep = build_counterexample(&spec)?;
    let mut v = serde_json::to_value(&rep).expect("report serializes");
    v["closed_forms_match"] = json!(rep.closed_forms_match());
    v["beats_star"] = json!(rep.beats_star());
    if with_families {
        let parse = |s: String| serde_json::from_str::<Value>(&s).expect("family json");
        v["families"] = match &rep.families {
            CounterexampleFamilies::Sets { family, spec, .. } => json!({
                "family": parse(family.to_json()),
                "weight": parse(spec.to_json()),
            }),
            CounterexampleFamilies::Labeled { a, b } => json!({ "a": parse(a.to_json()), "b": parse(b.to_json()) }),
            CounterexampleFamilies::Multiset { family } => json!({ "family": parse(family.to_json()) }),
        };
    }
    sink.json(&v)?;
    if !(rep.closed_forms_match() && rep.beats_star() && rep.cross_t_intersecting) {
        return Err(Failure::Check("construction does not behave as predicted".into()));
    }
    Ok(())
}

fn run_sweep(a: SweepArgs, sink: &Sink) -> Res<()> {
    let fmt = sink.format(Format::Csv, &[Format::Csv, Format::Json])?;
    let grid = sweep::Grid {
        kind: a.kind,
        m: a.m.0,
        n: a.n.map(|l| l.0),
        r: a.r.0,
        s: a.s.map(|l| l.0),
        t: a.t.0,
        u: a.u,
        cap: a.cap,
    };
    let existing = match &sink.out {
        Some(p) if fmt == Format::Csv && p.exists() && fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false) => {
            sweep::read_csv(p)?
        }
        _ => Vec::new(),
    };
    let records = sweep::run(&grid, existing, a.force, &SearchOptions::default())?;
    match fmt {
        Format::Json => sink.json(&serde_json::to_value(&records).expect("records serialize"))?,
        _ => sink.emit(&sweep::to_csv(&records)?)?,
    }
    let bad: Vec<String> = records
        .iter()
        .filter(|r| r.violation())
        .map(|r| format!("m={} n={} r={} s={} t={}", r.m, r.n, r.r, r.s, r.t))
        .collect();
    if !bad.is_empty() {
        return Err(Failure::Check(format!("theorem check failed at {}", bad.join("; "))));
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    let sink = Sink { format: cli.format, out: cli.out };
    match cli.cmd {
        Cmd::Gen(a) => gen(a, &sink),
        Cmd::Compress(a) => compress(a, &sink),
        Cmd::Bounds { which } => bounds(which, &sink),
        Cmd::Search(a) => search(a, &sink),
        Cmd::Verify { which } => verify(which, cli.seed, &sink),
        Cmd::Counterexample { which } => counterexample(which, &sink),
        Cmd::Sweep(a) => run_sweep(a, &sink),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
