use std::collections::BTreeMap;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraisse_core::ages::ages_equivalent_up_to;
use fraisse_core::amalgamation::{
    amalgamate, candidate_amalgams, certify_non_amalgamable, inclusion_span, is_amalgamation_base, AmalgError,
    BaseBounds, BaseVerdict, CertifyOutcome, NonAmalgCertificate, Span,
};
use fraisse_core::gadgets::{f_cycles, graph, kr_m2, kr_m3, m0_prefix, r_cycles, w_mn, w_sigma, z_chain};
use fraisse_core::limits::{
    back_and_forth, build_limit, check_extension_property, clause_iii, cofinal_extension, DiagonalSchedule,
    Direction, LimitError, WitnessPack,
};
use fraisse_core::{enumerate_embeddings, Elem, FinStructure};
use serde_json::{json, Value};

use crate::descriptor::{from_flag, resolve};
use crate::dot::to_dot;
use crate::wire::{emit, parse, LimitPrefixJson, PointedJson, SpanJson, StructureJson};
use crate::CliError;

/// Default cap on `candidate_amalgams` when `FF_MAX_CANDIDATES` is unset.
pub const DEFAULT_MAX_CANDIDATES: u64 = 100_000;
const DEFAULT_BUDGET: u64 = 1 << 20;

#[derive(Parser, Debug)]
#[command(name = "fraisse", version, about = "Finite structures, ages, amalgamation and limit prefixes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a gadget structure
    Gadget(GadgetArgs),
    /// List every embedding of a pointed structure into a structure
    Embeddings(EmbeddingsArgs),
    /// Amalgamate a span inside an age, or certify that it cannot be
    Amalgamate(AmalgamateArgs),
    /// Look for a span over a pointed structure that has no amalgam
    CheckBase(CheckBaseArgs),
    /// Run the staged limit construction
    BuildLimit(BuildLimitArgs),
    /// Extend a partial isomorphism inside a limit prefix
    ExtendIso(ExtendIsoArgs),
    /// Check the cofinal extension property on marker tuples
    CheckExtProp(CheckExtPropArgs),
    /// Compare two ages on members up to a size
    AgeEquiv(AgeEquivArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetKind {
    Graph,
    Kf,
    Kr,
    #[value(name = "kr_m2")]
    KrM2,
    #[value(name = "kr_m3")]
    KrM3,
    #[value(name = "z_chain")]
    ZChain,
    M0,
    #[value(name = "w_mn")]
    WMn,
    #[value(name = "w_sigma")]
    WSigma,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Dot,
}

#[derive(Args, Debug)]
pub struct GadgetArgs {
    #[arg(value_enum)]
    pub kind: GadgetKind,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Isolated pad elements
    #[arg(long, default_value_t = 0)]
    pub padding: u64,
    /// Cycle lengths, comma separated
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<u64>,
    /// Edges as `a-b`, comma separated
    #[arg(long, value_delimiter = ',')]
    pub edges: Vec<String>,
    /// 0/1 string
    #[arg(long, default_value = "")]
    pub sigma: String,
    /// 0/1 string
    #[arg(long, default_value = "")]
    pub phi: String,
    /// Maximum cycle length for m0
    #[arg(long)]
    pub len: Option<u64>,
    /// Copies of each cycle for m0
    #[arg(long)]
    pub copies: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
}

#[derive(Args, Debug)]
pub struct EmbeddingsArgs {
    /// Pointed structure JSON (tuple optional)
    #[arg(long)]
    pub source: String,
    /// Structure JSON
    #[arg(long)]
    pub target: String,
}

#[derive(Args, Debug)]
pub struct SpanInput {
    /// Span JSON
    #[arg(long, conflicts_with_all = ["base", "left", "right"])]
    pub span: Option<String>,
    /// Base for an inclusion span
    #[arg(long, requires_all = ["left", "right"])]
    pub base: Option<String>,
    #[arg(long)]
    pub left: Option<String>,
    #[arg(long)]
    pub right: Option<String>,
}

#[derive(Args, Debug)]
pub struct AmalgamateArgs {
    /// Age name (graphs, kf, kr, z, w_mn:M,N) or descriptor JSON path
    #[arg(long)]
    pub age: String,
    #[command(flatten)]
    pub input: SpanInput,
    /// Largest amalgam considered; default |B| + |C|
    #[arg(long)]
    pub amalg_bound: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Exhaust all candidates and certify failure instead of searching
    #[arg(long)]
    pub certify: bool,
    /// Also list every candidate shape
    #[arg(long)]
    pub list_candidates: bool,
}

#[derive(Args, Debug)]
pub struct CheckBaseArgs {
    #[arg(long)]
    pub age: String,
    #[arg(long)]
    pub pointed: String,
    /// Largest span codomain; default |A| + 4
    #[arg(long)]
    pub span_bound: Option<usize>,
    /// Largest amalgam; default |B| + |C|
    #[arg(long)]
    pub amalg_bound: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessKind {
    /// Identity extensions and disjoint unions
    Free,
    /// Bounded base and amalgam searches
    Searched,
}

#[derive(Args, Debug)]
pub struct BuildLimitArgs {
    #[arg(long)]
    pub age: String,
    #[arg(long)]
    pub stages: usize,
    /// New elements allowed per extension
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, value_enum, default_value = "free")]
    pub witnesses: WitnessKind,
    #[arg(long)]
    pub span_bound: Option<usize>,
    #[arg(long)]
    pub amalg_bound: Option<usize>,
    /// Elements added when searching for a base
    #[arg(long, default_value_t = 2)]
    pub extend_by: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct ExtendIsoArgs {
    /// Limit prefix JSON
    #[arg(long)]
    pub prefix: String,
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<Elem>,
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<Elem>,
    /// Single cofinal extension along this tuple instead of back and forth
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<Elem>>,
    #[arg(long, default_value_t = 6)]
    pub rounds: usize,
}

#[derive(Args, Debug)]
pub struct CheckExtPropArgs {
    /// Limit prefix JSON; its markers are used
    #[arg(long, conflicts_with_all = ["structure", "markers"])]
    pub prefix: Option<String>,
    #[arg(long, requires = "markers")]
    pub structure: Option<String>,
    /// JSON list of tuples
    #[arg(long)]
    pub markers: Option<String>,
    #[arg(long)]
    pub size: usize,
}

#[derive(Args, Debug)]
pub struct AgeEquivArgs {
    #[arg(long)]
    pub age: String,
    #[arg(long)]
    pub other: String,
    #[arg(long)]
    pub size: usize,
    /// Members scanned per age; default is what both ages need for --size
    #[arg(long)]
    pub budget: Option<u64>,
}

/// Result of a command: stdout text and exit code (0 or 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn definite(v: &Value) -> Self {
        Output { stdout: emit(v), code: 0 }
    }
    fn open(v: &Value) -> Self {
        Output { stdout: emit(v), code: 2 }
    }
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn read_structure(path: &str) -> Result<FinStructure, CliError> {
    parse::<StructureJson>(&read(path)?, path)?.to_structure()
}

fn read_pointed(path: &str) -> Result<fraisse_core::Pointed, CliError> {
    parse::<PointedJson>(&read(path)?, path)?.to_pointed()
}

/// Cap from `FF_MAX_CANDIDATES`.
pub fn max_candidates() -> Result<u64, CliError> {
    match std::env::var("FF_MAX_CANDIDATES") {
        Err(_) => Ok(DEFAULT_MAX_CANDIDATES),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("FF_MAX_CANDIDATES is not a number: `{s}`"))),
    }
}

pub fn dispatch(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Gadget(a) => gadget(a),
        Command::Embeddings(a) => embeddings(a),
        Command::Amalgamate(a) => amalgamate_cmd(a),
        Command::CheckBase(a) => check_base(a),
        Command::BuildLimit(a) => build_limit_cmd(a),
        Command::ExtendIso(a) => extend_iso(a),
        Command::CheckExtProp(a) => check_ext_prop(a),
        Command::AgeEquiv(a) => age_equiv(a),
    }
}

fn bits(s: &str, flag: &str) -> Result<Vec<u8>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Input(format!("--{flag} must be a 0/1 string"))),
        })
        .collect()
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("missing --{flag}")))
}

fn gadget(a: GadgetArgs) -> Result<Output, CliError> {
    let gerr = |e: fraisse_core::gadgets::GadgetError| CliError::Input(format!("{e}"));
    let mut names = BTreeMap::new();
    let m = match a.kind {
        GadgetKind::Graph => {
            let mut edges = Vec::new();
            for e in &a.edges {
                let parsed = e
                    .split_once('-')
                    .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)));
                let (x, y): (Elem, Elem) = parsed.ok_or_else(|| CliError::Input(format!("bad edge `{e}`")))?;
                edges.push((x, y));
            }
            let n = need(a.n, "n")?;
            if edges.iter().any(|&(x, y)| x == y || x >= n || y >= n) {
                return Err(CliError::Input("edges must join distinct vertices below --n".into()));
            }
            graph(n, &edges)
        }
        GadgetKind::Kf | GadgetKind::Kr => {
            if a.lengths.iter().any(|&l| l != 2 && l != 3) {
                return Err(CliError::Input("cycle lengths must be 2 or 3".into()));
            }
            if a.kind == GadgetKind::Kf {
                f_cycles(&a.lengths)
            } else {
                r_cycles(&a.lengths)
            }
        }
        GadgetKind::KrM2 => kr_m2(),
        GadgetKind::KrM3 => kr_m3(),
        GadgetKind::ZChain => z_chain(need(a.n, "n")?),
        GadgetKind::M0 => m0_prefix(need(a.len, "len")?, need(a.copies, "copies")?).map_err(gerr)?,
        GadgetKind::WMn => {
            let g = w_mn(need(a.m, "m")?, need(a.n, "n")?, a.padding).map_err(gerr)?;
            names = g.names;
            g.structure
        }
        GadgetKind::WSigma => {
            let g = w_sigma(&bits(&a.sigma, "sigma")?, &bits(&a.phi, "phi")?).map_err(gerr)?;
            names = g.names;
            g.structure
        }
    };
    let stdout = match a.out {
        OutFormat::Json => emit(&StructureJson::from(&m)),
        OutFormat::Dot => to_dot(&m, &names),
    };
    Ok(Output { stdout, code: 0 })
}

fn embeddings(a: EmbeddingsArgs) -> Result<Output, CliError> {
    let src = read_pointed(&a.source)?;
    let dst = read_structure(&a.target)?;
    if src.sig() != dst.sig() {
        return Err(CliError::Input("source and target signatures differ".into()));
    }
    let mut images = enumerate_embeddings(&src, &dst);
    images.sort();
    Ok(Output::definite(&json!({
        "tuple": src.tuple(),
        "count": images.len(),
        "images": images,
    })))
}

fn read_span(input: &SpanInput) -> Result<Span, CliError> {
    if let Some(path) = &input.span {
        return parse::<SpanJson>(&read(path)?, path)?.to_span();
    }
    let (Some(base), Some(left), Some(right)) = (&input.base, &input.left, &input.right) else {
        return Err(CliError::Input("give --span, or --base with --left and --right".into()));
    };
    let (a, b, c) = (read_pointed(base)?, read_pointed(left)?, read_pointed(right)?);
    inclusion_span(&a, &b, &c).map_err(|e| CliError::Input(format!("{e}")))
}

fn certificate_json(c: &NonAmalgCertificate) -> Value {
    json!({
        "span": SpanJson::from(&c.span),
        "bound": c.bound,
        "exhausted_candidates": u64::try_from(c.exhausted_candidates).unwrap_or(u64::MAX),
        "reasons": c.reasons,
    })
}

fn diagram_json(d: &fraisse_core::amalgamation::AmalgDiagram) -> Value {
    json!({
        "amalgam": PointedJson::from(d.g0.codom()),
        "g0": d.g0.image,
        "g1": d.g1.image,
    })
}

fn over_cap(c: &NonAmalgCertificate, cap: u64) -> bool {
    c.exhausted_candidates > cap as u128
}

fn amalgamate_cmd(a: AmalgamateArgs) -> Result<Output, CliError> {
    let age = resolve(&from_flag(&a.age)?)?;
    let span = read_span(&a.input)?;
    if span.base().sig() != age.sig() {
        return Err(CliError::Input("span signature differs from the age".into()));
    }
    let bound = a
        .amalg_bound
        .unwrap_or(span.f0.codom().len() + span.f1.codom().len());
    let cap = max_candidates()?;
    let mut out = json!({ "bound": bound });
    if a.list_candidates {
        match candidate_amalgams(&span, bound, cap) {
            Ok(cands) => {
                out["candidates"] = cands
                    .iter()
                    .map(|c| {
                        json!({
                            "structure": StructureJson::from(&c.structure),
                            "h1": c.h1.iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>(),
                            "identifications": c.identifications,
                            "cross_tuples": c.cross_tuples,
                        })
                    })
                    .collect();
            }
            Err(AmalgError::CandidateCapExceeded(cap)) => {
                out["verdict"] = json!("candidate-cap-exceeded");
                out["cap"] = json!(cap);
                return Ok(Output::open(&out));
            }
            Err(e) => return Err(amalg_err(e)),
        }
    }
    if a.certify {
        match certify_non_amalgamable(&age, &span, bound) {
            CertifyOutcome::Certified(c) if over_cap(&c, cap) => {
                out["verdict"] = json!("candidate-cap-exceeded");
                out["cap"] = json!(cap);
                Ok(Output::open(&out))
            }
            CertifyOutcome::Certified(c) => {
                out["verdict"] = json!("certified-non-amalgamable");
                out["certificate"] = certificate_json(&c);
                Ok(Output::definite(&out))
            }
            CertifyOutcome::Amalgamable(d) => {
                out["verdict"] = json!("amalgamated");
                out["diagram"] = diagram_json(&d);
                Ok(Output::definite(&out))
            }
            CertifyOutcome::Unknown(reason) => {
                out["verdict"] = json!("unknown");
                out["reason"] = json!(reason);
                Ok(Output::open(&out))
            }
        }
    } else {
        match amalgamate(&age, &span, bound, a.budget) {
            Ok(d) => {
                out["verdict"] = json!(if span.is_true_span() { "amalgamated" } else { "degenerate" });
                out["diagram"] = diagram_json(&d);
                Ok(Output::definite(&out))
            }
            Err(AmalgError::NotFoundWithinBound) => {
                out["verdict"] = json!("not-found-within-bound");
                Ok(Output::open(&out))
            }
            Err(e) => Err(amalg_err(e)),
        }
    }
}

fn amalg_err(e: AmalgError) -> CliError {
    match e {
        AmalgError::NotFoundWithinBound | AmalgError::CandidateCapExceeded(_) => CliError::Exhausted(format!("{e}")),
        AmalgError::Age(fraisse_core::ages::AgeError::BudgetExhausted)
        | AmalgError::Age(fraisse_core::ages::AgeError::NotFoundWithinBound) => CliError::Exhausted(format!("{e}")),
        _ => CliError::Input(format!("{e}")),
    }
}

fn check_base(a: CheckBaseArgs) -> Result<Output, CliError> {
    let age = resolve(&from_flag(&a.age)?)?;
    let p = read_pointed(&a.pointed)?;
    if p.sig() != age.sig() {
        return Err(CliError::Input("pointed structure signature differs from the age".into()));
    }
    let bounds = BaseBounds {
        span_bound: a.span_bound,
        amalg_bound: a.amalg_bound,
        budget: a.budget,
    };
    let cap = max_candidates()?;
    match is_amalgamation_base(&age, &p, bounds).map_err(amalg_err)? {
        BaseVerdict::CertifiedNotBase {
            certificate,
            span_index,
            ..
        } => {
            let v = json!({
                "verdict": "certified-not-base",
                "span_index": span_index,
                "certificate": certificate_json(&certificate),
            });
            if over_cap(&certificate, cap) {
                return Ok(Output::open(&json!({ "verdict": "candidate-cap-exceeded", "cap": cap })));
            }
            Ok(Output::definite(&v))
        }
        BaseVerdict::NoCounterexampleUpTo {
            span_bound,
            amalg_bound,
            spans_checked,
            unknown_spans,
        } => {
            let v = json!({
                "verdict": "no-counterexample-up-to",
                "span_bound": span_bound,
                "amalg_bound": amalg_bound,
                "spans_checked": spans_checked,
                "unknown_spans": unknown_spans,
            });
            Ok(if unknown_spans == 0 { Output::definite(&v) } else { Output::open(&v) })
        }
    }
}

fn limit_err(e: LimitError) -> CliError {
    match e {
        LimitError::NotExtendableInPrefix { .. } | LimitError::WitnessFailure(_) => CliError::Exhausted(format!("{e}")),
        LimitError::Amalg(a) => amalg_err(a),
        LimitError::Age(fraisse_core::ages::AgeError::BudgetExhausted)
        | LimitError::Age(fraisse_core::ages::AgeError::NotFoundWithinBound) => CliError::Exhausted(format!("{e}")),
        _ => CliError::Input(format!("{e}")),
    }
}

fn build_limit_cmd(a: BuildLimitArgs) -> Result<Output, CliError> {
    let age = Arc::new(resolve(&from_flag(&a.age)?)?);
    let w = match a.witnesses {
        WitnessKind::Free => WitnessPack::free(age.clone(), a.budget),
        WitnessKind::Searched => WitnessPack::searched(
            age.clone(),
            BaseBounds {
                span_bound: a.span_bound,
                amalg_bound: a.amalg_bound,
                budget: a.budget,
            },
            a.extend_by,
        ),
    };
    let prefix = build_limit(&age, &w, a.stages, &DiagonalSchedule { depth: a.depth }).map_err(limit_err)?;
    Ok(Output {
        stdout: emit(&LimitPrefixJson::from(&prefix)),
        code: 0,
    })
}

fn read_prefix(path: &str) -> Result<fraisse_core::limits::LimitPrefix, CliError> {
    parse::<LimitPrefixJson>(&read(path)?, path)?.to_prefix()
}

fn extend_iso(a: ExtendIsoArgs) -> Result<Output, CliError> {
    let prefix = read_prefix(&a.prefix)?;
    if let Some(c) = &a.c {
        let ext = cofinal_extension(&prefix, &a.a, &a.b, c).map_err(limit_err)?;
        let lit = clause_iii(&prefix.structure, &a.a, &a.b, c, &ext.d).map_err(|e| CliError::Input(format!("{e}")))?;
        return Ok(Output::definite(&json!({
            "d": ext.d,
            "status": ext.status.name(),
            "clause_iii": lit,
        })));
    }
    let iso = back_and_forth(&prefix, &a.a, &a.b, a.rounds).map_err(limit_err)?;
    let rounds: Vec<Value> = iso
        .rounds
        .iter()
        .map(|r| {
            json!({
                "direction": match r.direction { Direction::Forth => "forth", Direction::Back => "back" },
                "target": r.target,
                "marker": r.marker,
                "a": r.a,
                "b": r.b,
                "status": r.status.name(),
            })
        })
        .collect();
    Ok(Output::definite(&json!({
        "pairs": iso.pairs.iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>(),
        "domain_tuple": iso.domain_tuple,
        "range_tuple": iso.range_tuple,
        "status": iso.status.name(),
        "rounds": rounds,
    })))
}

fn check_ext_prop(a: CheckExtPropArgs) -> Result<Output, CliError> {
    let (structure, markers) = match (&a.prefix, &a.structure, &a.markers) {
        (Some(p), _, _) => {
            let p = read_prefix(p)?;
            (p.structure, p.markers)
        }
        (None, Some(s), Some(m)) => {
            let s = read_structure(s)?;
            let markers: Vec<Vec<Elem>> = parse(&read(m)?, m)?;
            if markers.iter().flatten().any(|x| !s.contains(*x)) {
                return Err(CliError::Input("a marker leaves the domain".into()));
            }
            (s, markers)
        }
        _ => return Err(CliError::Input("give --prefix, or --structure with --markers".into())),
    };
    let rep = check_extension_property(&structure, &markers, a.size);
    let failures: Vec<Value> = rep
        .failures
        .iter()
        .map(|f| json!({ "a": f.a, "b": f.b, "c": f.c }))
        .collect();
    Ok(Output::definite(&json!({
        "size_bound": rep.size_bound,
        "checked": rep.checked,
        "passed": rep.passed(),
        "failures": failures,
    })))
}

fn age_equiv(a: AgeEquivArgs) -> Result<Output, CliError> {
    let a0 = resolve(&from_flag(&a.age)?)?;
    let a1 = resolve(&from_flag(&a.other)?)?;
    if a0.sig() != a1.sig() {
        return Ok(Output::definite(&json!({ "size": a.size, "equivalent": false, "reason": "signatures differ" })));
    }
    let budget = match a.budget {
        Some(b) => b,
        None => match (a0.scan_budget(a.size), a1.scan_budget(a.size)) {
            (Some(x), Some(y)) => x.max(y),
            _ => DEFAULT_BUDGET,
        },
    };
    match ages_equivalent_up_to(&a0, &a1, a.size, budget) {
        Ok(eq) => Ok(Output::definite(&json!({ "size": a.size, "budget": budget, "equivalent": eq }))),
        Err(fraisse_core::ages::AgeError::BudgetExhausted) => Ok(Output::open(&json!({
            "size": a.size,
            "equivalent": Value::Null,
            "reason": "budget exhausted",
        }))),
        Err(e) => Err(CliError::Input(format!("{e}"))),
    }
}
