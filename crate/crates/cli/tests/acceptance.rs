//! Acceptance suite. One PASS/FAIL line per criterion, each with its time
//! limit. Every check is exact; the only tolerances are the wall-clock
//! limits below.
//!
//! Pinned constants come from brute-force oracles run once and frozen here.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fraisse::wire::{emit, LimitPrefixJson, StructureJson};
use fraisse_core::ages::Age;
use fraisse_core::amalgamation::{
    amalgamate, certify_non_amalgamable, inclusion_span, is_amalgamation_base, spans_over, BaseBounds,
    BaseVerdict, CertifyOutcome,
};
use fraisse_core::embeddings::{check_category_laws, compose, enumerate_embeddings, is_embedding};
use fraisse_core::gadgets::*;
use fraisse_core::limits::{
    back_and_forth, build_limit, check_extension_property, clause_iii, cofinal_witness, DiagonalSchedule,
    Direction, ExtensionStatus, LimitPrefix, WitnessPack,
};
use fraisse_core::structure::{cl_sim, closure_set, for_each_tuple, induced_substructure};
use fraisse_core::{Elem, FinStructure, Pointed, PotentialEmbedding};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde_json::Value;

const SEED: u64 = 0x5eed_0001;
const CATEGORY_TRIPLES_PER_AGE: usize = 150;

/// Graphs limit: stages built, and the largest stage whose elements have
/// every one-point extension over at most two of them inside `B_n`.
const EP_STAGES: usize = 2048;
const EP_HORIZON: usize = 42;
/// Graphs limit for back and forth, its stage horizon, and the number of
/// `cl_sim` pairs of cofinal tuples of length at most two over `B_h`:
/// 1 empty, 16 of length one, 16 of the form `(x, x)`, 144 with distinct
/// entries.
const BNF_STAGES: usize = 1024;
const BNF_HORIZON: usize = 26;
const BNF_PAIRS: usize = 177;
const BNF_ROUNDS: usize = 6;

/// `(m, n, j*)`: roots plus the first `j` elements of every chain are
/// certified not a base for `j < j*` and show no counterexample for
/// `j >= j*`, with spans of at most `|A| + m + 1` elements.
const W_THRESHOLDS: [(u64, u64, u64); 2] = [(1, 2, 2), (2, 4, 3)];

/// Criteria that cannot hold as stated; see the note on `category_laws`.
const EXPECTED_FAIL: [usize; 1] = [1];

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return fail(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------- 1

/// Small pointed members of an age: every tuple of length at most 3 that
/// generates one of its types with at most 3 elements.
fn small_pointed(age: &Age, max_size: usize) -> Vec<Pointed> {
    let mut out = Vec::new();
    for t in age.types_up_to(max_size, 0).unwrap() {
        let dom = t.domain().to_vec();
        for len in 0..=3 {
            for_each_tuple(&dom, len, |tup| {
                if closure_set(&t, tup).unwrap().len() == t.len() {
                    out.push(Pointed::new(tup.to_vec(), t.clone()).unwrap());
                }
            });
        }
    }
    out
}

fn random_map(rng: &mut StdRng, a: &Pointed, b: &Pointed) -> Option<PotentialEmbedding> {
    let embs = enumerate_embeddings(a, b.structure());
    let image = if !embs.is_empty() && rng.random_bool(0.5) {
        embs[rng.random_range(0..embs.len())].clone()
    } else {
        let dom = b.structure().domain();
        if dom.is_empty() && !a.tuple().is_empty() {
            return None;
        }
        (0..a.tuple().len()).map(|_| dom[rng.random_range(0..dom.len())]).collect()
    };
    Some(PotentialEmbedding::new(a.clone(), b.clone(), image).unwrap())
}

/// Morphisms are all potential embeddings, as in the category built from
/// an age. When `G` is not an embedding, `G . F` takes `range(G)`, whose
/// length is that of `dom(G)`'s tuple, not `dom(F)`'s; re-association can
/// then disagree. Expected to fail; the counterexamples are reported.
fn category_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut triples = Vec::new();
    for age in [graphs_age(), kf_age(), kr_age(), z_age()] {
        let objs = small_pointed(&age, 3);
        let mut made = 0;
        while made < CATEGORY_TRIPLES_PER_AGE {
            let pick = |rng: &mut StdRng| objs[rng.random_range(0..objs.len())].clone();
            let (a, b, c, d) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let (Some(f), Some(g), Some(h)) = (
                random_map(&mut rng, &a, &b),
                random_map(&mut rng, &b, &c),
                random_map(&mut rng, &c, &d),
            ) else {
                continue;
            };
            triples.push((f, g, h));
            made += 1;
        }
    }
    let rep = check_category_laws(&triples);
    let embeddings_only: Vec<_> = triples
        .iter()
        .filter(|(f, g, h)| is_embedding(f) && is_embedding(g) && is_embedding(h))
        .cloned()
        .collect();
    let emb_rep = check_category_laws(&embeddings_only);
    let summary = format!(
        "{} triples: {} associativity failures, {} identity failures, {} closure failures \
         ({} checked); all-embedding triples: {} of {} fail associativity",
        rep.triples,
        rep.associativity_failures.len(),
        rep.identity_failures.len(),
        rep.closure_failures.len(),
        rep.closure_checked,
        emb_rep.associativity_failures.len(),
        emb_rep.triples,
    );
    ensure!(rep.triples >= 500, "only {} triples", rep.triples);
    ensure!(rep.composability_errors.is_empty(), "composability errors: {summary}");
    if !rep.passed() {
        let i = rep.associativity_failures.first().copied();
        let example = i.map(|i| {
            let (f, g, h) = &triples[i];
            let left = compose(&compose(f, g).unwrap(), h).unwrap();
            let right = compose(f, &compose(g, h).unwrap()).unwrap();
            format!("; e.g. (H.G).F range {:?} vs H.(G.F) range {:?}", right.image, left.image)
        });
        return fail(format!("{summary}{}", example.unwrap_or_default()));
    }
    pass(summary)
}

// ---------------------------------------------------------------- 2

fn oracle_equivalence() -> Outcome {
    let mut pairs = 0usize;
    for age in [graphs_age(), kf_age(), kr_age()] {
        let targets = age.types_up_to(5, 0).unwrap();
        let mut sources = small_pointed(&age, 3);
        for t in age.types_up_to(4, 0).unwrap().into_iter().filter(|t| t.len() == 4) {
            sources.push(Pointed::whole(t));
        }
        for b in &targets {
            ensure!(b.len() <= 5, "target too large");
            let bp = Pointed::whole(b.clone());
            for a in &sources {
                let fast: BTreeSet<Vec<Elem>> = enumerate_embeddings(a, b).into_iter().collect();
                let mut slow = BTreeSet::new();
                for_each_tuple(b.domain(), a.tuple().len(), |t| {
                    let f = PotentialEmbedding {
                        src: a.clone(),
                        dst: bp.clone(),
                        image: t.to_vec(),
                    };
                    if is_embedding(&f) {
                        slow.insert(t.to_vec());
                    }
                });
                ensure!(fast == slow, "mismatch for {:?} into {:?}", a.tuple(), b);
                pairs += 1;
            }
        }
    }
    pass(format!("{pairs} source/target pairs agree"))
}

// ---------------------------------------------------------------- 3

fn kr_versus_kf() -> Outcome {
    let age = kr_age();
    let mut x = FinStructure::new(kr_sig());
    x.add_element(0);
    let span = inclusion_span(&Pointed::whole(x), &Pointed::whole(kr_m2()), &Pointed::whole(kr_m3())).unwrap();
    let certified = match certify_non_amalgamable(&age, &span, 5) {
        CertifyOutcome::Certified(c) => c.exhausted_candidates,
        other => return fail(format!("K_R span not certified: {other:?}")),
    };
    // In K_f a point generates its whole orbit; the span sits over the
    // empty closed substructure.
    let kf = kf_age();
    let empty = Pointed::whole(FinStructure::new(kf_sig()));
    let two = f_cycles(&[2]);
    let three = f_cycles(&[3]).rename(&(0..3).map(|i| (i, i + 2)).collect());
    let span = inclusion_span(&empty, &Pointed::whole(two.clone()), &Pointed::whole(three.clone())).unwrap();
    let d = match amalgamate(&kf, &span, 5, 1 << 16) {
        Ok(d) => d,
        Err(e) => return fail(format!("K_f span did not amalgamate: {e}")),
    };
    ensure!(d.check().is_ok(), "K_f diagram fails its check");
    let g0: BTreeSet<Elem> = d.g0.image.iter().copied().collect();
    let g1: BTreeSet<Elem> = d.g1.image.iter().copied().collect();
    let disjoint = g0.is_disjoint(&g1) && d.g0.codom().len() == two.len() + three.len();
    ensure!(disjoint, "K_f amalgam is not the disjoint union");
    pass(format!("K_R certificate over {certified} candidates; K_f disjoint union of 2+3"))
}

// ---------------------------------------------------------------- 4

fn graphs_have_ap() -> Outcome {
    let age = graphs_age();
    let mut spans = 0;
    let mut bases = 0;
    for a in age.types_up_to(4, 0).unwrap() {
        let a = Pointed::whole(a);
        for span in spans_over(&age, &a, 4, 1 << 20).unwrap() {
            ensure!(span.is_true_span(), "spans_over produced a non-embedding leg");
            let bound = span.f0.codom().len() + span.f1.codom().len();
            match amalgamate(&age, &span, bound, 1 << 20) {
                Ok(d) if d.check().is_ok() => {}
                other => return fail(format!("span over {:?} failed: {other:?}", a.structure())),
            }
            spans += 1;
        }
        let bounds = BaseBounds {
            span_bound: Some(4),
            ..BaseBounds::default()
        };
        let v = is_amalgamation_base(&age, &a, bounds).unwrap();
        ensure!(!v.is_not_base(), "{:?} certified not a base", a.structure());
        bases += 1;
    }
    pass(format!("{spans} spans amalgamated, {bases} bases with no counterexample"))
}

// ---------------------------------------------------------------- 5

fn w_dichotomy() -> Outcome {
    let mut notes = Vec::new();
    for (m, n, pinned) in W_THRESHOLDS {
        let age = w_mn_age(m, n).unwrap();
        let g = w_mn(m, n, 0).unwrap();
        let roots: BTreeSet<Elem> = [g.q_plus, g.q_minus].into();
        let a = Pointed::whole(induced_substructure(&g.structure, &roots).unwrap());
        let v = is_amalgamation_base(&age, &a, BaseBounds::default()).unwrap();
        ensure!(v.is_not_base(), "W({m},{n}) roots not certified: {v:?}");
        let mut verdicts = Vec::new();
        for j in 0..=n {
            let a = Pointed::whole(root_core_prefix(&g, j));
            let bounds = BaseBounds {
                span_bound: Some(a.len() + m as usize + 1),
                ..BaseBounds::default()
            };
            let v = is_amalgamation_base(&age, &a, bounds).unwrap();
            if let BaseVerdict::NoCounterexampleUpTo { unknown_spans, .. } = v {
                ensure!(unknown_spans == 0, "W({m},{n}) j={j}: {unknown_spans} unknown spans");
            }
            verdicts.push(v.is_not_base());
        }
        ensure!(!verdicts[n as usize], "W({m},{n}) maximal core certified not a base");
        let threshold = verdicts.iter().position(|nb| !nb).unwrap() as u64;
        ensure!(
            verdicts[threshold as usize..].iter().all(|nb| !nb),
            "W({m},{n}) verdicts are not monotone: {verdicts:?}"
        );
        ensure!(threshold == pinned, "W({m},{n}) threshold {threshold}, pinned {pinned}");
        notes.push(format!("W({m},{n}) j*={threshold}"));
    }
    pass(notes.join(", "))
}

// ---------------------------------------------------------------- 6

fn has_two_point_ep(m: &FinStructure, s: &[Elem]) -> bool {
    let adj = |x: Elem, y: Elem| m.holds(0, &[x, y]);
    for &u in s {
        for want in [false, true] {
            if !m.domain().iter().any(|&y| y != u && adj(u, y) == want) {
                return false;
            }
        }
        for &v in s.iter().filter(|&&v| v > u) {
            for (wu, wv) in [(false, false), (false, true), (true, false), (true, true)] {
                let found = m
                    .domain()
                    .iter()
                    .any(|&y| y != u && y != v && adj(u, y) == wu && adj(v, y) == wv);
                if !found {
                    return false;
                }
            }
        }
    }
    true
}

fn ep_horizon(p: &LimitPrefix) -> usize {
    let mut best = 0;
    for h in 0..p.markers.len() {
        let dom = p.stage_structure(h).unwrap().domain().to_vec();
        if !has_two_point_ep(&p.structure, &dom) {
            break;
        }
        best = h;
    }
    best
}

fn graphs_limit(stages: usize) -> LimitPrefix {
    let age = Arc::new(graphs_age());
    let w = WitnessPack::free(age.clone(), 1 << 16);
    build_limit(&age, &w, stages, &DiagonalSchedule::new()).unwrap()
}

fn limit_fidelity() -> Outcome {
    let p = graphs_limit(EP_STAGES);
    let q = graphs_limit(EP_STAGES + 10);
    let horizon = ep_horizon(&p);
    ensure!(horizon == EP_HORIZON, "horizon {horizon}, pinned {EP_HORIZON}");
    let bh = p.stage_structure(EP_HORIZON).unwrap();
    ensure!(has_two_point_ep(&p.structure, bh.domain()), "EP fails on B_{EP_HORIZON}");
    ensure!(validate_graph(&q.structure).is_ok(), "longer prefix is not a graph");
    let dom: BTreeSet<Elem> = p.structure.domain().iter().copied().collect();
    ensure!(
        induced_substructure(&q.structure, &dom).unwrap() == p.structure,
        "B_n is not induced in B_(n+10)"
    );
    ensure!(q.markers[..p.markers.len()] == p.markers[..], "markers diverge");
    ensure!(q.stage_log[..p.stage_log.len()] == p.stage_log[..], "stage logs diverge");
    pass(format!(
        "|B_{EP_STAGES}|={}, EP up to B_{EP_HORIZON} ({} elements), n+10 refines",
        p.structure.len(),
        bh.len()
    ))
}

// ---------------------------------------------------------------- 7

fn back_and_forth_soundness() -> Outcome {
    let p = graphs_limit(BNF_STAGES);
    let m = &p.structure;
    let bh = p.stage_structure(BNF_HORIZON).unwrap();
    let mut cofinal = Vec::new();
    for len in 0..=2 {
        for_each_tuple(bh.domain(), len, |t| {
            if cofinal_witness(&p, t).unwrap().is_some() {
                cofinal.push(t.to_vec());
            }
        });
    }
    let mut pairs = 0;
    for a in &cofinal {
        for b in &cofinal {
            if a.len() != b.len() || !cl_sim(a, m, b, m).unwrap() {
                continue;
            }
            pairs += 1;
            let iso = match back_and_forth(&p, a, b, BNF_ROUNDS) {
                Ok(iso) => iso,
                Err(e) => return fail(format!("{a:?} -> {b:?}: {e}")),
            };
            ensure!(iso.rounds.len() == BNF_ROUNDS, "{a:?} -> {b:?}: {} rounds", iso.rounds.len());
            ensure!(iso.status == ExtensionStatus::ExtendsToIso, "{a:?} -> {b:?}: pattern only");
            let (mut pa, mut pb) = (a.clone(), b.clone());
            for (r, round) in iso.rounds.iter().enumerate() {
                ensure!(cl_sim(&round.a, m, &round.b, m).unwrap(), "{a:?} -> {b:?}: round {r} not cl_sim");
                let lit = match round.direction {
                    Direction::Forth => clause_iii(m, &pa, &pb, &round.a, &round.b),
                    Direction::Back => clause_iii(m, &pb, &pa, &round.b, &round.a),
                };
                ensure!(lit.unwrap(), "{a:?} -> {b:?}: clause (III) fails at round {r}");
                pa = round.a.clone();
                pb = round.b.clone();
            }
        }
    }
    ensure!(pairs == BNF_PAIRS, "{pairs} pairs, pinned {BNF_PAIRS}");
    pass(format!("{pairs} pairs over B_{BNF_HORIZON}, {BNF_ROUNDS} rounds each"))
}

// ---------------------------------------------------------------- 8

fn iota_restriction(from: &RootGadget, to: &RootGadget, s: &BTreeSet<Elem>) -> PotentialEmbedding {
    let map = iota(from, to).unwrap();
    let src = Pointed::whole(induced_substructure(&from.structure, s).unwrap());
    let image = src.tuple().iter().map(|x| map[x]).collect();
    PotentialEmbedding {
        src,
        dst: to.pointed(),
        image,
    }
}

fn with_bit(sigma: &[u8], bit: u8) -> Vec<u8> {
    let mut s = sigma.to_vec();
    s.push(bit);
    s
}

fn w_sigma_obstruction() -> Outcome {
    let phi = [1, 0, 1, 0, 1];
    let sigmas: Vec<Vec<u8>> = (2..=3)
        .flat_map(|len| (0..1u32 << len).map(move |bits| (0..len).map(|i| (bits >> i & 1) as u8).collect()))
        .collect();
    for sigma in &sigmas {
        let g0 = w_sigma(&with_bit(sigma, 0), &phi).unwrap();
        let g1 = w_sigma(&with_bit(sigma, 1), &phi).unwrap();
        let all: BTreeSet<Elem> = g0.structure.domain().iter().copied().collect();
        let f = iota_restriction(&g0, &g1, &all);
        let onto = f.image.iter().copied().collect::<BTreeSet<_>>().len() == g1.structure.len();
        ensure!(is_embedding(&f) && onto, "iota is not an isomorphism for sigma {sigma:?}");
    }
    let mut subsets = 0usize;
    let extended = [1, 0, 1, 0, 1, 0];
    for sigma in sigmas.iter().filter(|s| s.len() == 2) {
        let g0 = w_sigma(&with_bit(sigma, 0), &extended).unwrap();
        let g1 = w_sigma(&with_bit(sigma, 1), &extended).unwrap();
        let dom = g0.structure.domain().to_vec();
        let roots = [g0.q_plus, g0.q_minus];
        for mask in 1u32..1 << dom.len() {
            let s: BTreeSet<Elem> = (0..dom.len()).filter(|i| mask >> i & 1 == 1).map(|i| dom[i]).collect();
            if s.iter().all(|x| roots.contains(x)) {
                continue;
            }
            subsets += 1;
            ensure!(
                !is_embedding(&iota_restriction(&g0, &g1, &s)),
                "restriction to {s:?} embeds for sigma {sigma:?}"
            );
        }
    }
    pass(format!("iso for {} sigmas; {subsets} restrictions fail", sigmas.len()))
}

// ---------------------------------------------------------------- 9

fn z_window() -> Outcome {
    let z = z_chain(8);
    // Intervals of at most 3 elements, kept 2 away from the window ends.
    let closed: Vec<Vec<Elem>> = (2..=5u64)
        .flat_map(|lo| (lo..=(lo + 2).min(5)).map(move |hi| (lo..=hi).collect()))
        .collect();
    ensure!(
        closed.iter().all(|t| z_closed(&t.iter().copied().collect())),
        "marker list contains a non-interval"
    );
    let rep = check_extension_property(&z, &closed, 3);
    ensure!(rep.passed() && rep.checked > 0, "closed markers fail: {:?}", rep.failures);
    let mut open = closed.clone();
    open.extend([vec![2, 4], vec![2, 5]]);
    let rep2 = check_extension_property(&z, &open, 3);
    let witness = rep2
        .failures
        .iter()
        .find(|f| f.a == [2, 4] && f.b == [2, 5] && f.c == [2, 3, 4]);
    ensure!(witness.is_some(), "no failure for the non-closed pair: {:?}", rep2.failures);
    ensure!(
        rep2.failures.iter().all(|f| !z_closed(&f.a.iter().copied().collect())),
        "a closed marker failed"
    );
    pass(format!(
        "{} closed checks pass; {} failures with the pair [2,4],[2,5]",
        rep.checked,
        rep2.failures.len()
    ))
}

// ---------------------------------------------------------------- 10

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_fraisse"))
        .env_remove("FF_MAX_CANDIDATES")
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

/// Every structure-shaped object inside a JSON value re-parses and
/// re-emits to the same value.
fn structures_round_trip(v: &Value) -> bool {
    match v {
        Value::Object(o) => {
            if o.contains_key("sig") && o.contains_key("domain") {
                let Ok(s) = serde_json::from_value::<StructureJson>(v.clone()) else {
                    return false;
                };
                let Ok(m) = s.to_structure() else { return false };
                let again: Value = serde_json::from_str(&emit(&StructureJson::from(&m))).unwrap();
                let mut mine = o.clone();
                mine.retain(|k, _| again.get(k).is_some());
                if Value::Object(mine) != again {
                    return false;
                }
            }
            o.values().all(structures_round_trip)
        }
        Value::Array(xs) => xs.iter().all(structures_round_trip),
        _ => true,
    }
}

fn cli_determinism() -> Outcome {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let file = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        std::fs::write(&p, bytes).unwrap();
        p.to_string_lossy().into_owned()
    };
    let m2 = file("m2.json", &cli(&["gadget", "kr_m2"]).1);
    let m3 = file("m3.json", &cli(&["gadget", "kr_m3"]).1);
    let x = file(
        "x.json",
        br#"{"sig":{"relations":[["R",2]],"functions":[],"indexed_unary":null},"domain":[0]}"#,
    );
    let edge = file("edge.json", &cli(&["gadget", "graph", "--n", "2", "--edges", "0-1"]).1);
    let c4 = file("c4.json", &cli(&["gadget", "graph", "--n", "4", "--edges", "0-1,1-2,2-3,3-0"]).1);
    let prefix = file("prefix.json", &cli(&["build-limit", "--age", "graphs", "--stages", "128"]).1);
    let z8 = file("z8.json", &cli(&["gadget", "z_chain", "--n", "8"]).1);
    let markers = file("markers.json", b"[[2,3],[3,4],[2,4],[2,3,4]]");
    let runs: Vec<(Vec<&str>, i32)> = vec![
        (vec!["gadget", "w_mn", "--m", "2", "--n", "4", "--out", "json"], 0),
        (vec!["gadget", "w_mn", "--m", "2", "--n", "4", "--padding", "0", "--out", "dot"], 0),
        (vec!["gadget", "w_sigma", "--sigma", "10", "--phi", "10101"], 0),
        (vec!["gadget", "kf", "--lengths", "2,3"], 0),
        (vec!["gadget", "m0", "--len", "3", "--copies", "2"], 0),
        (vec!["embeddings", "--source", &edge, "--target", &c4], 0),
        (vec!["amalgamate", "--age", "kr", "--base", &x, "--left", &m2, "--right", &m3, "--certify"], 0),
        (vec!["amalgamate", "--age", "graphs", "--base", &edge, "--left", &c4, "--right", &c4], 0),
        (vec!["check-base", "--age", "kr", "--pointed", &m2, "--span-bound", "5"], 0),
        (vec!["build-limit", "--age", "graphs", "--stages", "0"], 0),
        (vec!["build-limit", "--age", "kf", "--stages", "40", "--depth", "3"], 0),
        (vec!["extend-iso", "--prefix", &prefix, "--a", "0", "--b", "1", "--rounds", "4"], 0),
        (vec!["check-ext-prop", "--prefix", &prefix, "--size", "2"], 0),
        (vec!["check-ext-prop", "--structure", &z8, "--markers", &markers, "--size", "3"], 0),
        (vec!["age-equiv", "--age", "graphs", "--other", "graphs", "--size", "3"], 0),
    ];
    let mut checked = 0;
    let mut commands = BTreeSet::new();
    for (args, want) in &runs {
        let (c1, o1) = cli(args);
        let (c2, o2) = cli(args);
        ensure!(c1 == *want && c2 == *want, "{args:?} exited {c1}/{c2}");
        ensure!(o1 == o2, "{args:?} is not byte-deterministic");
        commands.insert(args[0]);
        if args.contains(&"dot") {
            continue;
        }
        let text = String::from_utf8(o1).unwrap();
        let v: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => return fail(format!("{args:?} emitted invalid JSON: {e}")),
        };
        ensure!(structures_round_trip(&v), "{args:?}: embedded structure does not round-trip");
        if args[0] == "build-limit" {
            let p: LimitPrefixJson = serde_json::from_str(&text).unwrap();
            let back = LimitPrefixJson::from(&p.to_prefix().unwrap());
            ensure!(emit(&back) == text, "{args:?}: limit prefix does not round-trip");
        }
        checked += 1;
    }
    ensure!(commands.len() == 8, "only {} subcommands exercised", commands.len());
    pass(format!("{} invocations twice each; {checked} JSON outputs round-trip", runs.len()))
}

// ------------------------------------------------------------------ runner

fn main() {
    let criteria: [(usize, &str, Duration, fn() -> Outcome); 10] = [
        (1, "category laws", Duration::from_secs(5), category_laws),
        (2, "embedding oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        (3, "K_R non-AP and K_f amalgam", Duration::from_secs(5), kr_versus_kf),
        (4, "graphs AP sanity", Duration::from_secs(60), graphs_have_ap),
        (5, "W base dichotomy", Duration::from_secs(300), w_dichotomy),
        (6, "limit construction fidelity", Duration::from_secs(120), limit_fidelity),
        (7, "back-and-forth soundness", Duration::from_secs(60), back_and_forth_soundness),
        (8, "W_sigma iso and obstruction", Duration::from_secs(10), w_sigma_obstruction),
        (9, "Z window extension property", Duration::from_secs(10), z_window),
        (10, "CLI determinism and round-trip", Duration::from_secs(5), cli_determinism),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    let mut summary = BTreeMap::new();
    for (id, name, limit, run) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let took = t.elapsed();
        let ok = out.ok && took <= limit;
        let timing = format!("{:.2}s/{}s", took.as_secs_f64(), limit.as_secs());
        let verdict = if ok { "PASS" } else { "FAIL" };
        let late = if out.ok && !ok { " [over time limit]" } else { "" };
        println!("{verdict} {id:>2} {name} ({timing}){late}: {}", out.detail);
        if ok == EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
        *summary.entry(verdict).or_insert(0) += 1;
    }
    println!("summary: {summary:?}; expected failures {EXPECTED_FAIL:?}");
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
