//! Concrete structure families with membership validators: simple graphs,
//! the unary-function and functional-relation cycle classes, Z-chain
//! windows, the cycle/equivalence structure M0, and the two root gadgets.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::ages::{canonical_age, Age, AgeDescriptor, Ambient, Param, StructureGenerator};
use crate::embeddings::has_monomorphism;
use crate::structure::{indexed_name, Elem, FinStructure, Pointed, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GadgetError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("indexed family bound exceeded: {0}")]
    IndexedFamilyBoundExceeded(String),
}

fn descriptor(name: &str, params: Vec<(String, Param)>) -> AgeDescriptor {
    AgeDescriptor {
        kind: format!("gadget:{name}"),
        params: params.into_iter().collect(),
    }
}

fn sig_of(rels: &[(&str, usize)]) -> Arc<Signature> {
    Arc::new(Signature::relational(rels).expect("static signature"))
}

// ---------------------------------------------------------------- graphs

pub fn graph_sig() -> Arc<Signature> {
    sig_of(&[("E", 2)])
}

/// Simple graph on `0..n` with the given undirected edges.
pub fn graph(n: u64, edges: &[(Elem, Elem)]) -> FinStructure {
    let mut m = FinStructure::new(graph_sig());
    m.add_elements(0..n);
    for &(x, y) in edges {
        m.insert_rel_at(0, vec![x, y]);
        m.insert_rel_at(0, vec![y, x]);
    }
    m
}

/// Irreflexive symmetric edge table.
pub fn validate_graph(m: &FinStructure) -> Result<(), String> {
    for t in m.rel_table(0) {
        if t[0] == t[1] {
            return Err(format!("self-loop at {}", t[0]));
        }
        if !m.holds(0, &[t[1], t[0]]) {
            return Err(format!("edge {:?} is not symmetric", t));
        }
    }
    Ok(())
}

/// The graph on the naturals where `i < j` are adjacent iff bit `i` of `j`
/// is set; `prefix(L)` is the induced graph on `0..L`.
pub struct BitGraph;

/// Least `L` such that the bit graph on `0..L` contains every graph with at
/// most `n` vertices, computed by exhaustive search (see the tests).
pub const BIT_GRAPH_COVER: [usize; 5] = [0, 1, 3, 6, 12];

impl StructureGenerator for BitGraph {
    fn sig(&self) -> Arc<Signature> {
        graph_sig()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        let mut edges = Vec::new();
        for j in 0..level as u64 {
            for i in 0..j.min(64) {
                if j >> i & 1 == 1 {
                    edges.push((i, j));
                }
            }
        }
        graph(level as u64, &edges)
    }
    fn prefix_domain(&self, level: usize) -> Vec<Elem> {
        (0..level as u64).collect()
    }
    fn generated(&self, _level: usize, tuple: &[Elem]) -> Pointed {
        let s: BTreeSet<Elem> = tuple.iter().copied().collect();
        let mut m = FinStructure::new(graph_sig());
        m.add_elements(s.iter().copied());
        for &j in &s {
            for &i in s.range(..j) {
                if i < 64 && j >> i & 1 == 1 {
                    m.insert_rel_at(0, vec![i, j]);
                    m.insert_rel_at(0, vec![j, i]);
                }
            }
        }
        Pointed::new(tuple.to_vec(), m).expect("relational closure is the tuple")
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        BIT_GRAPH_COVER.get(n).copied()
    }
    fn name(&self) -> String {
        "bit-graph".into()
    }
}

pub fn graphs_age() -> Age {
    canonical_age(Arc::new(BitGraph))
        .with_validator(Arc::new(validate_graph))
        .with_hp(true)
        .with_descriptor(descriptor("graphs", vec![]))
}

// ------------------------------------------------------------- kf and kr

pub fn kf_sig() -> Arc<Signature> {
    Arc::new(Signature::new(vec![], vec![("f".into(), 1)], None).expect("static signature"))
}

pub fn kr_sig() -> Arc<Signature> {
    sig_of(&[("R", 2)])
}

/// Cycle lengths of the generator prefix with `level` cycles: 2, 3, 2, 3, ...
fn cycle_lengths(level: usize) -> Vec<u64> {
    (0..level).map(|i| if i % 2 == 0 { 2 } else { 3 }).collect()
}

/// Disjoint union of unary-function cycles with the given lengths.
pub fn f_cycles(lengths: &[u64]) -> FinStructure {
    let mut m = FinStructure::new(kf_sig());
    let mut next = 0;
    for &k in lengths {
        m.add_elements(next..next + k);
        for t in 0..k {
            m.set_fun_at(0, vec![next + t], next + (t + 1) % k);
        }
        next += k;
    }
    m
}

/// Disjoint union of relation cycles with the given lengths.
pub fn r_cycles(lengths: &[u64]) -> FinStructure {
    let mut m = FinStructure::new(kr_sig());
    let mut next = 0;
    for &k in lengths {
        m.add_elements(next..next + k);
        for t in 0..k {
            m.insert_rel_at(0, vec![next + t, next + (t + 1) % k]);
        }
        next += k;
    }
    m
}

/// Fixed-point-free unary function with every orbit of size 2 or 3.
pub fn validate_kf(m: &FinStructure) -> Result<(), String> {
    let f = |x: Elem| m.apply(0, &[x]);
    for &x in m.domain() {
        let Some(y) = f(x) else {
            return Err(format!("f undefined at {x}"));
        };
        if y == x {
            return Err(format!("fixed point {x}"));
        }
        let z = f(y).ok_or_else(|| format!("f undefined at {y}"))?;
        let w = f(z).ok_or_else(|| format!("f undefined at {z}"))?;
        if z != x && w != x {
            return Err(format!("orbit of {x} has length other than 2 or 3"));
        }
    }
    Ok(())
}

/// The relation is the graph of a partial injective fixed-point-free
/// function whose components are a point, a single edge, a 2-cycle or a
/// 3-cycle: the substructures of disjoint unions of 2- and 3-cycles.
pub fn validate_kr(m: &FinStructure) -> Result<(), String> {
    let mut succ: BTreeMap<Elem, Elem> = BTreeMap::new();
    let mut pred: BTreeMap<Elem, Elem> = BTreeMap::new();
    for t in m.rel_table(0) {
        let (x, y) = (t[0], t[1]);
        if x == y {
            return Err(format!("fixed point {x}"));
        }
        if succ.insert(x, y).is_some() {
            return Err(format!("{x} has two images"));
        }
        if pred.insert(y, x).is_some() {
            return Err(format!("{y} has two preimages"));
        }
    }
    let mut seen = BTreeSet::new();
    for &x in m.domain() {
        if seen.contains(&x) {
            continue;
        }
        // Walk back to the start of a path or around a cycle.
        let mut start = x;
        let mut steps = 0;
        while let Some(&p) = pred.get(&start) {
            start = p;
            steps += 1;
            if start == x || steps > m.len() {
                break;
            }
        }
        let mut comp = vec![start];
        let mut cur = start;
        while let Some(&s) = succ.get(&cur) {
            if s == start {
                break;
            }
            comp.push(s);
            cur = s;
        }
        let cyclic = succ.get(&cur) == Some(&start);
        let ok = if cyclic {
            comp.len() == 2 || comp.len() == 3
        } else {
            comp.len() <= 2
        };
        if !ok {
            return Err(format!(
                "component of {x} is a {} of {} elements",
                if cyclic { "cycle" } else { "path" },
                comp.len()
            ));
        }
        seen.extend(comp);
    }
    Ok(())
}

/// Alternating 2- and 3-cycles of a unary function.
pub struct KfGenerator;

/// Alternating 2- and 3-cycles of a binary relation.
pub struct KrGenerator;

/// Cycles needed so that the alternating prefix holds `floor(n/2)` 2-cycles
/// and `floor(n/3)` 3-cycles (enough for every member with `n` elements).
fn alternating_cover(n: usize) -> usize {
    let twos = n / 2;
    let threes = n / 3;
    (2 * twos).saturating_sub(1).max(2 * threes)
}

impl StructureGenerator for KfGenerator {
    fn sig(&self) -> Arc<Signature> {
        kf_sig()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        f_cycles(&cycle_lengths(level))
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        Some(alternating_cover(n))
    }
    fn name(&self) -> String {
        "f-cycles".into()
    }
}

impl StructureGenerator for KrGenerator {
    fn sig(&self) -> Arc<Signature> {
        kr_sig()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        r_cycles(&cycle_lengths(level))
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        // Each isolated point needs its own cycle.
        Some(n)
    }
    fn name(&self) -> String {
        "r-cycles".into()
    }
}

pub fn kf_age() -> Age {
    canonical_age(Arc::new(KfGenerator))
        .with_validator(Arc::new(validate_kf))
        .with_hp(true)
        .with_descriptor(descriptor("kf", vec![]))
}

/// Loops and branching survive adding tuples.
pub fn kr_obstruction(m: &FinStructure) -> Option<String> {
    let mut out = BTreeSet::new();
    let mut inn = BTreeSet::new();
    for t in m.rel_table(0) {
        if t[0] == t[1] {
            return Some(format!("fixed point {}", t[0]));
        }
        if !out.insert(t[0]) {
            return Some(format!("{} has two images", t[0]));
        }
        if !inn.insert(t[1]) {
            return Some(format!("{} has two preimages", t[1]));
        }
    }
    None
}

pub fn kr_age() -> Age {
    canonical_age(Arc::new(KrGenerator))
        .with_validator(Arc::new(validate_kr))
        .with_obstruction(Arc::new(kr_obstruction))
        .with_hp(true)
        .with_descriptor(descriptor("kr", vec![]))
}

/// `M_2`: the 2-cycle `x <-> y` with `x = 0`.
pub fn kr_m2() -> FinStructure {
    r_cycles(&[2])
}

/// `M_3`: the 3-cycle `x -> y -> z -> x` with `x = 0`.
pub fn kr_m3() -> FinStructure {
    r_cycles(&[3])
}

// --------------------------------------------------------------- Z-chain

/// Path window `0 - 1 - ... - (n-1)` of the two-way infinite chain.
pub fn z_chain(n: u64) -> FinStructure {
    let edges: Vec<(Elem, Elem)> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

/// Betweenness closure on a window: `s` is closed iff it is an interval.
pub fn z_closed(s: &BTreeSet<Elem>) -> bool {
    match (s.first(), s.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo + 1) as usize == s.len(),
        _ => true,
    }
}

/// Finite graphs of maximum degree two without cycles.
pub fn validate_z(m: &FinStructure) -> Result<(), String> {
    validate_graph(m)?;
    let mut deg: BTreeMap<Elem, usize> = BTreeMap::new();
    for t in m.rel_table(0) {
        *deg.entry(t[0]).or_default() += 1;
    }
    if let Some((x, _)) = deg.iter().find(|(_, d)| **d > 2) {
        return Err(format!("vertex {x} has degree above two"));
    }
    let edges = m.rel_table(0).len() / 2;
    let mut comps = 0;
    let mut seen = BTreeSet::new();
    for &x in m.domain() {
        if seen.insert(x) {
            comps += 1;
            let mut stack = vec![x];
            while let Some(v) = stack.pop() {
                for t in m.rel_table(0).range(vec![v]..vec![v + 1]) {
                    if seen.insert(t[1]) {
                        stack.push(t[1]);
                    }
                }
            }
        }
    }
    if edges + comps != m.len() {
        return Err("contains a cycle".into());
    }
    Ok(())
}

/// Growing path, a one-sided window of the chain with the same age.
pub struct ZGenerator;

impl StructureGenerator for ZGenerator {
    fn sig(&self) -> Arc<Signature> {
        graph_sig()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        z_chain(level as u64)
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        Some((2 * n).saturating_sub(1))
    }
    fn name(&self) -> String {
        "path".into()
    }
}

pub fn z_age() -> Age {
    canonical_age(Arc::new(ZGenerator))
        .with_validator(Arc::new(validate_z))
        .with_hp(true)
        .with_descriptor(descriptor("z", vec![]))
}

// -------------------------------------------------------------------- M0

/// Signature `{C, E}` plus extra relations compatible with the classes.
pub fn m0_sig(extra: &[(&str, usize)]) -> Arc<Signature> {
    let mut rels = vec![("C", 2), ("E", 2)];
    rels.extend_from_slice(extra);
    sig_of(&rels)
}

/// `copies` disjoint `C`-cycles of every length `1..=max_len`. Element `t`
/// of the `j`-th `k`-cycle is `E`-equivalent to element `t` of every other
/// `k`-cycle; cycles of different lengths are never linked.
pub fn m0_prefix(max_len: u64, copies: u64) -> Result<FinStructure, GadgetError> {
    m0_prefix_with(max_len, copies, &[])
}

pub fn m0_prefix_with(max_len: u64, copies: u64, extra: &[(&str, usize)]) -> Result<FinStructure, GadgetError> {
    if max_len == 0 || copies == 0 {
        return Err(GadgetError::InvalidParams("max_len and copies must be at least 1".into()));
    }
    let mut m = FinStructure::new(m0_sig(extra));
    let mut next = 0;
    let mut cycles: Vec<(u64, Elem)> = Vec::new();
    for k in 1..=max_len {
        for _ in 0..copies {
            m.add_elements(next..next + k);
            for t in 0..k {
                m.insert_rel_at(0, vec![next + t, next + (t + 1) % k]);
            }
            cycles.push((k, next));
            next += k;
        }
    }
    for &(k, a) in &cycles {
        for &(k2, b) in &cycles {
            if k == k2 {
                for t in 0..k {
                    m.insert_rel_at(1, vec![a + t, b + t]);
                }
            }
        }
    }
    Ok(m)
}

/// The seven defining conditions on `C` and `E`, restricted to a prefix with
/// `copies` cycles of each length up to `max_len`, plus the two
/// compatibility conditions on every further relation.
pub fn validate_m0(m: &FinStructure, max_len: u64, copies: u64) -> Result<(), String> {
    let sig = m.sig();
    let c = sig.rel_index("C").ok_or("missing C")?;
    let e = sig.rel_index("E").ok_or("missing E")?;
    let mut succ = BTreeMap::new();
    let mut pred = BTreeMap::new();
    for t in m.rel_table(c) {
        if succ.insert(t[0], t[1]).is_some() {
            return Err(format!("{} has two C-successors", t[0]));
        }
        if pred.insert(t[1], t[0]).is_some() {
            return Err(format!("{} has two C-predecessors", t[1]));
        }
    }
    for &x in m.domain() {
        if !succ.contains_key(&x) || !pred.contains_key(&x) {
            return Err(format!("{x} lacks a C-successor or C-predecessor"));
        }
    }
    // Cycle of each element and its length.
    let mut cycle_of: BTreeMap<Elem, (u64, Elem)> = BTreeMap::new();
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in m.domain() {
        if cycle_of.contains_key(&x) {
            continue;
        }
        let mut members = vec![x];
        let mut cur = succ[&x];
        while cur != x {
            members.push(cur);
            cur = succ[&cur];
        }
        let k = members.len() as u64;
        let id = *members.iter().min().unwrap();
        for y in members {
            cycle_of.insert(y, (k, id));
        }
        *counts.entry(k).or_default() += 1;
    }
    for k in 1..=max_len {
        if counts.get(&k).copied().unwrap_or(0) != copies {
            return Err(format!("expected {copies} C-cycles of length {k}"));
        }
    }
    if counts.keys().any(|&k| k > max_len) {
        return Err(format!("C-cycle longer than {max_len}"));
    }
    let eq = |a: Elem, b: Elem| m.holds(e, &[a, b]);
    for &x in m.domain() {
        if !eq(x, x) {
            return Err(format!("E not reflexive at {x}"));
        }
    }
    for t in m.rel_table(e) {
        let (a, b) = (t[0], t[1]);
        if !eq(b, a) {
            return Err(format!("E not symmetric at ({a},{b})"));
        }
        for u in m.rel_table(e).range(vec![b]..vec![b + 1]) {
            if !eq(a, u[1]) {
                return Err(format!("E not transitive at ({a},{b},{})", u[1]));
            }
        }
        if !eq(succ[&a], succ[&b]) {
            return Err(format!("E not preserved by C at ({a},{b})"));
        }
        if cycle_of[&a].0 != cycle_of[&b].0 {
            return Err(format!("E links cycles of different lengths at ({a},{b})"));
        }
    }
    let cycles: BTreeSet<(u64, Elem)> = cycle_of.values().copied().collect();
    for &(k, a) in &cycles {
        for &(k2, b) in &cycles {
            if k != k2 || a == b {
                continue;
            }
            for (&x, &cx) in &cycle_of {
                if cx != (k, a) {
                    continue;
                }
                let partners = cycle_of
                    .iter()
                    .filter(|(y, cy)| **cy == (k2, b) && eq(x, **y))
                    .count();
                if partners != 1 {
                    return Err(format!("{x} has {partners} E-partners in another {k}-cycle"));
                }
            }
        }
    }
    for (ri, (name, _)) in sig.relation_symbols().iter().enumerate() {
        if ri == c || ri == e {
            continue;
        }
        for t in m.rel_table(ri) {
            if t.iter().any(|&a| t.iter().any(|&b| !eq(a, b))) {
                return Err(format!("{name}{t:?} crosses E-classes"));
            }
            let shifted: Vec<Elem> = t.iter().map(|a| succ[a]).collect();
            if !m.holds(ri, &shifted) {
                return Err(format!("{name}{t:?} is not shift-invariant"));
            }
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- W_m,n

/// A root gadget with element names for display.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootGadget {
    pub structure: FinStructure,
    pub names: BTreeMap<Elem, String>,
    pub q_plus: Elem,
    pub q_minus: Elem,
}

impl RootGadget {
    pub fn elem(&self, name: &str) -> Option<Elem> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(e, _)| *e)
    }

    pub fn pointed(&self) -> Pointed {
        Pointed::whole(self.structure.clone())
    }
}

pub fn w_sig() -> Arc<Signature> {
    sig_of(&[("B", 2), ("Y", 2)])
}

struct ChainLayout {
    b_plus: u64,
    b_minus: u64,
    y_plus: u64,
    y_minus: u64,
}

fn build_roots(
    sig: Arc<Signature>,
    layout: &ChainLayout,
    pads: u64,
) -> RootGadget {
    let mut m = FinStructure::new(sig.clone());
    let mut names = BTreeMap::new();
    let b = sig.rel_index("B").expect("B");
    let y = sig.rel_index("Y").expect("Y");
    let (qp, qm) = (0, 1);
    m.add_elements([qp, qm]);
    names.insert(qp, "q+".to_string());
    names.insert(qm, "q-".to_string());
    let mut next = 2;
    let mut chain = |m: &mut FinStructure, rel: usize, root: Elem, len: u64, label: &str| {
        let mut prev = root;
        for i in 0..len {
            let e = next;
            next += 1;
            m.add_element(e);
            names.insert(e, format!("{label}{i}"));
            m.insert_rel_at(rel, vec![prev, e]);
            prev = e;
        }
    };
    chain(&mut m, b, qp, layout.b_plus, "b+");
    chain(&mut m, b, qm, layout.b_minus, "b-");
    chain(&mut m, y, qp, layout.y_plus, "y+");
    chain(&mut m, y, qm, layout.y_minus, "y-");
    for i in 0..pads {
        let e = next + i;
        m.add_element(e);
        names.insert(e, format!("x{i}"));
    }
    RootGadget {
        structure: m,
        names,
        q_plus: qp,
        q_minus: qm,
    }
}

/// `W_{m,n}` with `padding` isolated elements: `q+` carries a `B`-chain of
/// `m` elements and a `Y`-chain of `n`, `q-` the reverse.
pub fn w_mn(m: u64, n: u64, padding: u64) -> Result<RootGadget, GadgetError> {
    if m >= n {
        return Err(GadgetError::InvalidParams(format!("need m < n, got m={m}, n={n}")));
    }
    Ok(build_roots(
        w_sig(),
        &ChainLayout {
            b_plus: m,
            b_minus: n,
            y_plus: n,
            y_minus: m,
        },
        padding,
    ))
}

/// Core of `W_{m,n}` followed by `level` pads.
pub struct WGenerator {
    pub m: u64,
    pub n: u64,
}

impl StructureGenerator for WGenerator {
    fn sig(&self) -> Arc<Signature> {
        w_sig()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        w_mn(self.m, self.n, level as u64).expect("validated params").structure
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        Some(n)
    }
    fn name(&self) -> String {
        "w".into()
    }
    fn params(&self) -> Vec<(String, Param)> {
        vec![
            ("m".into(), Param::Int(self.m as i64)),
            ("n".into(), Param::Int(self.n as i64)),
        ]
    }
}

/// Age of `W_{m,n}` with unboundedly many pads. Membership is decided by
/// embedding into the gadget with as many pads as the candidate has elements.
pub fn w_mn_age(m: u64, n: u64) -> Result<Age, GadgetError> {
    w_mn(m, n, 0)?;
    let ambient = move |s: usize| -> Ambient {
        let g = w_mn(m, n, s as u64).expect("validated params");
        let pads = g
            .names
            .iter()
            .filter(|(_, name)| name.starts_with('x'))
            .map(|(e, _)| *e)
            .collect();
        Ambient {
            structure: g.structure,
            pads,
        }
    };
    let validator = move |d: &FinStructure| -> Result<(), String> {
        if ambient(d.len()).contains_copy_of(d) {
            Ok(())
        } else {
            Err("does not embed into the gadget".into())
        }
    };
    let obstruction = move |d: &FinStructure| -> Option<String> {
        let target = w_mn(m, n, d.len() as u64).expect("validated params").structure;
        (!has_monomorphism(d, &target)).then(|| "edges do not fit inside the gadget".into())
    };
    Ok(canonical_age(Arc::new(WGenerator { m, n }))
        .with_validator(Arc::new(validator))
        .with_obstruction(Arc::new(obstruction))
        .with_ambient(Arc::new(ambient))
        .with_hp(true)
        .with_descriptor(descriptor(
            "w_mn",
            vec![("m".into(), Param::Int(m as i64)), ("n".into(), Param::Int(n as i64))],
        )))
}

/// Whether `m` is a relabelling of `reference`.
pub fn same_shape(m: &FinStructure, reference: &FinStructure) -> bool {
    m.len() == reference.len()
        && m.sig() == reference.sig()
        && m.tuple_count() == reference.tuple_count()
        && crate::embeddings::first_embedding(&Pointed::whole(reference.clone()), m).is_some()
}

/// Membership in the isomorphism type of `W_{m,n}` with `padding` pads.
pub fn validate_w_mn(d: &FinStructure, m: u64, n: u64, padding: u64) -> Result<(), String> {
    let g = w_mn(m, n, padding).map_err(|e| format!("{e}"))?;
    if same_shape(d, &g.structure) {
        Ok(())
    } else {
        Err(format!("not a copy of W_{{{m},{n}}} with {padding} pads"))
    }
}

/// Roots plus the first `j` elements of every chain, as an induced
/// substructure.
pub fn root_core_prefix(g: &RootGadget, j: u64) -> FinStructure {
    let keep: BTreeSet<Elem> = g
        .names
        .iter()
        .filter(|(_, name)| {
            name.starts_with('q')
                || (name.len() > 2
                    && (name.starts_with('b') || name.starts_with('y'))
                    && name[2..].parse::<u64>().is_ok_and(|i| i < j))
        })
        .map(|(e, _)| *e)
        .collect();
    crate::structure::induced_substructure(&g.structure, &keep).expect("relational")
}

/// Longest `B`- and `Y`-chains (in elements, root excluded) hanging from
/// `root` inside `m`.
pub fn root_chain_lengths(m: &FinStructure, root: Elem) -> (usize, usize) {
    let walk = |rel: usize| {
        let mut len = 0;
        let mut cur = root;
        let mut seen = BTreeSet::from([root]);
        loop {
            let next = m.rel_table(rel).range(vec![cur]..vec![cur + 1]).next().map(|t| t[1]);
            match next {
                Some(nx) if seen.insert(nx) => {
                    len += 1;
                    cur = nx;
                }
                _ => return len,
            }
        }
    };
    let b = m.sig().rel_index("B").expect("B");
    let y = m.sig().rel_index("Y").expect("Y");
    (walk(b), walk(y))
}

/// Elements of `m` that occur in some tuple of relation `rel`.
pub fn elements_in_edges(m: &FinStructure, rel: usize) -> usize {
    m.rel_table(rel)
        .iter()
        .flat_map(|t| t.iter().copied())
        .collect::<BTreeSet<_>>()
        .len()
}

// --------------------------------------------------------------- W_sigma

pub fn w_sigma_sig(family: usize) -> Arc<Signature> {
    Arc::new(
        Signature::new(
            vec![
                ("B".into(), 2),
                ("Y".into(), 2),
                ("R".into(), 2),
                ("Q".into(), 2),
            ],
            vec![],
            Some(("U".into(), family)),
        )
        .expect("static signature"),
    )
}

/// `W_sigma` for a truncated 0/1 stream `phi`: with `z` zeros in `phi`,
/// `q+` carries `B`/`Y`-chains of `1+z`/`z` elements and `q-` the
/// reverse; `Q` links the two roots; `U_i` holds on every non-root iff
/// `phi[i] = 0`, `k` zeros precede `i`, `k < len(sigma)` and `sigma[k] = 1`.
pub fn w_sigma(sigma: &[u8], phi: &[u8]) -> Result<RootGadget, GadgetError> {
    w_sigma_with_family(sigma, phi, phi.len())
}

/// As [`w_sigma`] with an explicit family bound, which must cover `phi`.
pub fn w_sigma_with_family(sigma: &[u8], phi: &[u8], family: usize) -> Result<RootGadget, GadgetError> {
    if phi.len() > family {
        return Err(GadgetError::IndexedFamilyBoundExceeded(format!(
            "stream has {} entries but the family has {family} symbols",
            phi.len()
        )));
    }
    if sigma.iter().chain(phi).any(|&b| b > 1) {
        return Err(GadgetError::InvalidParams("bits must be 0 or 1".into()));
    }
    let zeros = phi.iter().filter(|&&b| b == 0).count() as u64;
    let sig = w_sigma_sig(family);
    let mut g = build_roots(
        sig.clone(),
        &ChainLayout {
            b_plus: 1 + zeros,
            b_minus: zeros,
            y_plus: zeros,
            y_minus: 1 + zeros,
        },
        0,
    );
    let q = sig.rel_index("Q").expect("Q");
    g.structure.insert_rel_at(q, vec![g.q_plus, g.q_minus]);
    g.structure.insert_rel_at(q, vec![g.q_minus, g.q_plus]);
    let non_roots: Vec<Elem> = g
        .structure
        .domain()
        .iter()
        .copied()
        .filter(|&x| x != g.q_plus && x != g.q_minus)
        .collect();
    let mut k = 0usize;
    for (i, &bit) in phi.iter().enumerate() {
        if bit == 0 {
            if k < sigma.len() && sigma[k] == 1 {
                let u = sig.rel_index(&indexed_name("U", i)).expect("family member");
                for &x in &non_roots {
                    g.structure.insert_rel_at(u, vec![x]);
                }
            }
            k += 1;
        }
    }
    Ok(g)
}

/// Membership in the isomorphism type of `W_sigma` for `phi`.
pub fn validate_w_sigma(d: &FinStructure, sigma: &[u8], phi: &[u8]) -> Result<(), String> {
    let family = d.sig().indexed_unary().map_or(0, |(_, n)| n);
    let g = w_sigma_with_family(sigma, phi, family).map_err(|e| format!("{e}"))?;
    if same_shape(d, &g.structure) {
        Ok(())
    } else {
        Err("not a copy of the W_sigma gadget".into())
    }
}

/// The name-preserving map between two gadgets of the same shape.
pub fn iota(from: &RootGadget, to: &RootGadget) -> Option<BTreeMap<Elem, Elem>> {
    from.names
        .iter()
        .map(|(e, name)| to.elem(name).map(|t| (*e, t)))
        .collect()
}

/// Closedness of `s` inside a root gadget: every non-root is joined to a
/// root along its chain within `s`, every root has a chain neighbour in
/// `s`, and roots come in pairs.
pub fn closed_subsets(g: &RootGadget, s: &BTreeSet<Elem>) -> bool {
    let m = &g.structure;
    let sig = m.sig();
    let chain_rels: Vec<usize> = ["B", "Y"].iter().filter_map(|r| sig.rel_index(r)).collect();
    let roots = [g.q_plus, g.q_minus];
    let pred = |x: Elem| -> Option<Elem> {
        chain_rels.iter().find_map(|&r| {
            m.rel_table(r).iter().find(|t| t[1] == x).map(|t| t[0])
        })
    };
    for &x in s {
        if roots.contains(&x) {
            continue;
        }
        let mut cur = x;
        loop {
            match pred(cur) {
                Some(p) if s.contains(&p) => {
                    if roots.contains(&p) {
                        break;
                    }
                    cur = p;
                }
                _ => return false,
            }
        }
    }
    for &r in &roots {
        if !s.contains(&r) {
            continue;
        }
        let has_neighbour = chain_rels.iter().any(|&rel| {
            m.rel_table(rel)
                .range(vec![r]..vec![r + 1])
                .any(|t| s.contains(&t[1]) && !roots.contains(&t[1]))
        });
        if !has_neighbour {
            return false;
        }
    }
    s.contains(&g.q_plus) == s.contains(&g.q_minus)
}

// ------------------------------------------------------------- catalogue

/// The gadget kinds understood by descriptors.
pub const GADGET_KINDS: [&str; 7] = ["graphs", "kf", "kr", "z_chain", "m0", "w_mn", "w_sigma"];

/// Boxed generator for one of the built-in families.
pub fn generator(kind: &str) -> Option<Box<dyn StructureGenerator>> {
    match kind {
        "graphs" => Some(Box::new(BitGraph)),
        "kf" => Some(Box::new(KfGenerator)),
        "kr" => Some(Box::new(KrGenerator)),
        "z_chain" | "z" => Some(Box::new(ZGenerator)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use crate::ages::closed_substructures;
    use crate::canon::canonical;
    use crate::structure::{induced_substructure, validate};

    #[test]
    fn bit_graph_closures_match_the_prefix() {
        use crate::ages::{codes_up_to, decode_tuple};
        for level in 0..70usize {
            let p = BitGraph.prefix(level);
            let dom = p.domain();
            let total = codes_up_to(3, dom.len());
            for code in (0..total).step_by((total / 400).max(1) as usize) {
                let t: Vec<Elem> = decode_tuple(code, dom.len()).into_iter().map(|d| dom[d]).collect();
                let slow = crate::structure::closure(&p, &t).unwrap();
                assert_eq!(BitGraph.generated(level, &t), slow);
            }
        }
    }

    #[test]
    fn graph_validator_examples() {
        assert!(validate_graph(&graph(0, &[])).is_ok());
        assert!(validate_graph(&graph(3, &[(0, 1), (1, 2), (0, 2)])).is_ok());
        let mut looped = graph(1, &[]);
        looped.insert_rel_at(0, vec![0, 0]);
        assert!(validate_graph(&looped).is_err());
    }

    #[test]
    fn cycle_validators() {
        assert!(validate_kf(&f_cycles(&[2])).is_ok());
        assert!(validate_kr(&r_cycles(&[2])).is_ok());
        assert!(validate_kf(&f_cycles(&[4])).is_err());
        assert!(validate_kr(&r_cycles(&[4])).is_err());
        assert!(validate_kr(&kr_m3()).is_ok());
        let mut path = FinStructure::new(kr_sig());
        path.add_elements(0..3);
        path.insert_rel_at(0, vec![0, 1]);
        path.insert_rel_at(0, vec![1, 2]);
        assert!(validate_kr(&path).is_err());
        let s: BTreeSet<Elem> = [0, 1].into();
        assert!(validate_kr(&induced_substructure(&kr_m3(), &s).unwrap()).is_ok());
    }

    #[test]
    fn z_chain_window() {
        let z = z_chain(3);
        assert_eq!(z.rel_table(0).len(), 4);
        assert!(!z_closed(&[0, 2].into()));
        assert!(z_closed(&[0, 1, 2].into()));
    }

    #[test]
    fn m0_small_prefix() {
        let m = m0_prefix(2, 1).unwrap();
        assert_eq!(m.len(), 3);
        assert!(validate_m0(&m, 2, 1).is_ok());
        let m = m0_prefix(3, 2).unwrap();
        assert!(validate_m0(&m, 3, 2).is_ok());
        // E never links cycles of different lengths.
        for t in m.rel_table(1) {
            let len_of = |x: Elem| {
                let mut k = 1;
                let mut cur = m.rel_table(0).range(vec![x]..vec![x + 1]).next().unwrap()[1];
                while cur != x {
                    cur = m.rel_table(0).range(vec![cur]..vec![cur + 1]).next().unwrap()[1];
                    k += 1;
                }
                k
            };
            assert_eq!(len_of(t[0]), len_of(t[1]));
        }
    }

    #[test]
    fn m0_compatibility_is_enforced() {
        let mut m = m0_prefix_with(2, 2, &[("P", 1)]).unwrap();
        let p = m.sig().rel_index("P").unwrap();
        // Elements 2,3 form the first 2-cycle.
        m.insert_rel_at(p, vec![2]);
        assert!(validate_m0(&m, 2, 2).is_err(), "not shift-invariant");
        m.insert_rel_at(p, vec![3]);
        assert!(validate_m0(&m, 2, 2).is_ok());
        let mut cross = m0_prefix_with(2, 1, &[("S", 2)]).unwrap();
        let s = cross.sig().rel_index("S").unwrap();
        cross.insert_rel_at(s, vec![0, 1]);
        cross.insert_rel_at(s, vec![0, 2]);
        assert!(validate_m0(&cross, 2, 1).is_err(), "crosses classes");
    }

    #[test]
    fn w_mn_counts() {
        let w = w_mn(2, 4, 0).unwrap();
        assert_eq!(w.structure.len(), 14);
        assert!(validate(&w.structure).is_empty());
        assert_eq!(root_chain_lengths(&w.structure, w.q_plus), (2, 4));
        assert_eq!(root_chain_lengths(&w.structure, w.q_minus), (4, 2));
        assert_eq!(w_mn(2, 4, 3).unwrap().structure.len(), 17);
        assert!(w_mn(4, 2, 0).is_err());
    }

    #[test]
    fn w_sigma_unary_rules() {
        let phi = [1, 0, 1, 0, 1];
        let g = w_sigma(&[1, 0], &phi).unwrap();
        let sig = g.structure.sig().clone();
        let u1 = sig.rel_index("U_1").unwrap();
        let u3 = sig.rel_index("U_3").unwrap();
        assert_eq!(g.structure.rel_table(u1).len(), g.structure.len() - 2);
        assert!(!g.structure.holds(u1, &[g.q_plus]));
        assert!(g.structure.rel_table(u3).is_empty());
        let ones = w_sigma(&[1, 1], &[1, 1, 1]).unwrap();
        for i in 0..3 {
            let u = ones.structure.sig().rel_index(&indexed_name("U", i)).unwrap();
            assert!(ones.structure.rel_table(u).is_empty());
        }
        assert_eq!(root_chain_lengths(&g.structure, g.q_plus), (3, 2));
        assert!(w_sigma_with_family(&[], &phi, 3).is_err());
    }

    #[test]
    fn closed_subset_bullets() {
        let g = w_sigma(&[], &[0]).unwrap();
        let all: BTreeSet<Elem> = g.structure.domain().iter().copied().collect();
        assert!(closed_subsets(&g, &all));
        assert!(!closed_subsets(&g, &[g.q_plus, g.q_minus].into()));
        let b0 = g.elem("b+0").unwrap();
        assert!(!closed_subsets(&g, &[g.q_plus, b0].into()));
        let y0 = g.elem("y-0").unwrap();
        assert!(closed_subsets(&g, &[g.q_plus, b0, g.q_minus, y0].into()));
    }

    /// Brute force: least prefix of the bit graph containing all graphs on
    /// at most `n` vertices, compared against the pinned table.
    #[test]
    fn bit_graph_cover_levels() {
        let age = graphs_age();
        for (n, &pinned) in BIT_GRAPH_COVER.iter().enumerate() {
            let want: BTreeSet<FinStructure> = age.types_up_to(n, 0).unwrap().into_iter().collect();
            let covered = |level: usize| {
                let p = BitGraph.prefix(level);
                let got: BTreeSet<FinStructure> = closed_substructures(&p, n)
                    .iter()
                    .map(|s| canonical(&induced_substructure(&p, s).unwrap()))
                    .collect();
                want.is_subset(&got)
            };
            let least = (0..).find(|&l| covered(l)).unwrap();
            assert_eq!(least, pinned, "cover level for {n} vertices");
        }
    }

    fn closed_types(gen: &dyn StructureGenerator, level: usize, n: usize) -> BTreeSet<FinStructure> {
        let p = gen.prefix(level);
        closed_substructures(&p, n)
            .iter()
            .map(|s| canonical(&induced_substructure(&p, s).unwrap()))
            .collect()
    }

    /// The pinned cover level is the least prefix showing every type that
    /// a longer prefix shows, and every such type is a member.
    #[test]
    fn cycle_cover_levels() {
        for (age, gen) in [
            (kf_age(), Box::new(KfGenerator) as Box<dyn StructureGenerator>),
            (kr_age(), Box::new(KrGenerator)),
        ] {
            for n in 0..=6 {
                let all = closed_types(gen.as_ref(), n + 3, n);
                for m in &all {
                    assert!(age.is_member(m).unwrap());
                }
                let least = (0..).find(|&l| closed_types(gen.as_ref(), l, n) == all).unwrap();
                assert_eq!(gen.cover_level(n), Some(least), "{} at {n}", gen.name());
            }
        }
    }
}
