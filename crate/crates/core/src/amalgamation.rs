//! Spans, amalgamation diagrams, bounded amalgam search, exhaustive
//! non-amalgamability certificates and bounded amalgamation-base checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::ages::{Age, AgeError};
use crate::canon::canonical;
use crate::embeddings::{compose, is_embedding, EmbedError, PotentialEmbedding};
use crate::structure::{
    cl_sim_map, closure_set, induced_substructure, Elem, FinStructure, Pointed, StructError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmalgError {
    #[error("span legs do not share a domain")]
    DomainMismatch,
    #[error("span is not a pair of embeddings")]
    NotTrueSpan,
    #[error("signature unsupported: {0}")]
    SignatureUnsupported(String),
    #[error("no amalgam found within the bound")]
    NotFoundWithinBound,
    #[error("more than {0} candidate amalgams")]
    CandidateCapExceeded(u64),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error(transparent)]
    Age(#[from] AgeError),
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Two potential embeddings out of the same pointed structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub f0: PotentialEmbedding,
    pub f1: PotentialEmbedding,
}

impl Span {
    pub fn new(f0: PotentialEmbedding, f1: PotentialEmbedding) -> Result<Self, AmalgError> {
        if f0.dom() != f1.dom() {
            return Err(AmalgError::DomainMismatch);
        }
        Ok(Span { f0, f1 })
    }

    pub fn base(&self) -> &Pointed {
        self.f0.dom()
    }

    pub fn is_true_span(&self) -> bool {
        is_embedding(&self.f0) && is_embedding(&self.f1)
    }
}

/// `g0 : codom(f0) -> D` and `g1 : codom(f1) -> D` over a span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgDiagram {
    pub g0: PotentialEmbedding,
    pub g1: PotentialEmbedding,
    pub over: Span,
}

impl AmalgDiagram {
    /// Domains and codomains line up, and over a true span both legs are
    /// embeddings with `g0 . f0 = g1 . f1`.
    pub fn check(&self) -> Result<(), AmalgError> {
        let bad = |m: &str| Err(AmalgError::InvalidDiagram(m.into()));
        if self.g0.dom() != self.over.f0.codom() || self.g1.dom() != self.over.f1.codom() {
            return bad("leg domains differ from span codomains");
        }
        if !is_embedding(&self.g0) {
            return bad("g0 is not an embedding");
        }
        if !self.over.is_true_span() {
            return Ok(());
        }
        if self.g0.codom() != self.g1.codom() {
            return bad("legs have different codomains");
        }
        if !is_embedding(&self.g1) {
            return bad("g1 is not an embedding");
        }
        let left = compose(&self.over.f0, &self.g0)?;
        let right = compose(&self.over.f1, &self.g1)?;
        if left != right {
            return bad("square does not commute");
        }
        Ok(())
    }
}

/// The fallback diagram for a span with a non-embedding leg: the identity
/// on `codom(f0)` and the map sending `codom(f1)` onto the tuple of
/// `codom(f0)`.
pub fn degenerate_diagram(span: &Span) -> AmalgDiagram {
    let b = span.f0.codom().clone();
    AmalgDiagram {
        g0: PotentialEmbedding::identity(&b),
        g1: PotentialEmbedding {
            src: span.f1.codom().clone(),
            dst: b.clone(),
            image: b.tuple().to_vec(),
        },
        over: span.clone(),
    }
}

/// One shape of common extension of the two codomains. Elements of
/// `codom(f0)` keep their ids; `h1` sends `codom(f1)` into `structure`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub structure: FinStructure,
    pub h1: BTreeMap<Elem, Elem>,
    pub identifications: usize,
    pub cross_tuples: usize,
}

impl Candidate {
    pub fn diagram(&self, span: &Span) -> AmalgDiagram {
        let b = span.f0.codom();
        let c = span.f1.codom();
        let c_img: Vec<Elem> = c.tuple().iter().map(|x| self.h1[x]).collect();
        let mut tuple = b.tuple().to_vec();
        tuple.extend(self.structure.domain().iter().copied().filter(|x| !b.structure().contains(*x)));
        let d = Pointed::new(tuple, self.structure.clone()).expect("union of generating tuples");
        AmalgDiagram {
            g0: PotentialEmbedding {
                src: b.clone(),
                dst: d.clone(),
                image: b.tuple().to_vec(),
            },
            g1: PotentialEmbedding {
                src: c.clone(),
                dst: d,
                image: c_img,
            },
            over: span.clone(),
        }
    }
}

/// Every candidate amalgam up to `bound` elements failed membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonAmalgCertificate {
    pub span: Span,
    pub bound: usize,
    pub exhausted_candidates: u128,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifyOutcome {
    Certified(NonAmalgCertificate),
    Amalgamable(AmalgDiagram),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseVerdict {
    CertifiedNotBase {
        span: Span,
        certificate: NonAmalgCertificate,
        span_index: usize,
    },
    NoCounterexampleUpTo {
        span_bound: usize,
        amalg_bound: Option<usize>,
        spans_checked: usize,
        unknown_spans: usize,
    },
}

impl BaseVerdict {
    pub fn is_not_base(&self) -> bool {
        matches!(self, BaseVerdict::CertifiedNotBase { .. })
    }
}

// ------------------------------------------------------------ shape search

const MAX_REASONS: usize = 8;

/// Identification pattern with its fixed part and the undecided tuples.
struct Pattern {
    identifications: usize,
    h1: BTreeMap<Elem, Elem>,
    fixed: FinStructure,
    /// Elements in processing order, shared ones first.
    order: Vec<Elem>,
    /// Number of leading elements of `order` fixed before any choice.
    shared: usize,
    /// `levels[j]`: cross tuples whose last element is `order[shared + j]`.
    levels: Vec<Vec<(usize, Vec<Elem>)>>,
    fresh: BTreeSet<Elem>,
}

impl Pattern {
    fn total_cross(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

struct Layout<'s> {
    b: &'s FinStructure,
    c: &'s FinStructure,
    base: BTreeMap<Elem, Elem>,
    b_only: Vec<Elem>,
    c_free: Vec<Elem>,
    fresh_start: Elem,
    min_ident: usize,
}

fn check_signature(span: &Span) -> Result<(), AmalgError> {
    let sig = span.base().sig();
    if let Some((name, arity)) = sig.functions().iter().find(|(_, a)| *a != 1) {
        return Err(AmalgError::SignatureUnsupported(format!(
            "function {name} has arity {arity}; only unary functions have bounded closure growth"
        )));
    }
    Ok(())
}

impl<'s> Layout<'s> {
    fn new(span: &'s Span, size_bound: usize) -> Result<Self, AmalgError> {
        check_signature(span)?;
        if !span.is_true_span() {
            return Err(AmalgError::NotTrueSpan);
        }
        let b = span.f0.codom().structure();
        let c = span.f1.codom().structure();
        let base = cl_sim_map(span.f1.range(), c, span.f0.range(), b)?.ok_or(AmalgError::NotTrueSpan)?;
        let base_img: BTreeSet<Elem> = base.values().copied().collect();
        let b_only: Vec<Elem> = b.domain().iter().copied().filter(|x| !base_img.contains(x)).collect();
        let c_free: Vec<Elem> = c.domain().iter().copied().filter(|x| !base.contains_key(x)).collect();
        let fresh_start = b.max_elem().map_or(0, |m| m + 1);
        let min_ident = (b.len() + c_free.len()).saturating_sub(size_bound);
        Ok(Layout {
            b,
            c,
            base,
            b_only,
            c_free,
            fresh_start,
            min_ident,
        })
    }

    fn max_ident(&self) -> usize {
        self.c_free.len().min(self.b_only.len())
    }

    /// Cross tuples are most numerous when nothing is identified.
    fn max_cross(&self) -> usize {
        let none = alloc::vec![None; self.c_free.len()];
        self.build(&none).map_or(0, |p| p.total_cross())
    }

    fn build(&self, ident: &[Option<Elem>]) -> Option<Pattern> {
        build_pattern(self.b, self.c, &self.base, &self.c_free, &self.b_only, ident, self.fresh_start)
    }

    /// Consistent patterns in depth-first order, "no identification" first,
    /// optionally restricted to exactly `exact` identifications.
    fn for_each_pattern(
        &self,
        exact: Option<usize>,
        f: &mut impl FnMut(&Pattern) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut ident = Vec::with_capacity(self.c_free.len());
        let mut used = BTreeSet::new();
        self.injections(exact, 0, &mut ident, &mut used, f)
    }

    fn injections(
        &self,
        exact: Option<usize>,
        count: usize,
        ident: &mut Vec<Option<Elem>>,
        used: &mut BTreeSet<Elem>,
        f: &mut impl FnMut(&Pattern) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let left = self.c_free.len() - ident.len();
        let want = exact.unwrap_or(0).max(self.min_ident);
        if count + left.min(self.b_only.len() - used.len()) < want {
            return ControlFlow::Continue(());
        }
        if left == 0 {
            if exact.is_some_and(|e| e != count) {
                return ControlFlow::Continue(());
            }
            return match self.build(ident) {
                Some(p) => f(&p),
                None => ControlFlow::Continue(()),
            };
        }
        ident.push(None);
        let r = self.injections(exact, count, ident, used, f);
        ident.pop();
        r?;
        if exact.is_some_and(|e| count >= e) {
            return ControlFlow::Continue(());
        }
        for &y in &self.b_only {
            if used.insert(y) {
                ident.push(Some(y));
                let r = self.injections(exact, count + 1, ident, used, f);
                ident.pop();
                used.remove(&y);
                r?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Every tuple over `prior` of the given arity that mentions `x`.
fn tuples_with(prior: &[Elem], arity: usize, x: Elem, f: &mut impl FnMut(&[Elem])) {
    fn go(prior: &[Elem], arity: usize, x: Elem, seen: bool, buf: &mut Vec<Elem>, f: &mut impl FnMut(&[Elem])) {
        if buf.len() == arity {
            if seen {
                f(buf);
            }
            return;
        }
        if !seen && buf.len() + 1 == arity {
            buf.push(x);
            f(buf);
            buf.pop();
            return;
        }
        for &y in prior {
            buf.push(y);
            go(prior, arity, x, seen || y == x, buf, f);
            buf.pop();
        }
    }
    go(prior, arity, x, false, &mut Vec::with_capacity(arity), f);
}

fn build_pattern(
    b: &FinStructure,
    c: &FinStructure,
    base: &BTreeMap<Elem, Elem>,
    c_free: &[Elem],
    b_only: &[Elem],
    ident: &[Option<Elem>],
    fresh_start: Elem,
) -> Option<Pattern> {
    let mut h1 = base.clone();
    let mut fresh = Vec::new();
    for (i, &x) in c_free.iter().enumerate() {
        match ident[i] {
            Some(y) => {
                h1.insert(x, y);
            }
            None => {
                let id = fresh_start + fresh.len() as Elem;
                fresh.push(id);
                h1.insert(x, id);
            }
        }
    }
    let in_c: BTreeSet<Elem> = h1.values().copied().collect();
    // Tuples inside the image of codom(f1) that also lie in codom(f0) must agree.
    let inv: BTreeMap<Elem, Elem> = h1.iter().map(|(k, v)| (*v, *k)).collect();
    for (ri, (_, arity)) in b.sig().relation_symbols().iter().enumerate() {
        for t in c.rel_table(ri) {
            let img: Vec<Elem> = t.iter().map(|x| h1[x]).collect();
            if img.iter().all(|x| b.contains(*x)) && !b.holds(ri, &img) {
                return None;
            }
        }
        let mut ok = true;
        for t in b.rel_table(ri) {
            if ok && t.len() == *arity && t.iter().all(|x| in_c.contains(x)) {
                let pre: Vec<Elem> = t.iter().map(|x| inv[x]).collect();
                ok = c.holds(ri, &pre);
            }
        }
        if !ok {
            return None;
        }
    }
    let mut d = b.clone();
    d.add_elements(fresh.iter().copied());
    for (ri, _) in b.sig().relation_symbols().iter().enumerate() {
        for t in c.rel_table(ri) {
            d.insert_rel_at(ri, t.iter().map(|x| h1[x]).collect());
        }
    }
    for fi in 0..b.sig().functions().len() {
        for (args, v) in c.fun_table(fi) {
            let a: Vec<Elem> = args.iter().map(|x| h1[x]).collect();
            let img = h1[v];
            match d.apply(fi, &a) {
                Some(existing) if existing != img => return None,
                Some(_) => {}
                None => d.set_fun_at(fi, a, img),
            }
        }
    }
    // Processing order: shared elements, then B-only and fresh alternately.
    let b_only_set: BTreeSet<Elem> = b_only.iter().copied().collect();
    let b_rest: Vec<Elem> = b_only.iter().copied().filter(|x| !in_c.contains(x)).collect();
    let mut order: Vec<Elem> = b
        .domain()
        .iter()
        .copied()
        .filter(|x| in_c.contains(x) || !b_only_set.contains(x))
        .collect();
    let shared = order.len();
    let (mut bi, mut fi) = (0, 0);
    while bi < b_rest.len() || fi < fresh.len() {
        if bi < b_rest.len() {
            order.push(b_rest[bi]);
            bi += 1;
        }
        if fi < fresh.len() {
            order.push(fresh[fi]);
            fi += 1;
        }
    }
    let fresh_set: BTreeSet<Elem> = fresh.iter().copied().collect();
    let b_rest_set: BTreeSet<Elem> = b_rest.iter().copied().collect();
    let mut levels = Vec::new();
    for j in shared..order.len() {
        let x = order[j];
        let prior = &order[..=j];
        let mut level = Vec::new();
        if !fresh_set.is_empty() && !b_rest_set.is_empty() {
            for (ri, (_, arity)) in b.sig().relation_symbols().iter().enumerate() {
                tuples_with(prior, *arity, x, &mut |t| {
                    if t.iter().any(|e| fresh_set.contains(e)) && t.iter().any(|e| b_rest_set.contains(e)) {
                        level.push((ri, t.to_vec()));
                    }
                });
            }
        }
        levels.push(level);
    }
    Some(Pattern {
        identifications: ident.iter().filter(|x| x.is_some()).count(),
        h1,
        fixed: d,
        order,
        shared,
        levels,
        fresh: fresh_set,
    })
}

/// Membership test for candidates and their partial stages.
enum Oracle<'a> {
    /// Enumerate only.
    None,
    Age {
        age: &'a Age,
        /// Member types (canonical) when the age has no validator.
        types: Option<BTreeSet<FinStructure>>,
    },
}

impl Oracle<'_> {
    fn member(&self, m: &FinStructure) -> Result<(), String> {
        match self {
            Oracle::None => Ok(()),
            Oracle::Age { types: Some(t), .. } => {
                if t.contains(&canonical(m)) {
                    Ok(())
                } else {
                    Err("not among enumerated members".into())
                }
            }
            Oracle::Age { age, types: None } => match age.validate(m) {
                Ok(r) => r,
                Err(e) => Err(format!("{e}")),
            },
        }
    }

    fn hereditary(&self) -> bool {
        matches!(self, Oracle::Age { age, .. } if age.hp())
    }

    fn obstruction(&self, m: &FinStructure) -> Option<String> {
        match self {
            Oracle::Age { age, .. } => age.obstruction(m),
            Oracle::None => None,
        }
    }
}

#[derive(Default)]
struct Stats {
    refuted: u128,
    reasons: Vec<String>,
}

impl Stats {
    fn refute(&mut self, leaves: u128, reason: String) {
        self.refuted = self.refuted.saturating_add(leaves);
        if self.reasons.len() < MAX_REASONS && !self.reasons.contains(&reason) {
            self.reasons.push(reason);
        }
    }
}

fn leaves(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

/// Count constraint for ordered enumeration: exact identification and
/// cross-tuple counts.
#[derive(Clone, Copy)]
struct Exact {
    identifications: usize,
    cross: usize,
}

struct Walk<'a, 'o, F> {
    oracle: &'a Oracle<'o>,
    exact: Option<Exact>,
    stats: Stats,
    visit: F,
}

impl<F: FnMut(&Pattern, &FinStructure, usize) -> ControlFlow<()>> Walk<'_, '_, F> {
    fn run(&mut self, layout: &Layout) -> ControlFlow<()> {
        let exact = self.exact;
        layout.for_each_pattern(exact.map(|e| e.identifications), &mut |p| {
            let total = p.total_cross();
            if exact.is_some_and(|e| total < e.cross) {
                return ControlFlow::Continue(());
            }
            if let Some(reason) = self.oracle.obstruction(&p.fixed) {
                self.stats.refute(leaves(total), reason);
                return ControlFlow::Continue(());
            }
            let mut d = p.fixed.clone();
            self.level(p, 0, 0, total, &mut d)
        })
    }

    fn level(&mut self, p: &Pattern, j: usize, used: usize, remaining: usize, d: &mut FinStructure) -> ControlFlow<()> {
        if j == p.levels.len() {
            if self.exact.is_some_and(|e| e.cross != used) {
                return ControlFlow::Continue(());
            }
            return match self.oracle.member(d) {
                Ok(()) => (self.visit)(p, d, used),
                Err(reason) => {
                    self.stats.refute(1, reason);
                    ControlFlow::Continue(())
                }
            };
        }
        let rest = remaining - p.levels[j].len();
        self.choose(p, j, 0, 0, used, rest, d)
    }

    /// Decide the tuples of level `j` one at a time, absent before present,
    /// so choice vectors run in lexicographic order.
    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        p: &Pattern,
        j: usize,
        i: usize,
        k: usize,
        used: usize,
        rest: usize,
        d: &mut FinStructure,
    ) -> ControlFlow<()> {
        let tuples = &p.levels[j];
        if let Some(e) = self.exact {
            if used + k > e.cross || used + k + (tuples.len() - i) + rest < e.cross {
                return ControlFlow::Continue(());
            }
        }
        if i < tuples.len() {
            self.choose(p, j, i + 1, k, used, rest, d)?;
            let (ri, t) = &tuples[i];
            d.insert_rel_at(*ri, t.clone());
            let r = self.choose(p, j, i + 1, k + 1, used, rest, d);
            d.remove_rel_at(*ri, t);
            return r;
        }
        // Skipped checks are sound: every leaf is validated in full.
        if k > 0 {
            if let Some(reason) = self.oracle.obstruction(d) {
                self.stats.refute(leaves(rest), reason);
                return ControlFlow::Continue(());
            }
        }
        let x = p.order[p.shared + j];
        if self.oracle.hereditary() && j + 1 < p.levels.len() && (k > 0 || p.fresh.contains(&x)) {
            let prefix: BTreeSet<Elem> = p.order[..p.shared + j + 1].iter().copied().collect();
            if let Ok(sub) = partial(d, &prefix) {
                if let Err(reason) = self.oracle.member(&sub) {
                    self.stats.refute(leaves(rest), reason);
                    return ControlFlow::Continue(());
                }
            }
        }
        self.level(p, j + 1, used + k, rest, d)
    }
}

/// Induced substructure on `s` when `s` is closed.
fn partial(d: &FinStructure, s: &BTreeSet<Elem>) -> Result<FinStructure, StructError> {
    let seed: Vec<Elem> = s.iter().copied().collect();
    if closure_set(d, &seed)?.len() != s.len() {
        return Err(StructError::NotGenerated);
    }
    induced_substructure(d, s)
}

fn to_candidate(p: &Pattern, d: &FinStructure, cross: usize) -> Candidate {
    Candidate {
        structure: d.clone(),
        h1: p.h1.clone(),
        identifications: p.identifications,
        cross_tuples: cross,
    }
}

/// All common-extension shapes of a true span with at most `size_bound`
/// elements: fewest identifications first, then fewest cross tuples, then
/// depth-first choice order. Fails once more than `cap` shapes exist.
pub fn candidate_amalgams(span: &Span, size_bound: usize, cap: u64) -> Result<Vec<Candidate>, AmalgError> {
    let layout = Layout::new(span, size_bound)?;
    let mut out = Vec::new();
    let max_cross = layout.max_cross();
    for identifications in 0..=layout.max_ident() {
        for cross in 0..=max_cross {
            let mut over = false;
            let mut walk = Walk {
                oracle: &Oracle::None,
                exact: Some(Exact { identifications, cross }),
                stats: Stats::default(),
                visit: |p: &Pattern, d: &FinStructure, k: usize| {
                    if out.len() as u64 >= cap {
                        over = true;
                        return ControlFlow::Break(());
                    }
                    out.push(to_candidate(p, d, k));
                    ControlFlow::Continue(())
                },
            };
            let _ = walk.run(&layout);
            if over {
                return Err(AmalgError::CandidateCapExceeded(cap));
            }
        }
    }
    Ok(out)
}

/// The shape with no identifications and no cross tuples, unchecked
/// against any age.
pub fn free_amalgam(span: &Span) -> Result<AmalgDiagram, AmalgError> {
    let layout = Layout::new(span, usize::MAX)?;
    let none = alloc::vec![None; layout.c_free.len()];
    let p = layout
        .build(&none)
        .ok_or_else(|| AmalgError::InvalidDiagram("inconsistent span".into()))?;
    let diagram = to_candidate(&p, &p.fixed, 0).diagram(span);
    diagram.check()?;
    Ok(diagram)
}

fn oracle_for(age: &Age, size_bound: usize, budget: u64) -> Result<Oracle<'_>, AmalgError> {
    if age.has_validator() {
        return Ok(Oracle::Age { age, types: None });
    }
    let types = age.types_up_to(size_bound, budget)?.into_iter().collect();
    Ok(Oracle::Age { age, types: Some(types) })
}

/// First member candidate in enumeration order, as a verified diagram.
/// A span with a non-embedding leg gets the degenerate diagram.
pub fn amalgamate(age: &Age, span: &Span, size_bound: usize, budget: u64) -> Result<AmalgDiagram, AmalgError> {
    if !span.is_true_span() {
        check_signature(span)?;
        let diagram = degenerate_diagram(span);
        diagram.check()?;
        return Ok(diagram);
    }
    let layout = Layout::new(span, size_bound)?;
    let oracle = oracle_for(age, size_bound, budget)?;
    // Existence first with full pruning, then the least candidate in order.
    let mut first: Option<Candidate> = None;
    let mut walk = Walk {
        oracle: &oracle,
        exact: None,
        stats: Stats::default(),
        visit: |p: &Pattern, d: &FinStructure, k: usize| {
            first = Some(to_candidate(p, d, k));
            ControlFlow::Break(())
        },
    };
    let _ = walk.run(&layout);
    let Some(first) = first else {
        return Err(AmalgError::NotFoundWithinBound);
    };
    let finish = |c: Candidate| {
        let diagram = c.diagram(span);
        diagram.check()?;
        Ok(diagram)
    };
    if first.identifications == 0 && first.cross_tuples == 0 {
        return finish(first);
    }
    let max_cross = layout.max_cross();
    for identifications in 0..=layout.max_ident() {
        for cross in 0..=max_cross {
            let mut found = None;
            let mut walk = Walk {
                oracle: &oracle,
                exact: Some(Exact { identifications, cross }),
                stats: Stats::default(),
                visit: |p: &Pattern, d: &FinStructure, k: usize| {
                    found = Some(to_candidate(p, d, k));
                    ControlFlow::Break(())
                },
            };
            let _ = walk.run(&layout);
            if let Some(c) = found {
                return finish(c);
            }
        }
    }
    Err(AmalgError::NotFoundWithinBound)
}

/// Exhaust every candidate shape of the span against the age's validator.
/// Needs a validator, heredity and a bound that admits the disjoint shape.
pub fn certify_non_amalgamable(age: &Age, span: &Span, size_bound: usize) -> CertifyOutcome {
    if !age.has_validator() || !age.hp() {
        return CertifyOutcome::Unknown("age lacks a validator or heredity".into());
    }
    if !span.is_true_span() {
        return CertifyOutcome::Unknown("span has a non-embedding leg".into());
    }
    let layout = match Layout::new(span, size_bound) {
        Ok(l) => l,
        Err(e) => return CertifyOutcome::Unknown(format!("{e}")),
    };
    let b = span.f0.codom().len();
    let c_free = span.f1.codom().len() - span.base().structure().len();
    if size_bound < b + c_free {
        return CertifyOutcome::Unknown(format!(
            "bound {size_bound} excludes shapes with up to {} elements",
            b + c_free
        ));
    }
    let oracle = Oracle::Age { age, types: None };
    let mut found = None;
    let mut walk = Walk {
        oracle: &oracle,
        exact: None,
        stats: Stats::default(),
        visit: |p: &Pattern, d: &FinStructure, k: usize| {
            found = Some(to_candidate(p, d, k));
            ControlFlow::Break(())
        },
    };
    let _ = walk.run(&layout);
    let stats = walk.stats;
    match found {
        Some(c) => {
            let diagram = c.diagram(span);
            match diagram.check() {
                Ok(()) => CertifyOutcome::Amalgamable(diagram),
                Err(e) => CertifyOutcome::Unknown(format!("{e}")),
            }
        }
        None => CertifyOutcome::Certified(NonAmalgCertificate {
            span: span.clone(),
            bound: size_bound,
            exhausted_candidates: stats.refuted,
            reasons: stats.reasons,
        }),
    }
}

/// Search bounds for base checks. `None` means the documented default:
/// `|A| + 4` for spans and `|B| + |C|` for amalgams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseBounds {
    pub span_bound: Option<usize>,
    pub amalg_bound: Option<usize>,
    pub budget: u64,
}

impl Default for BaseBounds {
    fn default() -> Self {
        BaseBounds {
            span_bound: None,
            amalg_bound: None,
            budget: 1 << 20,
        }
    }
}

/// Spans over `a` drawn from member extensions with at most `span_bound`
/// elements: one per unordered pair of extension types, smaller pairs first.
pub fn spans_over(age: &Age, a: &Pointed, span_bound: usize, budget: u64) -> Result<Vec<Span>, AmalgError> {
    let exts = age.extensions(a, span_bound.saturating_sub(a.structure().len()), budget)?;
    let mut out = Vec::new();
    for j in 0..exts.len() {
        for i in 0..=j {
            out.push(Span::new(exts[i].embedding_from(a), exts[j].embedding_from(a))?);
        }
    }
    Ok(out)
}

/// Look for a span over `a` that provably has no amalgam. The first
/// certified span in `spans_over` order is reported.
pub fn is_amalgamation_base(age: &Age, a: &Pointed, bounds: BaseBounds) -> Result<BaseVerdict, AmalgError> {
    let span_bound = bounds.span_bound.unwrap_or(a.structure().len() + 4);
    let exts = age.extensions(a, span_bound.saturating_sub(a.structure().len()), bounds.budget)?;
    let mut index = 0;
    let mut unknown = 0;
    for j in 0..exts.len() {
        for i in 0..=j {
            let span = Span::new(exts[i].embedding_from(a), exts[j].embedding_from(a))?;
            let bound = bounds
                .amalg_bound
                .unwrap_or(exts[i].structure.len() + exts[j].structure.len());
            match certify_non_amalgamable(age, &span, bound) {
                CertifyOutcome::Certified(certificate) => {
                    return Ok(BaseVerdict::CertifiedNotBase {
                        span,
                        certificate,
                        span_index: index,
                    })
                }
                CertifyOutcome::Amalgamable(_) => {}
                CertifyOutcome::Unknown(_) => unknown += 1,
            }
            index += 1;
        }
    }
    Ok(BaseVerdict::NoCounterexampleUpTo {
        span_bound,
        amalg_bound: bounds.amalg_bound,
        spans_checked: index,
        unknown_spans: unknown,
    })
}

/// Embed `a` into the first member extension (by at most `extend_by` new
/// elements) for which no base counterexample is found.
pub fn coap_witness_search(
    age: &Age,
    a: &Pointed,
    extend_by: usize,
    bounds: BaseBounds,
) -> Result<(PotentialEmbedding, BaseVerdict), AmalgError> {
    for ext in age.extensions(a, extend_by, bounds.budget)? {
        let p = ext.pointed();
        let span_bound = bounds.span_bound.map(|s| s.max(p.len()));
        let verdict = is_amalgamation_base(age, &p, BaseBounds { span_bound, ..bounds })?;
        if !verdict.is_not_base() {
            return Ok((ext.embedding_from(a), verdict));
        }
    }
    Err(AmalgError::NotFoundWithinBound)
}

/// Inclusion of a pointed structure into another that contains it with the
/// same element ids.
pub fn inclusion(a: &Pointed, b: &Pointed) -> PotentialEmbedding {
    PotentialEmbedding {
        src: a.clone(),
        dst: b.clone(),
        image: a.tuple().to_vec(),
    }
}

/// Span given by two inclusions of a common substructure.
pub fn inclusion_span(a: &Pointed, b: &Pointed, c: &Pointed) -> Result<Span, AmalgError> {
    Span::new(inclusion(a, b), inclusion(a, c))
}

#[cfg(test)]
mod tests {
    use alloc::vec;
    use super::*;
    use crate::gadgets::{graph, graphs_age, kr_age, kr_m2, kr_m3, kr_sig, w_mn, w_mn_age};
    use crate::structure::Signature;
    use alloc::sync::Arc;

    fn point(sig: Arc<Signature>) -> Pointed {
        let mut m = FinStructure::new(sig);
        m.add_element(0);
        Pointed::whole(m)
    }

    #[test]
    fn two_singletons_over_empty_base() {
        let sig = Arc::new(Signature::relational(&[("E", 2)]).unwrap());
        let empty = Pointed::whole(FinStructure::new(sig.clone()));
        let p = point(sig);
        let f = PotentialEmbedding::new(empty.clone(), p.clone(), vec![]).unwrap();
        let span = Span::new(f.clone(), f).unwrap();
        let cands = candidate_amalgams(&span, 2, 100).unwrap();
        assert_eq!(cands.len(), 5);
        assert_eq!(cands[0].identifications, 0);
        assert_eq!(cands[0].cross_tuples, 0);
        assert_eq!(cands[4].identifications, 1);
        assert_eq!(cands[4].structure.len(), 1);
        assert!(matches!(candidate_amalgams(&span, 2, 4), Err(AmalgError::CandidateCapExceeded(4))));
        // Only the identified shape fits one element.
        assert_eq!(candidate_amalgams(&span, 1, 100).unwrap().len(), 1);
    }

    #[test]
    fn identical_point_extensions_include_both_shapes() {
        let g = graph(2, &[(0, 1)]);
        let a = Pointed::new(vec![0], graph(1, &[])).unwrap();
        let b = Pointed::whole(g);
        let span = inclusion_span(&a, &b, &b).unwrap();
        let sizes: BTreeSet<usize> = candidate_amalgams(&span, 3, 1000)
            .unwrap()
            .iter()
            .map(|c| c.structure.len())
            .collect();
        assert_eq!(sizes, [2, 3].into());
    }

    #[test]
    fn kr_span_is_certified() {
        let age = kr_age();
        let mut x = FinStructure::new(kr_sig());
        x.add_element(0);
        let a = Pointed::whole(x);
        let span = inclusion_span(&a, &Pointed::whole(kr_m2()), &Pointed::whole(kr_m3())).unwrap();
        match certify_non_amalgamable(&age, &span, 5) {
            CertifyOutcome::Certified(c) => {
                assert_eq!(c.exhausted_candidates, 16);
                assert!(!c.reasons.is_empty());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(amalgamate(&age, &span, 10, 0), Err(AmalgError::NotFoundWithinBound));
        // Every candidate makes x carry two successors.
        for cand in candidate_amalgams(&span, 5, 1000).unwrap() {
            let out = cand.structure.rel_table(0).iter().filter(|t| t[0] == 0).count();
            assert!(out >= 2);
        }
    }

    #[test]
    fn graph_point_extensions_amalgamate_small() {
        let age = graphs_age();
        let a = Pointed::new(vec![0], graph(1, &[])).unwrap();
        let b = Pointed::whole(graph(2, &[(0, 1)]));
        let c = Pointed::whole(graph(2, &[]));
        let span = inclusion_span(&a, &b, &c).unwrap();
        let d = amalgamate(&age, &span, 3, 0).unwrap();
        assert!(d.g0.codom().len() <= 3);
        d.check().unwrap();
        assert!(matches!(certify_non_amalgamable(&age, &span, 3), CertifyOutcome::Amalgamable(_)));
    }

    #[test]
    fn non_true_span_gets_degenerate_diagram() {
        let age = graphs_age();
        let a = Pointed::whole(graph(2, &[(0, 1)]));
        let b = Pointed::whole(graph(2, &[]));
        let f0 = PotentialEmbedding::identity(&a);
        let f1 = PotentialEmbedding::new(a, b.clone(), vec![0, 1]).unwrap();
        let span = Span::new(f0.clone(), f1).unwrap();
        let d = amalgamate(&age, &span, 4, 0).unwrap();
        assert_eq!(d.g0, PotentialEmbedding::identity(f0.codom()));
        assert_eq!(d.g1.src, b);
        assert_eq!(d.g1.image, vec![0, 1]);
    }

    #[test]
    fn w_roots_are_not_a_base() {
        let age = w_mn_age(2, 4).unwrap();
        let w = w_mn(2, 4, 0).unwrap();
        let roots: BTreeSet<Elem> = [w.q_plus, w.q_minus].into();
        let a = Pointed::whole(induced_substructure(&w.structure, &roots).unwrap());
        let v = is_amalgamation_base(&age, &a, BaseBounds::default()).unwrap();
        assert!(v.is_not_base(), "{v:?}");
    }

    #[test]
    fn functions_of_higher_arity_are_rejected() {
        let sig = Arc::new(Signature::new(vec![], vec![("g".into(), 2)], None).unwrap());
        let empty = Pointed::whole(FinStructure::new(sig));
        let f = PotentialEmbedding::identity(&empty);
        let span = Span::new(f.clone(), f).unwrap();
        assert!(matches!(
            candidate_amalgams(&span, 3, 10),
            Err(AmalgError::SignatureUnsupported(_))
        ));
    }
}
