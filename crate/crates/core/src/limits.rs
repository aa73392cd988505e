//! Chains of embeddings realized as unions, the staged limit builder over
//! an age with coAP witnesses, cofinal collections, the cofinal extension
//! function and back-and-forth partial automorphisms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::ages::{hp_witness, jep_witness, Age, AgeDescriptor, AgeError, Extension};
use crate::amalgamation::{
    amalgamate, coap_witness_search, free_amalgam, inclusion, is_amalgamation_base, AmalgDiagram, AmalgError,
    BaseBounds, Span,
};
use crate::canon::canonical_over;
use crate::embeddings::{compose, is_embedding, EmbedError, EmbeddingSearch, PotentialEmbedding};
use crate::structure::{cl_sim, cl_sim_map, closure, closure_set, tuple_sim, Elem, FinStructure, Pointed, StructError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LimitError {
    #[error("chain is empty")]
    EmptyChain,
    #[error("codomain of step {0} differs from the domain of the next step")]
    NotComposable(usize),
    #[error("step {0} is not an embedding")]
    NotAnEmbedding(usize),
    #[error("age has no coAP witness")]
    MissingCoap,
    #[error("witness failure: {0}")]
    WitnessFailure(String),
    #[error("not extendable in prefix{}", round.map(|r| format!(" (round {r})")).unwrap_or_default())]
    NotExtendableInPrefix { round: Option<usize> },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("homogenizer output is not an automorphism: {0}")]
    HomogOutputNotAutomorphism(String),
    #[error(transparent)]
    Age(#[from] AgeError),
    #[error(transparent)]
    Amalg(#[from] AmalgError),
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

// ------------------------------------------------------------------ chains

/// `stages[i]` is `D_i`; `g_maps[i]` embeds the `i`-th member into `D_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainResult {
    pub stages: Vec<FinStructure>,
    pub g_maps: Vec<PotentialEmbedding>,
}

/// Renaming of `next` that agrees with `phi` (prev-ids to next-ids) on the
/// old part and hands out ids above `prev` to the rest, in order.
fn keep_old_ids(prev: &FinStructure, phi: &BTreeMap<Elem, Elem>, next: &FinStructure) -> BTreeMap<Elem, Elem> {
    let mut rename: BTreeMap<Elem, Elem> = phi.iter().map(|(&old, &new)| (new, old)).collect();
    let mut fresh = prev.max_elem().map_or(0, |m| m + 1);
    for &x in next.domain() {
        if let alloc::collections::btree_map::Entry::Vacant(v) = rename.entry(x) {
            v.insert(fresh);
            fresh += 1;
        }
    }
    rename
}

fn map_tuple(map: &BTreeMap<Elem, Elem>, t: &[Elem]) -> Vec<Elem> {
    t.iter().map(|x| map[x]).collect()
}

/// Realize `F_0, ..., F_{n-1}` as literal inclusions `D_0 ⊆ ... ⊆ D_n`.
/// `D_0` is `dom(F_0)`; later elements get fresh ids.
pub fn chain_union(embeddings: &[PotentialEmbedding], n: usize) -> Result<ChainResult, LimitError> {
    let first = embeddings.first().ok_or(LimitError::EmptyChain)?;
    if n > embeddings.len() {
        return Err(LimitError::Precondition(format!("{n} steps requested, {} given", embeddings.len())));
    }
    for i in 0..n {
        if !is_embedding(&embeddings[i]) {
            return Err(LimitError::NotAnEmbedding(i));
        }
        if i + 1 < n && embeddings[i].codom() != embeddings[i + 1].dom() {
            return Err(LimitError::NotComposable(i));
        }
    }
    let mut members: Vec<&Pointed> = Vec::with_capacity(n + 1);
    members.push(first.dom());
    members.extend(embeddings[..n].iter().map(|f| f.codom()));

    let mut psi: Vec<BTreeMap<Elem, Elem>> = Vec::with_capacity(n + 1);
    psi.push(members[0].structure().domain().iter().map(|&x| (x, x)).collect());
    let mut stages = alloc::vec![members[0].structure().clone()];
    for (i, f) in embeddings[..n].iter().enumerate() {
        let phi = f.as_map().ok_or(LimitError::NotAnEmbedding(i))?;
        // phi: M_i -> M_{i+1}; carry D_i ids across.
        let carried: BTreeMap<Elem, Elem> = phi.iter().map(|(y, fy)| (psi[i][y], *fy)).collect();
        let rename = keep_old_ids(&stages[i], &carried, members[i + 1].structure());
        stages.push(members[i + 1].structure().rename(&rename));
        psi.push(rename);
    }
    let top = Pointed::new(map_tuple(&psi[n], members[n].tuple()), stages[n].clone())?;
    let g_maps = (0..=n)
        .map(|i| PotentialEmbedding {
            src: members[i].clone(),
            dst: top.clone(),
            image: map_tuple(&psi[i], members[i].tuple()),
        })
        .collect();
    Ok(ChainResult { stages, g_maps })
}

// --------------------------------------------------------------- witnesses

pub type HpFn = Arc<dyn Fn(&Pointed, &[Elem]) -> Result<Pointed, AgeError> + Send + Sync>;
pub type JepFn =
    Arc<dyn Fn(&Pointed, &Pointed) -> Result<(PotentialEmbedding, PotentialEmbedding), AgeError> + Send + Sync>;
pub type BaseTestFn = Arc<dyn Fn(&Pointed) -> bool + Send + Sync>;
pub type DistinguishedFn = Arc<dyn Fn(&Pointed) -> Result<PotentialEmbedding, AmalgError> + Send + Sync>;
pub type AmalgamatorFn = Arc<dyn Fn(&Span) -> Result<AmalgDiagram, AmalgError> + Send + Sync>;

/// Cofinal amalgamation witness: which members are bases, a distinguished
/// extension out of every member, and amalgams over spans out of bases.
#[derive(Clone)]
pub struct CoapWitness {
    pub base_test: BaseTestFn,
    pub distinguished: DistinguishedFn,
    pub amalgamator: AmalgamatorFn,
}

#[derive(Clone)]
pub struct WitnessPack {
    pub hp: HpFn,
    pub jep: JepFn,
    pub coap: Option<CoapWitness>,
}

impl WitnessPack {
    fn basic(age: &Arc<Age>, budget: u64) -> (HpFn, JepFn) {
        let a = age.clone();
        let hp: HpFn = Arc::new(move |p, b| hp_witness(&a, p, b, budget));
        let a = age.clone();
        let jep: JepFn = Arc::new(move |p, q| jep_witness(&a, p, q, budget));
        (hp, jep)
    }

    /// For free amalgamation classes: every member is a base, the
    /// distinguished extension is the identity and the amalgam glues the
    /// codomains over the base with nothing else added. The amalgam is
    /// validated against the age.
    pub fn free(age: Arc<Age>, budget: u64) -> Self {
        let (hp, jep) = Self::basic(&age, budget);
        let amalgamator: AmalgamatorFn = Arc::new(move |span| {
            let d = free_amalgam(span)?;
            match age.validate(d.g0.codom().structure())? {
                Ok(()) => Ok(d),
                Err(reason) => Err(AmalgError::InvalidDiagram(reason)),
            }
        });
        WitnessPack {
            hp,
            jep,
            coap: Some(CoapWitness {
                base_test: Arc::new(|_| true),
                distinguished: Arc::new(|p| Ok(PotentialEmbedding::identity(p))),
                amalgamator,
            }),
        }
    }

    /// Bounded searches throughout: base checks, extension search for a
    /// base and amalgam search at the disjoint-union bound.
    pub fn searched(age: Arc<Age>, bounds: BaseBounds, extend_by: usize) -> Self {
        let (hp, jep) = Self::basic(&age, bounds.budget);
        let a = age.clone();
        let base_test: BaseTestFn =
            Arc::new(move |p| is_amalgamation_base(&a, p, bounds).is_ok_and(|v| !v.is_not_base()));
        let a = age.clone();
        let distinguished: DistinguishedFn =
            Arc::new(move |p| coap_witness_search(&a, p, extend_by, bounds).map(|(f, _)| f));
        let amalgamator: AmalgamatorFn = Arc::new(move |span| {
            let bound = span.f0.codom().structure().len() + span.f1.codom().structure().len();
            amalgamate(&age, span, bound, bounds.budget)
        });
        WitnessPack {
            hp,
            jep,
            coap: Some(CoapWitness {
                base_test,
                distinguished,
                amalgamator,
            }),
        }
    }
}

// ---------------------------------------------------------------- schedule

/// One scheduled request: a tuple of naturals, a witness index and an
/// extension index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub d: Vec<Elem>,
    pub witness: u64,
    pub extension: u64,
}

pub trait Schedule {
    /// Triples for stages `1..=n`.
    fn triples(&self, n: usize) -> Vec<Triple>;
    /// Extensions of a scheduled member are taken up to this many new
    /// elements, smallest first.
    fn extension_depth(&self) -> usize {
        1
    }
}

impl Schedule for Vec<Triple> {
    fn triples(&self, n: usize) -> Vec<Triple> {
        self.iter().take(n).cloned().collect()
    }
}

/// Triples ordered by weight `2^len(d) + (max(d) + 1) + witness + extension`
/// and listed in rounds: round `r` repeats the first `2^r` of them, so every
/// triple recurs forever.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiagonalSchedule {
    pub depth: usize,
}

impl DiagonalSchedule {
    pub fn new() -> Self {
        DiagonalSchedule { depth: 1 }
    }

    /// The first `count` triples in weight order.
    pub fn ordered(count: usize) -> Vec<Triple> {
        let mut out = Vec::with_capacity(count);
        let mut w = 1u64;
        while out.len() < count {
            triples_of_weight(w, &mut out, count);
            w += 1;
        }
        out
    }
}

fn triples_of_weight(w: u64, out: &mut Vec<Triple>, count: usize) {
    let mut len = 0u32;
    while len < 63 && (1u64 << len) <= w {
        let rem = w - (1u64 << len);
        let ms: Vec<u64> = if len == 0 { alloc::vec![0] } else { (1..=rem).collect() };
        for m in ms {
            if m > rem {
                continue;
            }
            let rem2 = rem - m;
            for witness in 0..=rem2 {
                let extension = rem2 - witness;
                tuples_with_max(len as usize, m, &mut |d| {
                    if out.len() < count {
                        out.push(Triple {
                            d: d.to_vec(),
                            witness,
                            extension,
                        });
                    }
                });
                if out.len() >= count {
                    return;
                }
            }
        }
        len += 1;
    }
}

/// Tuples of length `len` over `0..m` whose maximum is `m - 1`, in
/// lexicographic order (`m = 0` only for the empty tuple).
fn tuples_with_max(len: usize, m: u64, f: &mut impl FnMut(&[Elem])) {
    fn go(len: usize, m: u64, hit: bool, buf: &mut Vec<Elem>, f: &mut impl FnMut(&[Elem])) {
        if buf.len() == len {
            if hit || len == 0 {
                f(buf);
            }
            return;
        }
        for x in 0..m {
            buf.push(x);
            go(len, m, hit || x + 1 == m, buf, f);
            buf.pop();
        }
    }
    go(len, m, false, &mut Vec::with_capacity(len), f);
}

impl Schedule for DiagonalSchedule {
    fn triples(&self, n: usize) -> Vec<Triple> {
        let mut rounds = Vec::new();
        let mut total = 0usize;
        let mut r = 0u32;
        while total < n {
            let size = 1usize << r.min(62);
            rounds.push(size);
            total = total.saturating_add(size);
            r += 1;
        }
        let longest = rounds.last().copied().unwrap_or(0);
        let order = Self::ordered(longest);
        let mut out = Vec::with_capacity(n);
        for size in rounds {
            for t in order.iter().take(size) {
                if out.len() == n {
                    return out;
                }
                out.push(t.clone());
            }
        }
        out
    }

    fn extension_depth(&self) -> usize {
        self.depth
    }
}

// ------------------------------------------------------------ limit prefix

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StageCase {
    /// Stage 0: the distinguished extension of the empty-tuple member.
    Initial,
    /// The scheduled tuple is not yet inside the prefix.
    OutsidePrefix,
    /// No witness with the requested index has a codomain like the tuple.
    NoWitness,
    /// The extension index is past the extension list.
    NoExtension,
    /// Amalgamated.
    Amalgamated,
}

impl StageCase {
    pub fn name(self) -> &'static str {
        match self {
            StageCase::Initial => "initial",
            StageCase::OutsidePrefix => "outside-prefix",
            StageCase::NoWitness => "no-witness",
            StageCase::NoExtension => "no-extension",
            StageCase::Amalgamated => "amalgamated",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            StageCase::Initial,
            StageCase::OutsidePrefix,
            StageCase::NoWitness,
            StageCase::NoExtension,
            StageCase::Amalgamated,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: usize,
    pub case: StageCase,
    pub d: Vec<Elem>,
    pub witness: u64,
    pub extension: u64,
    /// Size of the codomain of the amalgamated extension.
    pub extension_size: usize,
    /// Elements new at this stage.
    pub added: Vec<Elem>,
}

/// `B_n` with the stage generators `b_0..b_n` and the stage log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitPrefix {
    pub structure: FinStructure,
    pub markers: Vec<Vec<Elem>>,
    pub stage_log: Vec<StageRecord>,
    pub age_ref: AgeDescriptor,
}

impl LimitPrefix {
    /// `B_k` as recorded by the markers.
    pub fn stage_structure(&self, k: usize) -> Result<FinStructure, StructError> {
        Ok(closure(&self.structure, &self.markers[k])?.structure().clone())
    }

    /// Indices of pairwise distinct markers, first occurrence each.
    pub fn distinct_markers(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        (0..self.markers.len()).filter(|&i| seen.insert(&self.markers[i])).collect()
    }
}

type ExtCache = BTreeMap<(FinStructure, Vec<Elem>), Vec<Extension>>;

fn extensions_cached(age: &Age, m: &Pointed, depth: usize, cache: &mut ExtCache) -> Result<Vec<Extension>, AgeError> {
    let mut fixed: Vec<Elem> = Vec::new();
    for &x in m.tuple() {
        if !fixed.contains(&x) {
            fixed.push(x);
        }
    }
    let (canon, relabel) = canonical_over(m.structure(), &fixed);
    let key = (canon, map_tuple(&relabel, m.tuple()));
    if let Some(e) = cache.get(&key) {
        return Ok(e.clone());
    }
    let p = Pointed::new(key.1.clone(), key.0.clone())?;
    let exts = age.extensions(&p, depth, 1 << 22)?;
    cache.insert(key, exts.clone());
    Ok(exts)
}

/// Run the staged construction for `stages` stages after stage 0.
pub fn build_limit(
    age: &Age,
    witnesses: &WitnessPack,
    stages: usize,
    schedule: &dyn Schedule,
) -> Result<LimitPrefix, LimitError> {
    let coap = witnesses.coap.as_ref().ok_or(LimitError::MissingCoap)?;
    let failure = |e: AmalgError| LimitError::WitnessFailure(format!("{e}"));

    // Stage 0.
    let empty = (witnesses.hp)(&age.enumerate(0), &[])?;
    let f0 = (coap.distinguished)(&empty).map_err(failure)?;
    if f0.dom() != &empty || !is_embedding(&f0) {
        return Err(LimitError::WitnessFailure("stage-0 extension is not an embedding of the empty member".into()));
    }
    let mut b = f0.codom().clone();
    let mut log = alloc::vec![StageRecord {
        stage: 0,
        case: StageCase::Initial,
        d: Vec::new(),
        witness: 0,
        extension: 0,
        extension_size: b.len(),
        added: b.structure().domain().to_vec(),
    }];
    let mut markers = alloc::vec![b.tuple().to_vec()];
    let mut cache = ExtCache::new();

    for (n, t) in schedule.triples(stages).into_iter().enumerate() {
        let stage = n + 1;
        let mut record = StageRecord {
            stage,
            case: StageCase::OutsidePrefix,
            d: t.d.clone(),
            witness: t.witness,
            extension: t.extension,
            extension_size: 0,
            added: Vec::new(),
        };
        let skip = |record: StageRecord, case, log: &mut Vec<StageRecord>, markers: &mut Vec<Vec<Elem>>, b: &Pointed| {
            log.push(StageRecord { case, ..record });
            markers.push(b.tuple().to_vec());
        };
        if !t.d.iter().all(|&x| b.structure().contains(x)) {
            skip(record, StageCase::OutsidePrefix, &mut log, &mut markers, &b);
            continue;
        }
        let m = (witnesses.hp)(&b, &t.d)?;
        // Only the identity on a base has codomain cl_sim to d.
        if t.witness != 0 || !(coap.base_test)(&m) {
            skip(record, StageCase::NoWitness, &mut log, &mut markers, &b);
            continue;
        }
        let f = PotentialEmbedding::identity(&m);
        let exts = extensions_cached(age, f.codom(), schedule.extension_depth(), &mut cache)?;
        let Some(ext) = exts.get(t.extension as usize) else {
            skip(record, StageCase::NoExtension, &mut log, &mut markers, &b);
            continue;
        };
        let g = ext.embedding_from(f.codom());
        if !cl_sim(&t.d, b.structure(), g.dom().tuple(), g.dom().structure())? {
            skip(record, StageCase::NoWitness, &mut log, &mut markers, &b);
            continue;
        }
        let k = compose(&f, &g)?;
        let i_n = inclusion(&m, &b);
        let span = Span::new(i_n, k)?;
        let diagram = (coap.amalgamator)(&span).map_err(failure)?;
        diagram.check().map_err(failure)?;
        let h0 = diagram.g0.as_map().ok_or_else(|| LimitError::WitnessFailure("H0 is not an embedding".into()))?;
        let d_struct = diagram.g0.codom();
        let rename = keep_old_ids(b.structure(), &h0, d_struct.structure());
        let next = d_struct.structure().rename(&rename);
        let tuple = map_tuple(&rename, d_struct.tuple());
        record.added = next.domain().iter().copied().filter(|x| !b.structure().contains(*x)).collect();
        record.extension_size = ext.structure.len();
        record.case = StageCase::Amalgamated;
        b = Pointed::new(tuple, next)?;
        log.push(record);
        markers.push(b.tuple().to_vec());
    }
    Ok(LimitPrefix {
        structure: b.structure().clone(),
        markers,
        stage_log: log,
        age_ref: age.descriptor().clone(),
    })
}

// ------------------------------------------------------ cofinal extension

/// `(split, marker)`: `t[..split] ⊆ cl(t[split..])` and `t[split..]` is
/// `cl_sim` to marker `marker`. `None` when `t` is not in the cofinal
/// collection generated by the markers.
pub fn cofinal_witness(prefix: &LimitPrefix, t: &[Elem]) -> Result<Option<(usize, usize)>, LimitError> {
    let m = &prefix.structure;
    if !t.iter().all(|&x| m.contains(x)) {
        return Ok(None);
    }
    let markers = prefix.distinct_markers();
    for split in 0..=t.len() {
        let (a0, a1) = t.split_at(split);
        let cl = closure_set(m, a1)?;
        if !a0.iter().all(|x| cl.contains(x)) {
            continue;
        }
        for &k in &markers {
            let marker = &prefix.markers[k];
            if marker.len() == a1.len() && cl_sim(a1, m, marker, m)? {
                return Ok(Some((split, k)));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionStatus {
    /// `cl_sim(c, d)` and the closure map of `c -> d` restricts to that of
    /// `a -> b`.
    ExtendsToIso,
    /// Only the equality pattern of `ac` and `bd` agrees.
    PatternOnly,
}

impl ExtensionStatus {
    pub fn name(self) -> &'static str {
        match self {
            ExtensionStatus::ExtendsToIso => "extends-to-iso",
            ExtensionStatus::PatternOnly => "pattern-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CofinalExtension {
    pub d: Vec<Elem>,
    pub status: ExtensionStatus,
}

/// Whether the closure map of `c -> d` restricted to `cl(a)` is the
/// closure map of `a -> b`, compared as maps.
pub fn clause_iii(m: &FinStructure, a: &[Elem], b: &[Elem], c: &[Elem], d: &[Elem]) -> Result<bool, StructError> {
    let (Some(phi_ab), Some(phi_cd)) = (cl_sim_map(a, m, b, m)?, cl_sim_map(c, m, d, m)?) else {
        return Ok(false);
    };
    let restricted: Option<BTreeMap<Elem, Elem>> = phi_ab.keys().map(|x| phi_cd.get(x).map(|y| (*x, *y))).collect();
    Ok(restricted.as_ref() == Some(&phi_ab))
}

/// Transport `c ⊇ a` along `a -> b` inside the prefix.
pub fn cofinal_extension(prefix: &LimitPrefix, a: &[Elem], b: &[Elem], c: &[Elem]) -> Result<CofinalExtension, LimitError> {
    let m = &prefix.structure;
    if !tuple_sim(a, b)? {
        return Err(LimitError::Precondition("a and b have different equality patterns".into()));
    }
    for (name, t) in [("a", a), ("c", c)] {
        if cofinal_witness(prefix, t)?.is_none() {
            return Err(LimitError::Precondition(format!("{name} is not in the cofinal collection")));
        }
    }
    if !b.iter().all(|&x| m.contains(x)) {
        return Err(LimitError::Precondition("b leaves the prefix".into()));
    }
    let cl_c = closure(m, c)?;
    let cl_c_set: BTreeSet<Elem> = cl_c.structure().domain().iter().copied().collect();
    if !a.iter().all(|x| cl_c_set.contains(x)) {
        return Err(LimitError::Precondition("a is not inside cl(c)".into()));
    }
    let Some(phi) = cl_sim_map(a, m, b, m)? else {
        return pattern_only(m, a, b, c);
    };
    if a == b {
        return Ok(CofinalExtension {
            d: c.to_vec(),
            status: ExtensionStatus::ExtendsToIso,
        });
    }
    let d = EmbeddingSearch::new(&cl_c, m)
        .preset(phi)
        .first()
        .ok_or(LimitError::NotExtendableInPrefix { round: None })?;
    debug_assert!(clause_iii(m, a, b, c, &d).unwrap_or(false));
    Ok(CofinalExtension {
        d,
        status: ExtensionStatus::ExtendsToIso,
    })
}

fn pattern_only(m: &FinStructure, a: &[Elem], b: &[Elem], c: &[Elem]) -> Result<CofinalExtension, LimitError> {
    let mut d: Vec<Elem> = Vec::with_capacity(c.len());
    let mut used: BTreeSet<Elem> = b.iter().copied().collect();
    let mut spare = m.domain().iter().copied();
    for (i, &x) in c.iter().enumerate() {
        if let Some(j) = a.iter().position(|&y| y == x) {
            d.push(b[j]);
        } else if let Some(k) = c[..i].iter().position(|&y| y == x) {
            d.push(d[k]);
        } else {
            let y = spare
                .by_ref()
                .find(|y| !used.contains(y))
                .ok_or(LimitError::NotExtendableInPrefix { round: None })?;
            used.insert(y);
            d.push(y);
        }
    }
    Ok(CofinalExtension {
        d,
        status: ExtensionStatus::PatternOnly,
    })
}

// ----------------------------------------------------------- back and forth

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forth,
    Back,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub direction: Direction,
    /// The element that had to be covered this round.
    pub target: Elem,
    pub marker: usize,
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub status: ExtensionStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialAutomorphism {
    pub pairs: BTreeMap<Elem, Elem>,
    pub domain_tuple: Vec<Elem>,
    pub range_tuple: Vec<Elem>,
    pub status: ExtensionStatus,
    pub rounds: Vec<Round>,
}

/// Least marker whose closure covers `s`.
fn covering_marker(prefix: &LimitPrefix, s: &BTreeSet<Elem>) -> Result<Option<usize>, LimitError> {
    for k in prefix.distinct_markers() {
        let cl = closure_set(&prefix.structure, &prefix.markers[k])?;
        if s.is_subset(&cl) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// `k` alternating rounds, forth first. Each round covers the least
/// element not yet on its side by appending it and a covering marker,
/// then transports the result with `cofinal_extension`.
pub fn back_and_forth(prefix: &LimitPrefix, a: &[Elem], b: &[Elem], k: usize) -> Result<PartialAutomorphism, LimitError> {
    let m = &prefix.structure;
    if cofinal_witness(prefix, a)?.is_none() {
        return Err(LimitError::Precondition("a is not in the cofinal collection".into()));
    }
    if !tuple_sim(a, b)? {
        return Err(LimitError::Precondition("a and b have different equality patterns".into()));
    }
    let mut status = if cl_sim(a, m, b, m)? {
        ExtensionStatus::ExtendsToIso
    } else {
        ExtensionStatus::PatternOnly
    };
    let (mut an, mut bn) = (a.to_vec(), b.to_vec());
    let mut rounds = Vec::with_capacity(k);
    for r in 0..k {
        let direction = if r % 2 == 0 { Direction::Forth } else { Direction::Back };
        let (from, to) = match direction {
            Direction::Forth => (&an, &bn),
            Direction::Back => (&bn, &an),
        };
        let have: BTreeSet<Elem> = from.iter().copied().collect();
        let Some(target) = m.domain().iter().copied().find(|x| !have.contains(x)) else {
            break;
        };
        let mut need = have.clone();
        need.insert(target);
        let marker = covering_marker(prefix, &need)?.ok_or(LimitError::NotExtendableInPrefix { round: Some(r) })?;
        let mut c = from.clone();
        c.push(target);
        c.extend(prefix.markers[marker].iter().copied());
        let ext = match cofinal_extension(prefix, from, to, &c) {
            Err(LimitError::NotExtendableInPrefix { .. }) => {
                return Err(LimitError::NotExtendableInPrefix { round: Some(r) })
            }
            other => other?,
        };
        if ext.status == ExtensionStatus::PatternOnly {
            status = ExtensionStatus::PatternOnly;
        }
        match direction {
            Direction::Forth => {
                an = c;
                bn = ext.d;
            }
            Direction::Back => {
                bn = c;
                an = ext.d;
            }
        }
        rounds.push(Round {
            direction,
            target,
            marker,
            a: an.clone(),
            b: bn.clone(),
            status: ext.status,
        });
    }
    let pairs = an.iter().copied().zip(bn.iter().copied()).collect();
    Ok(PartialAutomorphism {
        pairs,
        domain_tuple: an,
        range_tuple: bn,
        status,
        rounds,
    })
}

// ------------------------------------------------ homogeneity to amalgams

/// A total map on `m` that is a bijection preserving every table both ways.
pub fn is_automorphism(m: &FinStructure, h: &BTreeMap<Elem, Elem>) -> bool {
    let dom: BTreeSet<Elem> = m.domain().iter().copied().collect();
    let img: BTreeSet<Elem> = h.values().copied().collect();
    if h.len() != dom.len() || !h.keys().all(|x| dom.contains(x)) || img != dom {
        return false;
    }
    m.rename(h) == *m
}

/// Amalgamate a span whose codomains sit inside `structure`: `g0` is the
/// inclusion and `g1` is the inclusion followed by
/// `homog(range f1, range f0)`.
pub fn amalgamate_via_automorphisms(
    structure: &FinStructure,
    homog: &dyn Fn(&[Elem], &[Elem]) -> Option<BTreeMap<Elem, Elem>>,
    span: &Span,
) -> Result<AmalgDiagram, LimitError> {
    let b = span.f0.codom();
    let c = span.f1.codom();
    for p in [b, c] {
        let inside = closure(structure, p.tuple()).map(|q| q.structure() == p.structure());
        if !inside.unwrap_or(false) {
            return Err(LimitError::Precondition("span codomain is not a substructure".into()));
        }
    }
    let h = homog(span.f1.range(), span.f0.range())
        .ok_or_else(|| LimitError::HomogOutputNotAutomorphism("no map returned".into()))?;
    if !is_automorphism(structure, &h) {
        return Err(LimitError::HomogOutputNotAutomorphism(format!("{} pairs", h.len())));
    }
    let c_img = map_tuple(&h, c.tuple());
    let mut tuple = b.tuple().to_vec();
    tuple.extend(c_img.iter().copied());
    let d = closure(structure, &tuple)?;
    let diagram = AmalgDiagram {
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
    };
    diagram.check()?;
    Ok(diagram)
}

/// Automorphism of a finite structure extending `x -> y`, by exhaustive
/// search.
pub fn finite_homogenizer(m: &FinStructure, x: &[Elem], y: &[Elem]) -> Option<BTreeMap<Elem, Elem>> {
    let phi = cl_sim_map(x, m, y, m).ok()??;
    let whole = Pointed::whole(m.clone());
    let img = EmbeddingSearch::new(&whole, m).preset(phi).first()?;
    Some(m.domain().iter().copied().zip(img).collect())
}

// ------------------------------------------------------ extension property

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionFailure {
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub c: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionReport {
    pub size_bound: usize,
    pub checked: usize,
    pub failures: Vec<ExtensionFailure>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For markers `a`, `b` with `cl_sim(a, b)` and every marker `c` with
/// `a ⊆ cl(c)` and `|cl(c)| <= size_bound`: some `d` in `structure` has
/// `cl_sim(c, d)` with the closure map of `c -> d` extending `a -> b`.
pub fn check_extension_property(structure: &FinStructure, markers: &[Vec<Elem>], size_bound: usize) -> ExtensionReport {
    let mut report = ExtensionReport {
        size_bound,
        checked: 0,
        failures: Vec::new(),
    };
    let closures: Vec<Option<Pointed>> = markers.iter().map(|t| closure(structure, t).ok()).collect();
    for (i, a) in markers.iter().enumerate() {
        let Some(cl_a) = &closures[i] else { continue };
        if cl_a.len() > size_bound {
            continue;
        }
        let a_set: BTreeSet<Elem> = cl_a.structure().domain().iter().copied().collect();
        for b in markers {
            let Ok(Some(phi)) = cl_sim_map(a, structure, b, structure) else {
                continue;
            };
            for (k, c) in markers.iter().enumerate() {
                let Some(cl_c) = &closures[k] else { continue };
                if cl_c.len() > size_bound || !a_set.iter().all(|x| cl_c.structure().contains(*x)) {
                    continue;
                }
                report.checked += 1;
                if EmbeddingSearch::new(cl_c, structure).preset(phi.clone()).first().is_none() {
                    report.failures.push(ExtensionFailure {
                        a: a.clone(),
                        b: b.clone(),
                        c: c.clone(),
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{graph, graphs_age, z_chain};
    use alloc::vec;

    fn path(n: u64) -> Pointed {
        Pointed::whole(graph(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>()))
    }

    #[test]
    fn chain_of_zero_steps_is_the_domain() {
        let p = path(2);
        let f = PotentialEmbedding::identity(&p);
        let r = chain_union(&[f], 0).unwrap();
        assert_eq!(r.stages, vec![p.structure().clone()]);
        assert_eq!(r.g_maps, vec![PotentialEmbedding::identity(&p)]);
    }

    #[test]
    fn chain_of_relabelling_steps_commutes() {
        // P1 -> P2 -> P3, each step relabelling everything.
        let p1 = path(1);
        let p2 = Pointed::whole(graph(2, &[(0, 1)]).rename(&[(0, 7), (1, 5)].into_iter().collect()));
        let p3 = Pointed::whole(graph(3, &[(0, 1), (1, 2)]).rename(&[(0, 9), (1, 2), (2, 4)].into_iter().collect()));
        let f0 = PotentialEmbedding::new(p1.clone(), p2.clone(), vec![5]).unwrap();
        let f1 = PotentialEmbedding::new(p2.clone(), p3.clone(), vec![9, 2]).unwrap();
        let r = chain_union(&[f0.clone(), f1.clone()], 2).unwrap();
        assert!(crate::canon::isomorphic(&r.stages[2], p3.structure()));
        for w in r.stages.windows(2) {
            let s: BTreeSet<Elem> = w[0].domain().iter().copied().collect();
            assert_eq!(crate::structure::induced_substructure(&w[1], &s).unwrap(), w[0]);
        }
        let g = &r.g_maps;
        assert_eq!(compose(&f1, &g[2]).unwrap(), g[1]);
        assert_eq!(compose(&f0, &g[1]).unwrap(), g[0]);
        assert_eq!(compose(&compose(&f0, &f1).unwrap(), &g[2]).unwrap(), g[0]);
    }

    #[test]
    fn chain_rejects_gaps_and_non_embeddings() {
        let p1 = path(1);
        let p2 = path(2);
        let f = PotentialEmbedding::new(p1.clone(), p2.clone(), vec![0]).unwrap();
        assert_eq!(chain_union(&[f.clone(), f.clone()], 2), Err(LimitError::NotComposable(0)));
        let bad = PotentialEmbedding::new(p2.clone(), p2.clone(), vec![0, 0]).unwrap();
        assert_eq!(chain_union(&[bad], 1), Err(LimitError::NotAnEmbedding(0)));
    }

    #[test]
    fn diagonal_order_starts_small() {
        let t = DiagonalSchedule::ordered(7);
        assert_eq!(t[0], Triple { d: vec![], witness: 0, extension: 0 });
        assert_eq!(t[1], Triple { d: vec![], witness: 0, extension: 1 });
        assert_eq!(t[2], Triple { d: vec![], witness: 1, extension: 0 });
        assert!(t[3..6].iter().all(|x| x.d.is_empty()));
        assert_eq!(t[6], Triple { d: vec![0], witness: 0, extension: 0 });
        let s = DiagonalSchedule::new().triples(7);
        // Rounds of 1, 2 and 4 triples.
        assert_eq!(s[0], s[1]);
        assert_eq!(s[1..3], s[3..5]);
    }

    #[test]
    fn zero_stages_give_the_empty_graph() {
        let age = Arc::new(graphs_age());
        let w = WitnessPack::free(age.clone(), 1 << 16);
        let p = build_limit(&age, &w, 0, &DiagonalSchedule::new()).unwrap();
        assert!(p.structure.is_empty());
        assert_eq!(p.stage_log.len(), 1);
        assert_eq!(p.stage_log[0].case, StageCase::Initial);
    }

    #[test]
    fn prefixes_refine() {
        let age = Arc::new(graphs_age());
        let w = WitnessPack::free(age.clone(), 1 << 16);
        let s = DiagonalSchedule::new();
        let short = build_limit(&age, &w, 40, &s).unwrap();
        let long = build_limit(&age, &w, 50, &s).unwrap();
        let dom: BTreeSet<Elem> = short.structure.domain().iter().copied().collect();
        assert_eq!(crate::structure::induced_substructure(&long.structure, &dom).unwrap(), short.structure);
        assert_eq!(long.markers[..short.markers.len()], short.markers[..]);
        assert!(short.stage_log.iter().any(|r| r.case == StageCase::Amalgamated && !r.added.is_empty()));
    }

    #[test]
    fn identical_pair_extends_to_itself() {
        let age = Arc::new(graphs_age());
        let w = WitnessPack::free(age.clone(), 1 << 16);
        let p = build_limit(&age, &w, 60, &DiagonalSchedule::new()).unwrap();
        let a = p.markers.iter().find(|m| m.len() == 1).unwrap().clone();
        let c = p.markers.iter().find(|m| m.len() >= 2).unwrap().clone();
        let e = cofinal_extension(&p, &a, &a, &c).unwrap();
        assert_eq!(e.d, c);
        let bf = back_and_forth(&p, &a, &a, 4).unwrap();
        assert!(bf.pairs.iter().all(|(x, y)| x == y));
        assert_eq!(bf.status, ExtensionStatus::ExtendsToIso);
    }

    #[test]
    fn extension_property_on_windows() {
        let edgeless = graph(4, &[]);
        let singles: Vec<Vec<Elem>> = (0..4).map(|x| vec![x]).collect();
        assert!(check_extension_property(&edgeless, &singles, 3).passed());

        let z = z_chain(8);
        let bad = vec![vec![2, 4], vec![2, 5], vec![2, 3, 4]];
        let r = check_extension_property(&z, &bad, 3);
        assert_eq!(
            r.failures,
            vec![ExtensionFailure {
                a: vec![2, 4],
                b: vec![2, 5],
                c: vec![2, 3, 4]
            }]
        );
    }

    #[test]
    fn automorphism_amalgam_of_equal_legs() {
        let m = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let a = Pointed::new(vec![0], graph(1, &[])).unwrap();
        let b = closure(&m, &[0, 1]).unwrap();
        let f = PotentialEmbedding::new(a.clone(), b.clone(), vec![0]).unwrap();
        let span = Span::new(f.clone(), f).unwrap();
        let hom = |x: &[Elem], y: &[Elem]| finite_homogenizer(&m, x, y);
        let d = amalgamate_via_automorphisms(&m, &hom, &span).unwrap();
        assert_eq!(d.g1.image, b.tuple().to_vec());

        let not_auto = |_: &[Elem], _: &[Elem]| Some((0..4).map(|x| (x, 0)).collect());
        assert!(matches!(
            amalgamate_via_automorphisms(&m, &not_auto, &span),
            Err(LimitError::HomogOutputNotAutomorphism(_))
        ));
    }
}
