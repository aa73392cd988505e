//! Finite structures over mixed relational/functional signatures, generated
//! substructures, and the two tuple equivalences (`tuple_sim`, `cl_sim`).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Opaque element identifier.
pub type Elem = u64;

/// Errors raised by structure-level operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructError {
    #[error("element {0} is not in the domain")]
    ElementNotInDomain(Elem),
    #[error("tuple length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error("subset is not closed under `{symbol}`: {args:?} -> {value}")]
    NotFunctionClosed {
        symbol: String,
        args: Vec<Elem>,
        value: Elem,
    },
    #[error("function `{symbol}` is undefined at {args:?}")]
    FunctionNotTotal { symbol: String, args: Vec<Elem> },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has arity {expected}, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("structure is not generated by its tuple")]
    NotGenerated,
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
}

/// Relation and function symbols with arities, plus an optional bounded
/// family of unary relations `name_0 .. name_{N-1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
    indexed_unary: Option<(String, usize)>,
    all_relations: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(
        relations: Vec<(String, usize)>,
        functions: Vec<(String, usize)>,
        indexed_unary: Option<(String, usize)>,
    ) -> Result<Self, StructError> {
        let mut all_relations = relations.clone();
        if let Some((fam, n)) = &indexed_unary {
            for i in 0..*n {
                all_relations.push((indexed_name(fam, i), 1));
            }
        }
        let mut seen = BTreeSet::new();
        for (name, arity) in &all_relations {
            if *arity == 0 {
                return Err(StructError::InvalidSignature(format!(
                    "relation `{name}` has arity 0"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(StructError::InvalidSignature(format!(
                    "duplicate symbol `{name}`"
                )));
            }
        }
        if let Some((fam, _)) = &indexed_unary {
            if !seen.insert(fam.clone()) {
                return Err(StructError::InvalidSignature(format!(
                    "duplicate symbol `{fam}`"
                )));
            }
        }
        for (name, _) in &functions {
            if !seen.insert(name.clone()) {
                return Err(StructError::InvalidSignature(format!(
                    "duplicate symbol `{name}`"
                )));
            }
        }
        Ok(Signature {
            relations,
            functions,
            indexed_unary,
            all_relations,
        })
    }

    /// Purely relational signature from `(name, arity)` pairs.
    pub fn relational(rels: &[(&str, usize)]) -> Result<Self, StructError> {
        Self::new(
            rels.iter().map(|(n, a)| (String::from(*n), *a)).collect(),
            Vec::new(),
            None,
        )
    }

    /// Declared relations (without the indexed family).
    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn indexed_unary(&self) -> Option<(&str, usize)> {
        self.indexed_unary.as_ref().map(|(n, k)| (n.as_str(), *k))
    }

    /// Declared relations followed by the members of the indexed family.
    pub fn relation_symbols(&self) -> &[(String, usize)] {
        &self.all_relations
    }

    pub fn rel_index(&self, name: &str) -> Option<usize> {
        self.all_relations.iter().position(|(n, _)| n == name)
    }

    pub fn fun_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|(n, _)| n == name)
    }

    /// True when the signature has no function symbols (constants included).
    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    /// True when every function symbol has arity at most one.
    pub fn is_unary_functional(&self) -> bool {
        self.functions.iter().all(|(_, a)| *a <= 1)
    }
}

/// Name of member `i` of an indexed unary family.
pub fn indexed_name(family: &str, i: usize) -> String {
    format!("{family}_{i}")
}

/// A finite structure given by explicit tables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinStructure {
    sig: Arc<Signature>,
    domain: Vec<Elem>,
    rels: Vec<BTreeSet<Vec<Elem>>>,
    funs: Vec<BTreeMap<Vec<Elem>, Elem>>,
}

impl FinStructure {
    /// The empty structure.
    pub fn new(sig: Arc<Signature>) -> Self {
        let rels = vec![BTreeSet::new(); sig.relation_symbols().len()];
        let funs = vec![BTreeMap::new(); sig.functions().len()];
        FinStructure {
            sig,
            domain: Vec::new(),
            rels,
            funs,
        }
    }

    /// Assemble a structure from raw tables without any checking; use
    /// [`validate`] to audit the result.
    pub fn from_parts(
        sig: Arc<Signature>,
        domain: Vec<Elem>,
        rels: Vec<BTreeSet<Vec<Elem>>>,
        funs: Vec<BTreeMap<Vec<Elem>, Elem>>,
    ) -> Self {
        FinStructure {
            sig,
            domain,
            rels,
            funs,
        }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn domain(&self) -> &[Elem] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.domain.binary_search(&e).is_ok()
    }

    pub fn rel_table(&self, idx: usize) -> &BTreeSet<Vec<Elem>> {
        &self.rels[idx]
    }

    pub fn fun_table(&self, idx: usize) -> &BTreeMap<Vec<Elem>, Elem> {
        &self.funs[idx]
    }

    pub fn rel_tables(&self) -> &[BTreeSet<Vec<Elem>>] {
        &self.rels
    }

    pub fn fun_tables(&self) -> &[BTreeMap<Vec<Elem>, Elem>] {
        &self.funs
    }

    pub fn holds(&self, rel: usize, tuple: &[Elem]) -> bool {
        self.rels[rel].contains(tuple)
    }

    pub fn apply(&self, fun: usize, args: &[Elem]) -> Option<Elem> {
        self.funs[fun].get(args).copied()
    }

    /// Largest element id, if any.
    pub fn max_elem(&self) -> Option<Elem> {
        self.domain.last().copied()
    }

    pub fn add_element(&mut self, e: Elem) {
        if let Err(pos) = self.domain.binary_search(&e) {
            self.domain.insert(pos, e);
        }
    }

    pub fn add_elements(&mut self, es: impl IntoIterator<Item = Elem>) {
        self.domain.extend(es);
        self.domain.sort_unstable();
        self.domain.dedup();
    }

    pub fn insert_rel_at(&mut self, rel: usize, tuple: Vec<Elem>) {
        self.rels[rel].insert(tuple);
    }

    pub fn remove_rel_at(&mut self, rel: usize, tuple: &[Elem]) -> bool {
        self.rels[rel].remove(tuple)
    }

    /// Add a tuple to the named relation, checking arity.
    pub fn insert_rel(&mut self, name: &str, tuple: &[Elem]) -> Result<(), StructError> {
        let idx = self
            .sig
            .rel_index(name)
            .ok_or_else(|| StructError::UnknownSymbol(name.into()))?;
        let arity = self.sig.relation_symbols()[idx].1;
        if arity != tuple.len() {
            return Err(StructError::ArityMismatch {
                symbol: name.into(),
                expected: arity,
                got: tuple.len(),
            });
        }
        self.rels[idx].insert(tuple.to_vec());
        Ok(())
    }

    pub fn set_fun_at(&mut self, fun: usize, args: Vec<Elem>, value: Elem) {
        self.funs[fun].insert(args, value);
    }

    /// Define the named function at `args`, checking arity.
    pub fn set_fun(&mut self, name: &str, args: &[Elem], value: Elem) -> Result<(), StructError> {
        let idx = self
            .sig
            .fun_index(name)
            .ok_or_else(|| StructError::UnknownSymbol(name.into()))?;
        let arity = self.sig.functions()[idx].1;
        if arity != args.len() {
            return Err(StructError::ArityMismatch {
                symbol: name.into(),
                expected: arity,
                got: args.len(),
            });
        }
        self.funs[idx].insert(args.to_vec(), value);
        Ok(())
    }

    /// Image of the structure under an injective renaming. Elements missing
    /// from `map` keep their id.
    pub fn rename(&self, map: &BTreeMap<Elem, Elem>) -> FinStructure {
        let m = |e: &Elem| *map.get(e).unwrap_or(e);
        let mut domain: Vec<Elem> = self.domain.iter().map(m).collect();
        domain.sort_unstable();
        let rels = self
            .rels
            .iter()
            .map(|t| t.iter().map(|tup| tup.iter().map(m).collect()).collect())
            .collect();
        let funs = self
            .funs
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(args, v)| (args.iter().map(m).collect(), m(v)))
                    .collect()
            })
            .collect();
        FinStructure {
            sig: self.sig.clone(),
            domain,
            rels,
            funs,
        }
    }

    /// Number of tuples over all relation tables.
    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(|t| t.len()).sum()
    }
}

/// A generating tuple together with the structure it generates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pointed {
    tuple: Vec<Elem>,
    structure: FinStructure,
}

impl Pointed {
    /// Checked constructor: `structure` must be generated by `tuple`.
    pub fn new(tuple: Vec<Elem>, structure: FinStructure) -> Result<Self, StructError> {
        let cl = closure(&structure, &tuple)?;
        if cl.structure != structure {
            return Err(StructError::NotGenerated);
        }
        Ok(cl)
    }

    /// Pointed structure whose tuple lists the whole domain in order.
    pub fn whole(structure: FinStructure) -> Self {
        Pointed {
            tuple: structure.domain.clone(),
            structure,
        }
    }

    pub fn tuple(&self) -> &[Elem] {
        &self.tuple
    }

    pub fn structure(&self) -> &FinStructure {
        &self.structure
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.structure.sig
    }

    pub fn into_parts(self) -> (Vec<Elem>, FinStructure) {
        (self.tuple, self.structure)
    }

    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }
}

/// Call `f` on every tuple of length `k` over `elems` (lexicographic in the
/// order of `elems`).
pub fn for_each_tuple(elems: &[Elem], k: usize, mut f: impl FnMut(&[Elem])) {
    if k == 0 {
        f(&[]);
        return;
    }
    if elems.is_empty() {
        return;
    }
    let mut idx = vec![0usize; k];
    let mut buf: Vec<Elem> = vec![elems[0]; k];
    loop {
        f(&buf);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                buf[pos] = elems[idx[pos]];
                break;
            }
            idx[pos] = 0;
            buf[pos] = elems[0];
        }
    }
}

fn check_in_domain(m: &FinStructure, a: &[Elem]) -> Result<(), StructError> {
    for &x in a {
        if !m.contains(x) {
            return Err(StructError::ElementNotInDomain(x));
        }
    }
    Ok(())
}

fn apply_checked(m: &FinStructure, fi: usize, args: &[Elem]) -> Result<Elem, StructError> {
    m.apply(fi, args).ok_or_else(|| StructError::FunctionNotTotal {
        symbol: m.sig.functions()[fi].0.clone(),
        args: args.to_vec(),
    })
}

/// Least subset of `m` containing `seed` and closed under every function
/// table, iterating symbols in declaration order.
pub fn closure_set(m: &FinStructure, seed: &[Elem]) -> Result<BTreeSet<Elem>, StructError> {
    check_in_domain(m, seed)?;
    let mut set: BTreeSet<Elem> = seed.iter().copied().collect();
    if m.sig.is_relational() {
        return Ok(set);
    }
    loop {
        let mut changed = false;
        for (fi, (_, arity)) in m.sig.functions().iter().enumerate() {
            let snapshot: Vec<Elem> = set.iter().copied().collect();
            let mut err = None;
            for_each_tuple(&snapshot, *arity, |args| {
                if err.is_some() {
                    return;
                }
                match apply_checked(m, fi, args) {
                    Ok(v) => {
                        if set.insert(v) {
                            changed = true;
                        }
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        if !changed {
            return Ok(set);
        }
    }
}

/// `(a, cl_M(a))`: the substructure of `m` generated by `a`.
pub fn closure(m: &FinStructure, a: &[Elem]) -> Result<Pointed, StructError> {
    let set = closure_set(m, a)?;
    let structure = restrict_unchecked(m, &set);
    Ok(Pointed {
        tuple: a.to_vec(),
        structure,
    })
}

fn restrict_unchecked(m: &FinStructure, set: &BTreeSet<Elem>) -> FinStructure {
    let domain: Vec<Elem> = set.iter().copied().collect();
    let rels = m
        .rels
        .iter()
        .zip(m.sig.relation_symbols())
        .map(|(table, (_, arity))| restrict_table(table, &domain, set, *arity))
        .collect();
    let funs = m
        .funs
        .iter()
        .map(|t| {
            t.iter()
                .filter(|(args, _)| args.iter().all(|x| set.contains(x)))
                .map(|(a, v)| (a.clone(), *v))
                .collect()
        })
        .collect();
    FinStructure {
        sig: m.sig.clone(),
        domain,
        rels,
        funs,
    }
}

fn cheaper_to_probe(n: usize, arity: usize, table_len: usize) -> bool {
    (n as u128).saturating_pow(arity as u32) < table_len as u128
}

fn restrict_table(
    table: &BTreeSet<Vec<Elem>>,
    domain: &[Elem],
    set: &BTreeSet<Elem>,
    arity: usize,
) -> BTreeSet<Vec<Elem>> {
    // Pick whichever side is smaller: scan the table or probe all tuples.
    if cheaper_to_probe(domain.len(), arity, table.len()) {
        let mut out = BTreeSet::new();
        for_each_tuple(domain, arity, |t| {
            if table.contains(t) {
                out.insert(t.to_vec());
            }
        });
        out
    } else {
        table
            .iter()
            .filter(|t| t.iter().all(|x| set.contains(x)))
            .cloned()
            .collect()
    }
}

/// Restriction of `m` to `s`; fails if `s` is not closed under the functions.
pub fn induced_substructure(m: &FinStructure, s: &BTreeSet<Elem>) -> Result<FinStructure, StructError> {
    for &x in s {
        if !m.contains(x) {
            return Err(StructError::ElementNotInDomain(x));
        }
    }
    let elems: Vec<Elem> = s.iter().copied().collect();
    for (fi, (name, arity)) in m.sig.functions().iter().enumerate() {
        let mut err = None;
        for_each_tuple(&elems, *arity, |args| {
            if err.is_some() {
                return;
            }
            match m.apply(fi, args) {
                Some(v) if s.contains(&v) => {}
                Some(v) => {
                    err = Some(StructError::NotFunctionClosed {
                        symbol: name.clone(),
                        args: args.to_vec(),
                        value: v,
                    })
                }
                None => {
                    err = Some(StructError::FunctionNotTotal {
                        symbol: name.clone(),
                        args: args.to_vec(),
                    })
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(restrict_unchecked(m, s))
}

/// Equality-pattern equivalence: `a_i = a_j` iff `b_i = b_j`.
pub fn tuple_sim(a: &[Elem], b: &[Elem]) -> Result<bool, StructError> {
    if a.len() != b.len() {
        return Err(StructError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if (a[i] == a[j]) != (b[i] == b[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Partial bijection grown while generating terms on both sides.
struct Bijection {
    fwd: BTreeMap<Elem, Elem>,
    bwd: BTreeMap<Elem, Elem>,
}

impl Bijection {
    fn new() -> Self {
        Bijection {
            fwd: BTreeMap::new(),
            bwd: BTreeMap::new(),
        }
    }

    /// Returns `None` on a clash, `Some(true)` when a new pair was added.
    fn add(&mut self, x: Elem, y: Elem) -> Option<bool> {
        match (self.fwd.get(&x), self.bwd.get(&y)) {
            (Some(&y0), _) if y0 != y => None,
            (_, Some(&x0)) if x0 != x => None,
            (Some(_), _) => Some(false),
            _ => {
                self.fwd.insert(x, y);
                self.bwd.insert(y, x);
                Some(true)
            }
        }
    }
}

/// The isomorphism `cl_M(a) -> cl_N(b)` extending `a_i -> b_i`, if any.
pub fn cl_sim_map(
    a: &[Elem],
    m: &FinStructure,
    b: &[Elem],
    n: &FinStructure,
) -> Result<Option<BTreeMap<Elem, Elem>>, StructError> {
    if a.len() != b.len() {
        return Err(StructError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !Arc::ptr_eq(&m.sig, &n.sig) && *m.sig != *n.sig {
        return Err(StructError::SignatureMismatch);
    }
    check_in_domain(m, a)?;
    check_in_domain(n, b)?;
    let mut phi = Bijection::new();
    for (&x, &y) in a.iter().zip(b) {
        if phi.add(x, y).is_none() {
            return Ok(None);
        }
    }
    if !m.sig.is_relational() {
        loop {
            let mut changed = false;
            for (fi, (_, arity)) in m.sig.functions().iter().enumerate() {
                let snapshot: Vec<Elem> = phi.fwd.keys().copied().collect();
                let mut clash = false;
                let mut err = None;
                let mut mapped = Vec::with_capacity(*arity);
                for_each_tuple(&snapshot, *arity, |args| {
                    if clash || err.is_some() {
                        return;
                    }
                    mapped.clear();
                    mapped.extend(args.iter().map(|x| phi.fwd[x]));
                    let x = match apply_checked(m, fi, args) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    };
                    let y = match apply_checked(n, fi, &mapped) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    };
                    match phi.add(x, y) {
                        None => clash = true,
                        Some(true) => changed = true,
                        Some(false) => {}
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if clash {
                    return Ok(None);
                }
            }
            if !changed {
                break;
            }
        }
    }
    for (ri, (_, arity)) in m.sig.relation_symbols().iter().enumerate() {
        if !relation_agrees(&m.rels[ri], &n.rels[ri], &phi.fwd, *arity)
            || !relation_agrees(&n.rels[ri], &m.rels[ri], &phi.bwd, *arity)
        {
            return Ok(None);
        }
    }
    Ok(Some(phi.fwd))
}

/// Every tuple of `src` inside `dom(map)` maps into `dst`.
fn relation_agrees(
    src: &BTreeSet<Vec<Elem>>,
    dst: &BTreeSet<Vec<Elem>>,
    map: &BTreeMap<Elem, Elem>,
    arity: usize,
) -> bool {
    let mut img = Vec::with_capacity(arity);
    if cheaper_to_probe(map.len(), arity, src.len()) {
        let keys: Vec<Elem> = map.keys().copied().collect();
        let mut ok = true;
        for_each_tuple(&keys, arity, |t| {
            if ok && src.contains(t) {
                img.clear();
                img.extend(t.iter().map(|x| map[x]));
                ok = dst.contains(&img);
            }
        });
        ok
    } else {
        src.iter().all(|t| {
            if !t.iter().all(|x| map.contains_key(x)) {
                return true;
            }
            img.clear();
            img.extend(t.iter().map(|x| map[x]));
            dst.contains(&img)
        })
    }
}

/// True iff `a_i -> b_i` extends to an isomorphism `cl_M(a) -> cl_N(b)`.
pub fn cl_sim(a: &[Elem], m: &FinStructure, b: &[Elem], n: &FinStructure) -> Result<bool, StructError> {
    cl_sim_map(a, m, b, n).map(|o| o.is_some())
}

/// One violated structure invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TableShape,
    DomainNotCanonical,
    ArityMismatch { symbol: String, tuple: Vec<Elem> },
    TupleOutOfDomain { symbol: String, tuple: Vec<Elem> },
    FunctionNotTotal { symbol: String, args: Vec<Elem> },
    FunctionValueOutOfDomain { symbol: String, args: Vec<Elem>, value: Elem },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::TableShape => "table-shape",
            Violation::DomainNotCanonical => "domain-not-canonical",
            Violation::ArityMismatch { .. } => "arity-mismatch",
            Violation::TupleOutOfDomain { .. } => "tuple-out-of-domain",
            Violation::FunctionNotTotal { .. } => "function-not-total",
            Violation::FunctionValueOutOfDomain { .. } => "function-value-out-of-domain",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TableShape => write!(f, "table-shape"),
            Violation::DomainNotCanonical => write!(f, "domain-not-canonical"),
            Violation::ArityMismatch { symbol, tuple } => {
                write!(f, "arity-mismatch {symbol} {tuple:?}")
            }
            Violation::TupleOutOfDomain { symbol, tuple } => {
                write!(f, "tuple-out-of-domain {symbol} {tuple:?}")
            }
            Violation::FunctionNotTotal { symbol, args } => {
                write!(f, "function-not-total {symbol} {args:?}")
            }
            Violation::FunctionValueOutOfDomain { symbol, args, value } => {
                write!(f, "function-value-out-of-domain {symbol} {args:?} -> {value}")
            }
        }
    }
}

/// All violations of the table invariants; empty iff `m` is well formed.
pub fn validate(m: &FinStructure) -> Vec<Violation> {
    let mut out = Vec::new();
    if m.rels.len() != m.sig.relation_symbols().len() || m.funs.len() != m.sig.functions().len() {
        out.push(Violation::TableShape);
        return out;
    }
    if m.domain.windows(2).any(|w| w[0] >= w[1]) {
        out.push(Violation::DomainNotCanonical);
    }
    let dom: BTreeSet<Elem> = m.domain.iter().copied().collect();
    for (table, (name, arity)) in m.rels.iter().zip(m.sig.relation_symbols()) {
        for t in table {
            if t.len() != *arity {
                out.push(Violation::ArityMismatch {
                    symbol: name.clone(),
                    tuple: t.clone(),
                });
            } else if !t.iter().all(|x| dom.contains(x)) {
                out.push(Violation::TupleOutOfDomain {
                    symbol: name.clone(),
                    tuple: t.clone(),
                });
            }
        }
    }
    let elems: Vec<Elem> = dom.iter().copied().collect();
    for (table, (name, arity)) in m.funs.iter().zip(m.sig.functions()) {
        for (args, v) in table {
            if args.len() != *arity {
                out.push(Violation::ArityMismatch {
                    symbol: name.clone(),
                    tuple: args.clone(),
                });
            } else if !args.iter().all(|x| dom.contains(x)) {
                out.push(Violation::TupleOutOfDomain {
                    symbol: name.clone(),
                    tuple: args.clone(),
                });
            } else if !dom.contains(v) {
                out.push(Violation::FunctionValueOutOfDomain {
                    symbol: name.clone(),
                    args: args.clone(),
                    value: *v,
                });
            }
        }
        for_each_tuple(&elems, *arity, |args| {
            if !table.contains_key(args) {
                out.push(Violation::FunctionNotTotal {
                    symbol: name.clone(),
                    args: args.to_vec(),
                });
            }
        });
    }
    out
}
