//! Ages given by enumerations: canonical ages of generated structures,
//! membership validators, type catalogues and HP/JEP witnesses.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::canon::canonical_over;
use crate::embeddings::{EmbeddingSearch, PotentialEmbedding};
use crate::structure::{
    cl_sim, cl_sim_map, closure, closure_set, for_each_tuple, Elem, FinStructure, Pointed, Signature, StructError,
};

/// Cantor pairing `(a+b)(a+b+1)/2 + b`, saturating at `u64::MAX`.
pub fn pair(a: u64, b: u64) -> u64 {
    let s = a as u128 + b as u128;
    let v = s * (s + 1) / 2 + b as u128;
    u64::try_from(v).unwrap_or(u64::MAX)
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let mut w = ((8 * z + 1).isqrt() - 1) / 2;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let t = w * (w + 1) / 2;
    let b = z - t;
    ((w - b) as u64, b as u64)
}

/// Decode a tuple code: code 0 is the empty tuple, then tuples are listed
/// by length and, within a length, in bijective base-`d` order.
pub fn decode_tuple(code: u64, d: usize) -> Vec<usize> {
    if d == 0 {
        return Vec::new();
    }
    let d = d as u64;
    let mut c = code;
    let mut digits = Vec::new();
    while c > 0 {
        c -= 1;
        digits.push((c % d) as usize);
        c /= d;
    }
    digits.reverse();
    digits
}

/// Number of tuple codes of length at most `n` over `d` elements.
pub fn codes_up_to(n: usize, d: usize) -> u64 {
    let mut total: u64 = 0;
    let mut p: u64 = 1;
    for _ in 0..=n {
        total = total.saturating_add(p);
        p = p.saturating_mul(d as u64);
    }
    total
}

/// A growing chain of finite structures standing in for an infinite one.
pub trait StructureGenerator: Send + Sync {
    fn sig(&self) -> Arc<Signature>;
    /// `prefix(n)` is an induced substructure of `prefix(n + 1)`.
    fn prefix(&self, level: usize) -> FinStructure;
    /// Domain of `prefix(level)`.
    fn prefix_domain(&self, level: usize) -> Vec<Elem> {
        self.prefix(level).domain().to_vec()
    }
    /// `cl(tuple)` inside `prefix(level)`.
    fn generated(&self, level: usize, tuple: &[Elem]) -> Pointed {
        closure(&self.prefix(level), tuple).expect("tuple drawn from the prefix")
    }
    /// Least level whose prefix contains a copy of every member type with at
    /// most `n` elements, when known.
    fn cover_level(&self, _n: usize) -> Option<usize> {
        None
    }
    fn name(&self) -> String;
    fn params(&self) -> Vec<(String, Param)> {
        Vec::new()
    }
}

/// Descriptor parameter value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    Int(i64),
    List(Vec<i64>),
    Str(String),
}

/// `{"kind": ..., "params": {...}}` in serialized form.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AgeDescriptor {
    pub kind: String,
    pub params: BTreeMap<String, Param>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgeError {
    #[error("no witness found within the search bound")]
    NotFoundWithinBound,
    #[error("search budget exhausted before a definite answer")]
    BudgetExhausted,
    #[error("age has no membership validator")]
    NoValidator,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Struct(#[from] StructError),
}

/// A universal structure for small members: every member with at most `n`
/// elements embeds into `ambient(n)` and every substructure of it is a
/// member. `pads` are isolated, pairwise interchangeable elements.
#[derive(Clone, Debug)]
pub struct Ambient {
    pub structure: FinStructure,
    pub pads: Vec<Elem>,
}

impl Ambient {
    /// Whether `m` embeds into this ambient structure.
    pub fn contains_copy_of(&self, m: &FinStructure) -> bool {
        let p = Pointed::whole(m.clone());
        EmbeddingSearch::new(&p, &self.structure)
            .interchangeable(self.pads.clone())
            .first()
            .is_some()
    }
}

pub type Enumerator = Arc<dyn Fn(u64) -> Pointed + Send + Sync>;
pub type Validator = Arc<dyn Fn(&FinStructure) -> Result<(), String> + Send + Sync>;
pub type SizeHint = Arc<dyn Fn(usize) -> Option<u64> + Send + Sync>;
pub type AmbientFn = Arc<dyn Fn(usize) -> Ambient + Send + Sync>;
pub type ObstructionFn = Arc<dyn Fn(&FinStructure) -> Option<String> + Send + Sync>;
pub type CoverFn = Arc<dyn Fn(usize) -> Option<FinStructure> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScanKind {
    /// Every index is visited.
    Plain,
    /// Index `pair(x, rep)`: only `rep = 0` is visited, counting `x`.
    Repeating,
}

/// An enumerated, isomorphism-closed class of pointed structures.
#[derive(Clone)]
pub struct Age {
    sig: Arc<Signature>,
    enumerator: Enumerator,
    validator: Option<Validator>,
    size_hint: Option<SizeHint>,
    scan_budget: Option<SizeHint>,
    scan_kind: ScanKind,
    hp: bool,
    ambient: Option<AmbientFn>,
    cover: Option<CoverFn>,
    obstruction: Option<ObstructionFn>,
    descriptor: AgeDescriptor,
}

impl fmt::Debug for Age {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Age")
            .field("descriptor", &self.descriptor)
            .field("hp", &self.hp)
            .field("validator", &self.validator.is_some())
            .field("ambient", &self.ambient.is_some())
            .finish()
    }
}

impl Age {
    /// An age listed explicitly; `enumerate(i)` cycles through `members`.
    pub fn explicit(sig: Arc<Signature>, members: Vec<Pointed>) -> Self {
        let n = members.len() as u64;
        let members = Arc::new(members);
        let sig2 = sig.clone();
        let list = members.clone();
        Age {
            sig,
            enumerator: Arc::new(move |i| {
                if n == 0 {
                    Pointed::whole(FinStructure::new(sig2.clone()))
                } else {
                    list[(i % n) as usize].clone()
                }
            }),
            validator: None,
            size_hint: Some(Arc::new(move |_| Some(n))),
            scan_budget: Some(Arc::new(move |_| Some(n))),
            scan_kind: ScanKind::Plain,
            hp: false,
            ambient: None,
            cover: None,
            obstruction: None,
            descriptor: AgeDescriptor {
                kind: "explicit".into(),
                params: BTreeMap::new(),
            },
        }
    }

    pub fn with_validator(mut self, v: Validator) -> Self {
        self.validator = Some(v);
        self
    }

    pub fn with_hp(mut self, hp: bool) -> Self {
        self.hp = hp;
        self
    }

    pub fn with_ambient(mut self, a: AmbientFn) -> Self {
        self.ambient = Some(a);
        self
    }

    /// Attach an upward-closed obstruction: whenever it reports a reason
    /// for `m`, every structure on the same domain whose tuples include
    /// those of `m` (functions unchanged) is outside the age.
    pub fn with_obstruction(mut self, o: ObstructionFn) -> Self {
        self.obstruction = Some(o);
        self
    }

    pub fn obstruction(&self, m: &FinStructure) -> Option<String> {
        self.obstruction.as_ref().and_then(|o| o(m))
    }

    pub fn with_descriptor(mut self, d: AgeDescriptor) -> Self {
        self.descriptor = d;
        self
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn enumerate(&self, i: u64) -> Pointed {
        (self.enumerator)(i)
    }

    pub fn has_validator(&self) -> bool {
        self.validator.is_some()
    }

    /// `Ok(())` for members, `Err(reason)` otherwise.
    pub fn validate(&self, m: &FinStructure) -> Result<Result<(), String>, AgeError> {
        match &self.validator {
            Some(v) => Ok(v(m)),
            None => Err(AgeError::NoValidator),
        }
    }

    pub fn is_member(&self, m: &FinStructure) -> Option<bool> {
        self.validator.as_ref().map(|v| v(m).is_ok())
    }

    /// Count of indices that covers every member type with at most `n`
    /// elements.
    pub fn size_hint(&self, n: usize) -> Option<u64> {
        self.size_hint.as_ref().and_then(|h| h(n))
    }

    pub fn hp(&self) -> bool {
        self.hp
    }

    pub fn ambient(&self, n: usize) -> Option<Ambient> {
        self.ambient.as_ref().map(|a| a(n))
    }

    pub fn descriptor(&self) -> &AgeDescriptor {
        &self.descriptor
    }

    pub fn is_canonical(&self) -> bool {
        self.scan_kind == ScanKind::Repeating
    }

    /// Visit enumerated members without repetition, `budget` steps at most.
    /// Returns whether the scan was stopped by the visitor.
    pub fn scan(&self, budget: u64, mut visit: impl FnMut(u64, Pointed) -> bool) -> bool {
        for x in 0..budget {
            let i = match self.scan_kind {
                ScanKind::Plain => x,
                ScanKind::Repeating => pair(x, 0),
            };
            if visit(i, self.enumerate(i)) {
                return true;
            }
        }
        false
    }

    /// Scan steps after which every type with at most `n` elements has been
    /// visited.
    pub fn scan_budget(&self, n: usize) -> Option<u64> {
        self.scan_budget.as_ref().and_then(|h| h(n))
    }

    /// Member types (whole structures, canonically labelled) with at most
    /// `n` elements, sorted by size and then by canonical value.
    pub fn types_up_to(&self, n: usize, budget: u64) -> Result<Vec<FinStructure>, AgeError> {
        let mut found: BTreeSet<(usize, FinStructure)> = BTreeSet::new();
        if let Some(amb) = self.ambient(n) {
            for_each_subset(&amb, &[], n, |s| {
                let m = crate::structure::induced_substructure(&amb.structure, s)
                    .expect("relational ambient");
                found.insert((m.len(), canonical_over(&m, &[]).0));
            });
        } else if self.sig.is_relational() && self.hp && self.validator.is_some() {
            let mut layer = vec![FinStructure::new(self.sig.clone())];
            found.insert((0, layer[0].clone()));
            for size in 1..=n {
                let mut next = BTreeSet::new();
                for m in &layer {
                    for ext in one_point_extensions(m) {
                        if self.is_member(&ext) == Some(true) {
                            next.insert(canonical_over(&ext, &[]).0);
                        }
                    }
                }
                layer = next.into_iter().collect();
                for m in &layer {
                    found.insert((size, m.clone()));
                }
            }
        } else if let Some(p) = self.cover.as_ref().and_then(|c| c(n)) {
            for s in closed_substructures(&p, n) {
                let m = crate::structure::induced_substructure(&p, &s)?;
                found.insert((m.len(), canonical_over(&m, &[]).0));
            }
        } else {
            let need = self.scan_budget(n).ok_or(AgeError::BudgetExhausted)?;
            if need > budget {
                return Err(AgeError::BudgetExhausted);
            }
            self.scan(need, |_, p| {
                if p.len() <= n {
                    found.insert((p.len(), canonical_over(p.structure(), &[]).0));
                }
                false
            });
        }
        Ok(found.into_iter().map(|(_, m)| m).collect())
    }

    /// Extension types of `a` by at most `k` new elements, each as a
    /// canonically labelled member whose first `|a|` labels are `a`'s domain
    /// in order, together with the image of `a.tuple`.
    pub fn extensions(&self, a: &Pointed, k: usize, budget: u64) -> Result<Vec<Extension>, AgeError> {
        let a_dom = a.structure().domain().to_vec();
        let mut found: BTreeSet<Extension> = BTreeSet::new();
        let mut record = |b: &FinStructure, phi: &BTreeMap<Elem, Elem>| {
            let fixed: Vec<Elem> = a_dom.iter().map(|x| phi[x]).collect();
            let (canon, relabel) = canonical_over(b, &fixed);
            let image = a.tuple().iter().map(|x| relabel[&phi[x]]).collect();
            found.insert(Extension {
                structure: canon,
                image,
            });
        };
        let whole_a = Pointed::whole(a.structure().clone());
        if let Some(amb) = self.ambient(a.len() + k) {
            let phis = EmbeddingSearch::new(&whole_a, &amb.structure)
                .interchangeable(amb.pads.clone())
                .all();
            for img in phis {
                let phi: BTreeMap<Elem, Elem> = a_dom.iter().copied().zip(img.iter().copied()).collect();
                for_each_subset(&amb, &img, a.len() + k, |s| {
                    let b = crate::structure::induced_substructure(&amb.structure, s)
                        .expect("relational ambient");
                    record(&b, &phi);
                });
            }
        } else {
            for t in self.types_up_to(a.len() + k, budget)? {
                if t.len() < a.len() {
                    continue;
                }
                for img in EmbeddingSearch::new(&whole_a, &t).all() {
                    let phi = cl_sim_map(whole_a.tuple(), whole_a.structure(), &img, &t)?
                        .expect("search returns embeddings");
                    record(&t, &phi);
                }
            }
        }
        let mut out: Vec<Extension> = found.into_iter().collect();
        out.sort_by(|x, y| (x.structure.len(), x).cmp(&(y.structure.len(), y)));
        Ok(out)
    }
}

/// A member containing a distinguished copy of some base structure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Extension {
    pub structure: FinStructure,
    /// Image of the base tuple.
    pub image: Vec<Elem>,
}

impl Extension {
    /// The extension as a pointed member: its tuple is the base image
    /// followed by the remaining elements in order.
    pub fn pointed(&self) -> Pointed {
        let mut tuple = self.image.clone();
        let seen: BTreeSet<Elem> = crate::structure::closure_set(&self.structure, &self.image)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        tuple.extend(self.structure.domain().iter().copied().filter(|e| !seen.contains(e)));
        Pointed::new(tuple, self.structure.clone()).expect("tuple covers the domain")
    }

    /// Inclusion of the base into this extension.
    pub fn embedding_from(&self, base: &Pointed) -> PotentialEmbedding {
        PotentialEmbedding {
            src: base.clone(),
            dst: self.pointed(),
            image: self.image.clone(),
        }
    }
}

/// Subsets of the ambient domain containing `must`, of size at most `max`,
/// using pads lowest-first.
fn for_each_subset(amb: &Ambient, must: &[Elem], max: usize, mut f: impl FnMut(&BTreeSet<Elem>)) {
    let must_set: BTreeSet<Elem> = must.iter().copied().collect();
    let pads: BTreeSet<Elem> = amb.pads.iter().copied().collect();
    let free_pads: Vec<Elem> = amb.pads.iter().copied().filter(|p| !must_set.contains(p)).collect();
    let others: Vec<Elem> = amb
        .structure
        .domain()
        .iter()
        .copied()
        .filter(|e| !must_set.contains(e) && !pads.contains(e))
        .collect();
    let room = max.saturating_sub(must_set.len());
    let mut chosen = must_set.clone();
    fn rec(
        others: &[Elem],
        start: usize,
        room: usize,
        chosen: &mut BTreeSet<Elem>,
        free_pads: &[Elem],
        f: &mut impl FnMut(&BTreeSet<Elem>),
    ) {
        // Emit with every admissible number of pads.
        let mut with_pads = chosen.clone();
        f(&with_pads);
        for &p in free_pads.iter().take(room) {
            with_pads.insert(p);
            f(&with_pads);
        }
        if room == 0 {
            return;
        }
        for i in start..others.len() {
            chosen.insert(others[i]);
            rec(others, i + 1, room - 1, chosen, free_pads, f);
            chosen.remove(&others[i]);
        }
    }
    rec(&others, 0, room, &mut chosen, &free_pads, &mut f);
}

/// The closure in `m` of each subset, kept when it has at most `n` elements.
pub fn closed_substructures(m: &FinStructure, n: usize) -> Vec<BTreeSet<Elem>> {
    fn rec(
        dom: &[Elem],
        start: usize,
        n: usize,
        chosen: &mut Vec<Elem>,
        m: &FinStructure,
        out: &mut BTreeSet<BTreeSet<Elem>>,
    ) {
        match closure_set(m, chosen) {
            Ok(cl) if cl.len() <= n => {
                out.insert(cl);
            }
            _ => return,
        }
        if chosen.len() == n {
            return;
        }
        for i in start..dom.len() {
            chosen.push(dom[i]);
            rec(dom, i + 1, n, chosen, m, out);
            chosen.pop();
        }
    }
    let mut out = BTreeSet::new();
    rec(m.domain(), 0, n, &mut Vec::new(), m, &mut out);
    out.into_iter().collect()
}

/// All structures obtained by adding one fresh element to `m` with every
/// choice of relation tuples through it (relational signatures).
pub fn one_point_extensions(m: &FinStructure) -> Vec<FinStructure> {
    let fresh = m.max_elem().map_or(0, |x| x + 1);
    let mut elems = m.domain().to_vec();
    elems.push(fresh);
    let mut slots: Vec<(usize, Vec<Elem>)> = Vec::new();
    for (ri, (_, arity)) in m.sig().relation_symbols().iter().enumerate() {
        for_each_tuple(&elems, *arity, |t| {
            if t.contains(&fresh) {
                slots.push((ri, t.to_vec()));
            }
        });
    }
    let mut out = Vec::new();
    let total: u128 = 1u128 << slots.len().min(127);
    let mut base = m.clone();
    base.add_element(fresh);
    let mut mask: u128 = 0;
    while mask < total {
        let mut ext = base.clone();
        for (bit, (ri, t)) in slots.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                ext.insert_rel_at(*ri, t.clone());
            }
        }
        out.push(ext);
        mask += 1;
    }
    out
}

/// Canonical age of a generator: index `i` decodes as
/// `(x, rep) = unpair(i)`, `(level, code) = unpair(x)`, and yields the
/// closure in `prefix(level)` of the tuple with that code.
pub fn canonical_age(gen: Arc<dyn StructureGenerator>) -> Age {
    canonical_age_ordered(gen, TupleOrder::Ascending)
}

/// Which way tuple digits index a prefix domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleOrder {
    Ascending,
    Descending,
}

pub fn canonical_age_ordered(gen: Arc<dyn StructureGenerator>, order: TupleOrder) -> Age {
    let sig = gen.sig();
    let g = gen.clone();
    let enumerator: Enumerator = Arc::new(move |i| {
        let (x, _rep) = unpair(i);
        let (level, code) = unpair(x);
        let dom = g.prefix_domain(level as usize);
        let tuple: Vec<Elem> = decode_tuple(code, dom.len())
            .into_iter()
            .map(|d| match order {
                TupleOrder::Ascending => dom[d],
                TupleOrder::Descending => dom[dom.len() - 1 - d],
            })
            .collect();
        g.generated(level as usize, &tuple)
    });
    let g1 = gen.clone();
    let scan_budget: SizeHint = Arc::new(move |n| {
        let level = g1.cover_level(n)?;
        let d = g1.prefix(level).len();
        let c = codes_up_to(n, d).checked_sub(1)?;
        Some(pair(level as u64, c).saturating_add(1))
    });
    let sb = scan_budget.clone();
    let size_hint: SizeHint = Arc::new(move |n| {
        let x = sb(n)?.checked_sub(1)?;
        Some(pair(x, 0).saturating_add(1))
    });
    let g2 = gen.clone();
    let cover: CoverFn = Arc::new(move |n| g2.cover_level(n).map(|l| g2.prefix(l)));
    let mut params: BTreeMap<String, Param> = gen.params().into_iter().collect();
    params.insert("generator".into(), Param::Str(gen.name()));
    if order == TupleOrder::Descending {
        params.insert("order".into(), Param::Str("descending".into()));
    }
    Age {
        sig,
        enumerator,
        validator: None,
        size_hint: Some(size_hint),
        scan_budget: Some(scan_budget),
        scan_kind: ScanKind::Repeating,
        hp: true,
        ambient: None,
        cover: Some(cover),
        obstruction: None,
        descriptor: AgeDescriptor {
            kind: "canonical".into(),
            params,
        },
    }
}

/// A member `cl_sim`-equivalent to `(b, cl(b))` inside `p`.
pub fn hp_witness(age: &Age, p: &Pointed, b: &[Elem], budget: u64) -> Result<Pointed, AgeError> {
    let target = closure(p.structure(), b)?;
    if age.is_canonical() || (age.hp && age.validator.is_some()) {
        return Ok(target);
    }
    let mut out = None;
    age.scan(budget, |_, q| {
        if q.tuple().len() == b.len()
            && cl_sim(q.tuple(), q.structure(), b, p.structure()).unwrap_or(false)
        {
            out = Some(q);
            true
        } else {
            false
        }
    });
    out.ok_or(AgeError::NotFoundWithinBound)
}

/// Embeddings of `p` and `q` into a common member found by scanning.
pub fn jep_witness(
    age: &Age,
    p: &Pointed,
    q: &Pointed,
    budget: u64,
) -> Result<(PotentialEmbedding, PotentialEmbedding), AgeError> {
    let need = p.len().max(q.len());
    let mut out = None;
    age.scan(budget, |_, d| {
        if d.len() < need {
            return false;
        }
        let Some(ip) = EmbeddingSearch::new(p, d.structure()).first() else {
            return false;
        };
        let Some(iq) = EmbeddingSearch::new(q, d.structure()).first() else {
            return false;
        };
        out = Some((
            PotentialEmbedding {
                src: p.clone(),
                dst: d.clone(),
                image: ip,
            },
            PotentialEmbedding {
                src: q.clone(),
                dst: d,
                image: iq,
            },
        ));
        true
    });
    out.ok_or(AgeError::NotFoundWithinBound)
}

/// Bounded comparison of two ages on member types with at most `n`
/// elements. `Err(BudgetExhausted)` when the budget leaves the answer open.
pub fn ages_equivalent_up_to(a0: &Age, a1: &Age, n: usize, budget: u64) -> Result<bool, AgeError> {
    let collect = |a: &Age| -> (BTreeSet<FinStructure>, bool) {
        let mut types = BTreeSet::new();
        a.scan(budget, |_, p| {
            if p.len() <= n {
                types.insert(canonical_over(p.structure(), &[]).0);
            }
            false
        });
        let complete = a.scan_budget(n).is_some_and(|need| need <= budget);
        (types, complete)
    };
    let (t0, c0) = collect(a0);
    let (t1, c1) = collect(a1);
    let mut open = false;
    for (mine, theirs, other_age, other_complete) in [(&t0, &t1, a1, c1), (&t1, &t0, a0, c0)] {
        for t in mine.difference(theirs) {
            match other_age.is_member(t) {
                Some(false) => return Ok(false),
                Some(true) => {}
                None if other_complete => return Ok(false),
                None => open = true,
            }
        }
    }
    if open {
        Err(AgeError::BudgetExhausted)
    } else {
        Ok(true)
    }
}

/// Boxed generator from closures, handy for tests and ad-hoc ages.
pub struct FnGenerator {
    pub sig: Arc<Signature>,
    pub name: String,
    pub prefix: Box<dyn Fn(usize) -> FinStructure + Send + Sync>,
    pub cover: Box<dyn Fn(usize) -> Option<usize> + Send + Sync>,
}

impl StructureGenerator for FnGenerator {
    fn sig(&self) -> Arc<Signature> {
        self.sig.clone()
    }
    fn prefix(&self, level: usize) -> FinStructure {
        (self.prefix)(level)
    }
    fn cover_level(&self, n: usize) -> Option<usize> {
        (self.cover)(n)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::induced_substructure;

    fn edgeless_gen() -> Arc<dyn StructureGenerator> {
        let sig = Arc::new(Signature::relational(&[("E", 2)]).unwrap());
        let s2 = sig.clone();
        Arc::new(FnGenerator {
            sig,
            name: "edgeless".into(),
            prefix: Box::new(move |n| {
                let mut m = FinStructure::new(s2.clone());
                m.add_elements(0..n as u64);
                m
            }),
            cover: Box::new(Some),
        })
    }

    #[test]
    fn pairing_round_trips() {
        for z in 0..5000u64 {
            let (a, b) = unpair(z);
            assert_eq!(pair(a, b), z);
        }
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
    }

    #[test]
    fn tuple_codes_by_length() {
        assert_eq!(decode_tuple(0, 3), Vec::<usize>::new());
        assert_eq!(decode_tuple(1, 3), vec![0]);
        assert_eq!(decode_tuple(3, 3), vec![2]);
        assert_eq!(decode_tuple(4, 3), vec![0, 0]);
        assert_eq!(decode_tuple(12, 3), vec![2, 2]);
        assert_eq!(decode_tuple(13, 3), vec![0, 0, 0]);
        assert_eq!(codes_up_to(2, 3), 13);
    }

    #[test]
    fn edgeless_age_starts_empty() {
        let age = canonical_age(edgeless_gen());
        let p = age.enumerate(0);
        assert!(p.tuple().is_empty() && p.is_empty());
        for i in 0..200 {
            let q = age.enumerate(i);
            assert_eq!(q.structure().tuple_count(), 0);
        }
    }

    #[test]
    fn canonical_values_recur_at_predicted_indices() {
        let age = canonical_age(edgeless_gen());
        for i in 0..300u64 {
            let (x, rep) = unpair(i);
            let again = pair(x, rep + 1);
            assert_eq!(age.enumerate(i), age.enumerate(again));
        }
    }

    #[test]
    fn generator_prefixes_are_induced() {
        let g = edgeless_gen();
        for n in 0..6 {
            let small = g.prefix(n);
            let big = g.prefix(n + 1);
            let s: BTreeSet<Elem> = small.domain().iter().copied().collect();
            assert_eq!(induced_substructure(&big, &s).unwrap(), small);
        }
    }

    #[test]
    fn jep_of_empty_structures_is_identity_pair() {
        let age = canonical_age(edgeless_gen());
        let e = age.enumerate(0);
        let (f0, f1) = jep_witness(&age, &e, &e, 10).unwrap();
        assert_eq!(f0, PotentialEmbedding::identity(&e));
        assert_eq!(f1, PotentialEmbedding::identity(&e));
    }

    #[test]
    fn orderings_agree_at_size_three() {
        let a0 = canonical_age(edgeless_gen());
        let a1 = canonical_age_ordered(edgeless_gen(), TupleOrder::Descending);
        let budget = a0.scan_budget(3).unwrap();
        assert_eq!(ages_equivalent_up_to(&a0, &a1, 3, budget), Ok(true));
        assert_eq!(ages_equivalent_up_to(&a0, &a0, 3, budget), Ok(true));
        let empty = Age::explicit(a0.sig().clone(), vec![]);
        assert_eq!(ages_equivalent_up_to(&a0, &empty, 3, budget), Ok(false));
    }
}
