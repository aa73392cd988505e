//! Potential embeddings, their two-case composition, backtracking embedding
//! search and the memoized EmbedInfo predicate.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::ControlFlow;
use core::sync::atomic::{AtomicUsize, Ordering};

use spin::RwLock;

use crate::structure::{cl_sim, cl_sim_map, for_each_tuple, Elem, FinStructure, Pointed, StructError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("codomain of the first map differs from the domain of the second")]
    DomainMismatch,
    #[error("image element {0} is not in the target")]
    ImageOutOfTarget(Elem),
    #[error(transparent)]
    Struct(#[from] StructError),
}

/// A triple `(src, dst, image)`; an embedding when `image` is `cl_sim` to
/// `src.tuple`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PotentialEmbedding {
    pub src: Pointed,
    pub dst: Pointed,
    pub image: Vec<Elem>,
}

impl PotentialEmbedding {
    /// Checked constructor. The image may have any length; a length other
    /// than `src.tuple().len()` makes the triple a non-embedding.
    pub fn new(src: Pointed, dst: Pointed, image: Vec<Elem>) -> Result<Self, EmbedError> {
        if let Some(&bad) = image.iter().find(|e| !dst.structure().contains(**e)) {
            return Err(EmbedError::ImageOutOfTarget(bad));
        }
        Ok(PotentialEmbedding { src, dst, image })
    }

    pub fn identity(p: &Pointed) -> Self {
        PotentialEmbedding {
            src: p.clone(),
            dst: p.clone(),
            image: p.tuple().to_vec(),
        }
    }

    pub fn dom(&self) -> &Pointed {
        &self.src
    }

    pub fn codom(&self) -> &Pointed {
        &self.dst
    }

    pub fn range(&self) -> &[Elem] {
        &self.image
    }

    /// The map `cl(src.tuple) -> cl(image)` when this is an embedding.
    pub fn as_map(&self) -> Option<BTreeMap<Elem, Elem>> {
        if self.image.len() != self.src.tuple().len() {
            return None;
        }
        cl_sim_map(
            self.src.tuple(),
            self.src.structure(),
            &self.image,
            self.dst.structure(),
        )
        .ok()
        .flatten()
    }
}

pub fn is_embedding(f: &PotentialEmbedding) -> bool {
    f.image.len() == f.src.tuple().len()
        && cl_sim(f.src.tuple(), f.src.structure(), &f.image, f.dst.structure()).unwrap_or(false)
}

/// `G ∘ F`. When `G` is not an embedding the result ignores `F`'s image and
/// reuses `range(G)`; otherwise `range(F)` is pushed through the closure map
/// of `G`.
pub fn compose(f: &PotentialEmbedding, g: &PotentialEmbedding) -> Result<PotentialEmbedding, EmbedError> {
    if f.dst != g.src {
        return Err(EmbedError::DomainMismatch);
    }
    let image = match g.as_map() {
        None => g.image.clone(),
        Some(phi) => f.image.iter().map(|x| phi[x]).collect(),
    };
    Ok(PotentialEmbedding {
        src: f.src.clone(),
        dst: g.dst.clone(),
        image,
    })
}

/// Backtracking search for images of a pointed structure's tuple.
///
/// `preset` pins some elements of the source to target elements. Elements
/// listed as `interchangeable` in the target (isolated, pairwise
/// indistinguishable) are tried lowest-unused-first only, so results are
/// complete up to permutations of those elements.
pub struct EmbeddingSearch<'a> {
    a: &'a Pointed,
    b: &'a FinStructure,
    preset: BTreeMap<Elem, Elem>,
    interchangeable: Vec<Elem>,
}

impl<'a> EmbeddingSearch<'a> {
    pub fn new(a: &'a Pointed, b: &'a FinStructure) -> Self {
        EmbeddingSearch {
            a,
            b,
            preset: BTreeMap::new(),
            interchangeable: Vec::new(),
        }
    }

    pub fn preset(mut self, preset: BTreeMap<Elem, Elem>) -> Self {
        self.preset = preset;
        self
    }

    pub fn interchangeable(mut self, mut elems: Vec<Elem>) -> Self {
        elems.sort_unstable();
        self.interchangeable = elems;
        self
    }

    /// Visit every admissible image in lexicographic order of `b`'s domain;
    /// stops early on `ControlFlow::Break`.
    pub fn for_each<R>(&self, mut visit: impl FnMut(&[Elem]) -> ControlFlow<R>) -> Option<R> {
        if self.a.sig() != self.b.sig() {
            return None;
        }
        let search = Search::new(self.a, self.b, &self.interchangeable, &self.preset);
        let mut map = BTreeMap::new();
        let mut used = BTreeMap::new();
        for (&x, &y) in &self.preset {
            if used.contains_key(&y) || !self.b.contains(y) {
                return None;
            }
            map.insert(x, y);
            used.insert(y, x);
            if !search.atoms_agree(x, &map) {
                return None;
            }
        }
        let mut image = Vec::with_capacity(self.a.tuple().len());
        match search.extend(0, &mut image, &mut map, &mut used, &mut visit) {
            ControlFlow::Break(r) => Some(r),
            ControlFlow::Continue(()) => None,
        }
    }

    pub fn all(&self) -> Vec<Vec<Elem>> {
        let mut out = Vec::new();
        self.for_each::<()>(|c| {
            out.push(c.to_vec());
            ControlFlow::Continue(())
        });
        out
    }

    pub fn first(&self) -> Option<Vec<Elem>> {
        self.for_each(|c| ControlFlow::Break(c.to_vec()))
    }
}

/// Visit every tuple `c` over `b` with `cl_sim(a.tuple, c)` in lexicographic
/// order of `b`'s domain. Stops early on `ControlFlow::Break`.
pub fn for_each_embedding<R>(
    a: &Pointed,
    b: &FinStructure,
    visit: impl FnMut(&[Elem]) -> ControlFlow<R>,
) -> Option<R> {
    EmbeddingSearch::new(a, b).for_each(visit)
}

/// All images of `a.tuple` in `b` that are embeddings.
pub fn enumerate_embeddings(a: &Pointed, b: &FinStructure) -> Vec<Vec<Elem>> {
    EmbeddingSearch::new(a, b).all()
}

/// First embedding image of `a` into `b`, if any.
pub fn first_embedding(a: &Pointed, b: &FinStructure) -> Option<Vec<Elem>> {
    EmbeddingSearch::new(a, b).first()
}

/// Whether some injective map sends every relation tuple of `a` to a tuple
/// of `b` (tuples absent from `a` are unconstrained). Relational symbols only.
pub fn has_monomorphism(a: &FinStructure, b: &FinStructure) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut touching: BTreeMap<Elem, Vec<(usize, &[Elem])>> = BTreeMap::new();
    for (ri, table) in a.rel_tables().iter().enumerate() {
        for t in table {
            let mut seen = Vec::new();
            for &x in t {
                if !seen.contains(&x) {
                    seen.push(x);
                    touching.entry(x).or_default().push((ri, t.as_slice()));
                }
            }
        }
    }
    // Connected elements first, in breadth-first order.
    let mut order: Vec<Elem> = Vec::new();
    for &start in touching.keys() {
        if order.contains(&start) {
            continue;
        }
        let mut queue = alloc::collections::VecDeque::from([start]);
        order.push(start);
        while let Some(x) = queue.pop_front() {
            for (_, t) in &touching[&x] {
                for &y in t.iter() {
                    if !order.contains(&y) {
                        order.push(y);
                        queue.push_back(y);
                    }
                }
            }
        }
    }
    fn rec(
        i: usize,
        order: &[Elem],
        touching: &BTreeMap<Elem, Vec<(usize, &[Elem])>>,
        b: &FinStructure,
        map: &mut BTreeMap<Elem, Elem>,
        used: &mut alloc::collections::BTreeSet<Elem>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let x = order[i];
        for &y in b.domain() {
            if used.contains(&y) {
                continue;
            }
            map.insert(x, y);
            let ok = touching[&x].iter().all(|(ri, t)| {
                let img: Option<Vec<Elem>> = t.iter().map(|e| map.get(e).copied()).collect();
                img.is_none_or(|img| b.holds(*ri, &img))
            });
            if ok {
                used.insert(y);
                if rec(i + 1, order, touching, b, map, used) {
                    return true;
                }
                used.remove(&y);
            }
            map.remove(&x);
        }
        false
    }
    let mut map = BTreeMap::new();
    let mut used = alloc::collections::BTreeSet::new();
    rec(0, &order, &touching, b, &mut map, &mut used)
}

struct Search<'a> {
    a: &'a Pointed,
    b: &'a FinStructure,
    relational: bool,
    /// For each position, the earlier position with the same element.
    repeat_of: Vec<Option<usize>>,
    pads: &'a [Elem],
    preset: &'a BTreeMap<Elem, Elem>,
}

impl<'a> Search<'a> {
    fn new(
        a: &'a Pointed,
        b: &'a FinStructure,
        pads: &'a [Elem],
        preset: &'a BTreeMap<Elem, Elem>,
    ) -> Self {
        let t = a.tuple();
        let repeat_of = (0..t.len()).map(|i| (0..i).find(|&j| t[j] == t[i])).collect();
        Search {
            a,
            b,
            relational: a.sig().is_relational(),
            repeat_of,
            pads,
            preset,
        }
    }

    fn extend<R>(
        &self,
        pos: usize,
        image: &mut Vec<Elem>,
        map: &mut BTreeMap<Elem, Elem>,
        used: &mut BTreeMap<Elem, Elem>,
        visit: &mut impl FnMut(&[Elem]) -> ControlFlow<R>,
    ) -> ControlFlow<R> {
        let t = self.a.tuple();
        if pos == t.len() {
            if !self.relational {
                let phi = cl_sim_map(t, self.a.structure(), image, self.b).ok().flatten();
                let ok = phi.is_some_and(|phi| {
                    self.preset.iter().all(|(x, y)| phi.get(x).is_none_or(|v| v == y))
                });
                if !ok {
                    return ControlFlow::Continue(());
                }
            }
            return visit(image);
        }
        if let Some(j) = self.repeat_of[pos] {
            image.push(image[j]);
            let r = self.extend(pos + 1, image, map, used, visit);
            image.pop();
            return r;
        }
        let x = t[pos];
        if let Some(&y) = map.get(&x) {
            image.push(y);
            let r = self.extend(pos + 1, image, map, used, visit);
            image.pop();
            return r;
        }
        let first_free_pad = self.pads.iter().copied().find(|p| !used.contains_key(p));
        for &y in self.b.domain() {
            if used.contains_key(&y) {
                continue;
            }
            if Some(y) != first_free_pad && self.pads.binary_search(&y).is_ok() {
                continue;
            }
            map.insert(x, y);
            used.insert(y, x);
            if self.atoms_agree(x, map) {
                image.push(y);
                let r = self.extend(pos + 1, image, map, used, visit);
                image.pop();
                if r.is_break() {
                    map.remove(&x);
                    used.remove(&y);
                    return r;
                }
            }
            map.remove(&x);
            used.remove(&y);
        }
        ControlFlow::Continue(())
    }

    /// Atomic facts among mapped elements that mention `x` agree on both sides.
    fn atoms_agree(&self, x: Elem, map: &BTreeMap<Elem, Elem>) -> bool {
        let src = self.a.structure();
        let keys: Vec<Elem> = map.keys().copied().collect();
        let mut img = Vec::new();
        for (ri, (_, arity)) in src.sig().relation_symbols().iter().enumerate() {
            let mut ok = true;
            for_each_tuple(&keys, *arity, |t| {
                if !ok || !t.contains(&x) {
                    return;
                }
                img.clear();
                img.extend(t.iter().map(|e| map[e]));
                ok = src.holds(ri, t) == self.b.holds(ri, &img);
            });
            if !ok {
                return false;
            }
        }
        for (fi, (_, arity)) in src.sig().functions().iter().enumerate() {
            let mut ok = true;
            for_each_tuple(&keys, *arity, |t| {
                if !ok {
                    return;
                }
                let Some(v) = src.apply(fi, t) else { return };
                let Some(&mv) = map.get(&v) else { return };
                if !t.contains(&x) && v != x {
                    return;
                }
                img.clear();
                img.extend(t.iter().map(|e| map[e]));
                ok = self.b.apply(fi, &img) == Some(mv);
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

type InfoKey = (FinStructure, Vec<Elem>, FinStructure, Vec<Elem>);

/// Write-once memo of `cl_sim` answers, safe to share between threads.
#[derive(Default)]
pub struct EmbedInfoTable {
    memo: RwLock<BTreeMap<InfoKey, bool>>,
    hits: AtomicUsize,
}

impl EmbedInfoTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.memo.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Memoized `cl_sim(a@m, b@n)`.
    pub fn embed_info(
        &self,
        a: &[Elem],
        m: &FinStructure,
        b: &[Elem],
        n: &FinStructure,
    ) -> Result<bool, StructError> {
        let key: InfoKey = (m.clone(), a.to_vec(), n.clone(), b.to_vec());
        if let Some(&v) = self.memo.read().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        let v = cl_sim(a, m, b, n)?;
        // First writer wins; later writers computed the same value.
        self.memo.write().entry(key).or_insert(v);
        Ok(v)
    }
}

/// Outcome of checking the category laws on a sample of composable triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryReport {
    pub triples: usize,
    pub associativity_failures: Vec<usize>,
    pub identity_failures: Vec<usize>,
    pub closure_checked: usize,
    pub closure_skipped: usize,
    pub closure_failures: Vec<usize>,
    pub composability_errors: Vec<usize>,
}

impl CategoryReport {
    pub fn passed(&self) -> bool {
        self.associativity_failures.is_empty()
            && self.identity_failures.is_empty()
            && self.closure_failures.is_empty()
            && self.composability_errors.is_empty()
    }
}

/// Check associativity, both identity laws and closure of embeddings under
/// composition on triples `(F, G, H)` with `codom F = dom G`, `codom G = dom H`.
pub fn check_category_laws(
    sample: &[(PotentialEmbedding, PotentialEmbedding, PotentialEmbedding)],
) -> CategoryReport {
    let mut rep = CategoryReport {
        triples: sample.len(),
        ..CategoryReport::default()
    };
    for (i, (f, g, h)) in sample.iter().enumerate() {
        let assoc = (|| -> Result<bool, EmbedError> {
            let left = compose(&compose(f, g)?, h)?;
            let right = compose(f, &compose(g, h)?)?;
            Ok(left == right)
        })();
        match assoc {
            Ok(true) => {}
            Ok(false) => rep.associativity_failures.push(i),
            Err(_) => {
                rep.composability_errors.push(i);
                continue;
            }
        }
        let ids_ok = [f, g, h].iter().all(|x| {
            let l = compose(&PotentialEmbedding::identity(x.dom()), x);
            let r = compose(x, &PotentialEmbedding::identity(x.codom()));
            l.as_ref() == Ok(*x) && r.as_ref() == Ok(*x)
        });
        if !ids_ok {
            rep.identity_failures.push(i);
        }
        if is_embedding(f) && is_embedding(g) {
            rep.closure_checked += 1;
            let gf = compose(f, g).map(|c| is_embedding(&c)).unwrap_or(false);
            if !gf {
                rep.closure_failures.push(i);
            }
        } else {
            rep.closure_skipped += 1;
        }
    }
    rep
}
