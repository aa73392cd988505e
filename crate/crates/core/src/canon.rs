//! Brute-force canonical labelling of small structures, optionally relative
//! to a fixed ordered set of elements.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::structure::{Elem, FinStructure};

/// Relabel `m` so that `fixed[i]` becomes `i` and every other element gets a
/// label from `fixed.len()` upwards, choosing the labelling whose tables are
/// lexicographically least. Two structures are isomorphic over their fixed
/// lists iff their canonical forms are equal.
///
/// Returns the canonical structure and the relabelling map.
pub fn canonical_over(m: &FinStructure, fixed: &[Elem]) -> (FinStructure, BTreeMap<Elem, Elem>) {
    let fixed_set: BTreeSet<Elem> = fixed.iter().copied().collect();
    debug_assert_eq!(fixed_set.len(), fixed.len(), "fixed elements must be distinct");
    let free: Vec<Elem> = m
        .domain()
        .iter()
        .copied()
        .filter(|e| !fixed_set.contains(e))
        .collect();
    let fixed_label: BTreeMap<Elem, usize> = fixed.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    // Group free elements into cells of equal isomorphism-invariant data.
    let inv = invariants(m, &free, &fixed_label);
    let mut keyed: Vec<(Vec<u64>, Elem)> = free.iter().map(|&e| (inv[&e].clone(), e)).collect();
    keyed.sort();
    let mut cells: Vec<Vec<Elem>> = Vec::new();
    let mut isolated: Vec<Elem> = Vec::new();
    let mut last: Option<&Vec<u64>> = None;
    for (k, e) in &keyed {
        if k.is_empty() {
            isolated.push(*e);
            continue;
        }
        if last == Some(k) {
            cells.last_mut().unwrap().push(*e);
        } else {
            cells.push(vec![*e]);
            last = Some(k);
        }
    }

    let base = fixed.len() as Elem;
    let mut best: Option<(Vec<u64>, BTreeMap<Elem, Elem>)> = None;
    let mut order: Vec<Elem> = Vec::with_capacity(free.len());
    let cell_perms: Vec<Vec<Vec<Elem>>> = cells.iter().map(|c| permutations(c)).collect();
    permute_cells(&cell_perms, 0, &mut order, &mut |order| {
        let mut map: BTreeMap<Elem, Elem> = fixed
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as Elem))
            .collect();
        for (i, &e) in order.iter().chain(isolated.iter()).enumerate() {
            map.insert(e, base + i as Elem);
        }
        let code = encode(m, &map);
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            best = Some((code, map));
        }
    });
    let (_, map) = best.expect("at least one labelling");
    (m.rename(&map), map)
}

/// Canonical form with no fixed elements.
pub fn canonical(m: &FinStructure) -> FinStructure {
    canonical_over(m, &[]).0
}

/// True iff `m` and `n` are isomorphic.
pub fn isomorphic(m: &FinStructure, n: &FinStructure) -> bool {
    m.len() == n.len() && m.sig() == n.sig() && canonical(m) == canonical(n)
}

fn permute_cells(cells: &[Vec<Vec<Elem>>], ci: usize, order: &mut Vec<Elem>, f: &mut impl FnMut(&[Elem])) {
    if ci == cells.len() {
        f(order);
        return;
    }
    for p in &cells[ci] {
        let len = order.len();
        order.extend_from_slice(p);
        permute_cells(cells, ci + 1, order, f);
        order.truncate(len);
    }
}

fn permutations(items: &[Elem]) -> Vec<Vec<Elem>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Per free element: sorted list of (symbol, position pattern, fixed labels)
/// codes for every table entry it occurs in. Empty means isolated.
fn invariants(
    m: &FinStructure,
    free: &[Elem],
    fixed_label: &BTreeMap<Elem, usize>,
) -> BTreeMap<Elem, Vec<u64>> {
    let free_set: BTreeSet<Elem> = free.iter().copied().collect();
    let mut out: BTreeMap<Elem, Vec<u64>> = free.iter().map(|&e| (e, Vec::new())).collect();
    let describe = |sym: u64, t: &[Elem], e: Elem| -> u64 {
        // Each slot: 0 = this element, 1 = another free element, 2+i = fixed i.
        let mut h: u64 = sym.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ t.len() as u64;
        for &x in t {
            let slot = if x == e {
                0
            } else if let Some(&i) = fixed_label.get(&x) {
                2 + i as u64
            } else {
                1
            };
            h = h.wrapping_mul(1_000_003).wrapping_add(slot);
        }
        h
    };
    for (ri, table) in m.rel_tables().iter().enumerate() {
        for t in table {
            let mut seen = BTreeSet::new();
            for &x in t {
                if free_set.contains(&x) && seen.insert(x) {
                    let d = describe(ri as u64, t, x);
                    out.get_mut(&x).unwrap().push(d);
                }
            }
        }
    }
    let nrel = m.rel_tables().len() as u64;
    for (fi, table) in m.fun_tables().iter().enumerate() {
        for (args, v) in table {
            let mut t = args.clone();
            t.push(*v);
            let mut seen = BTreeSet::new();
            for &x in &t {
                if free_set.contains(&x) && seen.insert(x) {
                    let d = describe(nrel + fi as u64, &t, x);
                    out.get_mut(&x).unwrap().push(d);
                }
            }
        }
    }
    for v in out.values_mut() {
        v.sort_unstable();
    }
    out
}

fn encode(m: &FinStructure, map: &BTreeMap<Elem, Elem>) -> Vec<u64> {
    let mut code = Vec::new();
    for table in m.rel_tables() {
        let mut rows: Vec<Vec<Elem>> = table.iter().map(|t| t.iter().map(|x| map[x]).collect()).collect();
        rows.sort_unstable();
        code.push(rows.len() as u64);
        for r in rows {
            code.extend(r);
        }
    }
    for table in m.fun_tables() {
        let mut rows: Vec<Vec<Elem>> = table
            .iter()
            .map(|(a, v)| a.iter().chain(core::iter::once(v)).map(|x| map[x]).collect())
            .collect();
        rows.sort_unstable();
        code.push(rows.len() as u64);
        for r in rows {
            code.extend(r);
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;
    use alloc::sync::Arc;

    fn graph(n: u64, edges: &[(u64, u64)]) -> FinStructure {
        let sig = Arc::new(Signature::relational(&[("E", 2)]).unwrap());
        let mut m = FinStructure::new(sig);
        m.add_elements(0..n);
        for &(x, y) in edges {
            m.insert_rel_at(0, vec![x, y]);
            m.insert_rel_at(0, vec![y, x]);
        }
        m
    }

    #[test]
    fn relabelled_paths_share_a_form() {
        let a = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let b = graph(4, &[(3, 0), (0, 2), (2, 1)]);
        assert!(isomorphic(&a, &b));
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!(!isomorphic(&a, &star));
    }

    #[test]
    fn fixed_points_distinguish_ends() {
        let p = graph(3, &[(0, 1), (1, 2)]);
        let (end, _) = canonical_over(&p, &[0]);
        let (mid, _) = canonical_over(&p, &[1]);
        let (other_end, _) = canonical_over(&p, &[2]);
        assert_eq!(end, other_end);
        assert_ne!(end, mid);
    }

    #[test]
    fn isolated_elements_do_not_blow_up() {
        let m = graph(14, &[(0, 1)]);
        let c = canonical(&m);
        assert_eq!(c.len(), 14);
    }
}
