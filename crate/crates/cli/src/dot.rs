//! Graphviz rendering. Binary relations become labelled edges, unary
//! relations become node attributes, functions become dashed labelled arcs.

use std::collections::BTreeMap;
use std::fmt::Write;

use fraisse_core::{Elem, FinStructure};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(m: &FinStructure, names: &BTreeMap<Elem, String>) -> String {
    let sig = m.sig();
    let mut unary: BTreeMap<Elem, Vec<&str>> = BTreeMap::new();
    let mut out = String::from("digraph structure {\n");
    for ((name, arity), table) in sig.relation_symbols().iter().zip(m.rel_tables()) {
        if *arity == 1 {
            for t in table {
                unary.entry(t[0]).or_default().push(name);
            }
        }
    }
    for &x in m.domain() {
        let label = names.get(&x).cloned().unwrap_or_else(|| x.to_string());
        let mut attrs = vec![format!("label={}", quote(&label))];
        if let Some(us) = unary.get(&x) {
            attrs.push(format!("unary={}", quote(&us.join(","))));
            for u in us {
                attrs.push(format!("{}=true", quote(u)));
            }
        }
        let _ = writeln!(out, "  {x} [{}];", attrs.join(", "));
    }
    for ((name, arity), table) in sig.relation_symbols().iter().zip(m.rel_tables()) {
        match arity {
            1 => {}
            2 => {
                for t in table {
                    let _ = writeln!(out, "  {} -> {} [label={}];", t[0], t[1], quote(name));
                }
            }
            _ => {
                // Higher arity: a path through the tuple, positions in the label.
                for t in table {
                    for (i, w) in t.windows(2).enumerate() {
                        let label = format!("{name}{t:?}#{i}");
                        let _ = writeln!(out, "  {} -> {} [label={}];", w[0], w[1], quote(&label));
                    }
                }
            }
        }
    }
    for ((name, arity), table) in sig.functions().iter().zip(m.fun_tables()) {
        for (args, v) in table {
            if *arity == 0 {
                let _ = writeln!(out, "  {v} [constant={}];", quote(name));
                continue;
            }
            for (i, a) in args.iter().enumerate() {
                let label = if *arity == 1 { name.clone() } else { format!("{name}#{i}") };
                let _ = writeln!(out, "  {a} -> {v} [label={}, style=dashed];", quote(&label));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Node statements in a DOT text.
pub fn node_count(dot: &str) -> usize {
    dot.lines()
        .filter(|l| {
            let l = l.trim_start();
            l.contains("[label=") && !l.contains("->")
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fraisse_core::gadgets::{f_cycles, graph, w_sigma};

    #[test]
    fn graph_edges_and_nodes() {
        let dot = to_dot(&graph(2, &[(0, 1)]), &BTreeMap::new());
        assert_eq!(node_count(&dot), 2);
        assert!(dot.contains("  0 -> 1 [label=\"E\"];"));
        assert!(dot.contains("  1 -> 0 [label=\"E\"];"));
    }

    #[test]
    fn functions_are_dashed_arcs() {
        let dot = to_dot(&f_cycles(&[2]), &BTreeMap::new());
        assert!(dot.contains("  0 -> 1 [label=\"f\", style=dashed];"));
    }

    #[test]
    fn unary_relations_are_attributes() {
        let g = w_sigma(&[1], &[0]).unwrap();
        let dot = to_dot(&g.structure, &g.names);
        let b0 = g.elem("b+0").unwrap();
        assert!(dot.contains(&format!("  {b0} [label=\"b+0\", unary=\"U_0\", \"U_0\"=true];")));
        assert!(!dot.contains("label=\"U_0\""));
    }
}
