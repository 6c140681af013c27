//! Text and DOT renderings of automata.
//!
//! The text format is line oriented:
//!
//! ```text
//! dfa <state count>
//! state <id>
//!   <item>
//! edge <from> <symbol> <to>
//! eps <from> <to>
//! hyper <from> -> <to> <to> ...
//! ```
//!
//! NFA dumps print one `state` block per item and use `eps` lines; DFA
//! dumps list each state's items.

use std::fmt::Write;

use super::{Dfa, Nfa};
use crate::grammar::Grammar;

#[derive(Clone, Copy, Debug)]
pub enum AutomatonRef<'a> {
    Nfa(&'a Nfa),
    Dfa(&'a Dfa),
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering. Each hyperedge becomes a junction node with one
/// incoming and one outgoing edge per target.
pub fn dump_dot(a: AutomatonRef<'_>, g: &Grammar) -> String {
    let mut out = String::new();
    let (name, labels, edges, eps, hyper, initial) = match a {
        AutomatonRef::Nfa(n) => (
            "nfa",
            n.items
                .iter()
                .map(|i| i.display(g).to_string())
                .collect::<Vec<_>>(),
            n.edges.clone(),
            n.eps.clone(),
            &n.hyperedges,
            n.initial,
        ),
        AutomatonRef::Dfa(d) => (
            "dfa",
            d.states
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let items: Vec<String> =
                        s.items.iter().map(|i| i.display(g).to_string()).collect();
                    format!("{i}\n{}", items.join("\n"))
                })
                .collect(),
            d.edges.iter().map(|(&(a, s), &b)| (a, s, b)).collect(),
            Vec::new(),
            &d.hyperedges,
            d.initial,
        ),
    };
    writeln!(out, "digraph {name} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=box, fontname=\"monospace\"];").unwrap();
    for (i, label) in labels.iter().enumerate() {
        let extra = if i == initial { ", penwidth=2" } else { "" };
        writeln!(out, "  s{i} [label={}{extra}];", quote(label)).unwrap();
    }
    for (a, s, b) in edges {
        writeln!(out, "  s{a} -> s{b} [label={}];", quote(g.name(s))).unwrap();
    }
    for (a, b) in eps {
        writeln!(out, "  s{a} -> s{b} [label=\"ε\", style=dashed];").unwrap();
    }
    for (k, h) in hyper.iter().enumerate() {
        writeln!(out, "  j{k} [shape=point, xlabel=\"⫝\"];").unwrap();
        writeln!(out, "  s{} -> j{k} [arrowhead=none, penwidth=2];", h.source).unwrap();
        for t in &h.targets {
            writeln!(out, "  j{k} -> s{t} [penwidth=2];").unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

pub fn dump_text(a: AutomatonRef<'_>, g: &Grammar) -> String {
    let mut out = String::new();
    match a {
        AutomatonRef::Nfa(n) => {
            writeln!(out, "nfa {}", n.items.len()).unwrap();
            writeln!(out, "initial {}", n.initial).unwrap();
            for (i, item) in n.items.iter().enumerate() {
                writeln!(out, "state {i}").unwrap();
                writeln!(out, "  {}", item.display(g)).unwrap();
            }
            for &(a, s, b) in &n.edges {
                writeln!(out, "edge {a} {} {b}", g.name(s)).unwrap();
            }
            for &(a, b) in &n.eps {
                writeln!(out, "eps {a} {b}").unwrap();
            }
            for h in &n.hyperedges {
                write_hyper(&mut out, h.source, &h.targets);
            }
        }
        AutomatonRef::Dfa(d) => {
            writeln!(out, "dfa {}", d.states.len()).unwrap();
            writeln!(out, "initial {}", d.initial).unwrap();
            for (i, s) in d.states.iter().enumerate() {
                writeln!(out, "state {i}").unwrap();
                for item in &s.items {
                    writeln!(out, "  {}", item.display(g)).unwrap();
                }
            }
            for (&(a, s), &b) in &d.edges {
                writeln!(out, "edge {a} {} {b}", g.name(s)).unwrap();
            }
            for h in &d.hyperedges {
                write_hyper(&mut out, h.source, &h.targets);
            }
        }
    }
    out
}

fn write_hyper(out: &mut String, source: usize, targets: &[usize]) {
    let ts: Vec<String> = targets.iter().map(usize::to_string).collect();
    writeln!(out, "hyper {source} -> {}", ts.join(" ")).unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{build_nfa, subset_construct};

    fn running() -> Grammar {
        Grammar::builder()
            .start("S")
            .shuffle("S", &["T", "U"])
            .seq("T", &["W", "p", "r"])
            .seq("U", &["1", "2", "3", "4", "5"])
            .seq("W", &["m", "n"])
            .build()
            .unwrap()
            .augment()
            .unwrap()
    }

    #[test]
    fn dfa_dot_counts() {
        let g = running();
        let dfa = subset_construct(&build_nfa(&g), &g);
        let dot = dump_dot(AutomatonRef::Dfa(&dfa), &g);
        let states = dot
            .lines()
            .filter(|l| l.trim_start().starts_with('s') && !l.contains("-> "))
            .count();
        let junctions = dot.lines().filter(|l| l.contains("shape=point")).count();
        assert_eq!(states, 18);
        assert_eq!(junctions, 1);
        assert_eq!(dot, dump_dot(AutomatonRef::Dfa(&dfa), &g));
    }

    #[test]
    fn edgeless_automaton_dot() {
        let g = Grammar::builder().start("S").seq("S", &[]).build().unwrap();
        let nfa = build_nfa(&g);
        let dfa = subset_construct(&nfa, &g);
        assert!(dfa.edges.is_empty());
        let dot = dump_dot(AutomatonRef::Dfa(&dfa), &g);
        assert_eq!(dot.lines().filter(|l| l.contains("-> s")).count(), 0);
        assert!(dot.starts_with("digraph dfa {"));
        assert!(dot.ends_with("}\n"));
    }

    #[test]
    fn text_dump_lists_states() {
        let g = running();
        let dfa = subset_construct(&build_nfa(&g), &g);
        let text = dump_text(AutomatonRef::Dfa(&dfa), &g);
        assert!(text.starts_with("dfa 18\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("hyper ")).count(), 1);
    }
}
