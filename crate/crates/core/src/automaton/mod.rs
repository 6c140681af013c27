//! Handle-finding automata.
//!
//! The NFA has one state per item. Besides the classical LR(0) items it
//! carries shuffle items `a -> .<m>{rest}` that consume operands in any
//! order, indirection items `^a` marking entry into one branch of a
//! shuffle, and hyperedges from each full initial shuffle item to the
//! indirection items of its operands. The DFA is the usual subset
//! construction, with hyperedges lifted onto item sets.

mod dump;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

pub use dump::{dump_dot, dump_text, AutomatonRef};

use crate::grammar::{Grammar, SymbolId};

/// Widest shuffle rule supported; operand sets are kept as bit masks and
/// every subset may become an item.
pub const MAX_SHUFFLE_ARITY: usize = 16;

/// An item. Variant order is also the display order inside a DFA state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    /// `^a`: start of the branch recognizing shuffle operand `a`.
    Indirection(SymbolId),
    /// Dotted sequence rule.
    Seq { rule: usize, dot: usize },
    /// `lhs -> .<m>{remaining}`, or `lhs -> <m>{}.` when `done`. Bit `i`
    /// of `remaining` stands for the rule's `i`th operand.
    Shuffle {
        rule: usize,
        remaining: u32,
        done: bool,
    },
    /// The station of a nonterminal.
    Station(SymbolId),
}

impl Item {
    pub fn full_shuffle(g: &Grammar, rule: usize) -> Item {
        Item::Shuffle {
            rule,
            remaining: full_mask(g.shuffle_rules()[rule].arity()),
            done: false,
        }
    }

    pub fn is_final(&self, g: &Grammar) -> bool {
        match *self {
            Item::Seq { rule, dot } => dot == g.seq_rules()[rule].rhs.len(),
            Item::Shuffle { done, .. } => done,
            _ => false,
        }
    }

    pub fn is_initial(&self, g: &Grammar) -> bool {
        match *self {
            Item::Seq { dot, .. } => dot == 0,
            Item::Shuffle { rule, .. } => *self == Item::full_shuffle(g, rule),
            _ => false,
        }
    }

    /// Left-hand side of the underlying rule, if any.
    pub fn lhs(&self, g: &Grammar) -> Option<SymbolId> {
        match *self {
            Item::Seq { rule, .. } => Some(g.seq_rules()[rule].lhs),
            Item::Shuffle { rule, .. } => Some(g.shuffle_rules()[rule].lhs),
            _ => None,
        }
    }

    /// Stack entries a reduction by this final item removes: the rule
    /// length for sequence items and the arity for shuffle items.
    pub fn pop_count(&self, g: &Grammar) -> usize {
        match *self {
            Item::Seq { rule, .. } => g.seq_rules()[rule].rhs.len(),
            Item::Shuffle { rule, .. } => g.shuffle_rules()[rule].arity(),
            _ => 0,
        }
    }

    /// Number of operands not yet consumed by a shuffle item.
    pub fn remaining_count(&self) -> Option<u32> {
        match *self {
            Item::Shuffle { remaining, .. } => Some(remaining.count_ones()),
            _ => None,
        }
    }

    pub fn display<'a>(&'a self, g: &'a Grammar) -> ItemDisplay<'a> {
        ItemDisplay { item: *self, g }
    }
}

pub struct ItemDisplay<'a> {
    item: Item,
    g: &'a Grammar,
}

impl fmt::Display for ItemDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.g;
        match self.item {
            Item::Indirection(a) => write!(f, "^{}", g.name(a)),
            Item::Station(a) => write!(f, "[{}]", g.name(a)),
            Item::Seq { rule, dot } => {
                let r = &g.seq_rules()[rule];
                write!(f, "{} ->", g.name(r.lhs))?;
                for (i, s) in r.rhs.iter().enumerate() {
                    if i == dot {
                        write!(f, " .")?;
                    }
                    write!(f, " {}", g.name(*s))?;
                }
                if dot == r.rhs.len() {
                    write!(f, " .")?;
                }
                Ok(())
            }
            Item::Shuffle {
                rule,
                remaining,
                done,
            } => {
                let r = &g.shuffle_rules()[rule];
                let rest: Vec<&str> = r
                    .operands
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| remaining & (1 << i) != 0)
                    .map(|(_, s)| g.name(*s))
                    .collect();
                let body = format!("<{}>{{{}}}", r.arity(), rest.join(","));
                if done {
                    write!(f, "{} -> {} .", g.name(r.lhs), body)
                } else {
                    write!(f, "{} -> . {}", g.name(r.lhs), body)
                }
            }
        }
    }
}

fn full_mask(arity: usize) -> u32 {
    if arity >= 32 {
        u32::MAX
    } else {
        (1u32 << arity) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperedge {
    pub source: usize,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Nfa {
    pub items: Vec<Item>,
    index: HashMap<Item, usize>,
    pub edges: Vec<(usize, SymbolId, usize)>,
    pub eps: Vec<(usize, usize)>,
    pub hyperedges: Vec<Hyperedge>,
    pub initial: usize,
}

impl Nfa {
    pub fn id(&self, item: &Item) -> Option<usize> {
        self.index.get(item).copied()
    }

    fn eps_from(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.items.len()];
        for &(a, b) in &self.eps {
            adj[a].push(b);
        }
        adj
    }
}

/// Builds the item NFA reachable from the station of the start symbol.
pub fn build_nfa(g: &Grammar) -> Nfa {
    let mut nfa = Nfa {
        items: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
        eps: Vec::new(),
        hyperedges: Vec::new(),
        initial: 0,
    };
    let mut work = VecDeque::new();
    let intern = |nfa: &mut Nfa, work: &mut VecDeque<usize>, item: Item| -> usize {
        if let Some(&id) = nfa.index.get(&item) {
            return id;
        }
        let id = nfa.items.len();
        nfa.items.push(item);
        nfa.index.insert(item, id);
        work.push_back(id);
        id
    };
    nfa.initial = intern(&mut nfa, &mut work, Item::Station(g.start()));
    while let Some(id) = work.pop_front() {
        match nfa.items[id] {
            Item::Station(a) => {
                for (ri, _) in g.seq_rules_for(a) {
                    let t = intern(&mut nfa, &mut work, Item::Seq { rule: ri, dot: 0 });
                    nfa.eps.push((id, t));
                }
                for (ri, _) in g.shuffle_rules_for(a) {
                    let t = intern(&mut nfa, &mut work, Item::full_shuffle(g, ri));
                    nfa.eps.push((id, t));
                }
            }
            Item::Indirection(a) => {
                let t = intern(&mut nfa, &mut work, Item::Station(a));
                nfa.eps.push((id, t));
            }
            Item::Seq { rule, dot } => {
                let rhs = &g.seq_rules()[rule].rhs;
                if let Some(&s) = rhs.get(dot) {
                    let t = intern(&mut nfa, &mut work, Item::Seq { rule, dot: dot + 1 });
                    nfa.edges.push((id, s, t));
                    if g.is_nonterminal(s) {
                        let st = intern(&mut nfa, &mut work, Item::Station(s));
                        nfa.eps.push((id, st));
                    }
                }
            }
            Item::Shuffle {
                rule,
                remaining,
                done,
            } => {
                if done {
                    continue;
                }
                let ops = &g.shuffle_rules()[rule].operands;
                if remaining == 0 {
                    let t = intern(
                        &mut nfa,
                        &mut work,
                        Item::Shuffle {
                            rule,
                            remaining: 0,
                            done: true,
                        },
                    );
                    nfa.eps.push((id, t));
                    continue;
                }
                for (i, &op) in ops.iter().enumerate() {
                    if remaining & (1 << i) != 0 {
                        let next = Item::Shuffle {
                            rule,
                            remaining: remaining & !(1 << i),
                            done: false,
                        };
                        let t = intern(&mut nfa, &mut work, next);
                        nfa.edges.push((id, op, t));
                    }
                }
                if remaining == full_mask(ops.len()) {
                    let targets = ops
                        .iter()
                        .map(|&op| intern(&mut nfa, &mut work, Item::Indirection(op)))
                        .collect();
                    nfa.hyperedges.push(Hyperedge {
                        source: id,
                        targets,
                    });
                }
            }
        }
    }
    nfa
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfaState {
    /// Items of the ε-closure, stations left out, sorted.
    pub items: Vec<Item>,
}

impl DfaState {
    pub fn contains(&self, item: &Item) -> bool {
        self.items.binary_search(item).is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct Dfa {
    pub states: Vec<DfaState>,
    /// Simple edges keyed by source state and label.
    pub edges: BTreeMap<(usize, SymbolId), usize>,
    pub hyperedges: Vec<Hyperedge>,
    pub initial: usize,
}

impl Dfa {
    pub fn goto(&self, state: usize, sym: SymbolId) -> Option<usize> {
        self.edges.get(&(state, sym)).copied()
    }

    pub fn hyperedges_from(&self, state: usize) -> impl Iterator<Item = &Hyperedge> {
        self.hyperedges.iter().filter(move |h| h.source == state)
    }

    /// The state whose item set is exactly `items` (stations ignored).
    pub fn find(&self, items: &[Item]) -> Option<usize> {
        let mut want: Vec<Item> = items
            .iter()
            .filter(|i| !matches!(i, Item::Station(_)))
            .copied()
            .collect();
        want.sort();
        want.dedup();
        self.states.iter().position(|s| s.items == want)
    }
}

fn closure(
    nfa: &Nfa,
    adj: &[Vec<usize>],
    seeds: impl IntoIterator<Item = usize>,
) -> BTreeSet<usize> {
    let mut set = BTreeSet::new();
    let mut stack: Vec<usize> = seeds.into_iter().collect();
    while let Some(i) = stack.pop() {
        if set.insert(i) {
            stack.extend(adj[i].iter().copied());
        }
    }
    set.retain(|&i| !matches!(nfa.items[i], Item::Station(_)));
    set
}

/// Subset construction. States are numbered breadth-first from the
/// initial state; successors are visited in symbol-id order, then
/// hyperedge targets in operand order.
pub fn subset_construct(nfa: &Nfa, _g: &Grammar) -> Dfa {
    let adj = nfa.eps_from();
    let mut out_edges: Vec<Vec<(SymbolId, usize)>> = vec![Vec::new(); nfa.items.len()];
    for &(a, s, b) in &nfa.edges {
        out_edges[a].push((s, b));
    }
    let mut hyper_from: HashMap<usize, Vec<&Hyperedge>> = HashMap::new();
    for h in &nfa.hyperedges {
        hyper_from.entry(h.source).or_default().push(h);
    }

    let mut sets: Vec<BTreeSet<usize>> = Vec::new();
    let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut edges = BTreeMap::new();
    let mut hyperedges = Vec::new();
    let mut queue = VecDeque::new();

    let mut intern = |set: BTreeSet<usize>,
                      sets: &mut Vec<BTreeSet<usize>>,
                      queue: &mut VecDeque<usize>|
     -> usize {
        if let Some(&id) = ids.get(&set) {
            return id;
        }
        let id = sets.len();
        ids.insert(set.clone(), id);
        sets.push(set);
        queue.push_back(id);
        id
    };

    let initial = intern(closure(nfa, &adj, [nfa.initial]), &mut sets, &mut queue);
    while let Some(sid) = queue.pop_front() {
        let set = sets[sid].clone();
        let mut by_sym: BTreeMap<SymbolId, BTreeSet<usize>> = BTreeMap::new();
        for &i in &set {
            for &(s, b) in &out_edges[i] {
                by_sym.entry(s).or_default().insert(b);
            }
        }
        for (s, kernel) in by_sym {
            let t = intern(closure(nfa, &adj, kernel), &mut sets, &mut queue);
            edges.insert((sid, s), t);
        }
        for &i in &set {
            for h in hyper_from.get(&i).into_iter().flatten() {
                let targets = h
                    .targets
                    .iter()
                    .map(|&t| intern(closure(nfa, &adj, [t]), &mut sets, &mut queue))
                    .collect();
                hyperedges.push(Hyperedge {
                    source: sid,
                    targets,
                });
            }
        }
    }

    let states = sets
        .iter()
        .map(|set| {
            let mut items: Vec<Item> = set.iter().map(|&i| nfa.items[i]).collect();
            items.sort();
            DfaState { items }
        })
        .collect();
    Dfa {
        states,
        edges,
        hyperedges,
        initial,
    }
}
