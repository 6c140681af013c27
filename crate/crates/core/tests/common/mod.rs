#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use shuffle_glr::automaton::Item;
use shuffle_glr::grammar::{Grammar, SymbolId};
use shuffle_glr::table::Action;
use shuffle_glr::Compiled;

pub fn running() -> Grammar {
    Grammar::builder()
        .start("S")
        .shuffle("S", &["T", "U"])
        .seq("T", &["W", "p", "r"])
        .seq("U", &["1", "2", "3", "4", "5"])
        .seq("W", &["m", "n"])
        .build()
        .unwrap()
}

/// S = T || U || V with T = ab, U = abc, V = cc.
pub fn triple() -> Grammar {
    Grammar::builder()
        .start("S")
        .shuffle("S", &["T", "U", "V"])
        .seq("T", &["a", "b"])
        .seq("U", &["a", "b", "c"])
        .seq("V", &["c", "c"])
        .build()
        .unwrap()
}

pub fn expr() -> Grammar {
    Grammar::builder()
        .start("E")
        .seq("E", &["E", "+", "T"])
        .seq("E", &["T"])
        .seq("T", &["(", "E", ")"])
        .seq("T", &["x"])
        .build()
        .unwrap()
}

/// Balanced parentheses, with an empty rule.
pub fn parens() -> Grammar {
    Grammar::builder()
        .start("S")
        .seq("S", &["(", "S", ")", "S"])
        .seq("S", &[])
        .build()
        .unwrap()
}

pub fn optional_prefix() -> Grammar {
    Grammar::builder()
        .start("S")
        .seq("S", &["A", "b"])
        .seq("A", &["a"])
        .seq("A", &[])
        .build()
        .unwrap()
}

/// A shuffle with one branch that may be empty.
pub fn optional_branch() -> Grammar {
    Grammar::builder()
        .start("S")
        .shuffle("S", &["A", "B"])
        .seq("A", &["a"])
        .seq("A", &[])
        .seq("B", &["b", "c"])
        .build()
        .unwrap()
}

/// A shuffle inside a sequence, with a recursive branch.
pub fn framed() -> Grammar {
    Grammar::builder()
        .start("S")
        .seq("S", &["x", "P", "y"])
        .shuffle("P", &["A", "B"])
        .seq("A", &["a", "A", "b"])
        .seq("A", &["a", "b"])
        .seq("B", &["c"])
        .build()
        .unwrap()
}

/// Two shuffles one after the other, one with a terminal operand.
pub fn chained() -> Grammar {
    Grammar::builder()
        .start("S")
        .seq("S", &["P", "Q"])
        .shuffle("P", &["A", "b"])
        .shuffle("Q", &["C", "D"])
        .seq("A", &["a", "a"])
        .seq("C", &["c"])
        .seq("D", &["d", "e"])
        .build()
        .unwrap()
}

/// Grammars inside the class the parsers decide exactly.
pub fn ambiguous() -> Grammar {
    Grammar::builder()
        .start("S")
        .seq("S", &["S", "S"])
        .seq("S", &["a"])
        .build()
        .unwrap()
}

pub fn classical() -> Vec<(&'static str, Grammar)> {
    vec![
        ("expr", expr()),
        ("parens", parens()),
        ("optional-prefix", optional_prefix()),
        ("ambiguous", ambiguous()),
    ]
}

pub fn supported() -> Vec<(&'static str, Grammar)> {
    vec![
        ("running", running()),
        ("triple", triple()),
        ("expr", expr()),
        ("parens", parens()),
        ("optional-prefix", optional_prefix()),
        ("optional-branch", optional_branch()),
        ("framed", framed()),
        ("chained", chained()),
    ]
}

pub fn compile(g: &Grammar) -> Compiled {
    Compiled::new(g).unwrap()
}

pub fn word(g: &Grammar, s: &str) -> Vec<SymbolId> {
    g.tokenize(s).unwrap()
}

fn interleavings(
    a: &[SymbolId],
    b: &[SymbolId],
    out: &mut BTreeSet<Vec<SymbolId>>,
    prefix: &mut Vec<SymbolId>,
) {
    if a.is_empty() || b.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        out.insert(w);
        return;
    }
    prefix.push(a[0]);
    interleavings(&a[1..], b, out, prefix);
    prefix.pop();
    prefix.push(b[0]);
    interleavings(a, &b[1..], out, prefix);
    prefix.pop();
}

fn join(
    xs: &BTreeSet<Vec<SymbolId>>,
    ys: &BTreeSet<Vec<SymbolId>>,
    max: usize,
    shuffle: bool,
) -> BTreeSet<Vec<SymbolId>> {
    let mut out = BTreeSet::new();
    for x in xs {
        for y in ys {
            if x.len() + y.len() > max {
                continue;
            }
            if shuffle {
                interleavings(x, y, &mut out, &mut Vec::new());
            } else {
                let mut w = x.clone();
                w.extend_from_slice(y);
                out.insert(w);
            }
        }
    }
    out
}

/// Words of length at most `max` derivable from each symbol, computed as
/// a least fixpoint over the rules.
pub fn fixpoint_language(g: &Grammar, max: usize) -> BTreeSet<Vec<SymbolId>> {
    let mut lang: BTreeMap<SymbolId, BTreeSet<Vec<SymbolId>>> = BTreeMap::new();
    for s in g.symbols() {
        let set = if g.is_terminal(s.id) {
            [vec![s.id]].into_iter().collect()
        } else {
            BTreeSet::new()
        };
        lang.insert(s.id, set);
    }
    loop {
        let mut changed = false;
        for r in g.seq_rules() {
            let mut acc: BTreeSet<Vec<SymbolId>> = [Vec::new()].into_iter().collect();
            for s in &r.rhs {
                acc = join(&acc, &lang[s], max, false);
            }
            let target = lang.get_mut(&r.lhs).unwrap();
            for w in acc {
                changed |= target.insert(w);
            }
        }
        for r in g.shuffle_rules() {
            let mut acc: BTreeSet<Vec<SymbolId>> = [Vec::new()].into_iter().collect();
            for s in &r.operands {
                acc = join(&acc, &lang[s], max, true);
            }
            let target = lang.get_mut(&r.lhs).unwrap();
            for w in acc {
                changed |= target.insert(w);
            }
        }
        if !changed {
            return lang.remove(&g.start()).unwrap();
        }
    }
}

/// Every word over `alphabet` of length at most `max`.
pub fn all_words(alphabet: &[SymbolId], max: usize) -> Vec<Vec<SymbolId>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for &a in alphabet {
                let mut v: Vec<SymbolId> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn terminals(g: &Grammar) -> Vec<SymbolId> {
    g.terminals().map(|s| s.id).collect()
}

/// A textbook LR(0) item: rule index and dot position.
pub type Lr0Item = (usize, usize);

pub struct Lr0 {
    pub states: Vec<BTreeSet<Lr0Item>>,
    pub edges: BTreeMap<(usize, SymbolId), usize>,
}

/// Canonical LR(0) collection of an augmented grammar without shuffle
/// rules.
pub fn lr0(g: &Grammar) -> Lr0 {
    let rules = g.seq_rules();
    let closure = |kernel: BTreeSet<Lr0Item>| -> BTreeSet<Lr0Item> {
        let mut set = kernel;
        loop {
            let mut add = Vec::new();
            for &(r, d) in &set {
                if let Some(&next) = rules[r].rhs.get(d) {
                    for (i, rule) in rules.iter().enumerate() {
                        if rule.lhs == next && !set.contains(&(i, 0)) {
                            add.push((i, 0));
                        }
                    }
                }
            }
            if add.is_empty() {
                return set;
            }
            set.extend(add);
        }
    };
    let start: BTreeSet<Lr0Item> = rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.lhs == g.start())
        .map(|(i, _)| (i, 0))
        .collect();
    let mut states = vec![closure(start)];
    let mut edges = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut by_sym: BTreeMap<SymbolId, BTreeSet<Lr0Item>> = BTreeMap::new();
        for &(r, d) in &states[i] {
            if let Some(&s) = rules[r].rhs.get(d) {
                by_sym.entry(s).or_default().insert((r, d + 1));
            }
        }
        for (s, kernel) in by_sym {
            let target = closure(kernel);
            let j = match states.iter().position(|t| *t == target) {
                Some(j) => j,
                None => {
                    states.push(target);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            edges.insert((i, s), j);
        }
    }
    Lr0 { states, edges }
}

pub type ItemSet = BTreeSet<Lr0Item>;

pub fn item_sets(c: &Compiled) -> Vec<ItemSet> {
    c.dfa
        .states
        .iter()
        .map(|s| {
            s.items
                .iter()
                .map(|i| match i {
                    Item::Seq { rule, dot } => (*rule, *dot),
                    other => panic!("unexpected item {other:?}"),
                })
                .collect()
        })
        .collect()
}

/// Actions of a textbook LR(0) table, with states named by item sets.
pub fn expected_actions(c: &Compiled, lr: &Lr0, state: usize, col: SymbolId) -> BTreeSet<String> {
    let rules = c.grammar.seq_rules();
    let aug = c.grammar.augmentation().unwrap();
    let mut out = BTreeSet::new();
    for &(r, d) in &lr.states[state] {
        if d == rules[r].rhs.len() {
            out.insert(format!("reduce {r}"));
        }
    }
    if let Some(&t) = lr.edges.get(&(state, col)) {
        out.insert(format!("shift {:?}", lr.states[t]));
        if col == aug.end && lr.states[t].contains(&(aug.rule, 2)) {
            out.insert("accept".to_owned());
        }
    }
    out
}

pub fn actual_actions(
    c: &Compiled,
    sets: &[ItemSet],
    state: usize,
    col: SymbolId,
) -> BTreeSet<String> {
    c.table
        .actions(state, col)
        .iter()
        .map(|a| match a {
            Action::Reduce {
                item: Item::Seq { rule, .. },
                ..
            } => format!("reduce {rule}"),
            Action::Shift(t) => format!("shift {:?}", sets[*t]),
            Action::Accept => "accept".to_owned(),
            other => panic!("unexpected action {other:?}"),
        })
        .collect()
}

/// Compares the automaton and table of a grammar without shuffle rules
/// with the textbook LR(0) construction.
pub fn check_classical(g: &Grammar) -> Result<(), String> {
    let c = compile(g);
    let lr = lr0(&c.grammar);
    let sets = item_sets(&c);
    let mine: BTreeSet<&ItemSet> = sets.iter().collect();
    let theirs: BTreeSet<&ItemSet> = lr.states.iter().collect();
    if mine != theirs || sets.len() != lr.states.len() {
        return Err(format!(
            "{} states, expected {}",
            sets.len(),
            lr.states.len()
        ));
    }
    let index: BTreeMap<&ItemSet, usize> =
        lr.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    for (state, set) in sets.iter().enumerate() {
        for &col in &c.table.columns {
            let got = actual_actions(&c, &sets, state, col);
            let want = expected_actions(&c, &lr, index[set], col);
            if got != want {
                return Err(format!(
                    "state {state} column {}: {got:?} != {want:?}",
                    c.grammar.name(col)
                ));
            }
        }
    }
    Ok(())
}

/// The running example's state numbering as drawn in the original
/// figure, given by item contents.
pub const FIGURE_STATES: [&[&str]; 18] = [
    &["S* -> . S $", "S -> . <2>{T,U}"],
    &["S -> . <2>{T}"],
    &["S -> . <2>{U}"],
    &["S -> . <2>{}", "S -> <2>{} ."],
    &["^U", "U -> . 1 2 3 4 5"],
    &["U -> 1 . 2 3 4 5"],
    &["U -> 1 2 . 3 4 5"],
    &["U -> 1 2 3 . 4 5"],
    &["U -> 1 2 3 4 . 5"],
    &["U -> 1 2 3 4 5 ."],
    &["^T", "T -> . W p r", "W -> . m n"],
    &["T -> W . p r"],
    &["T -> W p . r"],
    &["T -> W p r ."],
    &["W -> m . n"],
    &["W -> m n ."],
    &["S* -> S . $"],
    &["S* -> S $ ."],
];

/// Maps each state of `c` to the figure's number for the same item set.
pub fn figure_numbering(c: &Compiled) -> Vec<usize> {
    c.dfa
        .states
        .iter()
        .map(|s| {
            let items: BTreeSet<String> = s
                .items
                .iter()
                .map(|i| i.display(&c.grammar).to_string())
                .collect();
            FIGURE_STATES
                .iter()
                .position(|f| f.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>() == items)
                .expect("every state appears in the figure")
        })
        .collect()
}

pub fn state_with(c: &Compiled, figure: usize) -> usize {
    figure_numbering(c)
        .iter()
        .position(|&f| f == figure)
        .unwrap()
}

/// Top-state snapshots of the figure's accepting run, in its numbering.
pub const FIGURE_SNAPSHOTS: [&[usize]; 15] = [
    &[0],
    &[4, 14],
    &[5, 14],
    &[6, 14],
    &[6, 15],
    &[6, 11],
    &[6, 12],
    &[7, 12],
    &[7, 13],
    &[7],
    &[8],
    &[9],
    &[3],
    &[16],
    &[16],
];
