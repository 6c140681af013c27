//! Reference parser over a cactus stack.
//!
//! The runtime state is a tree of DFA states with some leaves marked as
//! stack tops. Before each input symbol any top may reduce, any number of
//! times; then exactly one top shifts the symbol. Every choice is explored,
//! so the input is accepted iff some sequence of choices reaches accept.
//! This engine makes no attempt at efficiency.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write};

use crate::automaton::Item;
use crate::grammar::{Grammar, SymbolId};
use crate::table::{Action, ActionTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub state: usize,
    pub parent: Option<usize>,
}

/// A cactus stack in canonical form: only nodes on a path from the root
/// to some top are kept, and nodes are numbered by a traversal that does
/// not depend on how the tree was built, so equal trees compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub nodes: Vec<Node>,
    pub tops: Vec<usize>,
}

impl Configuration {
    pub fn initial(table: &ActionTable) -> Configuration {
        Configuration {
            nodes: vec![Node {
                state: table.initial,
                parent: None,
            }],
            tops: vec![0],
        }
    }

    /// States of the stack tops, sorted.
    pub fn top_states(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.tops.iter().map(|&t| self.nodes[t].state).collect();
        v.sort_unstable();
        v
    }

    pub fn children(&self, n: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.nodes[c].parent == Some(n))
            .collect()
    }

    /// States from `n` down to the root.
    pub fn path(&self, mut n: usize) -> Vec<usize> {
        let mut out = vec![self.nodes[n].state];
        while let Some(p) = self.nodes[n].parent {
            out.push(self.nodes[p].state);
            n = p;
        }
        out
    }

    /// Nodes with more than one child.
    pub fn split_points(&self) -> usize {
        let mut count = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                count[p] += 1;
            }
        }
        count.iter().filter(|&&c| c > 1).count()
    }

    /// Builds a configuration from arbitrary nodes, dropping nodes no top
    /// depends on.
    pub fn from_parts(nodes: &[Node], tops: &[usize]) -> Configuration {
        Configuration::canonical(nodes, tops)
    }

    fn canonical(nodes: &[Node], tops: &[usize]) -> Configuration {
        let mut live = vec![false; nodes.len()];
        for &t in tops {
            let mut n = Some(t);
            while let Some(i) = n {
                if live[i] {
                    break;
                }
                live[i] = true;
                n = nodes[i].parent;
            }
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut roots = Vec::new();
        for i in 0..nodes.len() {
            if !live[i] {
                continue;
            }
            match nodes[i].parent {
                Some(p) => children[p].push(i),
                None => roots.push(i),
            }
        }
        let is_top: Vec<bool> = (0..nodes.len()).map(|i| tops.contains(&i)).collect();

        fn encode(
            n: usize,
            nodes: &[Node],
            children: &[Vec<usize>],
            is_top: &[bool],
            memo: &mut HashMap<usize, Vec<u32>>,
        ) -> Vec<u32> {
            if let Some(e) = memo.get(&n) {
                return e.clone();
            }
            let mut kids: Vec<Vec<u32>> = children[n]
                .iter()
                .map(|&c| encode(c, nodes, children, is_top, memo))
                .collect();
            kids.sort();
            let mut e = vec![nodes[n].state as u32, is_top[n] as u32, kids.len() as u32];
            for k in kids {
                e.extend(k);
            }
            memo.insert(n, e.clone());
            e
        }
        let mut memo = HashMap::new();
        let mut order_roots: Vec<(Vec<u32>, usize)> = roots
            .iter()
            .map(|&r| (encode(r, nodes, &children, &is_top, &mut memo), r))
            .collect();
        order_roots.sort();

        let mut out = Configuration {
            nodes: Vec::new(),
            tops: Vec::new(),
        };
        let mut stack: Vec<(usize, Option<usize>)> =
            order_roots.iter().rev().map(|&(_, r)| (r, None)).collect();
        while let Some((old, parent)) = stack.pop() {
            let id = out.nodes.len();
            out.nodes.push(Node {
                state: nodes[old].state,
                parent,
            });
            if is_top[old] {
                out.tops.push(id);
            }
            let mut kids: Vec<(Vec<u32>, usize)> = children[old]
                .iter()
                .map(|&c| (memo[&c].clone(), c))
                .collect();
            kids.sort();
            for (_, c) in kids.into_iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        out
    }

    pub fn display(&self) -> ConfigDisplay<'_> {
        ConfigDisplay(self)
    }
}

/// Renders the tree as nested `state[children]`, tops marked with `*`.
pub struct ConfigDisplay<'a>(&'a Configuration);

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        fn go(c: &Configuration, n: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}", c.nodes[n].state)?;
            if c.tops.contains(&n) {
                write!(f, "*")?;
            }
            let kids = c.children(n);
            if !kids.is_empty() {
                write!(f, "[")?;
                for (i, k) in kids.into_iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    go(c, k, f)?;
                }
                write!(f, "]")?;
            }
            Ok(())
        }
        for (i, n) in (0..c.nodes.len())
            .filter(|&n| c.nodes[n].parent.is_none())
            .enumerate()
        {
            if i > 0 {
                write!(f, " ")?;
            }
            go(c, n, f)?;
        }
        Ok(())
    }
}

/// Why a reduction could not be carried out on one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeadEnd {
    /// Fewer nodes below the top than the reduction pops.
    UnderPop,
    /// The pop would remove a node that other branches still hang from.
    Orphan,
    /// No goto on the reduced nonterminal from the uncovered node.
    NoShift,
}

/// Carries out one reduction at `top` (a node id). Returns one
/// configuration per goto choice.
pub fn reduce_once(
    c: &Configuration,
    top: usize,
    action: &Action,
    table: &ActionTable,
) -> Result<Vec<Configuration>, DeadEnd> {
    let Action::Reduce { lhs, pop, .. } = *action else {
        panic!("reduce_once needs a reduce action");
    };
    let mut popped = Vec::with_capacity(pop + 1);
    let mut cur = top;
    for _ in 0..pop {
        popped.push(cur);
        cur = c.nodes[cur].parent.ok_or(DeadEnd::UnderPop)?;
    }
    if table.has_indirection(c.nodes[cur].state, lhs) {
        popped.push(cur);
        cur = c.nodes[cur].parent.ok_or(DeadEnd::UnderPop)?;
    }
    let base = cur;
    for &p in &popped {
        if c.children(p).iter().any(|ch| !popped.contains(ch)) {
            return Err(DeadEnd::Orphan);
        }
    }
    let gotos: Vec<usize> = table.shifts(c.nodes[base].state, lhs).collect();
    if gotos.is_empty() {
        return Err(DeadEnd::NoShift);
    }
    let others: Vec<usize> = c
        .children(base)
        .into_iter()
        .filter(|ch| !popped.contains(ch))
        .collect();
    let tops: Vec<usize> = c.tops.iter().copied().filter(|&t| t != top).collect();
    Ok(gotos
        .into_iter()
        .map(|goto| {
            let mut nodes = c.nodes.clone();
            let mut tops = tops.clone();
            let beta = nodes.len();
            nodes.push(Node {
                state: goto,
                parent: Some(base),
            });
            for &o in &others {
                nodes[o].parent = Some(beta);
            }
            if others.is_empty() {
                tops.push(beta);
            }
            Configuration::canonical(&nodes, &tops)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shifted {
    Config(Configuration),
    Accept,
}

/// Applies a shift, shuffle shift or accept at `top`.
pub fn shift_once(c: &Configuration, top: usize, action: &Action) -> Shifted {
    let mut nodes = c.nodes.clone();
    let mut tops: Vec<usize> = c.tops.iter().copied().filter(|&t| t != top).collect();
    let push = |nodes: &mut Vec<Node>, state: usize, parent: usize| {
        nodes.push(Node {
            state,
            parent: Some(parent),
        });
        nodes.len() - 1
    };
    match action {
        Action::Accept => return Shifted::Accept,
        Action::Shift(s) => {
            let b = push(&mut nodes, *s, top);
            tops.push(b);
        }
        Action::ShuffleShift { from, to, siblings } => {
            let b0 = push(&mut nodes, *from, top);
            let b0p = push(&mut nodes, *to, b0);
            tops.push(b0p);
            for &s in siblings {
                let bi = push(&mut nodes, s, top);
                tops.push(bi);
            }
        }
        Action::Reduce { .. } => panic!("shift_once needs a shift action"),
    }
    Shifted::Config(Configuration::canonical(&nodes, &tops))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    /// A resource cap was hit before the input was decided.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Reduce(Item),
    Shift(SymbolId),
    ShuffleShift(SymbolId),
    Accept,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: StepKind,
    pub before: Vec<usize>,
    pub after: Vec<usize>,
}

impl TraceEvent {
    pub fn display<'a>(&'a self, g: &'a Grammar) -> TraceDisplay<'a> {
        TraceDisplay { event: self, g }
    }
}

pub struct TraceDisplay<'a> {
    event: &'a TraceEvent,
    g: &'a Grammar,
}

fn multiset(states: &[usize]) -> String {
    let parts: Vec<String> = states.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

impl fmt::Display for TraceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.g;
        match self.event.kind {
            StepKind::Reduce(item) => write!(f, "reduce({})", item.display(g))?,
            StepKind::Shift(s) => write!(f, "shift({})", g.name(s))?,
            StepKind::ShuffleShift(s) => write!(f, "shuffle-shift({})", g.name(s))?,
            StepKind::Accept => write!(f, "accept")?,
        }
        write!(
            f,
            " {} -> {}",
            multiset(&self.event.before),
            multiset(&self.event.after)
        )
    }
}

pub fn render_trace(trace: &[TraceEvent], g: &Grammar) -> String {
    let mut out = String::new();
    for e in trace {
        writeln!(out, "{}", e.display(g)).unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    /// Distinct configurations allowed per input symbol.
    pub max_configs: usize,
    pub trace: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_configs: 100_000,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub verdict: Verdict,
    /// Events of the first accepting branch found, when tracing.
    pub trace: Option<Vec<TraceEvent>>,
    /// Configurations visited, summed over all symbols.
    pub visited: usize,
}

struct Visit {
    config: Configuration,
    from: Option<(usize, StepKind)>,
}

/// Stepwise driver. Each call to [`Session::feed`] runs the reduce phase
/// to quiescence and then the shift phase for one symbol.
pub struct Session<'t> {
    table: &'t ActionTable,
    options: ParseOptions,
    visits: Vec<Visit>,
    frontier: Vec<usize>,
    accepted: Option<usize>,
    exhausted: bool,
}

impl<'t> Session<'t> {
    pub fn new(table: &'t ActionTable, options: ParseOptions) -> Self {
        Session {
            table,
            options,
            visits: vec![Visit {
                config: Configuration::initial(table),
                from: None,
            }],
            frontier: vec![0],
            accepted: None,
            exhausted: false,
        }
    }

    /// Configurations reached after the last shift.
    pub fn frontier(&self) -> impl Iterator<Item = &Configuration> {
        self.frontier.iter().map(|&i| &self.visits[i].config)
    }

    pub fn accepted(&self) -> bool {
        self.accepted.is_some()
    }

    pub fn is_dead(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn visited(&self) -> usize {
        self.visits.len()
    }

    fn record(
        &mut self,
        seen: &mut HashMap<Configuration, usize>,
        config: Configuration,
        from: (usize, StepKind),
    ) -> Option<usize> {
        if seen.contains_key(&config) {
            return None;
        }
        if seen.len() >= self.options.max_configs {
            self.exhausted = true;
            return None;
        }
        let id = self.visits.len();
        seen.insert(config.clone(), id);
        self.visits.push(Visit {
            config,
            from: Some(from),
        });
        Some(id)
    }

    /// The frontier together with everything reachable from it by
    /// reductions.
    pub fn closed_frontier(&mut self) -> BTreeSet<Configuration> {
        let ids = self.reduce_closure();
        ids.into_iter()
            .map(|i| self.visits[i].config.clone())
            .collect()
    }

    /// Every configuration reachable from the frontier by reductions.
    fn reduce_closure(&mut self) -> Vec<usize> {
        let mut seen: HashMap<Configuration, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &i in &self.frontier {
            seen.insert(self.visits[i].config.clone(), i);
            order.push(i);
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            let config = self.visits[i].config.clone();
            for &top in &config.tops {
                let state = config.nodes[top].state;
                let reduces: Vec<Action> = self.table.reduces(state).cloned().collect();
                for action in reduces {
                    let Action::Reduce { item, .. } = action else {
                        unreachable!()
                    };
                    if let Ok(next) = reduce_once(&config, top, &action, self.table) {
                        for n in next {
                            if let Some(id) = self.record(&mut seen, n, (i, StepKind::Reduce(item)))
                            {
                                order.push(id);
                                queue.push_back(id);
                            }
                        }
                    }
                }
            }
        }
        order
    }

    /// Consumes one symbol (use the table's end marker for `$`).
    pub fn feed(&mut self, sym: SymbolId) {
        if self.accepted.is_some() {
            return;
        }
        let closure = self.reduce_closure();
        let mut seen: HashMap<Configuration, usize> = HashMap::new();
        let mut next = Vec::new();
        for i in closure {
            let config = self.visits[i].config.clone();
            for &top in &config.tops {
                let actions = self.table.actions(config.nodes[top].state, sym).to_vec();
                for action in actions {
                    let kind = match action {
                        Action::Reduce { .. } => continue,
                        Action::Shift(_) => StepKind::Shift(sym),
                        Action::ShuffleShift { .. } => StepKind::ShuffleShift(sym),
                        Action::Accept => StepKind::Accept,
                    };
                    match shift_once(&config, top, &action) {
                        Shifted::Accept => {
                            if self.accepted.is_none() {
                                let id = self.visits.len();
                                self.visits.push(Visit {
                                    config: config.clone(),
                                    from: Some((i, kind)),
                                });
                                self.accepted = Some(id);
                            }
                        }
                        Shifted::Config(c) => {
                            if let Some(id) = self.record(&mut seen, c, (i, kind)) {
                                next.push(id);
                            }
                        }
                    }
                }
            }
        }
        self.frontier = next;
    }

    /// Events leading to the accepting configuration, if any.
    pub fn trace(&self) -> Option<Vec<TraceEvent>> {
        let mut events = Vec::new();
        let mut cur = self.accepted?;
        while let Some((prev, kind)) = self.visits[cur].from {
            let before = self.visits[prev].config.top_states();
            let after = if kind == StepKind::Accept {
                before.clone()
            } else {
                self.visits[cur].config.top_states()
            };
            events.push(TraceEvent {
                kind,
                before,
                after,
            });
            cur = prev;
        }
        events.reverse();
        Some(events)
    }
}

/// Decides `input` (without `$`), exploring every choice.
pub fn parse(table: &ActionTable, input: &[SymbolId], options: ParseOptions) -> ParseResult {
    let end = table
        .end
        .expect("tables are built from an augmented grammar");
    let mut session = Session::new(table, options);
    for &sym in input.iter().chain(std::iter::once(&end)) {
        session.feed(sym);
        if session.is_dead() || session.accepted() {
            break;
        }
    }
    let verdict = if session.accepted() {
        Verdict::Accept
    } else if session.exhausted() {
        Verdict::Exhausted
    } else {
        Verdict::Reject
    };
    ParseResult {
        verdict,
        trace: if options.trace { session.trace() } else { None },
        visited: session.visited(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Compiled;

    fn running() -> Compiled {
        let g = Grammar::builder()
            .start("S")
            .shuffle("S", &["T", "U"])
            .seq("T", &["W", "p", "r"])
            .seq("U", &["1", "2", "3", "4", "5"])
            .seq("W", &["m", "n"])
            .build()
            .unwrap();
        Compiled::new(&g).unwrap()
    }

    fn verdict(c: &Compiled, s: &str) -> Verdict {
        let w = c.grammar.tokenize(s).unwrap();
        parse(&c.table, &w, ParseOptions::default()).verdict
    }

    #[test]
    fn running_membership() {
        let c = running();
        assert_eq!(verdict(&c, "m12np3r45"), Verdict::Accept);
        assert_eq!(verdict(&c, "mn123pr45"), Verdict::Accept);
        assert_eq!(verdict(&c, "mp12nr345"), Verdict::Reject);
        assert_eq!(
            parse(&c.table, &[], ParseOptions::default()).verdict,
            Verdict::Reject
        );
    }

    #[test]
    fn shuffle_shift_splits_the_stack() {
        let c = running();
        let m = c.grammar.lookup("m").unwrap();
        let init = Configuration::initial(&c.table);
        let action = c.table.actions(0, m)[0].clone();
        let Shifted::Config(next) = shift_once(&init, 0, &action) else {
            panic!()
        };
        assert_eq!(next.nodes.len(), 4);
        assert_eq!(next.tops.len(), 2);
        assert_eq!(next.split_points(), 1);
    }

    #[test]
    fn trace_ends_in_accept() {
        let c = running();
        let w = c.grammar.tokenize("m12np3r45").unwrap();
        let r = parse(
            &c.table,
            &w,
            ParseOptions {
                trace: true,
                ..Default::default()
            },
        );
        let trace = r.trace.unwrap();
        assert_eq!(trace.first().unwrap().before, vec![0]);
        assert_eq!(trace.last().unwrap().kind, StepKind::Accept);
        let shifts = trace
            .iter()
            .filter(|e| matches!(e.kind, StepKind::Shift(_) | StepKind::ShuffleShift(_)))
            .count();
        assert_eq!(shifts, 9);
    }

    #[test]
    fn epsilon_reduce_pushes_on_the_top() {
        let g = Grammar::builder()
            .start("S")
            .seq("S", &["A", "b"])
            .seq("A", &[])
            .build()
            .unwrap();
        let c = Compiled::new(&g).unwrap();
        let init = Configuration::initial(&c.table);
        let action = c.table.reduces(0).next().unwrap().clone();
        let next = reduce_once(&init, 0, &action, &c.table).unwrap();
        assert_eq!(next.len(), 1);
        assert_eq!(next[0].nodes.len(), 2);
        assert_eq!(next[0].nodes[1].parent, Some(0));
        assert_eq!(next[0].tops, vec![1]);
        assert_eq!(verdict(&c, "b"), Verdict::Accept);
    }

    #[test]
    fn canonical_form_ignores_construction_order() {
        let a = Configuration::canonical(
            &[
                Node {
                    state: 0,
                    parent: None,
                },
                Node {
                    state: 4,
                    parent: Some(0),
                },
                Node {
                    state: 10,
                    parent: Some(0),
                },
            ],
            &[1, 2],
        );
        let b = Configuration::canonical(
            &[
                Node {
                    state: 10,
                    parent: Some(2),
                },
                Node {
                    state: 4,
                    parent: Some(2),
                },
                Node {
                    state: 0,
                    parent: None,
                },
            ],
            &[0, 1],
        );
        assert_eq!(a, b);
        assert_eq!(a.display().to_string(), "0[4* 10*]");
    }
}
