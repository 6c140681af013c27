//! Shared-structure parser.
//!
//! Parser states live in a *lower* graph of immutable nodes, each pointing
//! at its predecessor on the stack. Stacks are cut wherever a shuffle split
//! them: the first node of every branch has no parent. How the pieces fit
//! together is recorded in the *upper* graph, an and/or graph whose leaves
//! name a stack top and the controller of the branch it belongs to. An
//! and-node may bind a controller to the stack top the branches grew from
//! and to the enclosing controller; or-nodes hold alternative parses.
//!
//! After every input symbol the engine rebuilds the upper graph: exactly
//! one leaf below each and-node shifts, and reductions that run off the
//! bottom of a branch are resolved by the enclosing binding, which is
//! either moved to a new node or dissolved when no sibling branch is left.
//! Upper nodes are interned and immutable, so closure and shift results are
//! memoized per node for the life of the engine: shared subgraphs and nodes
//! carried over from earlier steps are processed once.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write;
use std::sync::Arc;

use crate::cactus::{Configuration, Node, Verdict};
use crate::grammar::SymbolId;
use crate::table::{Action, ActionTable};

#[derive(Debug)]
pub struct LowerNode {
    pub uid: u64,
    pub state: usize,
    pub parent: Option<Arc<LowerNode>>,
}

impl LowerNode {
    /// States from this node down to the first node of its segment.
    pub fn segment(&self) -> Vec<usize> {
        let mut out = vec![self.state];
        let mut cur = self.parent.as_deref();
        while let Some(n) = cur {
            out.push(n.state);
            cur = n.parent.as_deref();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Controller(pub u32);

#[derive(Clone, Debug)]
pub struct Binding {
    pub ctrl: Controller,
    /// Top of the enclosing stack the branches hang from.
    pub prior: Arc<LowerNode>,
    pub parent: Option<Controller>,
}

#[derive(Debug)]
pub enum UpperKind {
    Leaf {
        top: Arc<LowerNode>,
        ctrl: Option<Controller>,
    },
    Or(Vec<Arc<UpperNode>>),
    And {
        binding: Option<Binding>,
        children: Vec<Arc<UpperNode>>,
    },
}

#[derive(Debug)]
pub struct UpperNode {
    pub uid: u64,
    pub kind: UpperKind,
    /// Whether this node stands for exactly one branch (as opposed to a
    /// group of sibling branches).
    slot: bool,
}

impl UpperNode {
    fn is_slot(&self) -> bool {
        self.slot
    }
}

/// Ways of reading a group of branches as a list of single branches.
fn expand(n: &Arc<UpperNode>) -> Vec<Vec<Arc<UpperNode>>> {
    if n.is_slot() {
        return vec![vec![n.clone()]];
    }
    match &n.kind {
        UpperKind::Or(alts) => alts.iter().flat_map(expand).collect(),
        UpperKind::And { children, .. } => slot_lists(children),
        UpperKind::Leaf { .. } => unreachable!("leaves are slots"),
    }
}

fn slot_lists(children: &[Arc<UpperNode>]) -> Vec<Vec<Arc<UpperNode>>> {
    let mut lists = vec![Vec::new()];
    for c in children {
        let mut next = Vec::new();
        for prefix in &lists {
            for tail in expand(c) {
                let mut l: Vec<Arc<UpperNode>> = prefix.clone();
                l.extend(tail);
                next.push(l);
            }
        }
        lists = next;
    }
    lists
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Escape {
    /// Nodes still to pop, starting at the binding's prior.
    pops: usize,
    /// Whether the indirection check is still pending.
    check: bool,
    lhs: SymbolId,
}

enum Walk {
    Land(Arc<LowerNode>),
    Escape(Escape),
}

#[derive(Default)]
struct Closure {
    locals: Vec<Arc<UpperNode>>,
    escapes: Vec<Escape>,
    /// Or-node over `locals`.
    node: Option<Arc<UpperNode>>,
    /// Whether the closure budget cut this result short.
    truncated: bool,
}

#[derive(Default)]
struct ShiftOut {
    alts: Vec<Arc<UpperNode>>,
    accept: bool,
}

#[derive(Clone, Debug, Hash, PartialEq, Eq)]
enum Key {
    Leaf(u64, Option<Controller>),
    Or(Vec<u64>),
    And(Option<(Controller, u64, Option<Controller>)>, Vec<u64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GssOptions {
    /// Stack tops a single leaf may reach by reductions before the engine
    /// gives up on the input.
    pub max_closure: usize,
}

impl Default for GssOptions {
    fn default() -> Self {
        GssOptions {
            max_closure: 10_000,
        }
    }
}

/// A parse state. Old states stay valid after [`Engine::advance`].
#[derive(Clone, Debug)]
pub struct GssState {
    pub root: Option<Arc<UpperNode>>,
    accepted: bool,
    closed: bool,
    exhausted: bool,
}

impl GssState {
    pub fn accepted(&self) -> bool {
        self.accepted
    }

    pub fn is_dead(&self) -> bool {
        self.root.is_none()
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub upper_nodes: usize,
    pub or_nodes: usize,
    pub and_nodes: usize,
    pub leaves: usize,
    pub lower_nodes: usize,
    /// Distinct (controller, prior, parent controller) bindings.
    pub bindings: usize,
    pub controllers: usize,
    /// Memo lookups answered from the cache during the last advance.
    pub memo_hits: usize,
}

/// Holds the interning tables shared by all states of one parse.
pub struct Engine<'t> {
    table: &'t ActionTable,
    options: GssOptions,
    next_uid: u64,
    lowers: HashMap<(Option<u64>, usize), Arc<LowerNode>>,
    uppers: HashMap<Key, Arc<UpperNode>>,
    ctrls: HashMap<(u64, Vec<usize>), Controller>,
    close_memo: HashMap<u64, Arc<Closure>>,
    shift_memo: HashMap<(u64, SymbolId), Arc<ShiftOut>>,
    memo_hits: usize,
    exhausted: bool,
}

impl<'t> Engine<'t> {
    pub fn new(table: &'t ActionTable, options: GssOptions) -> Self {
        Engine {
            table,
            options,
            next_uid: 0,
            lowers: HashMap::new(),
            uppers: HashMap::new(),
            ctrls: HashMap::new(),
            close_memo: HashMap::new(),
            shift_memo: HashMap::new(),
            memo_hits: 0,
            exhausted: false,
        }
    }

    /// A single leaf over the initial state, with no controller.
    pub fn init(&mut self) -> GssState {
        let bottom = self.lower(None, self.table.initial);
        GssState {
            root: Some(self.leaf(bottom, None)),
            accepted: false,
            closed: false,
            exhausted: false,
        }
    }

    /// Consumes one symbol (the table's end marker for `$`).
    pub fn advance(&mut self, s: &GssState, sym: SymbolId) -> GssState {
        self.memo_hits = 0;
        self.exhausted = s.exhausted;
        let Some(root) = &s.root else {
            return s.clone();
        };
        let root = if s.closed {
            root.clone()
        } else {
            self.close_root(root)
        };
        let out = self.shift(&root, sym);
        let shifted = self.or(out.alts.clone());
        let root = if Some(sym) == self.table.end || shifted.is_none() {
            shifted
        } else {
            shifted.map(|r| self.close_root(&r))
        };
        GssState {
            root,
            accepted: s.accepted || out.accept,
            closed: true,
            exhausted: self.exhausted,
        }
    }

    fn close_root(&mut self, root: &Arc<UpperNode>) -> Arc<UpperNode> {
        self.close(root)
            .node
            .clone()
            .expect("closure keeps the node itself")
    }

    pub fn stats(&self, s: &GssState) -> Stats {
        let mut st = Stats {
            memo_hits: self.memo_hits,
            ..Stats::default()
        };
        let Some(root) = &s.root else { return st };
        let mut seen = HashSet::new();
        let mut lowers = HashSet::new();
        let mut bindings = HashSet::new();
        let mut ctrls = HashSet::new();
        let mut stack = vec![root.clone()];
        let mark_lower = |n: &Arc<LowerNode>, lowers: &mut HashSet<u64>| {
            let mut cur = Some(n.clone());
            while let Some(x) = cur {
                if !lowers.insert(x.uid) {
                    break;
                }
                cur = x.parent.clone();
            }
        };
        while let Some(n) = stack.pop() {
            if !seen.insert(n.uid) {
                continue;
            }
            st.upper_nodes += 1;
            match &n.kind {
                UpperKind::Leaf { top, ctrl } => {
                    st.leaves += 1;
                    mark_lower(top, &mut lowers);
                    if let Some(c) = ctrl {
                        ctrls.insert(*c);
                    }
                }
                UpperKind::Or(alts) => {
                    st.or_nodes += 1;
                    stack.extend(alts.iter().cloned());
                }
                UpperKind::And { binding, children } => {
                    st.and_nodes += 1;
                    if let Some(b) = binding {
                        mark_lower(&b.prior, &mut lowers);
                        bindings.insert((b.ctrl, b.prior.uid, b.parent));
                        ctrls.insert(b.ctrl);
                    }
                    stack.extend(children.iter().cloned());
                }
            }
        }
        st.lower_nodes = lowers.len();
        st.bindings = bindings.len();
        st.controllers = ctrls.len();
        st
    }

    fn uid(&mut self) -> u64 {
        self.next_uid += 1;
        self.next_uid
    }

    fn lower(&mut self, parent: Option<&Arc<LowerNode>>, state: usize) -> Arc<LowerNode> {
        let key = (parent.map(|p| p.uid), state);
        if let Some(n) = self.lowers.get(&key) {
            return n.clone();
        }
        let n = Arc::new(LowerNode {
            uid: self.uid(),
            state,
            parent: parent.cloned(),
        });
        self.lowers.insert(key, n.clone());
        n
    }

    fn intern(&mut self, key: Key, kind: UpperKind) -> Arc<UpperNode> {
        if let Some(n) = self.uppers.get(&key) {
            return n.clone();
        }
        let slot = match &kind {
            UpperKind::Leaf { .. } => true,
            UpperKind::And { binding, .. } => binding.is_some(),
            UpperKind::Or(alts) => alts.iter().all(|a| a.slot),
        };
        let n = Arc::new(UpperNode {
            uid: self.uid(),
            kind,
            slot,
        });
        self.uppers.insert(key, n.clone());
        n
    }

    fn leaf(&mut self, top: Arc<LowerNode>, ctrl: Option<Controller>) -> Arc<UpperNode> {
        self.intern(Key::Leaf(top.uid, ctrl), UpperKind::Leaf { top, ctrl })
    }

    /// Or-node over `alts`, flattened and deduplicated; `None` if empty.
    fn or(&mut self, alts: Vec<Arc<UpperNode>>) -> Option<Arc<UpperNode>> {
        let mut flat: Vec<Arc<UpperNode>> = Vec::new();
        for a in alts {
            match &a.kind {
                UpperKind::Or(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(a),
            }
        }
        flat.sort_by_key(|n| n.uid);
        flat.dedup_by_key(|n| n.uid);
        match flat.len() {
            0 => None,
            1 => flat.pop(),
            _ => {
                let key = Key::Or(flat.iter().map(|n| n.uid).collect());
                Some(self.intern(key, UpperKind::Or(flat)))
            }
        }
    }

    fn and(&mut self, binding: Option<Binding>, children: Vec<Arc<UpperNode>>) -> Arc<UpperNode> {
        let mut flat: Vec<Arc<UpperNode>> = Vec::new();
        for c in children {
            match &c.kind {
                UpperKind::And {
                    binding: None,
                    children,
                } => flat.extend(children.iter().cloned()),
                _ => flat.push(c),
            }
        }
        flat.sort_by_key(|n| n.uid);
        let key = Key::And(
            binding.as_ref().map(|b| (b.ctrl, b.prior.uid, b.parent)),
            flat.iter().map(|n| n.uid).collect(),
        );
        self.intern(
            key,
            UpperKind::And {
                binding,
                children: flat,
            },
        )
    }

    fn controller(&mut self, prior: &Arc<LowerNode>, targets: Vec<usize>) -> Controller {
        let next = Controller(self.ctrls.len() as u32);
        *self.ctrls.entry((prior.uid, targets)).or_insert(next)
    }

    fn gotos(&self, state: usize, lhs: SymbolId) -> Vec<usize> {
        self.table.shifts(state, lhs).collect()
    }

    /// Pops `pops` nodes starting at `from`, then pops once more if the
    /// landing node holds `^lhs` and `check` is set.
    fn walk(&self, from: &Arc<LowerNode>, pops: usize, check: bool, lhs: SymbolId) -> Walk {
        let (mut cur, mut pops, mut check) = (from.clone(), pops, check);
        loop {
            if pops > 0 {
                match &cur.parent {
                    Some(p) => {
                        cur = p.clone();
                        pops -= 1;
                    }
                    None => {
                        return Walk::Escape(Escape {
                            pops: pops - 1,
                            check,
                            lhs,
                        })
                    }
                }
                continue;
            }
            if check {
                check = false;
                if self.table.has_indirection(cur.state, lhs) {
                    pops = 1;
                    continue;
                }
            }
            return Walk::Land(cur);
        }
    }

    /// Everything a node can become by reductions alone, including
    /// itself, plus the reductions that run off the bottom of its branch.
    fn close(&mut self, n: &Arc<UpperNode>) -> Arc<Closure> {
        if let Some(c) = self.close_memo.get(&n.uid) {
            self.memo_hits += 1;
            self.exhausted |= c.truncated;
            return c.clone();
        }
        let outer = std::mem::take(&mut self.exhausted);
        let c = match &n.kind {
            UpperKind::Leaf { top, ctrl } => self.close_leaf(top, *ctrl),
            UpperKind::Or(alts) => {
                let mut out = Closure::default();
                for a in alts.clone() {
                    let c = self.close(&a);
                    out.locals.extend(c.locals.iter().cloned());
                    out.escapes.extend(c.escapes.iter().copied());
                }
                out
            }
            UpperKind::And {
                binding: Some(b),
                children,
            } => self.close_scope(b, children),
            UpperKind::And { binding: None, .. } => unreachable!("groups are expanded first"),
        };
        let mut c = dedup(c);
        c.node = self.or(c.locals.clone());
        c.truncated = self.exhausted;
        self.exhausted |= outer;
        let c = Arc::new(c);
        self.close_memo.insert(n.uid, c.clone());
        if let Some(node) = &c.node {
            self.close_memo.entry(node.uid).or_insert_with(|| c.clone());
        }
        c
    }

    fn close_leaf(&mut self, top: &Arc<LowerNode>, ctrl: Option<Controller>) -> Closure {
        let mut out = Closure::default();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(top.uid);
        queue.push_back(top.clone());
        while let Some(t) = queue.pop_front() {
            out.locals.push(self.leaf(t.clone(), ctrl));
            let reduces: Vec<(SymbolId, usize)> = self
                .table
                .reduces(t.state)
                .map(|a| match a {
                    Action::Reduce { lhs, pop, .. } => (*lhs, *pop),
                    _ => unreachable!(),
                })
                .collect();
            for (lhs, pop) in reduces {
                match self.walk(&t, pop, true, lhs) {
                    Walk::Land(y) => {
                        for g in self.gotos(y.state, lhs) {
                            let n = self.lower(Some(&y), g);
                            if seen.insert(n.uid) {
                                queue.push_back(n);
                            }
                        }
                    }
                    Walk::Escape(e) => out.escapes.push(e),
                }
            }
            if seen.len() > self.options.max_closure {
                self.exhausted = true;
                break;
            }
        }
        out
    }

    fn close_scope(&mut self, b: &Binding, children: &[Arc<UpperNode>]) -> Closure {
        let mut out = Closure::default();
        for list in slot_lists(children) {
            let closures: Vec<Arc<Closure>> = list.iter().map(|s| self.close(s)).collect();
            let options: Vec<Arc<UpperNode>> = closures
                .iter()
                .map(|c| c.node.clone().expect("closure keeps the node itself"))
                .collect();
            let full: u32 = if list.len() >= 32 {
                u32::MAX
            } else {
                (1 << list.len()) - 1
            };
            let mut seen = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert((b.prior.uid, full));
            queue.push_back((b.prior.clone(), full));
            while let Some((prior, mask)) = queue.pop_front() {
                let kids: Vec<Arc<UpperNode>> = (0..list.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| options[i].clone())
                    .collect();
                let binding = Binding {
                    ctrl: b.ctrl,
                    prior: prior.clone(),
                    parent: b.parent,
                };
                out.locals.push(self.and(Some(binding), kids));
                for i in (0..list.len()).filter(|i| mask & (1 << i) != 0) {
                    let rest = mask & !(1 << i);
                    for e in closures[i].escapes.clone() {
                        match self.walk(&prior, e.pops, e.check, e.lhs) {
                            Walk::Land(y) if y.uid == prior.uid => {
                                for g in self.gotos(prior.state, e.lhs) {
                                    let beta = self.lower(Some(&prior), g);
                                    if rest != 0 {
                                        if seen.insert((beta.uid, rest)) {
                                            queue.push_back((beta, rest));
                                        }
                                    } else {
                                        let leaf = self.leaf(beta, b.parent);
                                        let c = self.close(&leaf);
                                        out.locals.extend(c.locals.iter().cloned());
                                        out.escapes.extend(c.escapes.iter().copied());
                                    }
                                }
                            }
                            _ if rest != 0 => {}
                            Walk::Land(y) => {
                                for g in self.gotos(y.state, e.lhs) {
                                    let beta = self.lower(Some(&y), g);
                                    let leaf = self.leaf(beta, b.parent);
                                    let c = self.close(&leaf);
                                    out.locals.extend(c.locals.iter().cloned());
                                    out.escapes.extend(c.escapes.iter().copied());
                                }
                            }
                            Walk::Escape(e2) => out.escapes.push(e2),
                        }
                    }
                }
            }
        }
        out
    }

    /// Every way for exactly one leaf below `n` to consume `sym`.
    fn shift(&mut self, n: &Arc<UpperNode>, sym: SymbolId) -> Arc<ShiftOut> {
        if let Some(s) = self.shift_memo.get(&(n.uid, sym)) {
            self.memo_hits += 1;
            return s.clone();
        }
        let mut out = ShiftOut::default();
        match &n.kind {
            UpperKind::Leaf { top, ctrl } => {
                let mut groups: Vec<(Vec<usize>, Vec<Arc<UpperNode>>)> = Vec::new();
                for action in self.table.actions(top.state, sym).to_vec() {
                    match action {
                        Action::Shift(g) => {
                            let t = self.lower(Some(top), g);
                            out.alts.push(self.leaf(t, *ctrl));
                        }
                        Action::ShuffleShift { from, to, siblings } => {
                            let mut targets = siblings.clone();
                            targets.push(from);
                            targets.sort_unstable();
                            let k = self.controller(top, targets.clone());
                            let start = self.lower(None, from);
                            let moved = self.lower(Some(&start), to);
                            let mut slots = vec![self.leaf(moved, Some(k))];
                            for s in siblings {
                                let root = self.lower(None, s);
                                slots.push(self.leaf(root, Some(k)));
                            }
                            let group = self.and(None, slots);
                            match groups.iter_mut().find(|(t, _)| *t == targets) {
                                Some((_, alts)) => alts.push(group),
                                None => groups.push((targets, vec![group])),
                            }
                        }
                        Action::Accept => out.accept |= ctrl.is_none(),
                        Action::Reduce { .. } => {}
                    }
                }
                for (targets, alts) in groups {
                    let k = self.controller(top, targets);
                    let body = self.or(alts).expect("group has an alternative");
                    let binding = Binding {
                        ctrl: k,
                        prior: top.clone(),
                        parent: *ctrl,
                    };
                    out.alts.push(self.and(Some(binding), vec![body]));
                }
            }
            UpperKind::Or(alts) => {
                for a in alts.clone() {
                    let s = self.shift(&a, sym);
                    out.alts.extend(s.alts.iter().cloned());
                    out.accept |= s.accept;
                }
            }
            UpperKind::And { binding, children } => {
                for list in slot_lists(children) {
                    for i in 0..list.len() {
                        let s = self.shift(&list[i], sym);
                        out.accept |= s.accept;
                        for alt in s.alts.clone() {
                            let mut kids = list.clone();
                            kids[i] = alt;
                            out.alts.push(self.and(binding.clone(), kids));
                        }
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.shift_memo.insert((n.uid, sym), out.clone());
        out
    }
}

fn dedup(mut c: Closure) -> Closure {
    let mut seen = HashSet::new();
    c.locals.retain(|n| seen.insert(n.uid));
    c.escapes.sort();
    c.escapes.dedup();
    c
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GssResult {
    pub verdict: Verdict,
    /// Stats of the state in which the parse ended.
    pub stats: Stats,
}

/// Decides `input` (without `$`).
pub fn parse(table: &ActionTable, input: &[SymbolId], options: GssOptions) -> GssResult {
    let end = table
        .end
        .expect("tables are built from an augmented grammar");
    let mut engine = Engine::new(table, options);
    let mut state = engine.init();
    for &sym in input.iter().chain(std::iter::once(&end)) {
        state = engine.advance(&state, sym);
        if state.is_dead() || state.accepted() {
            break;
        }
    }
    let verdict = if state.accepted() {
        Verdict::Accept
    } else if state.exhausted() {
        Verdict::Exhausted
    } else {
        Verdict::Reject
    };
    GssResult {
        verdict,
        stats: engine.stats(&state),
    }
}

/// A subtree of a cactus stack, rooted at the first node of a segment.
struct Tree {
    state: usize,
    top: bool,
    kids: Vec<Tree>,
}

fn chain(n: &LowerNode, top: bool, kids: Vec<Tree>) -> Tree {
    let mut t = Tree {
        state: n.state,
        top,
        kids,
    };
    let mut cur = n.parent.as_deref();
    while let Some(p) = cur {
        t = Tree {
            state: p.state,
            top: false,
            kids: vec![t],
        };
        cur = p.parent.as_deref();
    }
    t
}

fn flatten_slot(n: &Arc<UpperNode>) -> Vec<Tree> {
    match &n.kind {
        UpperKind::Leaf { top, .. } => vec![chain(top, true, Vec::new())],
        UpperKind::Or(alts) => alts.iter().flat_map(flatten_slot).collect(),
        UpperKind::And { binding, children } => {
            let mut out = Vec::new();
            for list in slot_lists(children) {
                let mut combos: Vec<Vec<Tree>> = vec![Vec::new()];
                for s in &list {
                    let options = flatten_slot(s);
                    let mut next = Vec::new();
                    for prefix in &combos {
                        for o in &options {
                            let mut c: Vec<Tree> = prefix.iter().map(copy_tree).collect();
                            c.push(copy_tree(o));
                            next.push(c);
                        }
                    }
                    combos = next;
                }
                for kids in combos {
                    match binding {
                        Some(b) => out.push(chain(&b.prior, false, kids)),
                        None => unreachable!("groups are expanded first"),
                    }
                }
            }
            out
        }
    }
}

fn copy_tree(t: &Tree) -> Tree {
    Tree {
        state: t.state,
        top: t.top,
        kids: t.kids.iter().map(copy_tree).collect(),
    }
}

/// Expands every choice in the upper graph into explicit cactus stacks.
/// Exponential; meant for checking small cases.
pub fn flatten(s: &GssState) -> BTreeSet<Configuration> {
    let Some(root) = &s.root else {
        return BTreeSet::new();
    };
    flatten_slot(root)
        .into_iter()
        .map(|t| {
            let mut nodes = Vec::new();
            let mut tops = Vec::new();
            let mut stack = vec![(t, None)];
            while let Some((t, parent)) = stack.pop() {
                let id = nodes.len();
                nodes.push(Node {
                    state: t.state,
                    parent,
                });
                if t.top {
                    tops.push(id);
                }
                for k in t.kids {
                    stack.push((k, Some(id)));
                }
            }
            Configuration::from_parts(&nodes, &tops)
        })
        .collect()
}

/// Indented rendering of the upper graph. Lower nodes appear as
/// `#uid:state`; a node already printed is referenced as `@uid`.
pub fn dump(s: &GssState) -> String {
    let mut out = String::new();
    let Some(root) = &s.root else {
        return "dead\n".to_owned();
    };
    let mut printed = HashSet::new();
    fn ctrl_name(c: Option<Controller>) -> String {
        c.map(|c| format!("K{}", c.0))
            .unwrap_or_else(|| "-".to_owned())
    }
    fn go(n: &Arc<UpperNode>, depth: usize, printed: &mut HashSet<u64>, out: &mut String) {
        let pad = "  ".repeat(depth);
        if !printed.insert(n.uid) {
            writeln!(out, "{pad}@{}", n.uid).unwrap();
            return;
        }
        match &n.kind {
            UpperKind::Leaf { top, ctrl } => writeln!(
                out,
                "{pad}leaf @{} {} #{}:{}",
                n.uid,
                ctrl_name(*ctrl),
                top.uid,
                top.state
            )
            .unwrap(),
            UpperKind::Or(alts) => {
                writeln!(out, "{pad}or @{}", n.uid).unwrap();
                for a in alts {
                    go(a, depth + 1, printed, out);
                }
            }
            UpperKind::And { binding, children } => {
                match binding {
                    Some(b) => writeln!(
                        out,
                        "{pad}and @{} K{}:#{}:{},{}",
                        n.uid,
                        b.ctrl.0,
                        b.prior.uid,
                        b.prior.state,
                        ctrl_name(b.parent)
                    )
                    .unwrap(),
                    None => writeln!(out, "{pad}and @{}", n.uid).unwrap(),
                }
                for c in children {
                    go(c, depth + 1, printed, out);
                }
            }
        }
    }
    go(root, 0, &mut printed, &mut out);
    let mut lowers = BTreeMap::new();
    let mut stack = vec![root.clone()];
    let mut seen = HashSet::new();
    while let Some(n) = stack.pop() {
        if !seen.insert(n.uid) {
            continue;
        }
        let mut tops = Vec::new();
        match &n.kind {
            UpperKind::Leaf { top, .. } => tops.push(top.clone()),
            UpperKind::Or(alts) => stack.extend(alts.iter().cloned()),
            UpperKind::And { binding, children } => {
                tops.extend(binding.as_ref().map(|b| b.prior.clone()));
                stack.extend(children.iter().cloned());
            }
        }
        for t in tops {
            let mut cur = Some(t);
            while let Some(x) = cur {
                if lowers
                    .insert(x.uid, (x.state, x.parent.as_ref().map(|p| p.uid)))
                    .is_some()
                {
                    break;
                }
                cur = x.parent.clone();
            }
        }
    }
    out.push_str("lower\n");
    for (uid, (state, parent)) in lowers {
        match parent {
            Some(p) => writeln!(out, "  #{uid}:{state} <- #{p}").unwrap(),
            None => writeln!(out, "  #{uid}:{state}").unwrap(),
        }
    }
    out
}
