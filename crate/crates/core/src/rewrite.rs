//! Executable rewriting semantics.
//!
//! Two small-step relations over sentential forms are provided: plain
//! rewriting, where any nonterminal may be expanded anywhere, and marked
//! rightmost rewriting, where a position marker restricts expansion to the
//! symbol just left of it. Breadth-first search over either relation gives
//! a brute-force membership test and language enumerator that the parsers
//! are checked against.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::grammar::{Grammar, SymbolId};

/// One element of a sentential form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Sym(SymbolId),
    /// An unfinished shuffle expansion of `owner`, one branch per operand.
    Shuffle {
        owner: SymbolId,
        branches: Vec<Form>,
    },
    Mark,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form(pub Vec<Elem>);

impl Form {
    pub fn symbol(s: SymbolId) -> Form {
        Form(vec![Elem::Sym(s)])
    }

    pub fn word(w: &[SymbolId]) -> Form {
        Form(w.iter().map(|&s| Elem::Sym(s)).collect())
    }

    /// `s•`, the start of a marked derivation.
    pub fn marked_start(s: SymbolId) -> Form {
        Form(vec![Elem::Sym(s), Elem::Mark])
    }

    /// `•w`, the end of a successful marked derivation.
    pub fn marked_word(w: &[SymbolId]) -> Form {
        let mut els = vec![Elem::Mark];
        els.extend(w.iter().map(|&s| Elem::Sym(s)));
        Form(els)
    }

    /// The form with every marker removed, at every nesting depth.
    pub fn erase(&self) -> Form {
        Form(
            self.0
                .iter()
                .filter(|e| **e != Elem::Mark)
                .map(|e| match e {
                    Elem::Shuffle { owner, branches } => Elem::Shuffle {
                        owner: *owner,
                        branches: branches.iter().map(Form::erase).collect(),
                    },
                    e => e.clone(),
                })
                .collect(),
        )
    }

    pub fn has_mark(&self) -> bool {
        self.0.iter().any(|e| match e {
            Elem::Mark => true,
            Elem::Shuffle { branches, .. } => branches.iter().any(Form::has_mark),
            Elem::Sym(_) => false,
        })
    }

    /// The terminal string this form spells, if it is nothing but terminals.
    pub fn as_word(&self, g: &Grammar) -> Option<Vec<SymbolId>> {
        self.0
            .iter()
            .map(|e| match e {
                Elem::Sym(s) if g.is_terminal(*s) => Some(*s),
                _ => None,
            })
            .collect()
    }

    /// The terminal string `w` if this form is `•w`.
    pub fn as_marked_word(&self, g: &Grammar) -> Option<Vec<SymbolId>> {
        match self.0.split_first() {
            Some((Elem::Mark, rest)) => Form(rest.to_vec()).as_word(g),
            _ => None,
        }
    }

    pub fn display<'a>(&'a self, g: &'a Grammar) -> FormDisplay<'a> {
        FormDisplay { form: self, g }
    }

    fn splice(&self, at: usize, len: usize, with: Vec<Elem>) -> Form {
        let mut els = Vec::with_capacity(self.0.len() + with.len());
        els.extend_from_slice(&self.0[..at]);
        els.extend(with);
        els.extend_from_slice(&self.0[at + len..]);
        Form(els)
    }

    fn nonterminal_count(&self, g: &Grammar) -> usize {
        self.0
            .iter()
            .map(|e| match e {
                Elem::Sym(s) => usize::from(g.is_nonterminal(*s)),
                Elem::Shuffle { branches, .. } => {
                    branches.iter().map(|b| b.nonterminal_count(g)).sum()
                }
                Elem::Mark => 0,
            })
            .sum()
    }

    /// Fewest terminals any word derived from this form can have, or
    /// `None` if it contains a nonterminal that derives nothing.
    fn min_yield(&self, min: &[Option<usize>]) -> Option<usize> {
        self.0.iter().try_fold(0, |acc, e| {
            let v = match e {
                Elem::Sym(s) => min[s.index()]?,
                Elem::Shuffle { branches, .. } => branches
                    .iter()
                    .try_fold(0, |a, b| b.min_yield(min).map(|v| a + v))?,
                Elem::Mark => 0,
            };
            Some(acc + v)
        })
    }
}

pub struct FormDisplay<'a> {
    form: &'a Form,
    g: &'a Grammar,
}

impl fmt::Display for FormDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spaced = self.g.symbols().iter().any(|s| s.name.chars().count() != 1);
        for (i, e) in self.form.0.iter().enumerate() {
            if spaced && i > 0 {
                write!(f, " ")?;
            }
            match e {
                Elem::Sym(s) => write!(f, "{}", self.g.name(*s))?,
                Elem::Mark => write!(f, "•")?,
                Elem::Shuffle { owner, branches } => {
                    write!(f, "{}{{", self.g.name(*owner))?;
                    for (j, b) in branches.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", b.display(self.g))?;
                    }
                    write!(f, "}}")?;
                }
            }
        }
        Ok(())
    }
}

/// All interleavings of `parts` that keep each part's own order.
pub fn shufflings<T: Clone + Ord>(parts: &[Vec<T>]) -> BTreeSet<Vec<T>> {
    fn go<T: Clone + Ord>(
        parts: &[Vec<T>],
        pos: &mut [usize],
        cur: &mut Vec<T>,
        out: &mut BTreeSet<Vec<T>>,
    ) {
        let mut done = true;
        for i in 0..parts.len() {
            if pos[i] < parts[i].len() {
                done = false;
                cur.push(parts[i][pos[i]].clone());
                pos[i] += 1;
                go(parts, pos, cur, out);
                pos[i] -= 1;
                cur.pop();
            }
        }
        if done {
            out.insert(cur.clone());
        }
    }
    let mut out = BTreeSet::new();
    let mut pos = vec![0; parts.len()];
    go(parts, &mut pos, &mut Vec::new(), &mut out);
    out
}

fn expansions(g: &Grammar, a: SymbolId) -> impl Iterator<Item = Elem> + '_ {
    g.shuffle_rules_for(a).map(move |(_, r)| Elem::Shuffle {
        owner: a,
        branches: r.operands.iter().map(|&o| Form::symbol(o)).collect(),
    })
}

/// Every form reachable from `form` by one unmarked rewrite, at any
/// position including inside shuffle branches.
pub fn rewrite_step(form: &Form, g: &Grammar) -> BTreeSet<Form> {
    let mut out = BTreeSet::new();
    for (i, e) in form.0.iter().enumerate() {
        match e {
            Elem::Sym(a) if g.is_nonterminal(*a) => {
                for (_, r) in g.seq_rules_for(*a) {
                    out.insert(form.splice(i, 1, r.rhs.iter().map(|&s| Elem::Sym(s)).collect()));
                }
                for t in expansions(g, *a) {
                    out.insert(form.splice(i, 1, vec![t]));
                }
            }
            Elem::Shuffle { owner, branches } => {
                let words: Option<Vec<Vec<SymbolId>>> =
                    branches.iter().map(|b| b.as_word(g)).collect();
                if let Some(words) = words {
                    for v in shufflings(&words) {
                        out.insert(form.splice(i, 1, v.into_iter().map(Elem::Sym).collect()));
                    }
                }
                for (bi, b) in branches.iter().enumerate() {
                    for nb in rewrite_step(b, g) {
                        let mut nbs = branches.clone();
                        nbs[bi] = nb;
                        out.insert(form.splice(
                            i,
                            1,
                            vec![Elem::Shuffle {
                                owner: *owner,
                                branches: nbs,
                            }],
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Every form reachable from `form` by one marked rightmost rewrite.
///
/// A redex is a symbol immediately left of a marker, or a shuffle term.
/// It may only fire when everything to its left is a plain symbol and
/// everything to its right is a terminal.
pub fn marked_rewrite_step(form: &Form, g: &Grammar) -> BTreeSet<Form> {
    let els = &form.0;
    let mut out = BTreeSet::new();
    for i in 0..els.len() {
        let mut redexes: Vec<(usize, Vec<Elem>)> = Vec::new();
        match &els[i] {
            Elem::Sym(a) if els.get(i + 1) == Some(&Elem::Mark) => {
                if g.is_nonterminal(*a) {
                    for (_, r) in g.seq_rules_for(*a) {
                        let mut rep: Vec<Elem> = r.rhs.iter().map(|&s| Elem::Sym(s)).collect();
                        rep.push(Elem::Mark);
                        redexes.push((2, rep));
                    }
                    for (_, r) in g.shuffle_rules_for(*a) {
                        let branches = r
                            .operands
                            .iter()
                            .map(|&o| Form(vec![Elem::Sym(o), Elem::Mark]))
                            .collect();
                        redexes.push((
                            2,
                            vec![Elem::Shuffle {
                                owner: *a,
                                branches,
                            }],
                        ));
                    }
                } else {
                    redexes.push((2, vec![Elem::Mark, Elem::Sym(*a)]));
                }
            }
            Elem::Shuffle { owner, branches } => {
                let words: Option<Vec<Vec<SymbolId>>> =
                    branches.iter().map(|b| b.as_marked_word(g)).collect();
                if let Some(words) = words {
                    for v in shufflings(&words) {
                        let mut rep = vec![Elem::Mark];
                        rep.extend(v.into_iter().map(Elem::Sym));
                        redexes.push((1, rep));
                    }
                }
                for (bi, b) in branches.iter().enumerate() {
                    for nb in marked_rewrite_step(b, g) {
                        let mut nbs = branches.clone();
                        nbs[bi] = nb;
                        redexes.push((
                            1,
                            vec![Elem::Shuffle {
                                owner: *owner,
                                branches: nbs,
                            }],
                        ));
                    }
                }
            }
            _ => {}
        }
        if redexes.is_empty() || !els[..i].iter().all(|e| matches!(e, Elem::Sym(_))) {
            continue;
        }
        for (len, rep) in redexes {
            let right_ok = els[i + len..]
                .iter()
                .all(|e| matches!(e, Elem::Sym(s) if g.is_terminal(*s)));
            if right_ok {
                out.insert(form.splice(i, len, rep));
            }
        }
    }
    out
}

/// Limits for the brute-force searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Distinct forms the search may visit before giving up.
    pub max_forms: usize,
    /// Extra nonterminals a form may carry beyond the length bound.
    /// Defaults to four times the bound plus eight.
    pub slack: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_forms: 500_000,
            slack: None,
        }
    }
}

/// Result of a budgeted membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember,
    /// The search was cut off before it could decide.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("search budget exhausted after {visited} forms")]
pub struct Exhausted {
    pub visited: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Plain,
    Marked,
}

struct Search<'g> {
    g: &'g Grammar,
    relation: Relation,
    min: Vec<Option<usize>>,
    bound: usize,
    nt_cap: usize,
    max_forms: usize,
}

impl<'g> Search<'g> {
    fn new(g: &'g Grammar, relation: Relation, bound: usize, budget: Budget) -> Self {
        let slack = budget.slack.unwrap_or(4 * bound + 8);
        Search {
            g,
            relation,
            min: g.min_yields(),
            bound,
            nt_cap: bound + slack,
            max_forms: budget.max_forms,
        }
    }

    /// Visits every form derivable from the start symbol within bounds and
    /// reports each finished word to `found`, stopping early when it
    /// returns true. `Ok(true)` means stopped early, `Ok(false)` means the
    /// space was exhausted soundly.
    fn run(&self, mut found: impl FnMut(Vec<SymbolId>) -> bool) -> Result<bool, Exhausted> {
        let start = match self.relation {
            Relation::Plain => Form::symbol(self.g.start()),
            Relation::Marked => Form::marked_start(self.g.start()),
        };
        let mut seen: HashSet<Form> = HashSet::new();
        let mut queue = VecDeque::new();
        let mut truncated = false;
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(form) = queue.pop_front() {
            let word = match self.relation {
                Relation::Plain => form.as_word(self.g),
                Relation::Marked => form.as_marked_word(self.g),
            };
            if let Some(w) = word {
                if found(w) {
                    return Ok(true);
                }
            }
            let next = match self.relation {
                Relation::Plain => rewrite_step(&form, self.g),
                Relation::Marked => marked_rewrite_step(&form, self.g),
            };
            for f in next {
                match f.min_yield(&self.min) {
                    Some(y) if y <= self.bound => {}
                    _ => continue,
                }
                if f.nonterminal_count(self.g) > self.nt_cap {
                    truncated = true;
                    continue;
                }
                if seen.contains(&f) {
                    continue;
                }
                if seen.len() >= self.max_forms {
                    return Err(Exhausted {
                        visited: seen.len(),
                    });
                }
                seen.insert(f.clone());
                queue.push_back(f);
            }
        }
        if truncated {
            Err(Exhausted {
                visited: seen.len(),
            })
        } else {
            Ok(false)
        }
    }
}

fn query(g: &Grammar, w: &[SymbolId], relation: Relation, budget: Budget) -> Membership {
    match Search::new(g, relation, w.len(), budget).run(|v| v == w) {
        Ok(true) => Membership::Member,
        Ok(false) => Membership::NonMember,
        Err(_) => Membership::Exhausted,
    }
}

/// Whether the start symbol rewrites to `w`.
pub fn derives(g: &Grammar, w: &[SymbolId], budget: Budget) -> Membership {
    query(g, w, Relation::Plain, budget)
}

/// Whether `S•` marked-rewrites to `•w`.
pub fn derives_marked(g: &Grammar, w: &[SymbolId], budget: Budget) -> Membership {
    query(g, w, Relation::Marked, budget)
}

/// Every word of length at most `max_len` derivable from the start symbol.
pub fn enumerate_language(
    g: &Grammar,
    max_len: usize,
    budget: Budget,
) -> Result<BTreeSet<Vec<SymbolId>>, Exhausted> {
    enumerate_with(g, max_len, Relation::Plain, budget)
}

/// Every `w` with `|w| <= max_len` such that `S•` marked-rewrites to `•w`.
pub fn enumerate_marked_language(
    g: &Grammar,
    max_len: usize,
    budget: Budget,
) -> Result<BTreeSet<Vec<SymbolId>>, Exhausted> {
    enumerate_with(g, max_len, Relation::Marked, budget)
}

fn enumerate_with(
    g: &Grammar,
    max_len: usize,
    relation: Relation,
    budget: Budget,
) -> Result<BTreeSet<Vec<SymbolId>>, Exhausted> {
    let mut out = BTreeSet::new();
    Search::new(g, relation, max_len, budget).run(|w| {
        out.insert(w);
        false
    })?;
    Ok(out)
}
