//! Context-free shuffle grammars.
//!
//! A grammar is the usual nonterminal/terminal alphabets, sequence rules and
//! start symbol, plus a set of shuffle rules `A => a1 || ... || an` whose
//! right-hand side is recognized as any interleaving of the operands' yields.

mod text;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use text::{parse_grammar_text, serialize_grammar, ParseWarning, ParsedGrammar};

use crate::error::Error;

/// Name reserved for the augmented start symbol.
pub const AUGMENTED_START: &str = "S*";
/// Name reserved for the end-of-input terminal.
pub const END_MARKER: &str = "$";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub id: SymbolId,
    pub kind: SymbolKind,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SequenceRule {
    pub lhs: SymbolId,
    pub rhs: Vec<SymbolId>,
}

/// `lhs => operands[0] || operands[1] || ...`. Operands have set semantics;
/// they are kept in declaration order without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShuffleRule {
    pub lhs: SymbolId,
    pub operands: Vec<SymbolId>,
}

impl ShuffleRule {
    pub fn arity(&self) -> usize {
        self.operands.len()
    }
}

/// Bookkeeping added by [`Grammar::augment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Augmentation {
    pub original_start: SymbolId,
    pub end: SymbolId,
    /// Index of `S* -> S $` in the sequence rules.
    pub rule: usize,
}

#[derive(Clone, Debug)]
pub struct Grammar {
    symbols: Vec<Symbol>,
    seq_rules: Vec<SequenceRule>,
    shuffle_rules: Vec<ShuffleRule>,
    start: SymbolId,
    augmentation: Option<Augmentation>,
}

impl Grammar {
    pub fn builder() -> GrammarBuilder {
        GrammarBuilder::default()
    }

    /// Assembles a grammar without any checking. Use [`Grammar::validate`]
    /// to find out whether the parts make sense together.
    pub fn from_parts(
        symbols: Vec<Symbol>,
        seq_rules: Vec<SequenceRule>,
        shuffle_rules: Vec<ShuffleRule>,
        start: SymbolId,
    ) -> Grammar {
        Grammar {
            symbols,
            seq_rules,
            shuffle_rules,
            start,
            augmentation: None,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        self.symbols
            .get(id.index())
            .map(|s| s.name.as_str())
            .unwrap_or("<undeclared>")
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.id)
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        self.symbols[id.index()].kind == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.symbols[id.index()].kind == SymbolKind::Nonterminal
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Nonterminal)
    }

    pub fn terminals(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Terminal)
    }

    pub fn seq_rules(&self) -> &[SequenceRule] {
        &self.seq_rules
    }

    pub fn shuffle_rules(&self) -> &[ShuffleRule] {
        &self.shuffle_rules
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn augmentation(&self) -> Option<Augmentation> {
        self.augmentation
    }

    pub fn seq_rules_for(&self, lhs: SymbolId) -> impl Iterator<Item = (usize, &SequenceRule)> {
        self.seq_rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.lhs == lhs)
    }

    pub fn shuffle_rules_for(&self, lhs: SymbolId) -> impl Iterator<Item = (usize, &ShuffleRule)> {
        self.shuffle_rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.lhs == lhs)
    }

    pub fn has_shuffle_rule(&self, lhs: SymbolId) -> bool {
        self.shuffle_rules.iter().any(|r| r.lhs == lhs)
    }

    /// Splits a user string into terminal ids. Whitespace-separated tokens
    /// are used when the string contains whitespace, single characters
    /// otherwise.
    pub fn tokenize(&self, input: &str) -> Result<Vec<SymbolId>, Error> {
        let tokens: Vec<String> = if input.chars().any(char::is_whitespace) {
            input.split_whitespace().map(str::to_owned).collect()
        } else {
            input.chars().map(String::from).collect()
        };
        tokens
            .into_iter()
            .map(|t| match self.lookup(&t) {
                Some(id) if self.is_terminal(id) && Some(id) != self.end_marker() => Ok(id),
                _ => Err(Error::UnknownTerminal(t)),
            })
            .collect()
    }

    pub fn end_marker(&self) -> Option<SymbolId> {
        self.augmentation.map(|a| a.end)
    }

    pub fn render(&self, word: &[SymbolId]) -> String {
        let names: Vec<&str> = word.iter().map(|&s| self.name(s)).collect();
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Checks well-formedness. Violations make the grammar unusable;
    /// warnings flag legal but suspicious constructions.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let declared = |id: SymbolId| id.index() < self.symbols.len();

        let mut seen_names: HashMap<&str, SymbolKind> = HashMap::new();
        for (i, sym) in self.symbols.iter().enumerate() {
            if sym.id.index() != i {
                report.violations.push(Violation::BadSymbolId {
                    name: sym.name.clone(),
                });
            }
            if let Some(prev) = seen_names.insert(&sym.name, sym.kind) {
                report.violations.push(Violation::AlphabetsOverlap {
                    name: sym.name.clone(),
                    both_kinds: prev != sym.kind,
                });
            }
        }

        if !declared(self.start) {
            report.violations.push(Violation::StartUndeclared);
        } else if !self.is_nonterminal(self.start) {
            report.violations.push(Violation::StartNotNonterminal {
                name: self.name(self.start).to_owned(),
            });
        }

        for (i, rule) in self.seq_rules.iter().enumerate() {
            let ctx = RuleRef::Sequence(i);
            for &s in std::iter::once(&rule.lhs).chain(&rule.rhs) {
                if !declared(s) {
                    report
                        .violations
                        .push(Violation::UndeclaredSymbol { rule: ctx, id: s });
                }
            }
            if declared(rule.lhs) && !self.is_nonterminal(rule.lhs) {
                report.violations.push(Violation::LhsNotNonterminal {
                    rule: ctx,
                    name: self.name(rule.lhs).to_owned(),
                });
            }
        }

        let mut shuffle_lhs = BTreeSet::new();
        for (i, rule) in self.shuffle_rules.iter().enumerate() {
            let ctx = RuleRef::Shuffle(i);
            for &s in std::iter::once(&rule.lhs).chain(&rule.operands) {
                if !declared(s) {
                    report
                        .violations
                        .push(Violation::UndeclaredSymbol { rule: ctx, id: s });
                }
            }
            if declared(rule.lhs) && !self.is_nonterminal(rule.lhs) {
                report.violations.push(Violation::LhsNotNonterminal {
                    rule: ctx,
                    name: self.name(rule.lhs).to_owned(),
                });
            }
            if rule.operands.is_empty() {
                report.violations.push(Violation::EmptyShuffle {
                    lhs: self.name(rule.lhs).to_owned(),
                });
            }
            if rule.operands.len() > crate::automaton::MAX_SHUFFLE_ARITY {
                report.violations.push(Violation::ShuffleTooWide {
                    lhs: self.name(rule.lhs).to_owned(),
                    arity: rule.operands.len(),
                });
            }
            let distinct: BTreeSet<_> = rule.operands.iter().collect();
            if distinct.len() != rule.operands.len() {
                report.violations.push(Violation::RepeatedOperand {
                    lhs: self.name(rule.lhs).to_owned(),
                });
            }
            for &op in &rule.operands {
                if declared(op) && self.has_shuffle_rule(op) {
                    report.violations.push(Violation::NestedShuffle {
                        lhs: self.name(rule.lhs).to_owned(),
                        operand: self.name(op).to_owned(),
                    });
                }
                if declared(op) && self.is_terminal(op) {
                    report.warnings.push(Warning::TerminalOperand {
                        lhs: self.name(rule.lhs).to_owned(),
                        operand: self.name(op).to_owned(),
                    });
                }
            }
            if !shuffle_lhs.insert(rule.lhs) {
                report.warnings.push(Warning::DuplicateShuffleLhs {
                    lhs: self.name(rule.lhs).to_owned(),
                });
            }
        }
        report
    }

    /// Adds `S* -> S $` and makes `S*` the start symbol.
    pub fn augment(&self) -> Result<Grammar, Error> {
        for reserved in [AUGMENTED_START, END_MARKER] {
            if self.lookup(reserved).is_some() {
                return Err(Error::ReservedName(reserved.to_owned()));
            }
        }
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let mut g = self.clone();
        let new_start = g.push_symbol(AUGMENTED_START, SymbolKind::Nonterminal);
        let end = g.push_symbol(END_MARKER, SymbolKind::Terminal);
        g.seq_rules.push(SequenceRule {
            lhs: new_start,
            rhs: vec![self.start, end],
        });
        g.augmentation = Some(Augmentation {
            original_start: self.start,
            end,
            rule: g.seq_rules.len() - 1,
        });
        g.start = new_start;
        Ok(g)
    }

    /// Replaces every terminal shuffle operand `t` by a fresh nonterminal
    /// `<t>` with the single rule `<t> -> t`. The handle-finding automaton
    /// only knows how to enter a shuffle branch through a nonterminal's
    /// station, so this runs before augmentation.
    pub fn lift_terminal_operands(&self) -> Grammar {
        let mut g = self.clone();
        let mut lifted: HashMap<SymbolId, SymbolId> = HashMap::new();
        for ri in 0..g.shuffle_rules.len() {
            for oi in 0..g.shuffle_rules[ri].operands.len() {
                let op = g.shuffle_rules[ri].operands[oi];
                if !g.is_terminal(op) {
                    continue;
                }
                let nt = match lifted.get(&op) {
                    Some(&nt) => nt,
                    None => {
                        let mut name = format!("<{}>", g.name(op));
                        while g.lookup(&name).is_some() {
                            name.push('\'');
                        }
                        let nt = g.push_symbol(&name, SymbolKind::Nonterminal);
                        g.seq_rules.push(SequenceRule {
                            lhs: nt,
                            rhs: vec![op],
                        });
                        lifted.insert(op, nt);
                        nt
                    }
                };
                g.shuffle_rules[ri].operands[oi] = nt;
            }
        }
        g
    }

    fn push_symbol(&mut self, name: &str, kind: SymbolKind) -> SymbolId {
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            id,
            kind,
            name: name.to_owned(),
        });
        id
    }

    /// Minimum number of terminals each symbol can derive; `None` for
    /// nonterminals that derive no terminal string at all.
    pub fn min_yields(&self) -> Vec<Option<usize>> {
        let mut best: Vec<Option<usize>> = self
            .symbols
            .iter()
            .map(|s| (s.kind == SymbolKind::Terminal).then_some(1))
            .collect();
        loop {
            let mut changed = false;
            let sum = |best: &[Option<usize>], syms: &[SymbolId]| {
                syms.iter()
                    .try_fold(0usize, |acc, s| best[s.index()].map(|v| acc + v))
            };
            for r in &self.seq_rules {
                if let Some(v) = sum(&best, &r.rhs) {
                    if best[r.lhs.index()].is_none_or(|b| v < b) {
                        best[r.lhs.index()] = Some(v);
                        changed = true;
                    }
                }
            }
            for r in &self.shuffle_rules {
                if let Some(v) = sum(&best, &r.operands) {
                    if best[r.lhs.index()].is_none_or(|b| v < b) {
                        best[r.lhs.index()] = Some(v);
                        changed = true;
                    }
                }
            }
            if !changed {
                return best;
            }
        }
    }
}

/// Structural equality: symbols are compared by name and kind, rules by
/// the names they mention, so interning order does not matter.
impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        let names = |g: &Grammar| {
            g.symbols
                .iter()
                .map(|s| (s.name.clone(), s.kind == SymbolKind::Terminal))
                .collect::<BTreeSet<_>>()
        };
        let seq = |g: &Grammar| {
            g.seq_rules
                .iter()
                .map(|r| {
                    (
                        g.name(r.lhs).to_owned(),
                        r.rhs
                            .iter()
                            .map(|&s| g.name(s).to_owned())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>()
        };
        let shuf = |g: &Grammar| {
            g.shuffle_rules
                .iter()
                .map(|r| {
                    (
                        g.name(r.lhs).to_owned(),
                        r.operands
                            .iter()
                            .map(|&s| g.name(s).to_owned())
                            .collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>()
        };
        names(self) == names(other)
            && seq(self) == seq(other)
            && shuf(self) == shuf(other)
            && self.name(self.start) == other.name(other.start)
            && self.augmentation.is_some() == other.augmentation.is_some()
    }
}

impl Eq for Grammar {}

/// Builds grammars by name, the same way the text format does: every
/// symbol that appears on a left-hand side is a nonterminal, everything
/// else is a terminal, and ids follow first mention.
#[derive(Default, Debug, Clone)]
pub struct GrammarBuilder {
    order: Vec<String>,
    lhs: BTreeSet<String>,
    seq: Vec<(String, Vec<String>)>,
    shuffle: Vec<(String, Vec<String>)>,
    start: Option<String>,
}

impl GrammarBuilder {
    fn mention(&mut self, name: &str) {
        if !self.order.iter().any(|n| n == name) {
            self.order.push(name.to_owned());
        }
    }

    pub fn start(mut self, name: &str) -> Self {
        self.mention(name);
        self.start = Some(name.to_owned());
        self
    }

    pub fn seq(mut self, lhs: &str, rhs: &[&str]) -> Self {
        self.mention(lhs);
        self.lhs.insert(lhs.to_owned());
        for s in rhs {
            self.mention(s);
        }
        self.seq
            .push((lhs.to_owned(), rhs.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn shuffle(mut self, lhs: &str, operands: &[&str]) -> Self {
        self.mention(lhs);
        self.lhs.insert(lhs.to_owned());
        for s in operands {
            self.mention(s);
        }
        let mut ops: Vec<String> = Vec::new();
        for s in operands {
            if !ops.iter().any(|o| o == s) {
                ops.push(s.to_string());
            }
        }
        self.shuffle.push((lhs.to_owned(), ops));
        self
    }

    pub fn build(self) -> Result<Grammar, Error> {
        let start = self.start.clone().ok_or(Error::MissingStart)?;
        let symbols: Vec<Symbol> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, name)| Symbol {
                id: SymbolId(i as u32),
                kind: if self.lhs.contains(name) {
                    SymbolKind::Nonterminal
                } else {
                    SymbolKind::Terminal
                },
                name: name.clone(),
            })
            .collect();
        let id = |name: &str| SymbolId(self.order.iter().position(|n| n == name).unwrap() as u32);
        let seq_rules = self
            .seq
            .iter()
            .map(|(l, r)| SequenceRule {
                lhs: id(l),
                rhs: r.iter().map(|s| id(s)).collect(),
            })
            .collect();
        let shuffle_rules = self
            .shuffle
            .iter()
            .map(|(l, ops)| ShuffleRule {
                lhs: id(l),
                operands: ops.iter().map(|s| id(s)).collect(),
            })
            .collect();
        Ok(Grammar::from_parts(
            symbols,
            seq_rules,
            shuffle_rules,
            id(&start),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleRef {
    Sequence(usize),
    Shuffle(usize),
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleRef::Sequence(i) => write!(f, "sequence rule #{i}"),
            RuleRef::Shuffle(i) => write!(f, "shuffle rule #{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    AlphabetsOverlap { name: String, both_kinds: bool },
    BadSymbolId { name: String },
    StartUndeclared,
    StartNotNonterminal { name: String },
    UndeclaredSymbol { rule: RuleRef, id: SymbolId },
    LhsNotNonterminal { rule: RuleRef, name: String },
    EmptyShuffle { lhs: String },
    ShuffleTooWide { lhs: String, arity: usize },
    RepeatedOperand { lhs: String },
    NestedShuffle { lhs: String, operand: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AlphabetsOverlap { name, both_kinds } => {
                if *both_kinds {
                    write!(f, "symbol `{name}` is both a terminal and a nonterminal")
                } else {
                    write!(f, "symbol `{name}` is declared twice")
                }
            }
            Violation::BadSymbolId { name } => write!(f, "symbol `{name}` has a mismatched id"),
            Violation::StartUndeclared => write!(f, "start symbol is not declared"),
            Violation::StartNotNonterminal { name } => {
                write!(
                    f,
                    "start symbol `{name}` has no rules (it is not a nonterminal)"
                )
            }
            Violation::UndeclaredSymbol { rule, id } => {
                write!(f, "{rule} mentions undeclared symbol id {}", id.0)
            }
            Violation::LhsNotNonterminal { rule, name } => {
                write!(f, "{rule} has terminal `{name}` on its left-hand side")
            }
            Violation::EmptyShuffle { lhs } => {
                write!(f, "shuffle rule for `{lhs}` has no operands")
            }
            Violation::ShuffleTooWide { lhs, arity } => write!(
                f,
                "shuffle rule for `{lhs}` has {arity} operands (at most {} supported)",
                crate::automaton::MAX_SHUFFLE_ARITY
            ),
            Violation::RepeatedOperand { lhs } => {
                write!(f, "shuffle rule for `{lhs}` repeats an operand")
            }
            Violation::NestedShuffle { lhs, operand } => write!(
                f,
                "shuffle rule for `{lhs}` has operand `{operand}`, which has a shuffle rule itself"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    DuplicateShuffleLhs { lhs: String },
    TerminalOperand { lhs: String, operand: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DuplicateShuffleLhs { lhs } => {
                write!(f, "`{lhs}` has more than one shuffle rule")
            }
            Warning::TerminalOperand { lhs, operand } => write!(
                f,
                "shuffle rule for `{lhs}` has terminal operand `{operand}`; it is wrapped in a helper nonterminal when building tables"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
