//! Goto/action tables.
//!
//! A cell may hold several actions. Reductions fill every column of their
//! row (there is no lookahead), plain edges give shifts, each hyperedge
//! together with a terminal edge out of one of its targets gives a shuffle
//! shift in the hyperedge's source row, and the `$` edge into the
//! accepting item gives accept.

use std::collections::BTreeSet;
use std::fmt::{self, Write};
use std::str::FromStr;

use crate::automaton::{Dfa, Item};
use crate::grammar::{Grammar, SymbolId};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Reduce {
        lhs: SymbolId,
        pop: usize,
        item: Item,
    },
    Shift(usize),
    /// Start a shuffle: split the stack into one branch per sibling plus
    /// the active branch, which moves from `from` to `to`.
    ShuffleShift {
        from: usize,
        to: usize,
        siblings: Vec<usize>,
    },
    Accept,
}

impl Action {
    pub fn display<'a>(&'a self, g: &'a Grammar) -> ActionDisplay<'a> {
        ActionDisplay { action: self, g }
    }
}

pub struct ActionDisplay<'a> {
    action: &'a Action,
    g: &'a Grammar,
}

impl fmt::Display for ActionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Action::Shift(s) => write!(f, "shift({s})"),
            Action::ShuffleShift { from, to, siblings } => {
                let sib: Vec<String> = siblings.iter().map(usize::to_string).collect();
                write!(f, "shift({from}→{to};{})", sib.join(","))
            }
            Action::Reduce { item, .. } => write!(f, "reduce({})", item.display(self.g)),
            Action::Accept => write!(f, "accept"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTable {
    /// Indexed by state, then by symbol id.
    cells: Vec<Vec<Vec<Action>>>,
    /// Column order for dumps: every symbol except the augmented start.
    pub columns: Vec<SymbolId>,
    pub initial: usize,
    pub end: Option<SymbolId>,
    /// Per state, the operands `a` whose indirection item `^a` it holds.
    indirections: Vec<Vec<SymbolId>>,
}

impl ActionTable {
    pub fn state_count(&self) -> usize {
        self.cells.len()
    }

    pub fn actions(&self, state: usize, sym: SymbolId) -> &[Action] {
        self.cells
            .get(state)
            .and_then(|row| row.get(sym.index()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn has_indirection(&self, state: usize, sym: SymbolId) -> bool {
        self.indirections[state].contains(&sym)
    }

    /// Every reduction available in `state`.
    pub fn reduces(&self, state: usize) -> impl Iterator<Item = &Action> {
        let first = self.columns.first().copied();
        first
            .into_iter()
            .flat_map(move |c| self.actions(state, c))
            .filter(|a| matches!(a, Action::Reduce { .. }))
    }

    /// Shift targets for `sym` in `state` (plain shifts only).
    pub fn shifts(&self, state: usize, sym: SymbolId) -> impl Iterator<Item = usize> + '_ {
        self.actions(state, sym).iter().filter_map(|a| match a {
            Action::Shift(t) => Some(*t),
            _ => None,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, SymbolId, &[Action])> {
        self.cells.iter().enumerate().flat_map(move |(s, row)| {
            self.columns
                .iter()
                .map(move |&c| (s, c, row[c.index()].as_slice()))
        })
    }

    fn add(&mut self, state: usize, sym: SymbolId, action: Action) {
        let cell = &mut self.cells[state][sym.index()];
        if !cell.contains(&action) {
            cell.push(action);
            cell.sort();
        }
    }

    fn empty(states: usize, g: &Grammar) -> ActionTable {
        let symbols = g.symbols().len();
        let columns = g
            .symbols()
            .iter()
            .filter(|s| Some(s.id) != g.augmentation().map(|_| g.start()))
            .map(|s| s.id)
            .collect();
        ActionTable {
            cells: vec![vec![Vec::new(); symbols]; states],
            columns,
            initial: 0,
            end: g.end_marker(),
            indirections: vec![Vec::new(); states],
        }
    }
}

/// Fills the table from the DFA of an augmented grammar.
pub fn build_tables(d: &Dfa, g: &Grammar) -> ActionTable {
    let mut t = ActionTable::empty(d.states.len(), g);
    t.initial = d.initial;
    for (s, state) in d.states.iter().enumerate() {
        for item in &state.items {
            if let Item::Indirection(a) = item {
                t.indirections[s].push(*a);
            }
            if item.is_final(g) {
                let action = Action::Reduce {
                    lhs: item.lhs(g).expect("final items have a rule"),
                    pop: item.pop_count(g),
                    item: *item,
                };
                for c in t.columns.clone() {
                    t.add(s, c, action.clone());
                }
            }
        }
    }
    for (&(s, sym), &to) in &d.edges {
        t.add(s, sym, Action::Shift(to));
    }
    for h in &d.hyperedges {
        for (i, &si) in h.targets.iter().enumerate() {
            let siblings: Vec<usize> = h
                .targets
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &x)| x)
                .collect();
            for (&(from, sym), &to) in d.edges.range((si, SymbolId(0))..=(si, SymbolId(u32::MAX))) {
                debug_assert_eq!(from, si);
                if g.is_terminal(sym) {
                    t.add(
                        h.source,
                        sym,
                        Action::ShuffleShift {
                            from: si,
                            to,
                            siblings: siblings.clone(),
                        },
                    );
                }
            }
        }
    }
    if let Some(aug) = g.augmentation() {
        let accepting = Item::Seq {
            rule: aug.rule,
            dot: 2,
        };
        for (&(s, sym), &to) in &d.edges {
            if sym == aug.end && d.states[to].contains(&accepting) {
                t.add(s, sym, Action::Accept);
            }
        }
    }
    t
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub cells: Vec<(usize, SymbolId, Vec<Action>)>,
    pub rows: BTreeSet<usize>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Cells holding two or more actions. The shift of `$` that accompanies
/// an accept is not counted.
pub fn report_conflicts(t: &ActionTable) -> ConflictReport {
    let mut report = ConflictReport::default();
    for (s, c, actions) in t.iter() {
        let counted = if actions.contains(&Action::Accept) {
            actions
                .iter()
                .filter(|a| !matches!(a, Action::Shift(_)))
                .count()
        } else {
            actions.len()
        };
        if counted >= 2 {
            report.cells.push((s, c, actions.to_vec()));
            report.rows.insert(s);
        }
    }
    report
}

pub fn render_conflicts(r: &ConflictReport, g: &Grammar) -> String {
    if r.is_empty() {
        return "no conflicts\n".to_owned();
    }
    let mut out = String::new();
    for (s, c, actions) in &r.cells {
        let acts: Vec<String> = actions.iter().map(|a| a.display(g).to_string()).collect();
        writeln!(
            out,
            "state {s}, column {}: {}",
            g.name(*c),
            acts.join(" | ")
        )
        .unwrap();
    }
    let rows: Vec<String> = r.rows.iter().map(usize::to_string).collect();
    writeln!(out, "defective states: {}", rows.join(" ")).unwrap();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    /// Aligned grid, `-` for empty cells.
    Text,
    /// Line format readable by [`parse_table_dump`]:
    ///
    /// ```text
    /// table <states> <columns>
    /// initial <state>
    /// indirect <state> <symbol>
    /// cell <state> <symbol> shift <to>
    /// cell <state> <symbol> shuffle <from> <to> <sibling>...
    /// cell <state> <symbol> reduce seq|shuffle <rule index>
    /// cell <state> <symbol> accept
    /// ```
    Structured,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "text" => Ok(TableFormat::Text),
            "structured" => Ok(TableFormat::Structured),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

pub fn dump_table(t: &ActionTable, g: &Grammar, format: TableFormat) -> String {
    match format {
        TableFormat::Text => dump_grid(t, g),
        TableFormat::Structured => dump_structured(t, g),
    }
}

fn dump_grid(t: &ActionTable, g: &Grammar) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(t.columns.iter().map(|&c| g.name(c).to_owned()));
    rows.push(header);
    for s in 0..t.state_count() {
        let mut row = vec![s.to_string()];
        for &c in &t.columns {
            let acts = t.actions(s, c);
            row.push(if acts.is_empty() {
                "-".to_owned()
            } else {
                acts.iter()
                    .map(|a| a.display(g).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            });
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    out
}

fn dump_structured(t: &ActionTable, g: &Grammar) -> String {
    let mut out = String::new();
    writeln!(out, "table {} {}", t.state_count(), t.columns.len()).unwrap();
    writeln!(out, "initial {}", t.initial).unwrap();
    for (s, syms) in t.indirections.iter().enumerate() {
        for &a in syms {
            writeln!(out, "indirect {s} {}", g.name(a)).unwrap();
        }
    }
    for (s, c, actions) in t.iter() {
        for a in actions {
            let body = match a {
                Action::Shift(to) => format!("shift {to}"),
                Action::ShuffleShift { from, to, siblings } => {
                    let mut line = format!("shuffle {from} {to}");
                    for x in siblings {
                        write!(line, " {x}").unwrap();
                    }
                    line
                }
                Action::Reduce { item, .. } => match *item {
                    Item::Seq { rule, .. } => format!("reduce seq {rule}"),
                    Item::Shuffle { rule, .. } => format!("reduce shuffle {rule}"),
                    _ => unreachable!("only rule items reduce"),
                },
                Action::Accept => "accept".to_owned(),
            };
            writeln!(out, "cell {s} {} {body}", g.name(c)).unwrap();
        }
    }
    out
}

/// Reads back the structured format for the grammar it was dumped from.
pub fn parse_table_dump(text: &str, g: &Grammar) -> Result<ActionTable, Error> {
    let mut table: Option<ActionTable> = None;
    for (n, line) in text.lines().enumerate() {
        let err = |message: &str| Error::TableDump {
            line: n + 1,
            message: message.to_owned(),
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> Result<usize, Error> {
            words
                .get(i)
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| err("expected a number"))
        };
        match words.first().copied() {
            None => continue,
            Some("table") => table = Some(ActionTable::empty(num(1)?, g)),
            Some("initial") => {
                table.as_mut().ok_or_else(|| err("missing header"))?.initial = num(1)?
            }
            Some("indirect") => {
                let t = table.as_mut().ok_or_else(|| err("missing header"))?;
                let state = num(1)?;
                let sym = words
                    .get(2)
                    .and_then(|w| g.lookup(w))
                    .ok_or_else(|| err("unknown symbol"))?;
                t.indirections
                    .get_mut(state)
                    .ok_or_else(|| err("state out of range"))?
                    .push(sym);
            }
            Some("cell") => {
                let t = table.as_mut().ok_or_else(|| err("missing header"))?;
                let state = num(1)?;
                if state >= t.state_count() {
                    return Err(err("state out of range"));
                }
                let sym = words
                    .get(2)
                    .and_then(|w| g.lookup(w))
                    .ok_or_else(|| err("unknown symbol"))?;
                let action = match words.get(3).copied() {
                    Some("shift") => Action::Shift(num(4)?),
                    Some("shuffle") => Action::ShuffleShift {
                        from: num(4)?,
                        to: num(5)?,
                        siblings: (6..words.len()).map(num).collect::<Result<_, _>>()?,
                    },
                    Some("reduce") => {
                        let rule = num(5)?;
                        let item = match words.get(4).copied() {
                            Some("seq") if rule < g.seq_rules().len() => Item::Seq {
                                rule,
                                dot: g.seq_rules()[rule].rhs.len(),
                            },
                            Some("shuffle") if rule < g.shuffle_rules().len() => Item::Shuffle {
                                rule,
                                remaining: 0,
                                done: true,
                            },
                            _ => return Err(err("bad reduce")),
                        };
                        Action::Reduce {
                            lhs: item.lhs(g).expect("rule item"),
                            pop: item.pop_count(g),
                            item,
                        }
                    }
                    Some("accept") => Action::Accept,
                    _ => return Err(err("unknown action")),
                };
                t.add(state, sym, action);
            }
            Some(_) => return Err(err("unknown line")),
        }
    }
    table.ok_or(Error::TableDump {
        line: 0,
        message: "empty dump".to_owned(),
    })
}
