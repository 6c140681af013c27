//! Line-oriented grammar files.
//!
//! ```text
//! # comment
//! start S
//! S => T || U
//! T -> W p r
//! A -> ~
//! ```
//!
//! Tokens are separated by whitespace. `~` is the empty right-hand side.
//! Symbols that appear on some left-hand side are nonterminals; all other
//! tokens are terminals. Symbol ids follow first appearance in the file.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Grammar, GrammarBuilder};
use crate::error::Error;

pub const EPSILON_TOKEN: &str = "~";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct ParsedGrammar {
    pub grammar: Grammar,
    pub warnings: Vec<ParseWarning>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, line.len()));
    }
    out.into_iter()
        .map(|(s, e)| Token {
            text: &line[s..e],
            column: line[..s].chars().count() + 1,
        })
        .collect()
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

enum Line<'a> {
    Start(&'a str),
    Seq(&'a str, Vec<&'a str>),
    Shuffle(&'a str, Vec<&'a str>),
}

fn parse_line<'a>(lineno: usize, toks: &[Token<'a>]) -> Result<Line<'a>, Error> {
    let is_reserved = |t: &str| matches!(t, "->" | "=>" | "||" | EPSILON_TOKEN);
    if toks.len() >= 2 && (toks[1].text == "->" || toks[1].text == "=>") {
        let lhs = &toks[0];
        if is_reserved(lhs.text) {
            return Err(syntax(
                lineno,
                lhs.column,
                format!("`{}` cannot be a left-hand side", lhs.text),
            ));
        }
        let rest = &toks[2..];
        if toks[1].text == "->" {
            if rest.is_empty() {
                return Err(syntax(
                    lineno,
                    toks[1].column + 2,
                    "empty right-hand side; write `~` for epsilon",
                ));
            }
            if rest.len() == 1 && rest[0].text == EPSILON_TOKEN {
                return Ok(Line::Seq(lhs.text, Vec::new()));
            }
            if let Some(t) = rest.iter().find(|t| is_reserved(t.text)) {
                return Err(syntax(
                    lineno,
                    t.column,
                    format!("unexpected `{}` in sequence rule", t.text),
                ));
            }
            return Ok(Line::Seq(lhs.text, rest.iter().map(|t| t.text).collect()));
        }
        // operand (|| operand)*
        if rest.is_empty() {
            return Err(syntax(
                lineno,
                toks[1].column + 2,
                "shuffle rule needs at least one operand",
            ));
        }
        let mut operands = Vec::new();
        for (i, t) in rest.iter().enumerate() {
            let want_operand = i % 2 == 0;
            match (want_operand, t.text) {
                (true, txt) if !is_reserved(txt) => operands.push(txt),
                (false, "||") => {}
                (true, txt) => {
                    return Err(syntax(
                        lineno,
                        t.column,
                        format!("expected operand, found `{txt}`"),
                    ))
                }
                (false, txt) => {
                    return Err(syntax(
                        lineno,
                        t.column,
                        format!("expected `||`, found `{txt}`"),
                    ))
                }
            }
        }
        if rest.len().is_multiple_of(2) {
            let last = rest.last().unwrap();
            return Err(syntax(lineno, last.column, "dangling `||`"));
        }
        return Ok(Line::Shuffle(lhs.text, operands));
    }
    if toks[0].text == "start" {
        return match toks.len() {
            2 if !is_reserved(toks[1].text) => Ok(Line::Start(toks[1].text)),
            1 => Err(syntax(
                lineno,
                toks[0].column + 5,
                "missing symbol after `start`",
            )),
            _ => Err(syntax(
                lineno,
                toks.get(2).map_or(toks[1].column, |t| t.column),
                "expected `start <nonterminal>`",
            )),
        };
    }
    let col = toks.get(1).map_or(toks[0].column, |t| t.column);
    Err(syntax(
        lineno,
        col,
        "expected `->` or `=>` after the left-hand side",
    ))
}

/// Parses the grammar text format. Duplicate rules are dropped with a
/// warning; semantic problems are left for [`Grammar::validate`].
pub fn parse_grammar_text(text: &str) -> Result<ParsedGrammar, Error> {
    let mut builder = GrammarBuilder::default();
    let mut warnings = Vec::new();
    let mut start_line: Option<usize> = None;
    let mut seen_seq: HashSet<(String, Vec<String>)> = HashSet::new();
    let mut seen_shuffle: HashSet<(String, Vec<String>)> = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        match parse_line(lineno, &toks)? {
            Line::Start(s) => {
                if let Some(prev) = start_line {
                    return Err(syntax(
                        lineno,
                        toks[0].column,
                        format!("second start declaration (first on line {prev})"),
                    ));
                }
                start_line = Some(lineno);
                builder = builder.start(s);
            }
            Line::Seq(lhs, rhs) => {
                let key = (lhs.to_owned(), rhs.iter().map(|s| s.to_string()).collect());
                if !seen_seq.insert(key) {
                    warnings.push(ParseWarning {
                        line: lineno,
                        message: format!("duplicate rule for `{lhs}` ignored"),
                    });
                    continue;
                }
                builder = builder.seq(lhs, &rhs);
            }
            Line::Shuffle(lhs, ops) => {
                let mut uniq: Vec<&str> = Vec::new();
                for op in ops {
                    if uniq.contains(&op) {
                        warnings.push(ParseWarning {
                            line: lineno,
                            message: format!("repeated shuffle operand `{op}` ignored"),
                        });
                    } else {
                        uniq.push(op);
                    }
                }
                let mut key_ops: Vec<String> = uniq.iter().map(|s| s.to_string()).collect();
                key_ops.sort();
                if !seen_shuffle.insert((lhs.to_owned(), key_ops)) {
                    warnings.push(ParseWarning {
                        line: lineno,
                        message: format!("duplicate shuffle rule for `{lhs}` ignored"),
                    });
                    continue;
                }
                builder = builder.shuffle(lhs, &uniq);
            }
        }
    }
    if start_line.is_none() {
        return Err(Error::MissingStart);
    }
    Ok(ParsedGrammar {
        grammar: builder.build()?,
        warnings,
    })
}

/// Canonical text: the start line, then shuffle rules, then sequence rules,
/// each in rule order.
pub fn serialize_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    writeln!(out, "start {}", g.name(g.start())).unwrap();
    for r in g.shuffle_rules() {
        let ops: Vec<&str> = r.operands.iter().map(|&s| g.name(s)).collect();
        writeln!(out, "{} => {}", g.name(r.lhs), ops.join(" || ")).unwrap();
    }
    for r in g.seq_rules() {
        if r.rhs.is_empty() {
            writeln!(out, "{} -> {}", g.name(r.lhs), EPSILON_TOKEN).unwrap();
        } else {
            let rhs: Vec<&str> = r.rhs.iter().map(|&s| g.name(s)).collect();
            writeln!(out, "{} -> {}", g.name(r.lhs), rhs.join(" ")).unwrap();
        }
    }
    out
}
