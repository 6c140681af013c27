//! Differential testing of the parsers against the rewriting oracle.
//!
//! The oracle enumerates every word up to a length bound. Members are
//! checked for acceptance; non-members are drawn from single-symbol
//! mutations of members and from seeded random strings, all within the
//! bound so the enumeration classifies them exactly.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cactus::{self, ParseOptions, Verdict};
use crate::grammar::SymbolId;
use crate::gss::{self, GssOptions};
use crate::rewrite::{enumerate_language, Budget, Exhausted};
use crate::Compiled;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineChoice {
    Reference,
    Gss,
    Both,
}

impl EngineChoice {
    fn reference(self) -> bool {
        matches!(self, EngineChoice::Reference | EngineChoice::Both)
    }

    fn gss(self) -> bool {
        matches!(self, EngineChoice::Gss | EngineChoice::Both)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DiffOptions {
    pub max_len: usize,
    pub engine: EngineChoice,
    pub seed: u64,
    pub random_samples: usize,
    pub budget: Budget,
    pub parse: ParseOptions,
    pub gss: GssOptions,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions {
            max_len: 6,
            engine: EngineChoice::Both,
            seed: 0,
            random_samples: 1000,
            budget: Budget::default(),
            parse: ParseOptions::default(),
            gss: GssOptions::default(),
        }
    }
}

/// Verdicts for one word; `None` for an engine that was not run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub word: Vec<SymbolId>,
    pub member: bool,
    pub reference: Option<Verdict>,
    pub gss: Option<Verdict>,
}

impl Outcome {
    fn expected(&self) -> Verdict {
        if self.member {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    fn verdicts(&self) -> impl Iterator<Item = Verdict> + '_ {
        self.reference.iter().chain(self.gss.iter()).copied()
    }

    pub fn is_mismatch(&self) -> bool {
        self.verdicts()
            .any(|v| v != Verdict::Exhausted && v != self.expected())
    }

    pub fn is_exhausted(&self) -> bool {
        self.verdicts().any(|v| v == Verdict::Exhausted)
    }
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub members: usize,
    pub non_members: usize,
    pub outcomes: Vec<Outcome>,
}

impl DiffReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| o.is_mismatch())
    }

    pub fn exhausted(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| o.is_exhausted())
    }
}

/// All words obtained from `w` by swapping two adjacent symbols, deleting
/// one symbol, or inserting one terminal, limited to `max_len`.
pub fn mutations(
    w: &[SymbolId],
    terminals: &[SymbolId],
    max_len: usize,
) -> BTreeSet<Vec<SymbolId>> {
    let mut out = BTreeSet::new();
    for i in 0..w.len().saturating_sub(1) {
        let mut v = w.to_vec();
        v.swap(i, i + 1);
        out.insert(v);
    }
    for i in 0..w.len() {
        let mut v = w.to_vec();
        v.remove(i);
        out.insert(v);
    }
    if w.len() < max_len {
        for i in 0..=w.len() {
            for &t in terminals {
                let mut v = w.to_vec();
                v.insert(i, t);
                out.insert(v);
            }
        }
    }
    out
}

/// `count` words over `terminals` with lengths up to `max_len`.
pub fn random_words(
    terminals: &[SymbolId],
    max_len: usize,
    count: usize,
    seed: u64,
) -> Vec<Vec<SymbolId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            (0..len)
                .map(|_| terminals[rng.gen_range(0..terminals.len())])
                .collect()
        })
        .collect()
}

/// Runs the selected engines on one word.
pub fn check_word(c: &Compiled, word: &[SymbolId], member: bool, options: &DiffOptions) -> Outcome {
    Outcome {
        word: word.to_vec(),
        member,
        reference: options
            .engine
            .reference()
            .then(|| cactus::parse(&c.table, word, options.parse).verdict),
        gss: options
            .engine
            .gss()
            .then(|| gss::parse(&c.table, word, options.gss).verdict),
    }
}

pub fn run_diff(c: &Compiled, options: &DiffOptions) -> Result<DiffReport, Exhausted> {
    let language = enumerate_language(&c.source, options.max_len, options.budget)?;
    let terminals: Vec<SymbolId> = c.source.terminals().map(|s| s.id).collect();
    let mut others = BTreeSet::new();
    for w in &language {
        others.extend(mutations(w, &terminals, options.max_len));
    }
    if !terminals.is_empty() {
        others.extend(random_words(
            &terminals,
            options.max_len,
            options.random_samples,
            options.seed,
        ));
    }
    let non_members: Vec<Vec<SymbolId>> = others
        .into_iter()
        .filter(|w| !language.contains(w))
        .collect();
    let mut words: Vec<(Vec<SymbolId>, bool)> =
        language.iter().map(|w| (w.clone(), true)).collect();
    words.extend(non_members.iter().map(|w| (w.clone(), false)));
    let outcomes = words
        .par_iter()
        .map(|(w, member)| check_word(c, w, *member, options))
        .collect();
    Ok(DiffReport {
        members: language.len(),
        non_members: non_members.len(),
        outcomes,
    })
}

/// Report lines for a finished run.
pub struct ReportDisplay<'a> {
    report: &'a DiffReport,
    compiled: &'a Compiled,
}

impl DiffReport {
    pub fn display<'a>(&'a self, compiled: &'a Compiled) -> ReportDisplay<'a> {
        ReportDisplay {
            report: self,
            compiled,
        }
    }
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    match v {
        None => "-",
        Some(Verdict::Accept) => "accept",
        Some(Verdict::Reject) => "reject",
        Some(Verdict::Exhausted) => "exhausted",
    }
}

impl fmt::Display for ReportDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.report;
        writeln!(f, "members {}", r.members)?;
        writeln!(f, "non-members {}", r.non_members)?;
        for o in r.mismatches() {
            writeln!(
                f,
                "mismatch \"{}\" oracle={} reference={} gss={}",
                self.compiled.source.render(&o.word),
                if o.member { "member" } else { "non-member" },
                verdict_name(o.reference),
                verdict_name(o.gss),
            )?;
        }
        for o in r.exhausted() {
            writeln!(f, "exhausted \"{}\"", self.compiled.source.render(&o.word))?;
        }
        writeln!(f, "mismatches {}", r.mismatches().count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;

    #[test]
    fn mutations_stay_within_bound() {
        let w = vec![SymbolId(1), SymbolId(2)];
        let m = mutations(&w, &[SymbolId(1), SymbolId(2)], 2);
        assert!(m.contains(&vec![SymbolId(2), SymbolId(1)]));
        assert!(m.contains(&vec![SymbolId(1)]));
        assert!(m.iter().all(|v| v.len() <= 2));
    }

    #[test]
    fn random_words_are_seeded() {
        let t = [SymbolId(3), SymbolId(4)];
        assert_eq!(random_words(&t, 5, 20, 7), random_words(&t, 5, 20, 7));
        assert_ne!(random_words(&t, 5, 20, 7), random_words(&t, 5, 20, 8));
    }

    #[test]
    fn small_shuffle_has_no_mismatches() {
        let g = Grammar::builder()
            .start("S")
            .shuffle("S", &["A", "B"])
            .seq("A", &["a", "b"])
            .seq("B", &["c"])
            .build()
            .unwrap();
        let c = Compiled::new(&g).unwrap();
        let r = run_diff(
            &c,
            &DiffOptions {
                max_len: 4,
                ..DiffOptions::default()
            },
        )
        .unwrap();
        assert_eq!(r.members, 3);
        assert!(r.non_members > 0);
        assert_eq!(r.mismatches().count(), 0);
    }
}
