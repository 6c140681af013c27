//! The `sglr` command line.
//!
//! Exit codes: 0 success or accept, 1 reject or invalid grammar, 2 usage
//! or IO error, 3 a search or parse budget ran out, 4 the engines or the
//! oracle disagree.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::automaton::{dump_dot, dump_text, AutomatonRef};
use crate::cactus::{self, render_trace, ParseOptions, Verdict};
use crate::diff::{run_diff, DiffOptions, EngineChoice};
use crate::grammar::{parse_grammar_text, Grammar};
use crate::gss::{self, GssOptions};
use crate::rewrite::{
    derives, derives_marked, enumerate_language, enumerate_marked_language, Budget, Membership,
};
use crate::table::{dump_table, render_conflicts, report_conflicts, TableFormat};
use crate::{Compiled, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "sglr",
    version,
    about = "GLR parsing for context-free grammars with shuffle rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a grammar file.
    Check { grammar: PathBuf },
    /// Print the handle-finding automaton.
    Automaton {
        grammar: PathBuf,
        /// Print the item-level automaton instead of the subset automaton.
        #[arg(long, conflicts_with = "dfa")]
        nfa: bool,
        #[arg(long)]
        dfa: bool,
        #[arg(long, value_enum, default_value_t = AutomatonFormat::Text)]
        format: AutomatonFormat,
    },
    /// Print the action table.
    Tables {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t = TablesFormat::Text)]
        format: TablesFormat,
        /// Also list cells and rows holding more than one action.
        #[arg(long)]
        conflicts: bool,
    },
    /// Parse one input string.
    Parse {
        grammar: PathBuf,
        /// Terminals, one character each, or separated by whitespace.
        input: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Reference)]
        engine: EngineArg,
        /// Print the steps of an accepting run (reference engine).
        #[arg(long)]
        trace: bool,
        /// Print upper and lower graph sizes after the input (shared-structure engine).
        #[arg(long)]
        stats: bool,
        /// Print the upper and lower graphs after the input (shared-structure engine).
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        limits: ParseLimits,
    },
    /// Compare both engines with the rewriting oracle.
    Diff {
        grammar: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, value_enum, default_value_t = EngineArg::Both)]
        engine: EngineArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random strings added to the non-member sample.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        search: SearchLimits,
        #[command(flatten)]
        limits: ParseLimits,
    },
    /// List the words of the language up to a length.
    Enumerate {
        grammar: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Use the marked rewriting relation.
        #[arg(long)]
        marked: bool,
        #[command(flatten)]
        search: SearchLimits,
    },
    /// Decide membership with the rewriting oracle.
    Derive {
        grammar: PathBuf,
        input: String,
        #[arg(long)]
        marked: bool,
        #[command(flatten)]
        search: SearchLimits,
    },
}

#[derive(Args, Debug)]
struct SearchLimits {
    /// Sentential forms the oracle may visit.
    #[arg(long, default_value_t = Budget::default().max_forms)]
    max_forms: usize,
    /// Nonterminals a form may carry beyond the length bound.
    #[arg(long)]
    slack: Option<usize>,
}

impl SearchLimits {
    fn budget(&self) -> Budget {
        Budget {
            max_forms: self.max_forms,
            slack: self.slack,
        }
    }
}

#[derive(Args, Debug)]
struct ParseLimits {
    /// Configurations the reference engine may hold per symbol.
    #[arg(long, default_value_t = ParseOptions::default().max_configs)]
    max_configs: usize,
    /// Stack tops one branch may reach by reductions in the
    /// shared-structure engine.
    #[arg(long, default_value_t = GssOptions::default().max_closure)]
    max_closure: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AutomatonFormat {
    Text,
    Dot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TablesFormat {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Reference,
    Gss,
    Both,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Reference => EngineChoice::Reference,
            EngineArg::Gss => EngineChoice::Gss,
            EngineArg::Both => EngineChoice::Both,
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Runs the command line on `args` (program name first) and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::UnknownTerminal(_) | Error::UnknownFormat(_) => EXIT_USAGE,
                _ => EXIT_REJECT,
            }
        }
    }
}

fn load_grammar(path: &Path) -> Result<Grammar, Error> {
    let text = std::fs::read_to_string(path)?;
    let parsed = parse_grammar_text(&text)?;
    for w in &parsed.warnings {
        eprintln!("warning: line {}: {}", w.line, w.message);
    }
    Ok(parsed.grammar)
}

fn compile(path: &Path) -> Result<Compiled, Error> {
    let g = load_grammar(path)?;
    let report = g.validate();
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Compiled::new(&g)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Accept => EXIT_OK,
        Verdict::Reject => EXIT_REJECT,
        Verdict::Exhausted => EXIT_EXHAUSTED,
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Accept => "accept",
        Verdict::Reject => "reject",
        Verdict::Exhausted => "exhausted",
    }
}

fn membership_code(m: Membership) -> (i32, &'static str) {
    match m {
        Membership::Member => (EXIT_OK, "member"),
        Membership::NonMember => (EXIT_REJECT, "non-member"),
        Membership::Exhausted => (EXIT_EXHAUSTED, "exhausted"),
    }
}

fn execute(command: Command) -> Result<i32, Error> {
    match command {
        Command::Check { grammar } => {
            let g = load_grammar(&grammar)?;
            let report = g.validate();
            print!("{report}");
            if report.is_valid() {
                println!("ok");
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_REJECT)
            }
        }
        Command::Automaton {
            grammar,
            nfa,
            dfa: _,
            format,
        } => {
            let c = compile(&grammar)?;
            let a = if nfa {
                AutomatonRef::Nfa(&c.nfa)
            } else {
                AutomatonRef::Dfa(&c.dfa)
            };
            match format {
                AutomatonFormat::Text => print!("{}", dump_text(a, &c.grammar)),
                AutomatonFormat::Dot => print!("{}", dump_dot(a, &c.grammar)),
            }
            Ok(EXIT_OK)
        }
        Command::Tables {
            grammar,
            format,
            conflicts,
        } => {
            let c = compile(&grammar)?;
            let format = match format {
                TablesFormat::Text => TableFormat::Text,
                TablesFormat::Structured => TableFormat::Structured,
            };
            print!("{}", dump_table(&c.table, &c.grammar, format));
            if conflicts {
                print!(
                    "{}",
                    render_conflicts(&report_conflicts(&c.table), &c.grammar)
                );
            }
            Ok(EXIT_OK)
        }
        Command::Parse {
            grammar,
            input,
            engine,
            trace,
            stats,
            dump,
            limits,
        } => {
            let c = compile(&grammar)?;
            let word = c.grammar.tokenize(&input)?;
            let engine = EngineChoice::from(engine);
            let mut verdicts = Vec::new();
            if matches!(engine, EngineChoice::Reference | EngineChoice::Both) {
                let options = ParseOptions {
                    max_configs: limits.max_configs,
                    trace,
                };
                let r = cactus::parse(&c.table, &word, options);
                if let Some(events) = &r.trace {
                    print!("{}", render_trace(events, &c.grammar));
                }
                verdicts.push(("reference", r.verdict));
            }
            if matches!(engine, EngineChoice::Gss | EngineChoice::Both) {
                let options = GssOptions {
                    max_closure: limits.max_closure,
                };
                let r = gss::parse(&c.table, &word, options);
                if stats || dump {
                    let mut e = gss::Engine::new(&c.table, options);
                    let mut state = e.init();
                    for &sym in &word {
                        state = e.advance(&state, sym);
                    }
                    if dump {
                        print!("{}", gss::dump(&state));
                    }
                    if stats {
                        let s = e.stats(&state);
                        println!(
                            "upper {} (or {}, and {}, leaves {}) lower {} bindings {} controllers {}",
                            s.upper_nodes, s.or_nodes, s.and_nodes, s.leaves, s.lower_nodes, s.bindings, s.controllers
                        );
                    }
                }
                verdicts.push(("gss", r.verdict));
            }
            if verdicts.windows(2).any(|w| w[0].1 != w[1].1) {
                let parts: Vec<String> = verdicts
                    .iter()
                    .map(|(name, v)| format!("{name}={}", verdict_name(*v)))
                    .collect();
                println!("mismatch {}", parts.join(" "));
                return Ok(EXIT_MISMATCH);
            }
            let v = verdicts[0].1;
            println!("{}", verdict_name(v));
            Ok(verdict_code(v))
        }
        Command::Diff {
            grammar,
            max_len,
            engine,
            seed,
            samples,
            search,
            limits,
        } => {
            let c = compile(&grammar)?;
            let options = DiffOptions {
                max_len,
                engine: engine.into(),
                seed,
                random_samples: samples,
                budget: search.budget(),
                parse: ParseOptions {
                    max_configs: limits.max_configs,
                    trace: false,
                },
                gss: GssOptions {
                    max_closure: limits.max_closure,
                },
            };
            let report = match run_diff(&c, &options) {
                Ok(r) => r,
                Err(e) => {
                    println!("oracle {e}");
                    return Ok(EXIT_EXHAUSTED);
                }
            };
            print!("{}", report.display(&c));
            Ok(if report.mismatches().next().is_some() {
                EXIT_MISMATCH
            } else if report.exhausted().next().is_some() {
                EXIT_EXHAUSTED
            } else {
                EXIT_OK
            })
        }
        Command::Enumerate {
            grammar,
            max_len,
            marked,
            search,
        } => {
            let g = load_grammar(&grammar)?;
            let words = if marked {
                enumerate_marked_language(&g, max_len, search.budget())
            } else {
                enumerate_language(&g, max_len, search.budget())
            };
            match words {
                Ok(words) => {
                    let mut words: Vec<Vec<_>> = words.into_iter().collect();
                    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
                    for w in &words {
                        println!("{}", g.render(w));
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(EXIT_EXHAUSTED)
                }
            }
        }
        Command::Derive {
            grammar,
            input,
            marked,
            search,
        } => {
            let g = load_grammar(&grammar)?;
            let word = g.tokenize(&input)?;
            let m = if marked {
                derives_marked(&g, &word, search.budget())
            } else {
                derives(&g, &word, search.budget())
            };
            let (code, name) = membership_code(m);
            println!("{name}");
            Ok(code)
        }
    }
}
