//! Command-line front end. Every command writes to caller-supplied streams and
//! returns an exit code: 0 success, 1 a well-formed negative answer, 2 usage,
//! parse or I/O errors.

pub mod formats;
pub mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::certify::{self, verify_trace, FailureKind, Partition, Trace};
use crate::engine::{Board, PieceKind};
use crate::gadgets::check_lemma;
use crate::reduction::{self, Instance3P, Layout, Mode};
use crate::solve::{search_clearable, solve_3partition, SearchConfig, SearchVerdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const LEMMAS: std::ops::RangeInclusive<u32> = 5..=10;

#[derive(Debug, Parser)]
#[command(
    name = "hdtetris",
    version,
    about = "Hard-drop Tetris clearing and the 3-PARTITION reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct ModeArgs {
    /// Require exactly 3s numbers, each strictly between B/4 and B/2.
    #[arg(long, conflicts_with = "lax")]
    pub strict: bool,
    /// Only require positive numbers summing to sB (the default).
    #[arg(long)]
    pub lax: bool,
}

impl ModeArgs {
    fn mode(self) -> Mode {
        if self.strict {
            Mode::Strict
        } else {
            Mode::Lax
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance file.
    Validate {
        instance: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Build the reduction board and sequence and print the cell budget.
    Build {
        instance: PathBuf,
        #[arg(long)]
        board: Option<PathBuf>,
        #[arg(long)]
        seq: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Turn a partition into a clearing trace and replay it.
    Certify {
        instance: PathBuf,
        #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
        partition: Option<PathBuf>,
        /// Find a partition with the backtracking solver first.
        #[arg(long)]
        auto: bool,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Solve the partition instance directly.
    Solve { instance: PathBuf },
    /// Enumerate gadget placements and check the local claims.
    Lemmas {
        #[arg(long, value_parser = clap::value_parser!(u32).range(5..=10))]
        lemma: Option<u32>,
        #[arg(long, default_value_t = 1)]
        lookahead: usize,
    },
    /// Print a board.
    Render { board: PathBuf },
    /// Replay a trace on a board.
    Simulate {
        board: PathBuf,
        trace: PathBuf,
        /// Check the trace against this sequence and require a clean board.
        #[arg(long)]
        seq: Option<PathBuf>,
        /// Print the board after every placement.
        #[arg(long)]
        step: bool,
    },
    /// Search for a clearing sequence of drops.
    Search {
        board: PathBuf,
        seq: PathBuf,
        /// Enable layout-based pruning; the layout is inferred from the board size.
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

/// Failure that maps to [`EXIT_USAGE`].
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type CmdResult = Result<i32, Fatal>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fatal> {
    fs::write(path, text).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn with_path<T, E: std::fmt::Display>(path: &Path, r: Result<T, E>) -> Result<T, Fatal> {
    r.map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance3P, Fatal> {
    with_path(path, formats::parse_instance(&read(path)?))
}

fn load_board(path: &Path) -> Result<Board, Fatal> {
    with_path(path, formats::parse_board(&read(path)?))
}

fn load_sequence(path: &Path) -> Result<Vec<PieceKind>, Fatal> {
    with_path(path, formats::parse_sequence(&read(path)?))
}

fn load_trace(path: &Path) -> Result<Trace, Fatal> {
    with_path(path, formats::parse_trace(&read(path)?))
}

fn load_partition(path: &Path) -> Result<Partition, Fatal> {
    with_path(path, formats::parse_partition(&read(path)?))
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { instance, mode } => validate(&instance, mode.mode(), out),
        Command::Build {
            instance,
            board,
            seq,
            mode,
        } => build(&instance, board.as_deref(), seq.as_deref(), mode.mode(), out),
        Command::Certify {
            instance,
            partition,
            auto: _,
            trace,
            mode,
        } => certify_cmd(&instance, partition.as_deref(), trace.as_deref(), mode.mode(), out),
        Command::Solve { instance } => solve(&instance, out),
        Command::Lemmas { lemma, lookahead } => lemmas(lemma, lookahead, out),
        Command::Render { board } => {
            out.write_all(render::render_board(&load_board(&board)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            board,
            trace,
            seq,
            step,
        } => simulate(&board, &trace, seq.as_deref(), step, out),
        Command::Search {
            board,
            seq,
            prune,
            budget,
            workers,
            trace,
        } => search(&board, &seq, prune, budget, workers, trace.as_deref(), out),
    }
}

fn validate(path: &Path, mode: Mode, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(path)?;
    match inst.validate(mode) {
        Ok(()) => {
            writeln!(out, "valid: {inst}")?;
            Ok(EXIT_OK)
        }
        Err(violations) => {
            writeln!(out, "invalid: {inst}")?;
            for v in violations {
                writeln!(out, "  {v}")?;
            }
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn build(path: &Path, board: Option<&Path>, seq: Option<&Path>, mode: Mode, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(path)?;
    let red = reduction::reduce(&inst, mode)?;
    let report = reduction::budget_report(&inst, mode)?;
    writeln!(
        out,
        "board {}x{}, {} pieces",
        red.board.width(),
        red.board.height(),
        red.sequence.len()
    )?;
    writeln!(out, "{report}")?;
    if let Some(p) = board {
        write_file(p, &formats::emit_board(&red.board))?;
    }
    if let Some(p) = seq {
        write_file(p, &formats::emit_sequence(&red.sequence))?;
    }
    Ok(EXIT_OK)
}

fn certify_cmd(
    path: &Path,
    partition: Option<&Path>,
    trace_out: Option<&Path>,
    mode: Mode,
    out: &mut dyn Write,
) -> CmdResult {
    let inst = load_instance(path)?;
    inst.validate(mode).map_err(reduction::ReductionError::Invalid)?;
    let part = match partition {
        Some(p) => load_partition(p)?,
        None => match solve_3partition(&inst)? {
            Some(p) => {
                writeln!(out, "partition: {}", formats::emit_partition(&p).trim_end())?;
                p
            }
            None => {
                writeln!(out, "no partition exists")?;
                return Ok(EXIT_NEGATIVE);
            }
        },
    };
    if let Err(e) = part.validate(&inst, mode) {
        writeln!(out, "partition rejected: {e}")?;
        return Ok(EXIT_NEGATIVE);
    }
    let cert = certify::certify(&inst, &part, mode)?;
    if let Some(p) = trace_out {
        write_file(p, &formats::emit_trace(&cert.trace))?;
    }
    let v = &cert.verdict;
    match &v.failure {
        None => {
            writeln!(out, "placed {} pieces", v.placed)?;
            writeln!(out, "cleared {} lines", v.cleared_lines)?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            writeln!(out, "trace failed: {f}")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn solve(path: &Path, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(path)?;
    match solve_3partition(&inst)? {
        Some(p) => {
            for (b, members) in p.buckets(inst.subsets).iter().enumerate() {
                let vals: Vec<String> = members.iter().map(|&i| inst.numbers[i].to_string()).collect();
                writeln!(out, "bucket {b}: {}", vals.join(" + "))?;
            }
            write!(out, "{}", formats::emit_partition(&p))?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "no partition exists")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn lemmas(which: Option<u32>, lookahead: usize, out: &mut dyn Write) -> CmdResult {
    let ids: Vec<u32> = match which {
        Some(l) => vec![l],
        None => LEMMAS.collect(),
    };
    let mut all_hold = true;
    for id in ids {
        let report = check_lemma(id, lookahead)?;
        writeln!(out, "{report}")?;
        all_hold &= report.holds;
    }
    Ok(if all_hold { EXIT_OK } else { EXIT_NEGATIVE })
}

fn simulate(board: &Path, trace: &Path, seq: Option<&Path>, step: bool, out: &mut dyn Write) -> CmdResult {
    let start = load_board(board)?;
    let trace = load_trace(trace)?;
    let mut cur = start.clone();
    for (i, p) in trace.placements.iter().enumerate() {
        let cleared = match cur.place(*p) {
            Ok(c) => c,
            Err(e) => {
                writeln!(out, "step {i}: {p}: {e}")?;
                return Ok(EXIT_NEGATIVE);
            }
        };
        if step {
            match trace.phase(i) {
                Some(ph) => writeln!(out, "step {i}: {p} [{ph}] cleared={cleared}")?,
                None => writeln!(out, "step {i}: {p} cleared={cleared}")?,
            }
            out.write_all(render::render_board(&cur).as_bytes())?;
        }
    }
    writeln!(out, "final")?;
    out.write_all(render::render_board(&cur).as_bytes())?;
    writeln!(out, "cleared={}", cur.cleared_total() - start.cleared_total())?;
    let Some(seq) = seq else { return Ok(EXIT_OK) };
    let verdict = verify_trace(&start, &load_sequence(seq)?, &trace);
    match verdict.failure {
        None => {
            writeln!(out, "sequence consumed, board empty")?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            if let FailureKind::KindMismatch { .. } = f.kind {
                writeln!(out, "trace does not follow the sequence: {f}")?;
            } else {
                writeln!(out, "not a clearing trace: {f}")?;
            }
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn search(
    board: &Path,
    seq: &Path,
    prune: bool,
    budget: u64,
    workers: usize,
    trace_out: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let board = load_board(board)?;
    let seq = load_sequence(seq)?;
    let mut config = if prune {
        let layout = Layout::infer(board.width(), board.height()).ok_or_else(|| {
            Fatal(format!(
                "--prune: no reduction layout is {}x{}",
                board.width(),
                board.height()
            ))
        })?;
        SearchConfig::for_reduction(layout, budget)
    } else {
        SearchConfig {
            node_budget: budget,
            ..SearchConfig::default()
        }
    };
    config.parallel_width = workers.max(1);
    let verdict = search_clearable(&board, &seq, &config)?;
    writeln!(out, "{} ({} nodes)", verdict.label(), verdict.nodes())?;
    match verdict {
        SearchVerdict::Clearable { witness, .. } => {
            if let Some(p) = trace_out {
                write_file(p, &formats::emit_trace(&witness))?;
            } else {
                write!(out, "{}", formats::emit_trace(&witness))?;
            }
            Ok(EXIT_OK)
        }
        SearchVerdict::Unclearable { .. } => Ok(EXIT_NEGATIVE),
        SearchVerdict::BudgetExceeded { frontier, .. } => {
            writeln!(out, "frontier depth {frontier}")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}
