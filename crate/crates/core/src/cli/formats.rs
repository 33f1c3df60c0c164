//! Line-oriented text formats.
//!
//! * `.3p` instance: `s B` on the first line, then the `3s` numbers.
//! * `.brd` board: `W H`, then `H` rows of `#`/`.`, top row first.
//! * `.seq` sequence: whitespace-separated piece tokens.
//! * `.trc` trace: one `KIND orient col` per line.
//! * `.part` partition: whitespace-separated bucket indices, one per number.
//!
//! `#` starts a comment, except in board rows where it is a filled cell; a
//! board comment line is `#` followed by whitespace. Two comments carry data:
//! a board's `# cleared=N` and a trace line's trailing `# PHASE`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::certify::{Partition, Phase, Trace};
use crate::engine::{piece_cells, Board, Orientation, PieceKind, Placement};
use crate::reduction::Instance3P;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments removed, paired with 1-based line numbers
/// and the comment text.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str, Option<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
            None => (raw, None),
        };
        let body = body.trim();
        (!body.is_empty()).then_some((i + 1, body, comment))
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| err(line, format!("expected {what}, found {tok:?}")))
}

pub fn parse_instance(text: &str) -> Result<Instance3P, FormatError> {
    let mut it = lines(text);
    let (ln, header, _) = it.next().ok_or_else(|| err(1, "empty instance file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(err(ln, format!("header must be \"s B\", found {header:?}")));
    }
    let subsets = parse_num(ln, toks[0], "subset count s")?;
    let target = parse_num(ln, toks[1], "target B")?;
    let mut numbers = Vec::new();
    for (ln, body, _) in it {
        for tok in body.split_whitespace() {
            numbers.push(parse_num(ln, tok, "integer")?);
        }
    }
    Ok(Instance3P::new(subsets, target, numbers))
}

pub fn emit_instance(inst: &Instance3P) -> String {
    let nums: Vec<String> = inst.numbers.iter().map(|n| n.to_string()).collect();
    format!("{} {}\n{}\n", inst.subsets, inst.target, nums.join(" "))
}

/// Board lines: blank lines and `# ...` comments dropped, the header's
/// trailing comment stripped.
fn board_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let t = raw.trim();
        let comment = t.starts_with('#') && t[1..].starts_with(char::is_whitespace);
        (!t.is_empty() && !comment).then_some((i + 1, t))
    })
}

pub fn parse_board(text: &str) -> Result<Board, FormatError> {
    let mut cleared = 0;
    for (i, raw) in text.lines().enumerate() {
        if let Some(v) = raw.trim().strip_prefix("# cleared=") {
            cleared = parse_num(i + 1, v.trim(), "cleared row count")?;
        }
    }
    let mut it = board_lines(text);
    let (ln, header) = it.next().ok_or_else(|| err(1, "empty board file"))?;
    let header = header.split('#').next().unwrap_or("");
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(err(ln, format!("header must be \"W H\", found {header:?}")));
    }
    let width: usize = parse_num(ln, toks[0], "width")?;
    let height: usize = parse_num(ln, toks[1], "height")?;
    let rows: Vec<(usize, &str)> = it.collect();
    if rows.len() != height {
        return Err(err(ln, format!("expected {height} rows, found {}", rows.len())));
    }
    let mut cells = Vec::new();
    for (i, &(ln, row)) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(err(
                ln,
                format!("row has {} cells, expected {width}", row.chars().count()),
            ));
        }
        let r = height - 1 - i;
        for (c, ch) in row.chars().enumerate() {
            match ch {
                '#' => cells.push((c, r)),
                '.' => {}
                other => return Err(err(ln, format!("unexpected cell character {other:?}"))),
            }
        }
    }
    Board::from_cells(width, height, cells)
        .map(|b| b.with_cleared_total(cleared))
        .map_err(|e| err(ln, e.to_string()))
}

pub fn emit_board(board: &Board) -> String {
    let mut out = format!("{} {}\n", board.width(), board.height());
    if board.cleared_total() > 0 {
        let _ = writeln!(out, "# cleared={}", board.cleared_total());
    }
    for r in (0..board.height()).rev() {
        out.extend((0..board.width()).map(|c| if board.is_filled(c, r) { '#' } else { '.' }));
        out.push('\n');
    }
    out
}

pub fn parse_sequence(text: &str) -> Result<Vec<PieceKind>, FormatError> {
    let mut seq = Vec::new();
    for (ln, body, _) in lines(text) {
        for tok in body.split_whitespace() {
            seq.push(
                tok.parse()
                    .map_err(|e: crate::engine::UnknownPiece| err(ln, e.to_string()))?,
            );
        }
    }
    Ok(seq)
}

pub fn emit_sequence(seq: &[PieceKind]) -> String {
    let toks: Vec<&str> = seq.iter().map(|k| k.token()).collect();
    format!("{}\n", toks.join(" "))
}

pub fn parse_trace(text: &str) -> Result<Trace, FormatError> {
    let mut trace = Trace::default();
    for (ln, body, comment) in lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(err(ln, format!("expected \"KIND orient col\", found {body:?}")));
        }
        let kind: PieceKind = toks[0]
            .parse()
            .map_err(|e: crate::engine::UnknownPiece| err(ln, e.to_string()))?;
        let orient = Orientation(parse_num(ln, toks[1], "orientation index")?);
        piece_cells(kind, orient).map_err(|e| err(ln, e.to_string()))?;
        let col = parse_num(ln, toks[2], "column")?;
        trace.placements.push(Placement { kind, orient, col });
        trace.phases.push(comment.and_then(|c| c.parse::<Phase>().ok()));
    }
    Ok(trace)
}

pub fn emit_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for (i, p) in trace.placements.iter().enumerate() {
        match trace.phase(i) {
            Some(phase) => {
                let _ = writeln!(out, "{p} # {phase}");
            }
            None => {
                let _ = writeln!(out, "{p}");
            }
        }
    }
    out
}

pub fn parse_partition(text: &str) -> Result<Partition, FormatError> {
    let mut assign = Vec::new();
    for (ln, body, _) in lines(text) {
        for tok in body.split_whitespace() {
            assign.push(parse_num(ln, tok, "bucket index")?);
        }
    }
    Ok(Partition::new(assign))
}

pub fn emit_partition(p: &Partition) -> String {
    let toks: Vec<String> = p.assign.iter().map(|b| b.to_string()).collect();
    format!("{}\n", toks.join(" "))
}
