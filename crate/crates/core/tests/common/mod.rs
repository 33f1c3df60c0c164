//! Independent oracles shared by the integration tests. Nothing here calls
//! into the engine's own drop or enumeration code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hdtetris::engine::{piece_cells, Board, Orientation, PieceKind, Placement};
use rand::Rng;

/// Random board with a ragged surface, a few holes and no full row.
pub fn random_board(rng: &mut impl Rng, width: usize, height: usize) -> Board {
    let mut cells = BTreeSet::new();
    for c in 0..width {
        let h = rng.gen_range(0..=height / 2);
        for r in 0..h {
            if rng.gen_bool(0.85) {
                cells.insert((c, r));
            }
        }
    }
    for r in 0..height {
        if (0..width).all(|c| cells.contains(&(c, r))) {
            cells.remove(&(rng.gen_range(0..width), r));
        }
    }
    Board::from_cells(width, height, cells).expect("no full rows")
}

fn free(board: &Board, col: usize, row: usize) -> bool {
    row >= board.height() || !board.is_filled(col, row)
}

/// Resting base row found by lowering the piece one row at a time from above
/// the board. `None` if the piece does not fit horizontally.
pub fn descent_rest(board: &Board, kind: PieceKind, orient: u8, col: usize) -> Option<usize> {
    let cells = piece_cells(kind, Orientation(orient)).ok()?;
    if cells.iter().any(|&(dc, _)| col + dc >= board.width()) {
        return None;
    }
    let mut base = board.height() + 4;
    while base > 0 && cells.iter().all(|&(dc, dr)| free(board, col + dc, base - 1 + dr)) {
        base -= 1;
    }
    Some(base)
}

/// Every in-bounds (orientation, column) pair, found by trying all indices.
pub fn brute_placements(board: &Board, kind: PieceKind) -> BTreeSet<(u8, usize, bool)> {
    let mut out = BTreeSet::new();
    for o in 0..4u8 {
        let Ok(cells) = piece_cells(kind, Orientation(o)) else {
            continue;
        };
        let top = cells.iter().map(|c| c.1).max().unwrap();
        for col in 0..board.width() {
            if let Some(base) = descent_rest(board, kind, o, col) {
                out.insert((o, col, base + top >= board.height()));
            }
        }
    }
    out
}

/// Plain recursion over every legal drop; true if some order of play consumes
/// the whole sequence and leaves the board empty.
pub fn naive_clearable(board: &Board, seq: &[PieceKind]) -> bool {
    let Some((&kind, rest)) = seq.split_first() else {
        return board.is_empty();
    };
    for o in 0..4u8 {
        for col in 0..board.width() {
            if let Ok((next, _)) = board.apply_placement(Placement::new(kind, o, col)) {
                if naive_clearable(&next, rest) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn random_kind(rng: &mut impl Rng) -> PieceKind {
    PieceKind::ALL[rng.gen_range(0..PieceKind::ALL.len())]
}

/// Mini search instance, width at most 5 and at most 6 pieces. Half of them
/// come from reverse play: start with full rows and peel off pieces that could
/// have landed where they sit, so clearable cases actually occur.
pub fn mini_instance(rng: &mut impl Rng) -> (Board, Vec<PieceKind>) {
    loop {
        let width = rng.gen_range(2..=5);
        let n: usize = rng.gen_range(1..=6);
        if rng.gen_bool(0.5) {
            let seq: Vec<PieceKind> = (0..n).map(|_| random_kind(rng)).collect();
            let height = rng.gen_range(3..=6);
            return (random_board(rng, width, height), seq);
        }
        let rows = (4 * n).div_ceil(width);
        if let Some(found) = reverse_play(rng, width, rows, n) {
            return found;
        }
    }
}

fn reverse_play(rng: &mut impl Rng, width: usize, rows: usize, n: usize) -> Option<(Board, Vec<PieceKind>)> {
    let height = rows + 2;
    let mut filled: BTreeSet<(usize, usize)> = (0..rows).flat_map(|r| (0..width).map(move |c| (c, r))).collect();
    let mut seq = Vec::new();
    for _ in 0..n {
        let mut options = Vec::new();
        for kind in PieceKind::ALL {
            for o in 0..4u8 {
                let Ok(cells) = piece_cells(kind, Orientation(o)) else {
                    continue;
                };
                for col in 0..width {
                    for base in 0..rows {
                        let abs: Vec<(usize, usize)> = cells.iter().map(|&(dc, dr)| (col + dc, base + dr)).collect();
                        if abs.iter().all(|p| filled.contains(p)) {
                            options.push((kind, o, col, base, abs));
                        }
                    }
                }
            }
        }
        let mut legal = Vec::new();
        for (kind, o, col, base, abs) in options {
            let rest: BTreeSet<_> = filled.iter().copied().filter(|p| !abs.contains(p)).collect();
            // Intermediate states may hold full rows, so descend on the raw set.
            let cells = piece_cells(kind, Orientation(o)).unwrap();
            let mut b = height;
            while b > 0 && cells.iter().all(|&(dc, dr)| !rest.contains(&(col + dc, b - 1 + dr))) {
                b -= 1;
            }
            if b == base {
                legal.push((kind, rest));
            }
        }
        if legal.is_empty() {
            return None;
        }
        let (kind, rest) = legal.swap_remove(rng.gen_range(0..legal.len()));
        seq.push(kind);
        filled = rest;
    }
    seq.reverse();
    let board = Board::from_cells(width, height, filled).ok()?;
    Some((board, seq))
}
