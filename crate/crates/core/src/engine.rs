//! Hard-drop Tetris simulator.
//!
//! The player picks an orientation and a column while the piece is held in
//! the buffer rows; the piece then falls straight down and locks. There is no
//! sliding, tucking or rotation once the drop starts. Full rows are removed
//! immediately and the rows above shift down as whole rows (no settling of
//! floating blocks).
//!
//! Coordinates are `(col, row)` with column 0 on the left and row 0 at the
//! bottom of the board.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The seven tetrominoes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    /// Left gun (J-like L-tetromino mirror).
    LG,
    /// Right gun (L-tetromino).
    RG,
    I,
    Sq,
    /// Left snake.
    LS,
    /// Right snake.
    RS,
    T,
}

impl PieceKind {
    pub const ALL: [PieceKind; 7] = [
        PieceKind::LG,
        PieceKind::RG,
        PieceKind::I,
        PieceKind::Sq,
        PieceKind::LS,
        PieceKind::RS,
        PieceKind::T,
    ];

    /// Token used in sequence and trace files.
    pub fn token(self) -> &'static str {
        match self {
            PieceKind::LG => "LG",
            PieceKind::RG => "RG",
            PieceKind::I => "I",
            PieceKind::Sq => "SQ",
            PieceKind::LS => "LS",
            PieceKind::RS => "RS",
            PieceKind::T => "T",
        }
    }

    fn table(self) -> &'static [Shape] {
        match self {
            PieceKind::LG => &LG_SHAPES,
            PieceKind::RG => &RG_SHAPES,
            PieceKind::I => &I_SHAPES,
            PieceKind::Sq => &SQ_SHAPES,
            PieceKind::LS => &LS_SHAPES,
            PieceKind::RS => &RS_SHAPES,
            PieceKind::T => &T_SHAPES,
        }
    }

    pub fn orientations(self) -> impl Iterator<Item = Orientation> {
        (0..orientation_count(self) as u8).map(Orientation)
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown piece token {0:?} (expected one of LG RG I SQ LS RS T)")]
pub struct UnknownPiece(pub String);

impl FromStr for PieceKind {
    type Err = UnknownPiece;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "LG" => Ok(PieceKind::LG),
            "RG" => Ok(PieceKind::RG),
            "I" => Ok(PieceKind::I),
            "SQ" => Ok(PieceKind::Sq),
            "LS" => Ok(PieceKind::LS),
            "RS" => Ok(PieceKind::RS),
            "T" => Ok(PieceKind::T),
            _ => Err(UnknownPiece(s.to_string())),
        }
    }
}

/// Index into a piece's orientation table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation(pub u8);

impl Orientation {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

type Shape = [(u8, u8); 4];

const I_SHAPES: [Shape; 2] = [[(0, 0), (1, 0), (2, 0), (3, 0)], [(0, 0), (0, 1), (0, 2), (0, 3)]];
const SQ_SHAPES: [Shape; 1] = [[(0, 0), (1, 0), (0, 1), (1, 1)]];
const T_SHAPES: [Shape; 4] = [
    [(0, 0), (1, 0), (2, 0), (1, 1)], // stem up
    [(1, 0), (1, 1), (1, 2), (0, 1)], // stem left
    [(1, 0), (0, 1), (1, 1), (2, 1)], // stem down
    [(0, 0), (0, 1), (0, 2), (1, 1)], // stem right
];
const RG_SHAPES: [Shape; 4] = [
    [(0, 0), (1, 0), (2, 0), (2, 1)],
    [(1, 0), (1, 1), (1, 2), (0, 2)],
    [(0, 0), (0, 1), (1, 1), (2, 1)],
    [(0, 0), (0, 1), (0, 2), (1, 0)],
];
const LG_SHAPES: [Shape; 4] = [
    [(0, 0), (1, 0), (2, 0), (0, 1)],
    [(0, 0), (0, 1), (0, 2), (1, 2)],
    [(2, 0), (0, 1), (1, 1), (2, 1)],
    [(1, 0), (1, 1), (1, 2), (0, 0)],
];
const LS_SHAPES: [Shape; 2] = [[(0, 0), (0, 1), (1, 1), (1, 2)], [(1, 0), (2, 0), (0, 1), (1, 1)]];
const RS_SHAPES: [Shape; 2] = [[(1, 0), (1, 1), (0, 1), (0, 2)], [(0, 0), (1, 0), (1, 1), (2, 1)]];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("orientation {index} is not valid for {kind} ({count} orientations)")]
    InvalidOrientation { kind: PieceKind, index: u8, count: usize },
    #[error("{kind}/{orient} at column {col} does not fit in a board of width {width}")]
    OutOfBounds {
        kind: PieceKind,
        orient: Orientation,
        col: usize,
        width: usize,
    },
    #[error("top-out: {kind}/{orient} at column {col} rests with a cell on row {row} (board height {height})")]
    TopOut {
        kind: PieceKind,
        orient: Orientation,
        col: usize,
        row: usize,
        height: usize,
    },
    #[error("board dimensions must be positive (got {width}x{height})")]
    EmptyDimensions { width: usize, height: usize },
    #[error("row {row} is completely filled")]
    FullRow { row: usize },
    #[error("cell ({col}, {row}) lies outside a {width}x{height} board")]
    CellOutOfRange {
        col: usize,
        row: usize,
        width: usize,
        height: usize,
    },
}

pub fn orientation_count(kind: PieceKind) -> usize {
    kind.table().len()
}

/// Normalized cells of `kind` in orientation `orient`, as `(col, row)` offsets.
pub fn piece_cells(kind: PieceKind, orient: Orientation) -> Result<[(usize, usize); 4], EngineError> {
    let shape = kind
        .table()
        .get(orient.index())
        .ok_or(EngineError::InvalidOrientation {
            kind,
            index: orient.0,
            count: orientation_count(kind),
        })?;
    Ok(shape.map(|(c, r)| (c as usize, r as usize)))
}

/// Horizontal extent of the orientation in cells.
pub fn piece_width(kind: PieceKind, orient: Orientation) -> Result<usize, EngineError> {
    let cells = piece_cells(kind, orient)?;
    Ok(cells.iter().map(|&(c, _)| c).max().unwrap_or(0) + 1)
}

/// One drop decision: which piece, which way up, and the leftmost column it occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub kind: PieceKind,
    pub orient: Orientation,
    pub col: usize,
}

impl Placement {
    pub fn new(kind: PieceKind, orient: u8, col: usize) -> Self {
        Placement {
            kind,
            orient: Orientation(orient),
            col,
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.kind, self.orient, self.col)
    }
}

/// Game state: an occupancy grid plus the number of rows cleared so far.
///
/// Each row is packed into `words` 64-bit words, bit `c % 64` of word `c / 64`
/// being column `c`. Rows are stored bottom-up.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    width: usize,
    height: usize,
    words: usize,
    bits: Vec<u64>,
    cleared_total: usize,
}

impl Board {
    pub fn new(width: usize, height: usize) -> Result<Self, EngineError> {
        if width == 0 || height == 0 {
            return Err(EngineError::EmptyDimensions { width, height });
        }
        let words = width.div_ceil(64);
        Ok(Board {
            width,
            height,
            words,
            bits: vec![0; words * height],
            cleared_total: 0,
        })
    }

    /// Builds a board from filled cells. Rejects cells off the board and
    /// completely filled rows.
    pub fn from_cells<I>(width: usize, height: usize, cells: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut board = Board::new(width, height)?;
        for (col, row) in cells {
            if col >= width || row >= height {
                return Err(EngineError::CellOutOfRange {
                    col,
                    row,
                    width,
                    height,
                });
            }
            board.set(col, row);
        }
        if let Some(row) = (0..height).find(|&r| board.row_full(r)) {
            return Err(EngineError::FullRow { row });
        }
        Ok(board)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cleared_total(&self) -> usize {
        self.cleared_total
    }

    pub fn with_cleared_total(mut self, cleared_total: usize) -> Self {
        self.cleared_total = cleared_total;
        self
    }

    /// Raw packed occupancy, bottom row first. Suitable as a hash key.
    pub fn occupancy(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn is_filled(&self, col: usize, row: usize) -> bool {
        debug_assert!(col < self.width && row < self.height);
        self.bits[row * self.words + col / 64] >> (col % 64) & 1 == 1
    }

    /// Out-of-range columns count as wall; rows above the board count as empty.
    pub fn is_filled_or_wall(&self, col: isize, row: usize) -> bool {
        if col < 0 || col as usize >= self.width {
            return true;
        }
        row < self.height && self.is_filled(col as usize, row)
    }

    #[inline]
    fn set(&mut self, col: usize, row: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words..(row + 1) * self.words]
    }

    fn row_full(&self, row: usize) -> bool {
        let words = self.row_words(row);
        words.iter().enumerate().all(|(i, &w)| w == self.full_word(i))
    }

    fn full_word(&self, i: usize) -> u64 {
        let bits_in_word = (self.width - i * 64).min(64);
        if bits_in_word == 64 {
            u64::MAX
        } else {
            (1u64 << bits_in_word) - 1
        }
    }

    pub fn row_count(&self, row: usize) -> usize {
        self.row_words(row).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn filled_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// One past the highest filled row of `col`, 0 for an empty column.
    pub fn column_height(&self, col: usize) -> usize {
        (0..self.height)
            .rev()
            .find(|&r| self.is_filled(col, r))
            .map_or(0, |r| r + 1)
    }

    /// One past the highest filled row anywhere on the board.
    pub fn stack_height(&self) -> usize {
        (0..self.height)
            .rev()
            .find(|&r| self.row_words(r).iter().any(|&w| w != 0))
            .map_or(0, |r| r + 1)
    }

    /// Iterates over filled cells, bottom row first, left to right.
    pub fn filled_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |r| {
            (0..self.width)
                .filter(move |&c| self.is_filled(c, r))
                .map(move |c| (c, r))
        })
    }

    fn check_bounds(&self, p: &Placement) -> Result<[(usize, usize); 4], EngineError> {
        let cells = piece_cells(p.kind, p.orient)?;
        let w = cells.iter().map(|&(c, _)| c).max().unwrap_or(0) + 1;
        if p.col + w > self.width {
            return Err(EngineError::OutOfBounds {
                kind: p.kind,
                orient: p.orient,
                col: p.col,
                width: self.width,
            });
        }
        Ok(cells)
    }

    /// Bottom row offset at which the piece comes to rest when dropped
    /// straight down from above the stack. May exceed the board height.
    pub fn drop_row(&self, kind: PieceKind, orient: Orientation, col: usize) -> Result<usize, EngineError> {
        let cells = self.check_bounds(&Placement { kind, orient, col })?;
        Ok(self.rest_row(&cells, col))
    }

    fn rest_row(&self, cells: &[(usize, usize); 4], col: usize) -> usize {
        // Every piece cell has to end up above the stack of its column.
        cells
            .iter()
            .map(|&(dc, dr)| self.column_height(col + dc).saturating_sub(dr))
            .max()
            .unwrap_or(0)
    }

    /// Drops the piece, locks it and clears full rows. Returns the new board
    /// and the number of rows removed.
    pub fn apply_placement(&self, p: Placement) -> Result<(Board, usize), EngineError> {
        let mut next = self.clone();
        let cleared = next.place(p)?;
        Ok((next, cleared))
    }

    /// In-place variant of [`Board::apply_placement`]. On error the board is
    /// left unchanged.
    pub fn place(&mut self, p: Placement) -> Result<usize, EngineError> {
        let cells = self.check_bounds(&p)?;
        let base = self.rest_row(&cells, p.col);
        let top = base + cells.iter().map(|&(_, r)| r).max().unwrap_or(0);
        if top >= self.height {
            return Err(EngineError::TopOut {
                kind: p.kind,
                orient: p.orient,
                col: p.col,
                row: top,
                height: self.height,
            });
        }
        for &(dc, dr) in &cells {
            self.set(p.col + dc, base + dr);
        }
        let mut full: Vec<usize> = cells.iter().map(|&(_, dr)| base + dr).collect();
        full.sort_unstable();
        full.dedup();
        full.retain(|&r| self.row_full(r));
        if !full.is_empty() {
            self.remove_rows(&full);
        }
        Ok(full.len())
    }

    fn remove_rows(&mut self, rows: &[usize]) {
        let w = self.words;
        let mut dst = rows[0];
        for src in rows[0]..self.height {
            if rows.binary_search(&src).is_ok() {
                continue;
            }
            if src != dst {
                self.bits.copy_within(src * w..(src + 1) * w, dst * w);
            }
            dst += 1;
        }
        for r in dst..self.height {
            self.bits[r * w..(r + 1) * w].fill(0);
        }
        self.cleared_total += rows.len();
    }

    /// Every horizontally legal (orientation, column) for `kind`, orientation-major.
    pub fn enumerate_placements(&self, kind: PieceKind) -> Vec<PlacementOption> {
        self.enumerate_placements_within(kind, 0, self.width)
    }

    /// Like [`Board::enumerate_placements`] but restricted to pieces lying
    /// entirely inside columns `lo..hi`.
    pub fn enumerate_placements_within(&self, kind: PieceKind, lo: usize, hi: usize) -> Vec<PlacementOption> {
        let hi = hi.min(self.width);
        let mut out = Vec::new();
        for orient in kind.orientations() {
            let w = piece_width(kind, orient).expect("orientation from table");
            if lo + w > hi {
                continue;
            }
            for col in lo..=hi - w {
                let placement = Placement { kind, orient, col };
                let cells = piece_cells(kind, orient).expect("orientation from table");
                let base = self.rest_row(&cells, col);
                let top = base + cells.iter().map(|&(_, r)| r).max().unwrap_or(0);
                out.push(PlacementOption {
                    placement,
                    tops_out: top >= self.height,
                });
            }
        }
        out
    }

    /// Empty cells with at least one filled cell above them in the same column.
    pub fn covered_holes(&self) -> Vec<(usize, usize)> {
        let mut holes = Vec::new();
        for col in 0..self.width {
            let h = self.column_height(col);
            for row in 0..h {
                if !self.is_filled(col, row) {
                    holes.push((col, row));
                }
            }
        }
        holes.sort_by_key(|&(c, r)| (r, c));
        holes
    }

    /// Width-1 shafts open from above with depth at least `min_depth`.
    ///
    /// A shaft starts at the column's surface and extends upward while both
    /// horizontal neighbours are filled (or are the board edge).
    pub fn narrow_wells(&self, min_depth: usize) -> Vec<Well> {
        let min_depth = min_depth.max(1);
        let mut wells = Vec::new();
        for col in 0..self.width {
            let bottom = self.column_height(col);
            let depth = (bottom..self.height)
                .take_while(|&r| {
                    self.is_filled_or_wall(col as isize - 1, r) && self.is_filled_or_wall(col as isize + 1, r)
                })
                .count();
            if depth >= min_depth {
                wells.push(Well { col, bottom, depth });
            }
        }
        wells
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Board {}x{} cleared={}", self.width, self.height, self.cleared_total)?;
        for row in (0..self.stack_height()).rev() {
            let line: String = (0..self.width)
                .map(|c| if self.is_filled(c, row) { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlacementOption {
    pub placement: Placement,
    pub tops_out: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Well {
    pub col: usize,
    pub bottom: usize,
    pub depth: usize,
}
