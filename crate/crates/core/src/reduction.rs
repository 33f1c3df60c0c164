//! Compiles a 3-PARTITION instance into a starting board and a piece sequence.
//!
//! Board layout for `s` subsets and target `B` (all columns left to right):
//!
//! ```text
//! | b0 b0 b0 | b1 b1 b1 | ... | F |
//! ^ separator                    ^ separators around the fill column
//! ```
//!
//! Separators are solid up to the bucket height `16 + 4B`; five empty buffer
//! rows sit on top. Each bucket interior starts with a planted right gun and a
//! left snake, the closed profile `(1,3,4)`.

use std::fmt;

use thiserror::Error;

use crate::engine::{Board, PieceKind};
use crate::gadgets::{BucketProfile, Gadget};

/// Empty rows above the buckets.
pub const BUFFER_ROWS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance3P {
    /// Number of subsets `s`.
    pub subsets: usize,
    /// Target sum `B` of every subset.
    pub target: i64,
    pub numbers: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Also require `B/4 < a_i < B/2`.
    Strict,
    #[default]
    Lax,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("number of subsets must be at least 1")]
    NoSubsets,
    #[error("target B = {0} must be positive")]
    NonPositiveTarget(i64),
    #[error("expected {expected} numbers (3s), found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("a[{index}] = {value} is not positive")]
    NonPositive { index: usize, value: i64 },
    #[error("numbers sum to {found}, expected s*B = {expected}")]
    SumMismatch { expected: i64, found: i64 },
    #[error("a[{index}] = {value} violates B/4 < a < B/2 with B = {target}")]
    Bounds { index: usize, value: i64, target: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl Instance3P {
    pub fn new(subsets: usize, target: i64, numbers: Vec<i64>) -> Self {
        Instance3P {
            subsets,
            target,
            numbers,
        }
    }

    pub fn validate(&self, mode: Mode) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.subsets == 0 {
            out.push(Violation::NoSubsets);
        }
        if self.target <= 0 {
            out.push(Violation::NonPositiveTarget(self.target));
        }
        if self.numbers.len() != 3 * self.subsets {
            out.push(Violation::WrongCount {
                expected: 3 * self.subsets,
                found: self.numbers.len(),
            });
        }
        for (index, &value) in self.numbers.iter().enumerate() {
            if value <= 0 {
                out.push(Violation::NonPositive { index, value });
            }
        }
        let sum: i64 = self.numbers.iter().sum();
        let expected = self.subsets as i64 * self.target;
        if sum != expected {
            out.push(Violation::SumMismatch { expected, found: sum });
        }
        if mode == Mode::Strict {
            for (index, &value) in self.numbers.iter().enumerate() {
                if !(4 * value > self.target && 2 * value < self.target) {
                    out.push(Violation::Bounds {
                        index,
                        value,
                        target: self.target,
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn checked(&self, mode: Mode) -> Result<(), ReductionError> {
        self.validate(mode).map_err(ReductionError::Invalid)
    }

    /// `16 + 4B`.
    pub fn bucket_height(&self) -> usize {
        16 + 4 * self.target.max(0) as usize
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.subsets, self.bucket_height())
    }
}

impl fmt::Display for Instance3P {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums: Vec<String> = self.numbers.iter().map(|n| n.to_string()).collect();
        write!(f, "s={} B={} a=({})", self.subsets, self.target, nums.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnRole {
    Separator,
    Bucket(usize),
    Fill,
}

/// Column roles and dimensions of a reduction-shaped board.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    pub subsets: usize,
    /// Height of the separators; buckets must end solid at this height.
    pub bucket_height: usize,
}

impl Layout {
    pub fn new(subsets: usize, bucket_height: usize) -> Self {
        Layout { subsets, bucket_height }
    }

    pub fn width(&self) -> usize {
        4 * self.subsets + 3
    }

    pub fn height(&self) -> usize {
        self.bucket_height + BUFFER_ROWS
    }

    /// Leftmost interior column of bucket `b`.
    pub fn bucket_column(&self, bucket: usize) -> usize {
        4 * bucket + 1
    }

    pub fn fill_column(&self) -> usize {
        4 * self.subsets + 1
    }

    pub fn separator_columns(&self) -> Vec<usize> {
        (0..=self.subsets)
            .map(|b| 4 * b)
            .chain([4 * self.subsets + 2])
            .collect()
    }

    pub fn role(&self, col: usize) -> ColumnRole {
        if col == self.fill_column() {
            ColumnRole::Fill
        } else if col.is_multiple_of(4) || col == 4 * self.subsets + 2 {
            ColumnRole::Separator
        } else {
            ColumnRole::Bucket(col / 4)
        }
    }

    /// Recovers the layout from board dimensions, if they have the right shape.
    pub fn infer(width: usize, height: usize) -> Option<Layout> {
        if width < 7 || !(width - 3).is_multiple_of(4) || height < 16 + BUFFER_ROWS + 4 {
            return None;
        }
        let bucket_height = height - BUFFER_ROWS;
        (bucket_height - 16)
            .is_multiple_of(4)
            .then(|| Layout::new((width - 3) / 4, bucket_height))
    }

    /// Interior heights of bucket `b`, measured from the floor.
    pub fn bucket_profile(&self, board: &Board, bucket: usize) -> BucketProfile {
        let c = self.bucket_column(bucket);
        BucketProfile::new(
            board.column_height(c),
            board.column_height(c + 1),
            board.column_height(c + 2),
        )
    }

    /// A board with solid separators and every bucket holding `profile`.
    pub fn board_with_profile(&self, profile: BucketProfile) -> Board {
        let h = self.bucket_height;
        let separators = self
            .separator_columns()
            .into_iter()
            .flat_map(move |c| (0..h).map(move |r| (c, r)));
        let buckets = (0..self.subsets).flat_map(move |b| {
            let c0 = self.bucket_column(b);
            profile
                .heights
                .into_iter()
                .enumerate()
                .flat_map(move |(dc, ph)| (0..ph).map(move |r| (c0 + dc, r)))
        });
        Board::from_cells(self.width(), self.height(), separators.chain(buckets))
            .expect("the empty fill column keeps every row open")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    pub board: Board,
    pub sequence: Vec<PieceKind>,
    pub bucket_height: usize,
    pub layout: Layout,
}

/// Starting board: separators solid, each bucket holding the planted lock.
pub fn build_board(instance: &Instance3P, mode: Mode) -> Result<Board, ReductionError> {
    instance.checked(mode)?;
    Ok(instance.layout().board_with_profile(BucketProfile::CLOSED))
}

/// Per number: LG, `a_i` digits of (T, T, RG), then (RG, LS). After all
/// numbers one LG per bucket, then `4 + B` I pieces.
pub fn build_sequence(instance: &Instance3P, mode: Mode) -> Result<Vec<PieceKind>, ReductionError> {
    instance.checked(mode)?;
    let mut seq = Vec::new();
    for &a in &instance.numbers {
        seq.extend(Gadget::Open.pieces());
        for _ in 0..a {
            seq.extend(Gadget::Digit.pieces());
        }
        seq.extend(Gadget::Close.pieces());
    }
    for _ in 0..instance.subsets {
        seq.extend(Gadget::Final.pieces());
    }
    seq.extend(std::iter::repeat_n(PieceKind::I, 4 + instance.target as usize));
    Ok(seq)
}

pub fn reduce(instance: &Instance3P, mode: Mode) -> Result<ReductionOutput, ReductionError> {
    Ok(ReductionOutput {
        board: build_board(instance, mode)?,
        sequence: build_sequence(instance, mode)?,
        bucket_height: instance.bucket_height(),
        layout: instance.layout(),
    })
}

/// Cell accounting for a single bucket that receives three numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BucketCapacity {
    pub planted: usize,
    pub opens: usize,
    pub digits: usize,
    pub closes: usize,
    pub final_cap: usize,
}

impl BucketCapacity {
    pub fn total(&self) -> usize {
        self.planted + self.opens + self.digits + self.closes + self.final_cap
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetReport {
    pub sequence_len: usize,
    /// `4 * |sequence|`.
    pub piece_cells: usize,
    /// Empty cells below the bucket height on the starting board.
    pub fillable_cells: usize,
    /// `3s(16+4B) - 8s + (16+4B)`.
    pub fillable_formula: usize,
    pub per_bucket: BucketCapacity,
    /// `3(16+4B)`: the interior area of one bucket.
    pub bucket_area: usize,
}

impl BudgetReport {
    pub fn balanced(&self) -> bool {
        self.piece_cells == self.fillable_cells
            && self.fillable_cells == self.fillable_formula
            && self.per_bucket.total() == self.bucket_area
    }
}

impl fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.per_bucket;
        writeln!(
            f,
            "pieces: {} ({} cells), fillable cells: {} (formula {})",
            self.sequence_len, self.piece_cells, self.fillable_cells, self.fillable_formula
        )?;
        writeln!(
            f,
            "per bucket: planted {} + opens {} + digits {} + closes {} + final {} = {} (area {})",
            c.planted,
            c.opens,
            c.digits,
            c.closes,
            c.final_cap,
            c.total(),
            self.bucket_area
        )?;
        write!(f, "budget {}", if self.balanced() { "balanced" } else { "UNBALANCED" })
    }
}

pub fn budget_report(instance: &Instance3P, mode: Mode) -> Result<BudgetReport, ReductionError> {
    let out = reduce(instance, mode)?;
    let s = instance.subsets;
    let b = instance.target as usize;
    let h = out.bucket_height;
    let board = &out.board;
    let fillable_cells = (0..h).map(|r| board.width() - board.row_count(r)).sum::<usize>();
    Ok(BudgetReport {
        sequence_len: out.sequence.len(),
        piece_cells: 4 * out.sequence.len(),
        fillable_cells,
        fillable_formula: 3 * s * h - 8 * s + h,
        per_bucket: BucketCapacity {
            planted: BucketProfile::CLOSED.cells(),
            opens: 3 * 4,
            digits: 12 * b,
            closes: 3 * 8,
            final_cap: 4,
        },
        bucket_area: 3 * h,
    })
}
