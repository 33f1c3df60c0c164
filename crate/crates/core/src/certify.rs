//! Canonical clearing strategy for a solved instance, and trace replay.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::{Board, EngineError, Orientation, PieceKind, Placement};
use crate::gadgets::Gadget;
use crate::reduction::{self, Instance3P, Mode, ReductionError};

/// Bucket index for every number, in input order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    pub assign: Vec<usize>,
}

impl Partition {
    pub fn new(assign: Vec<usize>) -> Self {
        Partition { assign }
    }

    /// Members of each bucket as indices into the instance numbers.
    pub fn buckets(&self, subsets: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); subsets];
        for (i, &b) in self.assign.iter().enumerate() {
            if b < subsets {
                out[b].push(i);
            }
        }
        out
    }

    pub fn validate(&self, instance: &Instance3P, mode: Mode) -> Result<(), PartitionError> {
        let n = instance.numbers.len();
        if self.assign.len() != n {
            return Err(PartitionError::WrongLength {
                expected: n,
                found: self.assign.len(),
            });
        }
        if let Some((index, &bucket)) = self.assign.iter().enumerate().find(|(_, &b)| b >= instance.subsets) {
            return Err(PartitionError::BucketOutOfRange {
                index,
                bucket,
                subsets: instance.subsets,
            });
        }
        for (bucket, members) in self.buckets(instance.subsets).iter().enumerate() {
            let sum: i64 = members.iter().map(|&i| instance.numbers[i]).sum();
            if sum != instance.target {
                return Err(PartitionError::BucketSum {
                    bucket,
                    sum,
                    target: instance.target,
                });
            }
            if mode == Mode::Strict && members.len() != 3 {
                return Err(PartitionError::BucketCount {
                    bucket,
                    count: members.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("partition lists {found} buckets for {expected} numbers")]
    WrongLength { expected: usize, found: usize },
    #[error("number {index} assigned to bucket {bucket}, but there are only {subsets}")]
    BucketOutOfRange {
        index: usize,
        bucket: usize,
        subsets: usize,
    },
    #[error("bucket {bucket} sums to {sum}, expected {target}")]
    BucketSum { bucket: usize, sum: i64, target: i64 },
    #[error("bucket {bucket} holds {count} numbers, expected 3")]
    BucketCount { bucket: usize, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Open,
    Digit,
    Close,
    Final,
    Fill,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Open => "OPEN",
            Phase::Digit => "DIGIT",
            Phase::Close => "CLOSE",
            Phase::Final => "FINAL",
            Phase::Fill => "FILL",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OPEN" => Ok(Phase::Open),
            "DIGIT" => Ok(Phase::Digit),
            "CLOSE" => Ok(Phase::Close),
            "FINAL" => Ok(Phase::Final),
            "FILL" => Ok(Phase::Fill),
            _ => Err(format!("unknown phase {s:?}")),
        }
    }
}

/// Placements in play order, optionally tagged with the gadget phase.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Trace {
    pub placements: Vec<Placement>,
    pub phases: Vec<Option<Phase>>,
}

impl Trace {
    pub fn untagged(placements: Vec<Placement>) -> Self {
        let phases = vec![None; placements.len()];
        Trace { placements, phases }
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    fn push(&mut self, p: Placement, phase: Phase) {
        self.placements.push(p);
        self.phases.push(Some(phase));
    }

    fn push_gadget(&mut self, gadget: Gadget, c0: usize, phase: Phase) {
        for &p in gadget.placements() {
            self.push(Placement { col: p.col + c0, ..p }, phase);
        }
    }

    pub fn phase(&self, index: usize) -> Option<Phase> {
        self.phases.get(index).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("partition rejected: {0}")]
    Partition(#[from] PartitionError),
}

/// The placement list that clears the reduction board when `partition` is a
/// solution: numbers are played in input order into their assigned buckets.
pub fn canonical_trace(instance: &Instance3P, partition: &Partition, mode: Mode) -> Result<Trace, CertifyError> {
    instance.validate(mode).map_err(ReductionError::Invalid)?;
    partition.validate(instance, mode)?;
    let layout = instance.layout();
    let mut trace = Trace::default();
    for (&a, &bucket) in instance.numbers.iter().zip(&partition.assign) {
        let c0 = layout.bucket_column(bucket);
        trace.push_gadget(Gadget::Open, c0, Phase::Open);
        for _ in 0..a {
            trace.push_gadget(Gadget::Digit, c0, Phase::Digit);
        }
        trace.push_gadget(Gadget::Close, c0, Phase::Close);
    }
    for bucket in 0..instance.subsets {
        trace.push_gadget(Gadget::Final, layout.bucket_column(bucket), Phase::Final);
    }
    let fill = Placement {
        kind: PieceKind::I,
        orient: Orientation(1),
        col: layout.fill_column(),
    };
    for _ in 0..4 + instance.target {
        trace.push(fill, Phase::Fill);
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    KindMismatch {
        expected: PieceKind,
        found: PieceKind,
    },
    Engine(EngineError),
    /// The trace ended with pieces left in the sequence.
    PiecesRemaining {
        remaining: usize,
    },
    /// The trace is longer than the sequence.
    ExtraPlacements {
        extra: usize,
    },
    BoardNotEmpty {
        filled: usize,
    },
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureKind::KindMismatch { expected, found } => {
                write!(f, "kind mismatch: sequence has {expected}, trace places {found}")
            }
            FailureKind::Engine(e) => write!(f, "{e}"),
            FailureKind::PiecesRemaining { remaining } => write!(f, "pieces remaining: {remaining}"),
            FailureKind::ExtraPlacements { extra } => write!(f, "{extra} placements beyond the sequence"),
            FailureKind::BoardNotEmpty { filled } => write!(f, "board not empty: {filled} cells remain"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFailure {
    /// Index of the offending placement (or the trace length for end-of-trace checks).
    pub index: usize,
    pub kind: FailureKind,
}

impl fmt::Display for TraceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at placement {}: {}", self.index, self.kind)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceVerdict {
    pub cleared_lines: usize,
    pub placed: usize,
    /// Final board on success, the board at the failure point otherwise.
    pub final_board: Board,
    pub failure: Option<TraceFailure>,
}

impl TraceVerdict {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }
}

/// Replays `trace` against `sequence` starting from `board`.
pub fn verify_trace(board: &Board, sequence: &[PieceKind], trace: &Trace) -> TraceVerdict {
    verify_trace_observed(board, sequence, trace, |_, _, _| {})
}

/// Like [`verify_trace`], calling `observer(index, cleared, &board)` after
/// every successful placement.
pub fn verify_trace_observed<F>(board: &Board, sequence: &[PieceKind], trace: &Trace, mut observer: F) -> TraceVerdict
where
    F: FnMut(usize, usize, &Board),
{
    let mut cur = board.clone();
    let start_cleared = board.cleared_total();
    let fail = |cur: Board, index, kind| TraceVerdict {
        cleared_lines: cur.cleared_total() - start_cleared,
        placed: index,
        final_board: cur,
        failure: Some(TraceFailure { index, kind }),
    };
    for (i, p) in trace.placements.iter().enumerate() {
        let Some(&expected) = sequence.get(i) else {
            return fail(
                cur,
                i,
                FailureKind::ExtraPlacements {
                    extra: trace.len() - sequence.len(),
                },
            );
        };
        if expected != p.kind {
            return fail(
                cur,
                i,
                FailureKind::KindMismatch {
                    expected,
                    found: p.kind,
                },
            );
        }
        match cur.place(*p) {
            Ok(cleared) => observer(i, cleared, &cur),
            Err(e) => return fail(cur, i, FailureKind::Engine(e)),
        }
    }
    let n = trace.len();
    if n < sequence.len() {
        return fail(
            cur,
            n,
            FailureKind::PiecesRemaining {
                remaining: sequence.len() - n,
            },
        );
    }
    if !cur.is_empty() {
        let filled = cur.filled_count();
        return fail(cur, n, FailureKind::BoardNotEmpty { filled });
    }
    TraceVerdict {
        cleared_lines: cur.cleared_total() - start_cleared,
        placed: n,
        final_board: cur,
        failure: None,
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub board: Board,
    pub sequence: Vec<PieceKind>,
    pub trace: Trace,
    pub verdict: TraceVerdict,
}

/// Builds the reduction, derives the canonical trace from `partition` and
/// replays it.
pub fn certify(instance: &Instance3P, partition: &Partition, mode: Mode) -> Result<Certificate, CertifyError> {
    let trace = canonical_trace(instance, partition, mode)?;
    let out = reduction::reduce(instance, mode)?;
    let verdict = verify_trace(&out.board, &out.sequence, &trace);
    Ok(Certificate {
        board: out.board,
        sequence: out.sequence,
        trace,
        verdict,
    })
}
