//! Decision procedures: an exact 3-PARTITION solver and a depth-first
//! clearability search over hard-drop placements.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use dashmap::DashSet;
use rayon::prelude::*;

use crate::certify::{verify_trace, Partition, Trace};
use crate::engine::{Board, PieceKind, Placement};
use crate::reduction::{Instance3P, Layout, Mode, ReductionError};

/// Exact backtracking over bucket assignments, three numbers per bucket.
///
/// Numbers are assigned in input order, buckets tried in increasing index, and
/// a number only ever opens the first empty bucket. The witness is therefore
/// the lexicographically smallest assignment.
pub fn solve_3partition(instance: &Instance3P) -> Result<Option<Partition>, ReductionError> {
    instance.validate(Mode::Lax).map_err(ReductionError::Invalid)?;
    let s = instance.subsets;
    let mut sums = vec![0i64; s];
    let mut counts = vec![0usize; s];
    let mut assign = vec![0usize; instance.numbers.len()];
    if place_number(instance, 0, &mut sums, &mut counts, &mut assign) {
        Ok(Some(Partition::new(assign)))
    } else {
        Ok(None)
    }
}

fn place_number(inst: &Instance3P, i: usize, sums: &mut [i64], counts: &mut [usize], assign: &mut [usize]) -> bool {
    let Some(&a) = inst.numbers.get(i) else {
        return sums.iter().all(|&x| x == inst.target);
    };
    for b in 0..sums.len() {
        if counts[b] == 3 || sums[b] + a > inst.target {
            continue;
        }
        let opens_bucket = counts[b] == 0;
        sums[b] += a;
        counts[b] += 1;
        assign[i] = b;
        if place_number(inst, i + 1, sums, counts, assign) {
            return true;
        }
        sums[b] -= a;
        counts[b] -= 1;
        if opens_bucket {
            // Every later empty bucket is interchangeable with this one.
            break;
        }
    }
    false
}

/// Gadget-derived dead-state test for boards with a reduction layout: a covered
/// hole, an I-only shaft anywhere but the fill column, or a block above the
/// current separator tops.
pub fn bad_state(board: &Board, layout: &Layout) -> bool {
    let top = layout.bucket_height.saturating_sub(board.cleared_total());
    if board.stack_height() > top {
        return true;
    }
    if !board.covered_holes().is_empty() {
        return true;
    }
    let fill = layout.fill_column();
    board.narrow_wells(3).iter().any(|w| w.col != fill)
}

/// Necessary condition for clearing everything with `remaining` more pieces:
/// every occupied row must still be completable and the cell total must be a
/// whole number of rows.
pub fn cells_can_clear(board: &Board, remaining: usize) -> bool {
    let w = board.width();
    let total = board.filled_count() + 4 * remaining;
    if !total.is_multiple_of(w) {
        return false;
    }
    let needed: usize = (0..board.stack_height())
        .map(|r| board.row_count(r))
        .filter(|&n| n > 0)
        .map(|n| w - n)
        .sum();
    needed <= 4 * remaining
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Goal {
    /// All pieces placed and the board empty.
    #[default]
    Clear,
    /// All pieces placed without ever entering a bad state (needs a layout).
    Survive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub node_budget: u64,
    /// Discard states for which [`bad_state`] holds. Only sound on boards built
    /// by the reduction, where the piece supply is exact.
    pub prune_bad_states: bool,
    /// Skip states already explored (keyed on occupancy and pieces consumed).
    pub transposition: bool,
    /// Apply [`cells_can_clear`]; always sound for [`Goal::Clear`].
    pub cell_prune: bool,
    pub parallel_width: usize,
    pub layout: Option<Layout>,
    pub goal: Goal,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: 1_000_000,
            prune_bad_states: false,
            transposition: true,
            cell_prune: true,
            parallel_width: 1,
            layout: None,
            goal: Goal::Clear,
        }
    }
}

impl SearchConfig {
    /// No pruning of any kind: plain exhaustive enumeration.
    pub fn exhaustive(node_budget: u64) -> Self {
        SearchConfig {
            node_budget,
            prune_bad_states: false,
            transposition: false,
            cell_prune: false,
            ..SearchConfig::default()
        }
    }

    /// Every prune, including the layout-based one.
    pub fn for_reduction(layout: Layout, node_budget: u64) -> Self {
        SearchConfig {
            node_budget,
            prune_bad_states: true,
            layout: Some(layout),
            ..SearchConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("node budget must be at least 1")]
    ZeroBudget,
    #[error("bad-state pruning and the survive goal need a reduction layout")]
    MissingLayout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchVerdict {
    Clearable { witness: Trace, nodes: u64 },
    Unclearable { nodes: u64 },
    BudgetExceeded { frontier: usize, nodes: u64 },
}

impl SearchVerdict {
    pub fn nodes(&self) -> u64 {
        match *self {
            SearchVerdict::Clearable { nodes, .. }
            | SearchVerdict::Unclearable { nodes }
            | SearchVerdict::BudgetExceeded { nodes, .. } => nodes,
        }
    }

    pub fn is_clearable(&self) -> bool {
        matches!(self, SearchVerdict::Clearable { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SearchVerdict::Clearable { .. } => "CLEARABLE",
            SearchVerdict::Unclearable { .. } => "UNCLEARABLE",
            SearchVerdict::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
        }
    }
}

enum Outcome {
    Found(Vec<Placement>),
    Dead,
    Aborted(usize),
}

struct Search<'a> {
    sequence: &'a [PieceKind],
    config: &'a SearchConfig,
    nodes: AtomicU64,
    stop: AtomicBool,
    seen: DashSet<(Vec<u64>, usize)>,
}

impl Search<'_> {
    fn pruned(&self, board: &Board, consumed: usize) -> bool {
        let remaining = self.sequence.len() - consumed;
        if self.config.cell_prune && self.config.goal == Goal::Clear && !cells_can_clear(board, remaining) {
            return true;
        }
        if self.config.prune_bad_states || self.config.goal == Goal::Survive {
            if let Some(layout) = &self.config.layout {
                if bad_state(board, layout) {
                    return true;
                }
            }
        }
        false
    }

    fn children(&self, board: &Board, consumed: usize) -> Vec<(Placement, Board)> {
        let kind = self.sequence[consumed];
        board
            .enumerate_placements(kind)
            .into_iter()
            .filter(|o| !o.tops_out)
            .filter_map(|o| {
                let (next, _) = board.apply_placement(o.placement).ok()?;
                Some((o.placement, next))
            })
            .collect()
    }

    fn dfs(&self, board: &Board, consumed: usize) -> Outcome {
        if self.stop.load(Ordering::Relaxed) {
            return Outcome::Aborted(1);
        }
        if self.pruned(board, consumed) {
            return Outcome::Dead;
        }
        if consumed == self.sequence.len() {
            let done = match self.config.goal {
                Goal::Clear => board.is_empty(),
                Goal::Survive => true,
            };
            return if done {
                Outcome::Found(Vec::new())
            } else {
                Outcome::Dead
            };
        }
        if self.config.transposition && !self.seen.insert((board.occupancy().to_vec(), consumed)) {
            return Outcome::Dead;
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.config.node_budget {
            self.nodes.fetch_sub(1, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
            return Outcome::Aborted(1);
        }
        let children = self.children(board, consumed);
        let n = children.len();
        for (i, (placement, next)) in children.into_iter().enumerate() {
            match self.dfs(&next, consumed + 1) {
                Outcome::Found(mut rest) => {
                    rest.push(placement);
                    return Outcome::Found(rest);
                }
                Outcome::Dead => {}
                Outcome::Aborted(f) => return Outcome::Aborted(f + n - i - 1),
            }
        }
        Outcome::Dead
    }
}

/// Depth-first search for a sequence of drops that consumes every piece and
/// meets the configured goal.
pub fn search_clearable(
    board: &Board,
    sequence: &[PieceKind],
    config: &SearchConfig,
) -> Result<SearchVerdict, SearchError> {
    if config.node_budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    if (config.prune_bad_states || config.goal == Goal::Survive) && config.layout.is_none() {
        return Err(SearchError::MissingLayout);
    }
    let search = Search {
        sequence,
        config,
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        seen: DashSet::new(),
    };

    let outcome = if config.parallel_width <= 1 || sequence.is_empty() || search.pruned(board, 0) {
        search.dfs(board, 0)
    } else {
        search.nodes.fetch_add(1, Ordering::Relaxed);
        let children = search.children(board, 0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallel_width)
            .build()
            .expect("thread pool");
        let results: Vec<Outcome> = pool.install(|| {
            children
                .par_iter()
                .map(|(placement, next)| match search.dfs(next, 1) {
                    Outcome::Found(mut rest) => {
                        search.stop.store(true, Ordering::Relaxed);
                        rest.push(*placement);
                        Outcome::Found(rest)
                    }
                    other => other,
                })
                .collect()
        });
        let mut frontier = 0;
        let mut found = None;
        for r in results {
            match r {
                Outcome::Found(w) if found.is_none() => found = Some(w),
                Outcome::Aborted(f) => frontier += f,
                _ => {}
            }
        }
        match found {
            Some(w) => Outcome::Found(w),
            None if frontier > 0 => Outcome::Aborted(frontier),
            None => Outcome::Dead,
        }
    };

    let nodes = search.nodes.load(Ordering::Relaxed);
    Ok(match outcome {
        Outcome::Found(mut rev) => {
            rev.reverse();
            let witness = Trace::untagged(rev);
            debug_assert!(config.goal != Goal::Clear || verify_trace(board, sequence, &witness).success());
            SearchVerdict::Clearable { witness, nodes }
        }
        Outcome::Dead => SearchVerdict::Unclearable { nodes },
        Outcome::Aborted(frontier) => SearchVerdict::BudgetExceeded { frontier, nodes },
    })
}
