//! Single-bucket analysis.
//!
//! A bucket interior is three columns wide and sits between two tall walls.
//! Its state is a [`BucketProfile`]: the solid height of each interior column.
//! Everything here works by embedding a profile in a small engine board and
//! enumerating drops, so the placement lemmas are re-proved by the same code
//! that plays the game.

use std::fmt;

use thiserror::Error;

use crate::engine::{Board, PieceKind, Placement, Well};

/// Depth from which a width-1 shaft can only be filled cleanly by a vertical I.
pub const WELL_DEPTH: usize = 3;

/// Deepest lookahead tried when searching for the minimal sufficient one.
pub const MAX_LOOKAHEAD: usize = 4;

// Embedding: col 0 wall, cols 1..=3 interior, col 4 wall, col 5 kept empty so
// that no row ever completes.
const INTERIOR: usize = 1;
const EMBED_WIDTH: usize = 6;
const WALL_MARGIN: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketProfile {
    pub heights: [usize; 3],
}

impl BucketProfile {
    /// The lock left by a right gun with a left snake on top.
    pub const CLOSED: BucketProfile = BucketProfile { heights: [1, 3, 4] };

    pub fn new(h0: usize, h1: usize, h2: usize) -> Self {
        BucketProfile { heights: [h0, h1, h2] }
    }

    pub fn flat(level: usize) -> Self {
        BucketProfile { heights: [level; 3] }
    }

    pub fn closed_above(base: usize) -> Self {
        BucketProfile::new(base + 1, base + 3, base + 4)
    }

    pub fn flat_level(&self) -> Option<usize> {
        let [a, b, c] = self.heights;
        (a == b && b == c).then_some(a)
    }

    /// Base row of a closed profile, if this is one.
    pub fn closed_base(&self) -> Option<usize> {
        let [a, b, c] = self.heights;
        (a >= 1 && b == a + 2 && c == a + 3).then(|| a - 1)
    }

    pub fn cells(&self) -> usize {
        self.heights.iter().sum()
    }

    fn embed(&self) -> Board {
        let top = self.heights.iter().copied().max().unwrap_or(0);
        let wall = top + WALL_MARGIN;
        let interior = self
            .heights
            .iter()
            .enumerate()
            .flat_map(|(c, &h)| (0..h).map(move |r| (INTERIOR + c, r)));
        let walls = (0..wall).flat_map(|r| [(0, r), (INTERIOR + 3, r)]);
        Board::from_cells(EMBED_WIDTH, wall + 8, walls.chain(interior)).expect("embedding never fills a row")
    }
}

impl fmt::Display for BucketProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.heights;
        write!(f, "({a},{b},{c})")
    }
}

/// Outcome class of one drop into a bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Badness {
    Good,
    /// At least one covered hole.
    Hole,
    /// No hole, but a new I-only shaft.
    Well,
}

impl fmt::Display for Badness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Badness::Good => "GOOD",
            Badness::Hole => "HOLE",
            Badness::Well => "WELL",
        })
    }
}

/// One enumerated drop. Placement columns are relative to the bucket
/// interior (0, 1 or 2); `heights` are the interior column heights afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalOutcome {
    pub placement: Placement,
    pub badness: Badness,
    pub heights: [usize; 3],
    pub holes: Vec<(usize, usize)>,
    pub wells: Vec<Well>,
}

impl LocalOutcome {
    /// The resulting profile, for hole-free outcomes.
    pub fn profile(&self) -> Option<BucketProfile> {
        self.holes.is_empty().then_some(BucketProfile { heights: self.heights })
    }
}

impl fmt::Display for LocalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.heights;
        write!(
            f,
            "{} o{} c{} {} heights=({a},{b},{c})",
            self.placement.kind, self.placement.orient, self.placement.col, self.badness
        )?;
        if !self.holes.is_empty() {
            write!(f, " holes={}", self.holes.len())?;
        }
        if let Some(w) = self.wells.first() {
            write!(f, " well=c{}+{}", w.col, w.depth)?;
        }
        Ok(())
    }
}

fn interior_wells(board: &Board) -> Vec<Well> {
    board
        .narrow_wells(WELL_DEPTH)
        .into_iter()
        .filter(|w| (INTERIOR..INTERIOR + 3).contains(&w.col))
        .map(|w| Well {
            col: w.col - INTERIOR,
            ..w
        })
        .collect()
}

/// Classifies a single absolute drop on an embedded board.
fn classify(before: &Board, placement: Placement) -> LocalOutcome {
    let (after, cleared) = before
        .apply_placement(placement)
        .expect("bucket embedding is tall enough");
    debug_assert_eq!(cleared, 0);
    let holes: Vec<_> = after
        .covered_holes()
        .into_iter()
        .filter(|&(c, _)| (INTERIOR..INTERIOR + 3).contains(&c))
        .map(|(c, r)| (c - INTERIOR, r))
        .collect();
    let old = interior_wells(before);
    let wells: Vec<_> = interior_wells(&after)
        .into_iter()
        .filter(|w| !old.iter().any(|o| o.col == w.col && o.bottom == w.bottom))
        .collect();
    let badness = if !holes.is_empty() {
        Badness::Hole
    } else if !wells.is_empty() {
        Badness::Well
    } else {
        Badness::Good
    };
    let heights = [0, 1, 2].map(|c| after.column_height(INTERIOR + c));
    LocalOutcome {
        placement: Placement {
            col: placement.col - INTERIOR,
            ..placement
        },
        badness,
        heights,
        holes,
        wells,
    }
}

/// Every drop of `kind` that fits inside the bucket, classified.
pub fn local_placements(profile: BucketProfile, kind: PieceKind) -> Vec<LocalOutcome> {
    let board = profile.embed();
    board
        .enumerate_placements_within(kind, INTERIOR, INTERIOR + 3)
        .into_iter()
        .map(|opt| classify(&board, opt.placement))
        .collect()
}

/// Drops one relative placement into the bucket.
pub fn drop_into(profile: BucketProfile, placement: Placement) -> LocalOutcome {
    let board = profile.embed();
    classify(
        &board,
        Placement {
            col: placement.col + INTERIOR,
            ..placement
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gadget {
    /// One left gun that turns a closed bucket flat.
    Open,
    /// T, T, right gun: four flat rows.
    Digit,
    /// Right gun then left snake: the lock.
    Close,
    /// The left gun that caps a bucket after the last number.
    Final,
}

impl Gadget {
    /// Canonical drops with columns relative to the bucket interior.
    pub fn placements(self) -> &'static [Placement] {
        const OPEN: [Placement; 1] = [Placement {
            kind: PieceKind::LG,
            orient: crate::engine::Orientation(1),
            col: 0,
        }];
        const DIGIT: [Placement; 3] = [
            Placement {
                kind: PieceKind::T,
                orient: crate::engine::Orientation(0),
                col: 0,
            },
            Placement {
                kind: PieceKind::T,
                orient: crate::engine::Orientation(3),
                col: 0,
            },
            Placement {
                kind: PieceKind::RG,
                orient: crate::engine::Orientation(1),
                col: 1,
            },
        ];
        const CLOSE: [Placement; 2] = [
            Placement {
                kind: PieceKind::RG,
                orient: crate::engine::Orientation(0),
                col: 0,
            },
            Placement {
                kind: PieceKind::LS,
                orient: crate::engine::Orientation(0),
                col: 1,
            },
        ];
        match self {
            Gadget::Open | Gadget::Final => &OPEN,
            Gadget::Digit => &DIGIT,
            Gadget::Close => &CLOSE,
        }
    }

    pub fn pieces(self) -> Vec<PieceKind> {
        self.placements().iter().map(|p| p.kind).collect()
    }

    fn accepts(self, profile: &BucketProfile) -> bool {
        match self {
            Gadget::Open | Gadget::Final => profile.closed_base().is_some(),
            Gadget::Digit | Gadget::Close => profile.flat_level().is_some(),
        }
    }
}

impl fmt::Display for Gadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gadget::Open => "OPEN",
            Gadget::Digit => "DIGIT",
            Gadget::Close => "CLOSE",
            Gadget::Final => "FINAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("{gadget} cannot be applied to profile {profile}")]
    EntryMismatch { gadget: Gadget, profile: BucketProfile },
    #[error("{gadget} step {step} on {profile} is {badness}")]
    NotClean {
        gadget: Gadget,
        step: usize,
        profile: BucketProfile,
        badness: Badness,
    },
    #[error("no lemma {0} (placement lemmas are 5 to 10)")]
    UnknownLemma(u32),
}

/// Plays a gadget's canonical drops on `profile`.
pub fn gadget_transition(profile: BucketProfile, gadget: Gadget) -> Result<BucketProfile, GadgetError> {
    if !gadget.accepts(&profile) {
        return Err(GadgetError::EntryMismatch { gadget, profile });
    }
    let mut cur = profile;
    for (step, &p) in gadget.placements().iter().enumerate() {
        let out = drop_into(cur, p);
        if out.badness != Badness::Good {
            return Err(GadgetError::NotClean {
                gadget,
                step,
                profile: cur,
                badness: out.badness,
            });
        }
        cur = BucketProfile { heights: out.heights };
    }
    Ok(cur)
}

/// Counts for one ply of a lemma check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCount {
    pub piece: PieceKind,
    /// Number of surviving lines entering this ply.
    pub lines_in: usize,
    pub examined: usize,
    pub good: usize,
    pub well: usize,
    pub hole: usize,
    pub outcomes: Vec<LocalOutcome>,
}

impl StageCount {
    /// Drops that leave no covered hole (GOOD or WELL).
    pub fn hole_free(&self) -> usize {
        self.good + self.well
    }
}

/// A full line of play through a lemma's piece sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub placements: Vec<Placement>,
    pub exit: BucketProfile,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: u32,
    pub lookahead: usize,
    pub entry: BucketProfile,
    pub stages: Vec<StageCount>,
    /// Lines where every prefix is GOOD and the lookahead is satisfied.
    pub accepted: Vec<Line>,
    pub canonical_identified: bool,
    /// Accepted lines other than the canonical one.
    pub counterexamples: Vec<Line>,
    /// Smallest lookahead (up to [`MAX_LOOKAHEAD`]) at which exactly the expected
    /// lines survive.
    pub minimal_lookahead: Option<usize>,
    pub holds: bool,
    pub failures: Vec<String>,
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lemma {} entry={} lookahead={}",
            self.lemma, self.entry, self.lookahead
        )?;
        for (i, st) in self.stages.iter().enumerate() {
            writeln!(
                f,
                "ply {} {}: {} placements, {} good, {} well, {} hole (from {} line(s))",
                i + 1,
                st.piece,
                st.examined,
                st.good,
                st.well,
                st.hole,
                st.lines_in
            )?;
            for o in &st.outcomes {
                writeln!(f, "  {o}")?;
            }
        }
        for line in &self.accepted {
            let ps: Vec<String> = line.placements.iter().map(|p| p.to_string()).collect();
            writeln!(f, "accepted: [{}] -> {}", ps.join(", "), line.exit)?;
        }
        writeln!(f, "canonical identified: {}", self.canonical_identified)?;
        match self.minimal_lookahead {
            Some(k) => writeln!(f, "minimal sufficient lookahead: {k}")?,
            None => writeln!(f, "minimal sufficient lookahead: none up to {MAX_LOOKAHEAD}")?,
        }
        for msg in &self.failures {
            writeln!(f, "violated: {msg}")?;
        }
        write!(f, "{}", if self.holds { "HOLDS" } else { "FAILS" })
    }
}

struct LemmaSetup {
    entry: BucketProfile,
    pieces: Vec<PieceKind>,
    continuations: Vec<Vec<PieceKind>>,
    /// Expected accepted line, if any.
    canonical: Option<(Vec<Placement>, BucketProfile)>,
    /// Per ply: (examined, good, well, hole-free) expectations; `None` skips a field.
    claims: Vec<StageClaim>,
}

#[derive(Default, Clone, Copy)]
struct StageClaim {
    examined: Option<usize>,
    good: Option<usize>,
    well: Option<usize>,
    hole_free: Option<usize>,
}

fn setup(lemma: u32) -> Result<LemmaSetup, GadgetError> {
    use PieceKind::*;
    let after_closed = vec![Gadget::Digit.pieces(), Gadget::Close.pieces(), Gadget::Open.pieces()];
    let after_flat = vec![Gadget::Digit.pieces(), Gadget::Close.pieces()];
    let base = 4;
    let claim = |examined, good, well| StageClaim {
        examined: Some(examined),
        good: Some(good),
        well,
        hole_free: None,
    };
    Ok(match lemma {
        5 => LemmaSetup {
            entry: BucketProfile::CLOSED,
            pieces: vec![RG],
            continuations: after_closed,
            canonical: None,
            claims: vec![claim(6, 0, None)],
        },
        6 => LemmaSetup {
            entry: BucketProfile::CLOSED,
            pieces: vec![T],
            continuations: after_closed,
            canonical: None,
            claims: vec![claim(6, 0, Some(1))],
        },
        7 => LemmaSetup {
            entry: BucketProfile::CLOSED,
            pieces: vec![LS],
            continuations: after_closed,
            canonical: None,
            claims: vec![claim(3, 0, Some(1))],
        },
        8 => LemmaSetup {
            entry: BucketProfile::flat(base),
            pieces: Gadget::Digit.pieces(),
            continuations: after_flat,
            canonical: Some((Gadget::Digit.placements().to_vec(), BucketProfile::flat(base + 4))),
            claims: vec![claim(6, 1, None), claim(6, 2, None)],
        },
        9 => LemmaSetup {
            entry: BucketProfile::flat(base),
            pieces: Gadget::Close.pieces(),
            continuations: vec![Gadget::Open.pieces()],
            canonical: Some((Gadget::Close.placements().to_vec(), BucketProfile::closed_above(base))),
            // "the fourth, fifth and sixth way to put the first piece are
            // valid": three drops leave no covered gap.
            claims: vec![StageClaim {
                examined: Some(6),
                hole_free: Some(3),
                ..StageClaim::default()
            }],
        },
        10 => LemmaSetup {
            entry: BucketProfile::CLOSED,
            pieces: vec![LG],
            continuations: after_flat,
            canonical: Some((Gadget::Open.placements().to_vec(), BucketProfile::flat(4))),
            claims: vec![claim(6, 1, None)],
        },
        other => return Err(GadgetError::UnknownLemma(other)),
    })
}

/// True when some continuation keeps every one of its first `plies` drops GOOD.
fn survives(profile: BucketProfile, continuations: &[Vec<PieceKind>], plies: usize) -> bool {
    fn go(profile: BucketProfile, pieces: &[PieceKind]) -> bool {
        let Some((&first, rest)) = pieces.split_first() else {
            return true;
        };
        local_placements(profile, first)
            .into_iter()
            .filter(|o| o.badness == Badness::Good)
            .any(|o| go(BucketProfile { heights: o.heights }, rest))
    }
    plies == 0 || continuations.iter().any(|c| go(profile, &c[..plies.min(c.len())]))
}

fn run_lines(setup: &LemmaSetup, lookahead: usize) -> (Vec<StageCount>, Vec<Line>) {
    let mut lines: Vec<(BucketProfile, Vec<Placement>)> = vec![(setup.entry, Vec::new())];
    let mut stages = Vec::new();
    for &piece in &setup.pieces {
        let mut stage = StageCount {
            piece,
            lines_in: lines.len(),
            examined: 0,
            good: 0,
            well: 0,
            hole: 0,
            outcomes: Vec::new(),
        };
        let mut next = Vec::new();
        for (profile, prefix) in &lines {
            for out in local_placements(*profile, piece) {
                stage.examined += 1;
                match out.badness {
                    Badness::Good => {
                        stage.good += 1;
                        let mut line = prefix.clone();
                        line.push(out.placement);
                        next.push((BucketProfile { heights: out.heights }, line));
                    }
                    Badness::Well => stage.well += 1,
                    Badness::Hole => stage.hole += 1,
                }
                stage.outcomes.push(out);
            }
        }
        stages.push(stage);
        lines = next;
    }
    let accepted = lines
        .into_iter()
        .filter(|(profile, _)| survives(*profile, &setup.continuations, lookahead))
        .map(|(exit, placements)| Line { placements, exit })
        .collect();
    (stages, accepted)
}

fn expected_lines(setup: &LemmaSetup, accepted: &[Line]) -> bool {
    match &setup.canonical {
        None => accepted.is_empty(),
        Some((ps, exit)) => accepted.len() == 1 && accepted[0].placements == *ps && accepted[0].exit == *exit,
    }
}

/// Re-checks one of the bucket placement lemmas (5 to 10) by exhaustive
/// enumeration.
pub fn check_lemma(lemma: u32, lookahead: usize) -> Result<LemmaReport, GadgetError> {
    let setup = setup(lemma)?;
    let (stages, accepted) = run_lines(&setup, lookahead);

    let mut failures = Vec::new();
    for (i, (claim, st)) in setup.claims.iter().zip(&stages).enumerate() {
        let mut expect = |what: &str, want: Option<usize>, got: usize| {
            if let Some(want) = want {
                if want != got {
                    failures.push(format!("ply {}: expected {want} {what}, found {got}", i + 1));
                }
            }
        };
        expect("placements", claim.examined, st.examined);
        expect("good", claim.good, st.good);
        expect("well", claim.well, st.well);
        expect("hole-free", claim.hole_free, st.hole_free());
    }
    let lines_ok = expected_lines(&setup, &accepted);
    if !lines_ok {
        failures.push(match &setup.canonical {
            None => format!("expected no accepted line, found {}", accepted.len()),
            Some((_, exit)) => format!(
                "expected exactly the canonical line ending at {exit}, found {} accepted",
                accepted.len()
            ),
        });
    }

    let canonical_identified = match &setup.canonical {
        Some((ps, exit)) => accepted.iter().any(|l| l.placements == *ps && l.exit == *exit),
        None => false,
    };
    let counterexamples = accepted
        .iter()
        .filter(|l| match &setup.canonical {
            Some((ps, _)) => l.placements != *ps,
            None => true,
        })
        .cloned()
        .collect();
    let minimal_lookahead = (0..=MAX_LOOKAHEAD).find(|&k| {
        if k == lookahead {
            lines_ok
        } else {
            expected_lines(&setup, &run_lines(&setup, k).1)
        }
    });

    Ok(LemmaReport {
        lemma,
        lookahead,
        entry: setup.entry,
        stages,
        accepted,
        canonical_identified,
        counterexamples,
        minimal_lookahead,
        holds: failures.is_empty(),
        failures,
    })
}
