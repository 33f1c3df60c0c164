//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every count is exact; the only numeric
//! tolerances are wall-clock limits, pinned per criterion below.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{brute_placements, descent_rest, mini_instance, naive_clearable, random_board, random_kind};
use hdtetris::certify::{canonical_trace, verify_trace, verify_trace_observed};
use hdtetris::engine::{PieceKind, Placement};
use hdtetris::gadgets::{check_lemma, local_placements, Badness, BucketProfile, LocalOutcome};
use hdtetris::reduction::{budget_report, build_board, build_sequence, Instance3P, Mode};
use hdtetris::solve::{search_clearable, solve_3partition, SearchConfig, SearchVerdict};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x5EED_7E75;

const LIMIT_LEMMAS: Duration = Duration::from_secs(2);
const LIMIT_END_TO_END: Duration = Duration::from_secs(5);
const LIMIT_ORACLE: Duration = Duration::from_secs(60);
const LIMIT_BUDGET: Duration = Duration::from_secs(30);
const LIMIT_ENGINE: Duration = Duration::from_secs(30);
const LIMIT_SEARCH: Duration = Duration::from_secs(60);

/// Node budget for the negative-instance board search.
const NEGATIVE_SEARCH_BUDGET: u64 = 2_000_000;
/// Node budget per mini-board search; exceeding it is a failure, not a pass.
const MINI_SEARCH_BUDGET: u64 = 20_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn count(outs: &[LocalOutcome], b: Badness) -> usize {
    outs.iter().filter(|o| o.badness == b).count()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:?}, limit {limit:?}"))
}

fn c1_lemma_counts() -> Outcome {
    let t0 = Instant::now();
    let closed = BucketProfile::CLOSED;
    ensure(closed.heights == [1, 3, 4], || format!("closed profile is {closed}"))?;
    let mut parts = Vec::new();
    // (piece, placements, good, wells); None = not constrained
    let claims = [
        (PieceKind::RG, 6, 0, None),
        (PieceKind::T, 6, 0, Some(1)),
        (PieceKind::LS, 3, 0, Some(1)),
        (PieceKind::LG, 6, 1, None),
    ];
    for (kind, n, good, wells) in claims {
        let outs = local_placements(closed, kind);
        let (g, w) = (count(&outs, Badness::Good), count(&outs, Badness::Well));
        ensure(outs.len() == n && g == good && wells.is_none_or(|x| x == w), || {
            format!("{kind}: {} placements, {g} good, {w} well", outs.len())
        })?;
        parts.push(format!("{kind} {}/{g}g/{w}w", outs.len()));
    }
    let opener = local_placements(closed, PieceKind::LG)
        .into_iter()
        .find(|o| o.badness == Badness::Good)
        .unwrap();
    ensure(opener.profile() == Some(BucketProfile::flat(4)), || {
        format!("the good LG yields {:?}", opener.heights)
    })?;
    for lemma in [5, 6, 7, 10] {
        let r = check_lemma(lemma, 1).map_err(|e| e.to_string())?;
        ensure(r.holds, || {
            format!("harness reports lemma {lemma} violated: {:?}", r.failures)
        })?;
    }
    within(LIMIT_LEMMAS, t0)?;
    Ok(format!("{}; LG opens to flat", parts.join(", ")))
}

/// All lines through `pieces` from `entry` where every drop is GOOD.
fn good_lines(entry: BucketProfile, pieces: &[PieceKind]) -> Vec<(Vec<Placement>, BucketProfile)> {
    let mut lines = vec![(Vec::new(), entry)];
    for &k in pieces {
        lines = lines
            .into_iter()
            .flat_map(|(path, prof)| {
                local_placements(prof, k)
                    .into_iter()
                    .filter(|o| o.badness == Badness::Good)
                    .map(move |o| {
                        let mut p = path.clone();
                        p.push(o.placement);
                        (p, o.profile().unwrap())
                    })
            })
            .collect();
    }
    lines
}

fn c2_digit_uniqueness() -> Outcome {
    let t0 = Instant::now();
    let open = BucketProfile::flat(4);
    let first = local_placements(open, PieceKind::T);
    let g1 = count(&first, Badness::Good);
    ensure(first.len() == 6 && g1 == 1, || {
        format!("first T: {} placements, {g1} good", first.len())
    })?;
    let after = first
        .iter()
        .find(|o| o.badness == Badness::Good)
        .unwrap()
        .profile()
        .unwrap();
    let second = local_placements(after, PieceKind::T);
    let g2 = count(&second, Badness::Good);
    ensure(second.len() == 6 && g2 == 2, || {
        format!("second T: {} placements, {g2} good", second.len())
    })?;
    let lines = good_lines(open, &[PieceKind::T, PieceKind::T, PieceKind::RG]);
    ensure(lines.len() == 1, || format!("{} all-good T,T,RG lines", lines.len()))?;
    ensure(lines[0].1 == BucketProfile::flat(8), || {
        format!("digit ends at {}", lines[0].1)
    })?;
    let r = check_lemma(8, 1).map_err(|e| e.to_string())?;
    ensure(r.holds, || format!("harness: {:?}", r.failures))?;
    within(LIMIT_LEMMAS, t0)?;
    Ok(format!("T 6/{g1}g, T 6/{g2}g, one line to {}", lines[0].1))
}

fn c3_close_uniqueness() -> Outcome {
    let t0 = Instant::now();
    let open = BucketProfile::flat(4);
    let rg = local_placements(open, PieceKind::RG);
    let (g, w) = (count(&rg, Badness::Good), count(&rg, Badness::Well));
    let r = check_lemma(9, 1).map_err(|e| e.to_string())?;
    let minimal = match r.minimal_lookahead {
        Some(k) => k.to_string(),
        None => "none".into(),
    };
    let summary = format!(
        "RG on flat: {} placements, {g} good, {w} well, {} hole-free; {} accepted close line(s) at lookahead 1; minimal sufficient lookahead {minimal}",
        rg.len(),
        g + w,
        r.accepted.len()
    );
    ensure(r.accepted.len() == 1, || {
        format!("{summary}; expected exactly one close line")
    })?;
    ensure(r.accepted[0].exit == BucketProfile::closed_above(4), || {
        format!("{summary}; close ends at {}", r.accepted[0].exit)
    })?;
    ensure(r.minimal_lookahead.is_some(), || {
        format!("{summary}; no sufficient lookahead found")
    })?;
    ensure(rg.len() == 6 && g == 3, || {
        format!("{summary}; expected exactly 3 GOOD of 6")
    })?;
    within(LIMIT_LEMMAS, t0)?;
    Ok(summary)
}

fn run_bin(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hdtetris"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    ))
}

fn c4_end_to_end() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cases = [
        (Instance3P::new(1, 6, vec![2, 2, 2]), Mode::Strict, "--strict"),
        (
            Instance3P::new(3, 6, vec![4, 3, 2, 1, 1, 1, 2, 2, 2]),
            Mode::Lax,
            "--lax",
        ),
    ];
    let mut parts = Vec::new();
    for (inst, mode, flag) in cases {
        let t0 = Instant::now();
        let path = dir.path().join("inst.3p");
        std::fs::write(&path, hdtetris::cli::formats::emit_instance(&inst)).map_err(|e| e.to_string())?;
        let trc = dir.path().join("inst.trc");
        let (code, stdout) = run_bin(&[
            "certify",
            path.to_str().unwrap(),
            "--auto",
            flag,
            "--trace",
            trc.to_str().unwrap(),
        ])?;
        let expected = 16 + 4 * inst.target as usize;
        ensure(code == 0, || format!("{inst}: exit {code}: {stdout}"))?;
        ensure(stdout.contains(&format!("cleared {expected} lines")), || {
            format!("{inst}: {stdout}")
        })?;

        // Replay the emitted trace ourselves and watch every intermediate board.
        let trace = hdtetris::cli::formats::parse_trace(&std::fs::read_to_string(&trc).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let board = build_board(&inst, mode).map_err(|e| e.to_string())?;
        let seq = build_sequence(&inst, mode).map_err(|e| e.to_string())?;
        let mut holes_seen = Vec::new();
        let v = verify_trace_observed(&board, &seq, &trace, |i, _, b| {
            if !b.covered_holes().is_empty() {
                holes_seen.push(i);
            }
        });
        ensure(v.success(), || format!("{inst}: replay failed: {:?}", v.failure))?;
        ensure(v.cleared_lines == expected && v.final_board.is_empty(), || {
            format!(
                "{inst}: cleared {}, {} cells left",
                v.cleared_lines,
                v.final_board.filled_count()
            )
        })?;
        ensure(holes_seen.is_empty(), || {
            format!("{inst}: covered holes after steps {holes_seen:?}")
        })?;
        within(LIMIT_END_TO_END, t0)?;
        parts.push(format!("{inst}: {expected} lines in {:?}", t0.elapsed()));
    }
    Ok(parts.join("; "))
}

fn has_triple(inst: &Instance3P) -> bool {
    let a = &inst.numbers;
    (0..6).any(|i| (i + 1..6).any(|j| (j + 1..6).any(|k| a[i] + a[j] + a[k] == inst.target)))
}

fn c5_oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let (mut total, mut yes) = (0, 0);
    let mut a = [1i64; 6];
    'outer: loop {
        let sum: i64 = a.iter().sum();
        if sum % 2 == 0 && sum / 2 <= 13 {
            let inst = Instance3P::new(2, sum / 2, a.to_vec());
            if inst.validate(Mode::Lax).is_ok() {
                total += 1;
                let found = solve_3partition(&inst).map_err(|e| e.to_string())?;
                ensure(found.is_some() == has_triple(&inst), || {
                    format!("{inst}: oracle {found:?} disagrees with brute force")
                })?;
                let certified = match &found {
                    Some(p) => {
                        let trace = canonical_trace(&inst, p, Mode::Lax).map_err(|e| e.to_string())?;
                        let board = build_board(&inst, Mode::Lax).map_err(|e| e.to_string())?;
                        let seq = build_sequence(&inst, Mode::Lax).map_err(|e| e.to_string())?;
                        verify_trace(&board, &seq, &trace).success()
                    }
                    None => false,
                };
                ensure(certified == found.is_some(), || {
                    format!("{inst}: certify {certified}, oracle {found:?}")
                })?;
                yes += usize::from(certified);
            }
        }
        for d in a.iter_mut() {
            if *d < 6 {
                *d += 1;
                continue 'outer;
            }
            *d = 1;
        }
        break;
    }
    let neg = Instance3P::new(2, 13, vec![4, 4, 4, 4, 4, 6]);
    ensure(solve_3partition(&neg).map_err(|e| e.to_string())?.is_none(), || {
        "negative instance partitioned".into()
    })?;
    let layout = neg.layout();
    let verdict = search_clearable(
        &build_board(&neg, Mode::Lax).unwrap(),
        &build_sequence(&neg, Mode::Lax).unwrap(),
        &SearchConfig::for_reduction(layout, NEGATIVE_SEARCH_BUDGET),
    )
    .map_err(|e| e.to_string())?;
    ensure(!verdict.is_clearable(), || {
        "board search claims the negative instance clears".into()
    })?;
    within(LIMIT_ORACLE, t0)?;
    Ok(format!(
        "{total} instances, {yes} certified, {} refuted; negative board search: {} after {} nodes",
        total - yes,
        verdict.label(),
        verdict.nodes()
    ))
}

fn random_instance(rng: &mut StdRng) -> Instance3P {
    let s = rng.gen_range(1..=5usize);
    let b = rng.gen_range(3..=20i64);
    // Split sB into 3s positive parts.
    let n = 3 * s;
    let total = s as i64 * b;
    let mut cuts: BTreeSet<i64> = BTreeSet::new();
    while cuts.len() < n - 1 {
        cuts.insert(rng.gen_range(1..total));
    }
    let mut prev = 0;
    let mut nums: Vec<i64> = cuts
        .into_iter()
        .map(|c| {
            let d = c - prev;
            prev = c;
            d
        })
        .collect();
    nums.push(total - prev);
    Instance3P::new(s, b, nums)
}

fn c6_budget_identities() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED ^ 6);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        inst.validate(Mode::Lax).map_err(|v| format!("{inst}: {v:?}"))?;
        let (s, b) = (inst.subsets, inst.target as usize);
        let h = 16 + 4 * b;
        let board = build_board(&inst, Mode::Lax).map_err(|e| e.to_string())?;
        let seq = build_sequence(&inst, Mode::Lax).map_err(|e| e.to_string())?;
        let fillable: usize = (0..h)
            .map(|r| (0..board.width()).filter(|&c| !board.is_filled(c, r)).count())
            .sum();
        ensure(seq.len() == 10 * s + 3 * s * b + b + 4, || {
            format!("{inst}: |seq| = {}", seq.len())
        })?;
        ensure(4 * seq.len() == fillable, || {
            format!("{inst}: 4|seq| = {}, fillable {fillable}", 4 * seq.len())
        })?;
        ensure(fillable == (3 * s + 1) * h - 8 * s, || {
            format!("{inst}: fillable {fillable}")
        })?;
        let r = budget_report(&inst, Mode::Lax).map_err(|e| e.to_string())?;
        let c = r.per_bucket;
        ensure(
            [c.planted, c.opens, c.digits, c.closes, c.final_cap] == [8, 12, 12 * b, 24, 4],
            || format!("{inst}: per bucket {c:?}"),
        )?;
        ensure(c.total() == 3 * h && r.bucket_area == 3 * h && r.balanced(), || {
            format!("{inst}: {r}")
        })?;
    }
    within(LIMIT_BUDGET, t0)?;
    Ok("100 instances balanced".into())
}

fn c7_engine_properties() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    let (mut placed, mut cleared_rows) = (0, 0);
    while placed < 1000 {
        let (w, h) = (rng.gen_range(2..=12), rng.gen_range(4..=20));
        let mut board = random_board(&mut rng, w, h);
        for _ in 0..10 {
            let kind = random_kind(&mut rng);
            let listed: BTreeSet<(u8, usize, bool)> = board
                .enumerate_placements(kind)
                .into_iter()
                .map(|o| (o.placement.orient.0, o.placement.col, o.tops_out))
                .collect();
            ensure(listed == brute_placements(&board, kind), || {
                format!("{kind} enumeration differs on\n{board:?}")
            })?;
            let legal: Vec<_> = listed.iter().filter(|x| !x.2).collect();
            let Some(&&(o, col, _)) = legal.get(rng.gen_range(0..legal.len().max(1))) else {
                break;
            };
            let p = Placement::new(kind, o, col);
            let rest = board.drop_row(kind, p.orient, col).map_err(|e| e.to_string())?;
            ensure(Some(rest) == descent_rest(&board, kind, o, col), || {
                format!("{p}: drop row {rest}")
            })?;
            let before = board.filled_count();
            let cleared = board.place(p).map_err(|e| e.to_string())?;
            ensure(board.filled_count() + w * cleared == before + 4, || {
                format!("{p}: cells not conserved")
            })?;
            ensure((0..h).all(|r| board.row_count(r) < w), || {
                format!("{p}: full row persists")
            })?;
            placed += 1;
            cleared_rows += cleared;
            if placed == 1000 {
                break;
            }
        }
    }
    within(LIMIT_ENGINE, t0)?;
    Ok(format!("{placed} placements, {cleared_rows} rows cleared"))
}

fn c8_search_soundness() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED ^ 8);
    let (mut clearable, mut nodes_pruned, mut nodes_plain) = (0, 0, 0);
    let pruned_cfg = SearchConfig {
        node_budget: MINI_SEARCH_BUDGET,
        ..SearchConfig::default()
    };
    let plain_cfg = SearchConfig::exhaustive(MINI_SEARCH_BUDGET);
    for i in 0..50 {
        let (board, seq) = mini_instance(&mut rng);
        let pruned = search_clearable(&board, &seq, &pruned_cfg).map_err(|e| e.to_string())?;
        let plain = search_clearable(&board, &seq, &plain_cfg).map_err(|e| e.to_string())?;
        let naive = naive_clearable(&board, &seq);
        for v in [&pruned, &plain] {
            ensure(!matches!(v, SearchVerdict::BudgetExceeded { .. }), || {
                format!("case {i}: budget exceeded")
            })?;
            if let SearchVerdict::Clearable { witness, .. } = v {
                let check = verify_trace(&board, &seq, witness);
                ensure(check.success(), || {
                    format!("case {i}: witness rejected: {:?}", check.failure)
                })?;
            }
        }
        ensure(
            pruned.is_clearable() == plain.is_clearable() && plain.is_clearable() == naive,
            || {
                format!(
                    "case {i}: pruned {}, plain {}, naive {naive}\n{board:?}{seq:?}",
                    pruned.label(),
                    plain.label()
                )
            },
        )?;
        clearable += usize::from(naive);
        nodes_pruned += pruned.nodes();
        nodes_plain += plain.nodes();
    }
    within(LIMIT_SEARCH, t0)?;
    Ok(format!(
        "50 boards, {clearable} clearable; nodes pruned {nodes_pruned} vs plain {nodes_plain}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("C1 lemma counts on the closed bucket", c1_lemma_counts),
        ("C2 digit uniqueness", c2_digit_uniqueness),
        ("C3 close uniqueness", c3_close_uniqueness),
        ("C4 end-to-end positive instances", c4_end_to_end),
        ("C5 oracle equivalence", c5_oracle_equivalence),
        ("C6 budget identities", c6_budget_identities),
        ("C7 engine properties", c7_engine_properties),
        ("C8 search soundness", c8_search_soundness),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t0 = Instant::now();
        match f() {
            Ok(detail) => println!("PASS {name} ({:.2?}): {detail}", t0.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({:.2?}): {detail}", t0.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
