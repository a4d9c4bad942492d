//! Turn budgets and chapter-plan validation/repair.
//!
//! Every chapter of a finished plan holds between [`MIN_CHAPTER_TURNS`] and
//! [`MAX_CHAPTER_TURNS`] turns. A total is therefore reachable only if it can
//! be partitioned into parts of that size, which is the case for 0, 8..=12 and
//! every value from 16 upward.

use serde::{Deserialize, Serialize};

use crate::language::Language;

pub const MIN_CHAPTER_TURNS: u32 = 8;
pub const MAX_CHAPTER_TURNS: u32 = 12;
pub const DEFAULT_SECONDS_PER_TURN: f64 = 18.0;
pub const SECONDS_PER_TURN_RANGE: (f64, f64) = (5.0, 60.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("requested duration must be at least one minute")]
    ZeroMinutes,
    #[error("seconds per turn {0} outside [5, 60]")]
    SecondsPerTurnOutOfRange(f64),
    #[error("unrepairable plan: {0}")]
    UnrepairablePlan(String),
}

/// Closed-form membership test for totals that split into 8..=12 sized parts.
pub fn is_feasible_total(n: u32) -> bool {
    n == 0 || (MIN_CHAPTER_TURNS..=MAX_CHAPTER_TURNS).contains(&n) || n >= 2 * MIN_CHAPTER_TURNS
}

/// Nearest positive feasible total; ties go upward.
pub fn snap_to_feasible(raw: u32) -> u32 {
    if raw > 0 && is_feasible_total(raw) {
        return raw;
    }
    (1..)
        .find_map(|d| {
            let up = raw + d;
            if is_feasible_total(up) {
                return Some(up);
            }
            raw.checked_sub(d).filter(|&down| down > 0 && is_feasible_total(down))
        })
        .expect("feasible totals are unbounded above")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnBudget {
    pub requested_minutes: u32,
    pub seconds_per_turn: f64,
    pub total_turns: u32,
}

impl TurnBudget {
    pub fn for_duration(minutes: u32, seconds_per_turn: f64) -> Result<Self, PlannerError> {
        if minutes == 0 {
            return Err(PlannerError::ZeroMinutes);
        }
        let (lo, hi) = SECONDS_PER_TURN_RANGE;
        if !(lo..=hi).contains(&seconds_per_turn) {
            return Err(PlannerError::SecondsPerTurnOutOfRange(seconds_per_turn));
        }
        let raw = (f64::from(minutes) * 60.0 / seconds_per_turn).round() as u32;
        Ok(Self {
            requested_minutes: minutes,
            seconds_per_turn,
            total_turns: snap_to_feasible(raw),
        })
    }

    /// Inclusive range of chapter counts that can hold exactly this many turns.
    pub fn chapter_count_range(&self) -> (usize, usize) {
        let t = self.total_turns;
        (
            t.div_ceil(MAX_CHAPTER_TURNS) as usize,
            (t / MIN_CHAPTER_TURNS) as usize,
        )
    }
}

/// Shorthand for [`TurnBudget::for_duration`].
pub fn turns_for_duration(minutes: u32, seconds_per_turn: f64) -> Result<TurnBudget, PlannerError> {
    TurnBudget::for_duration(minutes, seconds_per_turn)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chapter {
    pub title: String,
    pub summary: String,
    pub turns: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChapterPlan {
    pub chapters: Vec<Chapter>,
    pub language_of_titles: Language,
}

impl ChapterPlan {
    pub fn total_turns(&self) -> u32 {
        self.chapters.iter().map(|c| c.turns).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TurnsBelowMin { index: usize },
    TurnsAboveMax { index: usize },
    SumMismatch { expected: u32, actual: u32 },
    EmptyTitle { index: usize },
}

pub fn validate_chapter_plan(plan: &ChapterPlan, budget: &TurnBudget) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, ch) in plan.chapters.iter().enumerate() {
        if ch.turns < MIN_CHAPTER_TURNS {
            out.push(Violation::TurnsBelowMin { index });
        }
        if ch.turns > MAX_CHAPTER_TURNS {
            out.push(Violation::TurnsAboveMax { index });
        }
        if ch.title.trim().is_empty() {
            out.push(Violation::EmptyTitle { index });
        }
    }
    let actual = plan.total_turns();
    if actual != budget.total_turns {
        out.push(Violation::SumMismatch {
            expected: budget.total_turns,
            actual,
        });
    }
    out
}

/// Working copy of a chapter with its turn count scaled to the budget.
#[derive(Debug, Clone)]
struct Draft {
    title: String,
    summary: String,
    weight: f64,
}

const EPS: f64 = 1e-9;

/// Brings a plan into the 8..=12 turns-per-chapter shape while hitting the
/// budget's total exactly.
///
/// Chapters whose share of the budget is under eight turns are merged into a
/// neighbour; the chapter count is then moved into the feasible range, with
/// oversized chapters split in half; finally integer turn counts are assigned
/// by largest remainder within the per-chapter bounds. A valid plan is
/// returned unchanged.
pub fn repair_chapter_plan(plan: &ChapterPlan, budget: &TurnBudget) -> Result<ChapterPlan, PlannerError> {
    let total = budget.total_turns;
    if plan.chapters.is_empty() {
        return Err(PlannerError::UnrepairablePlan("plan has no chapters".into()));
    }
    if total == 0 || !is_feasible_total(total) {
        return Err(PlannerError::UnrepairablePlan(format!(
            "budget of {total} turns cannot be split into chapters of {MIN_CHAPTER_TURNS}-{MAX_CHAPTER_TURNS} turns"
        )));
    }
    let (min_k, max_k) = budget.chapter_count_range();

    let raw_sum: u32 = plan.total_turns();
    let mut drafts: Vec<Draft> = plan
        .chapters
        .iter()
        .enumerate()
        .map(|(i, ch)| Draft {
            title: if ch.title.trim().is_empty() {
                format!("Chapter {}", i + 1)
            } else {
                ch.title.trim().to_string()
            },
            summary: ch.summary.trim().to_string(),
            weight: if raw_sum == 0 { 1.0 } else { f64::from(ch.turns) },
        })
        .collect();
    let scale = |drafts: &[Draft]| -> Vec<f64> {
        let sum: f64 = drafts.iter().map(|d| d.weight).sum();
        drafts.iter().map(|d| d.weight * f64::from(total) / sum).collect()
    };

    // Undersized chapters merge into their smaller neighbour.
    while drafts.len() > 1 {
        let shares = scale(&drafts);
        let Some(i) = argmin(&shares).filter(|&i| shares[i] < f64::from(MIN_CHAPTER_TURNS) - EPS) else {
            break;
        };
        let j = match (i.checked_sub(1), (i + 1 < drafts.len()).then_some(i + 1)) {
            (Some(p), Some(n)) if shares[n] < shares[p] => n,
            (Some(p), _) => p,
            (None, Some(n)) => n,
            (None, None) => unreachable!("len > 1"),
        };
        merge_adjacent(&mut drafts, i.min(j));
    }

    while drafts.len() > max_k {
        let i = (0..drafts.len() - 1)
            .min_by(|&a, &b| {
                let sa = drafts[a].weight + drafts[a + 1].weight;
                let sb = drafts[b].weight + drafts[b + 1].weight;
                sa.total_cmp(&sb)
            })
            .expect("at least two drafts");
        merge_adjacent(&mut drafts, i);
    }

    while drafts.len() < min_k {
        let i = argmax(&scale(&drafts)).expect("non-empty");
        split(&mut drafts, i);
    }

    while drafts.len() < max_k {
        let shares = scale(&drafts);
        match argmax(&shares) {
            Some(i) if shares[i] > f64::from(MAX_CHAPTER_TURNS) + EPS => split(&mut drafts, i),
            _ => break,
        }
    }

    let turns = distribute(&scale(&drafts), total);
    Ok(ChapterPlan {
        chapters: drafts
            .into_iter()
            .zip(turns)
            .map(|(d, turns)| Chapter {
                title: d.title,
                summary: d.summary,
                turns,
            })
            .collect(),
        language_of_titles: plan.language_of_titles,
    })
}

fn argmin(xs: &[f64]) -> Option<usize> {
    (0..xs.len()).min_by(|&a, &b| xs[a].total_cmp(&xs[b]))
}

/// First index of the maximum.
fn argmax(xs: &[f64]) -> Option<usize> {
    (0..xs.len()).rev().max_by(|&a, &b| xs[a].total_cmp(&xs[b]))
}

fn merge_adjacent(drafts: &mut Vec<Draft>, i: usize) {
    let next = drafts.remove(i + 1);
    let d = &mut drafts[i];
    d.title = format!("{} & {}", d.title, next.title);
    d.summary = match (d.summary.is_empty(), next.summary.is_empty()) {
        (_, true) => std::mem::take(&mut d.summary),
        (true, false) => next.summary,
        (false, false) => format!("{} {}", d.summary, next.summary),
    };
    d.weight += next.weight;
}

fn split(drafts: &mut Vec<Draft>, i: usize) {
    let d = drafts.remove(i);
    let (first, second) = split_sentences(&d.summary);
    let half = d.weight / 2.0;
    drafts.insert(
        i,
        Draft {
            title: format!("{} (Part 2)", d.title),
            summary: second,
            weight: half,
        },
    );
    drafts.insert(
        i,
        Draft {
            title: format!("{} (Part 1)", d.title),
            summary: first,
            weight: half,
        },
    );
}

/// Splits a summary near its middle on a sentence boundary. A summary with a
/// single sentence is shared by both halves.
fn split_sentences(summary: &str) -> (String, String) {
    let bounds: Vec<usize> = summary
        .char_indices()
        .filter(|&(i, c)| matches!(c, '.' | '!' | '?' | '。') && i + c.len_utf8() < summary.len())
        .map(|(i, c)| i + c.len_utf8())
        .collect();
    let mid = summary.len() / 2;
    match bounds.iter().min_by_key(|&&b| b.abs_diff(mid)) {
        Some(&b) => (summary[..b].trim().to_string(), summary[b..].trim().to_string()),
        None => (summary.to_string(), summary.to_string()),
    }
}

/// Integer turns in 8..=12 summing to `total`, as close as possible to `shares`.
fn distribute(shares: &[f64], total: u32) -> Vec<u32> {
    let (lo, hi) = (MIN_CHAPTER_TURNS, MAX_CHAPTER_TURNS);
    let mut turns: Vec<u32> = shares.iter().map(|&x| (x.round() as u32).clamp(lo, hi)).collect();
    let mut sum: u32 = turns.iter().sum();
    while sum > total {
        let i = (0..turns.len())
            .filter(|&i| turns[i] > lo)
            .rev()
            .max_by(|&a, &b| (f64::from(turns[a]) - shares[a]).total_cmp(&(f64::from(turns[b]) - shares[b])))
            .expect("chapter count admits the total");
        turns[i] -= 1;
        sum -= 1;
    }
    while sum < total {
        let i = (0..turns.len())
            .filter(|&i| turns[i] < hi)
            .rev()
            .max_by(|&a, &b| (shares[a] - f64::from(turns[a])).total_cmp(&(shares[b] - f64::from(turns[b]))))
            .expect("chapter count admits the total");
        turns[i] += 1;
        sum += 1;
    }
    turns
}
