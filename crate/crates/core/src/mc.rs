//! Monte Carlo estimates over seeded, independent games.
//!
//! Trial `i` of a run with seed `s` always plays on the stream `(s, i)`, and
//! wins are summed as integers, so results do not depend on scheduling or on
//! the number of worker threads. `LUPUS_THREADS` caps the worker count.

use std::ops::RangeInclusive;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_game, EngineError, GameConfig, GameState, Winner};
use crate::pbe::{BeliefTracker, Policy};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum McError {
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A binomial proportion with its normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub successes: u64,
    pub trials: u64,
    pub std_error: f64,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let mean = successes as f64 / trials as f64;
        let std_error = (mean * (1.0 - mean) / trials as f64).sqrt();
        let half = 1.96 * std_error;
        Estimate {
            mean,
            successes,
            trials,
            std_error,
            ci95: ((mean - half).max(0.0), (mean + half).min(1.0)),
        }
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci95.0 <= other.ci95.1 && other.ci95.0 <= self.ci95.1
    }

    /// Distance from `target` in standard errors. A zero standard error
    /// counts as exact agreement only on an exact hit.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Merges two runs over disjoint trials.
    pub fn pooled(&self, other: &Estimate) -> Estimate {
        Estimate::from_counts(self.successes + other.successes, self.trials + other.trials)
    }
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("LUPUS_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            builder = builder.num_threads(n);
        }
        builder.build().expect("thread pool")
    })
}

/// Counts trials in `streams` for which `trial` returns true.
pub fn count_successes<F>(seed: u64, streams: std::ops::Range<u64>, trial: F) -> Result<u64, McError>
where
    F: Fn(&mut RngStream) -> Result<bool, McError> + Sync,
{
    pool().install(|| {
        streams
            .into_par_iter()
            .map(|i| trial(&mut RngStream::new(seed, i)).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })
}

fn estimate_with<F>(trials: u64, seed: u64, trial: F) -> Result<Estimate, McError>
where
    F: Fn(&mut RngStream) -> Result<bool, McError> + Sync,
{
    if trials == 0 {
        return Err(McError::ZeroTrials);
    }
    let wins = count_successes(seed, 0..trials, trial)?;
    Ok(Estimate::from_counts(wins, trials))
}

/// Rate at which `winner` takes games played under `config`.
pub fn win_rate(config: &GameConfig, winner: Winner, trials: u64, seed: u64) -> Result<Estimate, McError> {
    config.validate()?;
    estimate_with(trials, seed, |rng| {
        Ok(run_game(config.clone(), rng)?.winner == winner)
    })
}

/// Citizen win rate with one prophet who reveals on day `reveal_round`
/// (or never).
pub fn estimate_h(
    villagers: u32,
    wolves: u32,
    reveal_round: Option<u32>,
    trials: u64,
    seed: u64,
) -> Result<Estimate, McError> {
    let config = GameConfig::new(villagers, wolves, true).with_reveal_round(reveal_round);
    win_rate(&config, Winner::CitizenGroup, trials, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevealSearchResult {
    pub villagers: u32,
    pub wolves: u32,
    pub best_round: u32,
    pub best_estimate: Estimate,
    pub per_round: Vec<(u32, Estimate)>,
    /// Other rounds whose interval overlaps the best one.
    pub tie_rounds: Vec<u32>,
}

impl RevealSearchResult {
    pub fn estimate_at(&self, round: u32) -> Option<&Estimate> {
        self.per_round.iter().find(|(r, _)| *r == round).map(|(_, e)| e)
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.tie_rounds.is_empty()
    }
}

/// Last day a game of this size can still be running.
pub fn last_reveal_round(villagers: u32, wolves: u32) -> u32 {
    (villagers + wolves + 1).div_ceil(2) + 1
}

/// Tries every reveal day and keeps the best; the earliest round wins exact
/// ties in the mean.
pub fn optimal_reveal(
    villagers: u32,
    wolves: u32,
    trials_per_round: u64,
    seed: u64,
) -> Result<RevealSearchResult, McError> {
    let mut per_round = Vec::new();
    for round in 1..=last_reveal_round(villagers, wolves) {
        per_round.push((round, estimate_h(villagers, wolves, Some(round), trials_per_round, seed)?));
    }
    let (best_round, best_estimate) = per_round
        .iter()
        .fold(None::<(u32, Estimate)>, |best, &(r, e)| match best {
            Some((_, b)) if b.mean >= e.mean => best,
            _ => Some((r, e)),
        })
        .expect("at least one round");
    let tie_rounds = per_round
        .iter()
        .filter(|(r, e)| *r != best_round && e.overlaps(&best_estimate))
        .map(|(r, _)| *r)
        .collect();
    Ok(RevealSearchResult {
        villagers,
        wolves,
        best_round,
        best_estimate,
        per_round,
        tie_rounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevealTable {
    pub villagers: Vec<u32>,
    pub wolves: Vec<u32>,
    /// Row-major over villagers, then wolves.
    pub cells: Vec<RevealSearchResult>,
}

impl RevealTable {
    pub fn cell(&self, villagers: u32, wolves: u32) -> Option<&RevealSearchResult> {
        self.cells
            .iter()
            .find(|c| c.villagers == villagers && c.wolves == wolves)
    }

    /// Two rows per villager count (best round, then win percentage), one
    /// column per werewolf count, each followed by a full-precision column.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["villagers".to_string(), "row".to_string()];
        for m in &self.wolves {
            header.push(format!("wolves_{m}"));
            header.push(format!("wolves_{m}_detail"));
        }
        w.write_record(&header)?;
        for &v in &self.villagers {
            let mut rounds = vec![v.to_string(), "optimal_round".to_string()];
            let mut rates = vec![v.to_string(), "citizen_win".to_string()];
            for &m in &self.wolves {
                let c = self.cell(v, m).expect("grid is complete");
                rounds.push(c.best_round.to_string());
                let ties: Vec<String> = c.tie_rounds.iter().map(u32::to_string).collect();
                rounds.push(if ties.is_empty() {
                    String::new()
                } else {
                    format!("ties:{}", ties.join("|"))
                });
                rates.push(format!("{:.0}%", 100.0 * c.best_estimate.mean));
                rates.push(format!(
                    "{:.6} [{:.6},{:.6}]",
                    c.best_estimate.mean, c.best_estimate.ci95.0, c.best_estimate.ci95.1
                ));
            }
            w.write_record(&rounds)?;
            w.write_record(&rates)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn reveal_table(
    villagers: RangeInclusive<u32>,
    wolves: RangeInclusive<u32>,
    trials_per_cell: u64,
    seed: u64,
) -> Result<RevealTable, McError> {
    if villagers.is_empty() || wolves.is_empty() {
        return Err(McError::InvalidArgument("empty villager or werewolf range".into()));
    }
    if *wolves.start() == 0 {
        return Err(McError::InvalidArgument("werewolf counts start at 1".into()));
    }
    let mut cells = Vec::new();
    for v in villagers.clone() {
        for m in wolves.clone() {
            cells.push(optimal_reveal(v, m, trials_per_cell, seed)?);
        }
    }
    Ok(RevealTable {
        villagers: villagers.collect(),
        wolves: wolves.collect(),
        cells,
    })
}

/// Citizen win rate when the prophet tracks its belief and follows `policy`.
pub fn simulate_policy(policy: &Policy, trials: u64, seed: u64) -> Result<Estimate, McError> {
    let config = GameConfig::new(policy.villagers, policy.wolves, true);
    config.validate()?;
    estimate_with(trials, seed, |rng| {
        let state = GameState::new(config.clone(), rng)?;
        let mut tracker = BeliefTracker::new(policy);
        Ok(state.play_out(rng, &mut tracker)?.winner == Winner::CitizenGroup)
    })
}

/// Werewolf win rates with and without night self-kills.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfKillComparison {
    pub with_self_kill: Estimate,
    pub without_self_kill: Estimate,
    /// `without - with`; positive when self-killing hurts the werewolves.
    pub penalty: f64,
    /// The penalty in combined standard errors.
    pub z_score: f64,
}

/// Plays `base` with self-kill probability `q` and with none, on the same
/// streams, and compares the werewolf win rates.
pub fn selfkill_penalty_check(
    base: &GameConfig,
    q: f64,
    trials: u64,
    seed: u64,
) -> Result<SelfKillComparison, McError> {
    if base.werewolves < 2 {
        return Err(McError::InvalidArgument(
            "self-kill comparison needs at least two werewolves".into(),
        ));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(McError::InvalidArgument(format!("q = {q} is outside [0, 1]")));
    }
    let with = base
        .clone()
        .with_self_kill(q, base.self_kill_until_round);
    let without = base.clone().with_self_kill(0.0, None);
    let with_self_kill = win_rate(&with, Winner::WerewolfGroup, trials, seed)?;
    let without_self_kill = win_rate(&without, Winner::WerewolfGroup, trials, seed)?;
    let penalty = without_self_kill.mean - with_self_kill.mean;
    let se = (with_self_kill.std_error.powi(2) + without_self_kill.std_error.powi(2)).sqrt();
    let z_score = if se > 0.0 { penalty / se } else { 0.0 };
    Ok(SelfKillComparison {
        with_self_kill,
        without_self_kill,
        penalty,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::w_plus;

    #[test]
    fn estimate_interval() {
        let e = Estimate::from_counts(50, 100);
        assert!((e.std_error - 0.05).abs() < 1e-12);
        assert!((e.ci95.0 - 0.402).abs() < 1e-12);
        let edge = Estimate::from_counts(0, 10);
        assert_eq!(edge.ci95, (0.0, 0.0));
        assert_eq!(edge.sigmas_from(0.0), 0.0);
        assert_eq!(edge.sigmas_from(0.1), f64::INFINITY);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(estimate_h(4, 1, Some(1), 0, 1), Err(McError::ZeroTrials)));
    }

    #[test]
    fn deterministic_and_mergeable() {
        let cfg = GameConfig::new(5, 2, true).with_reveal_round(Some(2));
        let a = win_rate(&cfg, Winner::CitizenGroup, 4000, 9).unwrap();
        let b = win_rate(&cfg, Winner::CitizenGroup, 4000, 9).unwrap();
        assert_eq!(a, b);
        let trial = |rng: &mut RngStream| Ok(run_game(cfg.clone(), rng)?.winner == Winner::CitizenGroup);
        let lo = count_successes(9, 0..2000, trial).unwrap();
        let hi = count_successes(9, 2000..4000, trial).unwrap();
        let pooled = Estimate::from_counts(lo, 2000).pooled(&Estimate::from_counts(hi, 2000));
        assert_eq!(pooled, a);
    }

    #[test]
    fn decided_start_is_exactly_lost() {
        let e = estimate_h(1, 2, Some(1), 500, 3).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn never_revealing_matches_prophet_free_value() {
        // a silent prophet is just another villager
        let e = estimate_h(4, 1, None, 40_000, 5).unwrap();
        let exact = w_plus(6, 1).unwrap().complement().to_f64();
        assert!(e.sigmas_from(exact) < 4.0, "{} vs {exact}", e.mean);
    }

    #[test]
    fn search_reports_all_rounds() {
        let r = optimal_reveal(4, 1, 2000, 1).unwrap();
        assert_eq!(r.per_round.len() as u32, last_reveal_round(4, 1));
        assert!(r.per_round.iter().all(|(_, e)| e.mean <= r.best_estimate.mean));
        assert!(!r.tie_rounds.contains(&r.best_round));
    }

    #[test]
    fn selfkill_with_zero_probability_coincides() {
        let base = GameConfig::new(6, 3, true);
        let c = selfkill_penalty_check(&base, 0.0, 3000, 2).unwrap();
        assert_eq!(c.with_self_kill, c.without_self_kill);
        assert!(selfkill_penalty_check(&GameConfig::new(6, 1, true), 0.5, 10, 1).is_err());
    }

    #[test]
    fn table_csv_layout() {
        let t = reveal_table(4..=5, 1..=2, 500, 1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "villagers,row,wolves_1,wolves_1_detail,wolves_2,wolves_2_detail");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("4,optimal_round,"));
        assert!(lines[2].starts_with("4,citizen_win,"));
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert!(reveal_table(empty, 1..=2, 10, 1).is_err());
    }
}
