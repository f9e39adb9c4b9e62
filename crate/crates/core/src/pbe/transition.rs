//! One day-and-night step from a node: vote, then the prophet's check, then
//! the night kill.
//!
//! Entries 1-16 lead to a new node, 17-21 end with the prophet dead, and
//! 22-25 cover nights where every living player is already checked, so no
//! check happens. The printed modes reproduce a variant of the
//! table for diagnostics; it does not sum to one.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::node::Node;
use super::PbeError;
use crate::exact::{w_plus, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VoteClass {
    CheckedVillager,
    CheckedWerewolf,
    /// Someone unchecked; their role is never announced.
    Unchecked,
    Prophet,
    /// The first night has no preceding vote.
    NoVote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckClass {
    VillagerChecked,
    WerewolfChecked,
    NoCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KillClass {
    CheckedVillagerKilled,
    UncheckedVillagerKilled,
    ProphetKilled,
}

/// What the prophet observes over one step. Entries with equal classes are
/// indistinguishable to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeClass {
    pub vote: VoteClass,
    pub check: CheckClass,
    pub kill: KillClass,
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}/{:?}", self.vote, self.check, self.kill)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub index: u8,
    pub probability: Probability,
    /// `None` when the prophet dies during the step.
    pub successor: Option<Node>,
    pub outcome: OutcomeClass,
    /// Citizen win probability for the steps without a successor.
    pub payoff: Option<Probability>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableMode {
    /// Every entry follows from the vote, check, kill factorization.
    #[default]
    Derived,
    /// Entries 1-21 exactly as published, with no no-check entries.
    AsPrinted,
    /// The derived table with only entry 8 replaced by its published form.
    PrintedEntry8,
}

fn q(num: i64, den: i64) -> BigRational {
    if num == 0 || den == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

const fn outcome(vote: VoteClass, check: CheckClass, kill: KillClass) -> OutcomeClass {
    OutcomeClass { vote, check, kill }
}

struct Builder {
    entries: Vec<Transition>,
}

impl Builder {
    fn push(
        &mut self,
        index: u8,
        p: BigRational,
        successor: Option<(i64, i64, i64, i64)>,
        outcome: OutcomeClass,
        payoff: Option<Probability>,
    ) {
        if p.is_zero() {
            return;
        }
        let successor = successor.map(|(a, b, c, d)| {
            Node::new(a.max(0) as u32, b.max(0) as u32, c.max(0) as u32, d.max(0) as u32)
        });
        self.entries.push(Transition {
            index,
            probability: Probability::from_rational(p),
            successor,
            outcome,
            payoff,
        });
    }
}

use CheckClass::{NoCheck, VillagerChecked, WerewolfChecked};
use KillClass::{CheckedVillagerKilled, ProphetKilled, UncheckedVillagerKilled};
use VoteClass::{CheckedVillager, CheckedWerewolf, Prophet, Unchecked};

/// Citizen win probability once the hidden prophet is dead, with `players`
/// alive after the vote and `wolves` of them werewolves.
fn prophet_dead_payoff(players: u32, wolves: u32) -> Probability {
    w_plus(players, wolves)
        .expect("werewolves never exceed players")
        .complement()
}

/// The validated step table. Zero-probability entries are dropped.
pub fn transition_table(node: Node) -> Result<Vec<Transition>, PbeError> {
    let table = transition_table_in(node, TableMode::Derived)?;
    let sum = partition_sum(&table);
    if !sum.is_one() {
        return Err(PbeError::Partition { node, sum });
    }
    Ok(table)
}

pub fn partition_sum(table: &[Transition]) -> Probability {
    table.iter().map(|t| t.probability.clone()).sum()
}

/// The step table in the given mode, without the sum-to-one check.
pub fn transition_table_in(node: Node, mode: TableMode) -> Result<Vec<Transition>, PbeError> {
    node.validate()?;
    if node.players() == 0 {
        return Err(PbeError::InvalidNode(node));
    }
    let (big_n, big_m) = (node.villagers as i64, node.wolves as i64);
    let (n, m) = (node.checked_villagers as i64, node.checked_wolves as i64);
    let t = big_n + big_m + 1;
    let mut b = Builder {
        entries: Vec::with_capacity(25),
    };

    let pay_full = prophet_dead_payoff(node.players(), node.wolves);
    let pay_wolf_out = prophet_dead_payoff(node.players(), node.wolves.saturating_sub(1));

    let printed = mode == TableMode::AsPrinted;

    // Checked villager voted out; checkable U, kill targets K.
    {
        let vote = q(n, t);
        let u = (big_n - n) + (big_m - m);
        let k = big_n;
        let cv = |c, kill| outcome(CheckedVillager, c, kill);
        if printed {
            let u = (big_n - 1) + big_m - (n - 1) - m;
            b.push(1, &vote * q(big_n - n, u) * q(n, big_n), Some((big_n - 2, big_m, n - 1, m)), cv(VillagerChecked, CheckedVillagerKilled), None);
            b.push(2, &vote * q(big_n - n, u) * q(big_n - 1 - n, big_n), Some((big_n - 2, big_m, n, m)), cv(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(3, &vote * q(big_m - m, u) * q(n - 1, big_n), Some((big_n - 2, big_m, n - 2, m + 1)), cv(WerewolfChecked, CheckedVillagerKilled), None);
            b.push(4, &vote * q(big_m - m, u) * q(big_n - n, big_n), Some((big_n - 2, big_m, n - 1, m + 1)), cv(WerewolfChecked, UncheckedVillagerKilled), None);
        } else if u > 0 {
            b.push(1, &vote * q(big_n - n, u) * q(n, k), Some((big_n - 2, big_m, n - 1, m)), cv(VillagerChecked, CheckedVillagerKilled), None);
            b.push(2, &vote * q(big_n - n, u) * q(big_n - n - 1, k), Some((big_n - 2, big_m, n, m)), cv(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(3, &vote * q(big_m - m, u) * q(n - 1, k), Some((big_n - 2, big_m, n - 2, m + 1)), cv(WerewolfChecked, CheckedVillagerKilled), None);
            b.push(4, &vote * q(big_m - m, u) * q(big_n - n, k), Some((big_n - 2, big_m, n - 1, m + 1)), cv(WerewolfChecked, UncheckedVillagerKilled), None);
        } else {
            b.push(22, &vote * q(n - 1, k), Some((big_n - 2, big_m, n - 2, m)), cv(NoCheck, CheckedVillagerKilled), None);
        }
        b.push(18, &vote * q(1, k), None, outcome(CheckedVillager, NoCheck, ProphetKilled), Some(pay_full.clone()));
    }

    // Checked werewolf voted out.
    {
        let vote = q(m, t);
        let u = (big_n - n) + (big_m - m);
        let k = big_n + 1;
        let cw = |c, kill| outcome(CheckedWerewolf, c, kill);
        if printed || mode == TableMode::PrintedEntry8 {
            let u = big_n + (big_m - 1) - n - (m - 1);
            let p8 = &vote * q(n, u) * q(big_n - (n + 1), big_n + 1);
            b.push(8, p8, Some((big_n - 1, big_m - 1, n, m)), cw(WerewolfChecked, UncheckedVillagerKilled), None);
        }
        if printed {
            let u = big_n + (big_m - 1) - n - (m - 1);
            b.push(5, &vote * q(n, u) * q(n + 1, big_n + 1), Some((big_n - 1, big_m - 1, n, m - 1)), cw(VillagerChecked, CheckedVillagerKilled), None);
            b.push(6, &vote * q(n, u) * q(big_n - n, big_n + 1), Some((big_n - 1, big_m - 1, n + 1, m - 1)), cw(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(7, &vote * q((big_m - 1) - (m - 1), u) * q(n, big_n + 1), Some((big_n - 1, big_m - 1, n - 1, m)), cw(WerewolfChecked, CheckedVillagerKilled), None);
        } else if u > 0 {
            b.push(5, &vote * q(big_n - n, u) * q(n + 1, k), Some((big_n - 1, big_m - 1, n, m - 1)), cw(VillagerChecked, CheckedVillagerKilled), None);
            b.push(6, &vote * q(big_n - n, u) * q(big_n - n - 1, k), Some((big_n - 1, big_m - 1, n + 1, m - 1)), cw(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(7, &vote * q(big_m - m, u) * q(n, k), Some((big_n - 1, big_m - 1, n - 1, m)), cw(WerewolfChecked, CheckedVillagerKilled), None);
            if mode == TableMode::Derived {
                b.push(8, &vote * q(big_m - m, u) * q(big_n - n, k), Some((big_n - 1, big_m - 1, n, m)), cw(WerewolfChecked, UncheckedVillagerKilled), None);
            }
        } else {
            b.push(23, &vote * q(n, k), Some((big_n - 1, big_m - 1, n - 1, m - 1)), cw(NoCheck, CheckedVillagerKilled), None);
        }
        b.push(19, &vote * q(1, k), None, outcome(CheckedWerewolf, NoCheck, ProphetKilled), Some(pay_wolf_out.clone()));
    }

    // Unchecked werewolf voted out.
    {
        let vote = q(big_m - m, t);
        let u = (big_n - n) + (big_m - 1 - m);
        let k = big_n + 1;
        let uw = |c, kill| outcome(Unchecked, c, kill);
        if printed {
            let u = big_n + (big_m - 1) - n - m;
            b.push(9, &vote * q(big_n - n, u) * q(n + 1, big_n + 1), Some((big_n - 1, big_m - 1, n, m)), uw(VillagerChecked, CheckedVillagerKilled), None);
            b.push(10, &vote * q(big_n - n, u) * q(big_n - n, big_n + 1), Some((big_n - 1, big_m - 1, n + 1, m)), uw(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(11, &vote * q(big_n - n, u) * q(big_n - (n + 1), big_n + 1), Some((big_n - 1, big_m - 1, n, m + 1)), uw(WerewolfChecked, UncheckedVillagerKilled), None);
            b.push(12, &vote * q((big_m - 1) - m, u) * q(n, big_n + 1), Some((big_n - 1, big_m - 1, n - 1, m + 1)), uw(WerewolfChecked, CheckedVillagerKilled), None);
        } else if u > 0 {
            b.push(9, &vote * q(big_n - n, u) * q(n + 1, k), Some((big_n - 1, big_m - 1, n, m)), uw(VillagerChecked, CheckedVillagerKilled), None);
            b.push(10, &vote * q(big_n - n, u) * q(big_n - n - 1, k), Some((big_n - 1, big_m - 1, n + 1, m)), uw(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(11, &vote * q(big_m - 1 - m, u) * q(big_n - n, k), Some((big_n - 1, big_m - 1, n, m + 1)), uw(WerewolfChecked, UncheckedVillagerKilled), None);
            b.push(12, &vote * q(big_m - 1 - m, u) * q(n, k), Some((big_n - 1, big_m - 1, n - 1, m + 1)), uw(WerewolfChecked, CheckedVillagerKilled), None);
        } else {
            b.push(24, &vote * q(n, k), Some((big_n - 1, big_m - 1, n - 1, m)), uw(NoCheck, CheckedVillagerKilled), None);
        }
        b.push(20, &vote * q(1, k), None, outcome(Unchecked, NoCheck, ProphetKilled), Some(pay_wolf_out));
    }

    // Unchecked villager voted out.
    {
        let vote = q(big_n - n, t);
        let u = (big_n - 1 - n) + (big_m - m);
        let k = big_n;
        let uv = |c, kill| outcome(Unchecked, c, kill);
        if printed || u > 0 {
            b.push(13, &vote * q(big_n - 1 - n, u) * q(n + 1, k), Some((big_n - 2, big_m, n, m)), uv(VillagerChecked, CheckedVillagerKilled), None);
            b.push(14, &vote * q(big_n - 1 - n, u) * q(big_n - n - 2, k), Some((big_n - 2, big_m, n + 1, m)), uv(VillagerChecked, UncheckedVillagerKilled), None);
            b.push(15, &vote * q(big_m - m, u) * q(big_n - 1 - n, k), Some((big_n - 2, big_m, n, m + 1)), uv(WerewolfChecked, UncheckedVillagerKilled), None);
            b.push(16, &vote * q(big_m - m, u) * q(n, k), Some((big_n - 2, big_m, n - 1, m + 1)), uv(WerewolfChecked, CheckedVillagerKilled), None);
        } else {
            b.push(25, &vote * q(n, k), Some((big_n - 2, big_m, n - 1, m)), uv(NoCheck, CheckedVillagerKilled), None);
        }
        b.push(21, &vote * q(1, k), None, outcome(Unchecked, NoCheck, ProphetKilled), Some(pay_full.clone()));
    }

    b.push(17, q(1, t), None, outcome(Prophet, NoCheck, ProphetKilled), Some(pay_full));

    let mut entries = b.entries;
    entries.sort_by_key(|e| e.index);
    Ok(entries)
}

/// The first night from `villagers` and `wolves` with nobody checked: a
/// check and a kill with no vote before them.
pub fn first_night(villagers: u32, wolves: u32) -> Vec<Transition> {
    let (v, w) = (villagers as i64, wolves as i64);
    let u = v + w;
    let k = v + 1;
    let first = |c, kill| outcome(VoteClass::NoVote, c, kill);
    let mut b = Builder {
        entries: Vec::with_capacity(5),
    };
    let payoff = prophet_dead_payoff(villagers + wolves + 1, wolves);
    b.push(1, q(v, u) * q(1, k), Some((v - 1, w, 0, 0)), first(VillagerChecked, CheckedVillagerKilled), None);
    b.push(2, q(v, u) * q(v - 1, k), Some((v - 1, w, 1, 0)), first(VillagerChecked, UncheckedVillagerKilled), None);
    b.push(3, q(w, u) * q(v, k), Some((v - 1, w, 0, 1)), first(WerewolfChecked, UncheckedVillagerKilled), None);
    b.push(4, q(1, k), None, first(NoCheck, ProphetKilled), Some(payoff));
    b.entries
}

impl Transition {
    /// Convenience for tests and dumps.
    pub fn is_terminal(&self) -> bool {
        self.successor.is_none()
    }
}
