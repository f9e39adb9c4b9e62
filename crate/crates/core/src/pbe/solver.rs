use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::node::{InformationSet, Node, NodeStatus};
use super::transition::{first_night, transition_table, OutcomeClass, Transition};
use super::PbeError;
use crate::exact::{parity_defence, s_reveal, Probability, RevealState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Hiding,
    Revealing,
}

/// Which action wins when both values are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    Reveal,
    Hide,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub reveal_value: Probability,
    pub hiding_value: Probability,
}

impl Decision {
    pub fn value(&self) -> &Probability {
        match self.action {
            Action::Revealing => &self.reveal_value,
            Action::Hiding => &self.hiding_value,
        }
    }

    pub fn is_tie(&self) -> bool {
        self.reveal_value == self.hiding_value
    }
}

/// A belief one step ahead, as seen by the prophet.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcome: OutcomeClass,
    /// Probability of this observation given the surviving nodes.
    pub probability: Probability,
    pub successor: InformationSet,
}

/// One hidden step from an information set.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    /// Value contributed by nodes decided before the vote (citizens won,
    /// werewolves won, or parity).
    pub decided: Probability,
    /// Weight of the nodes that continue.
    pub mass: Probability,
    /// Expected payoff from steps that kill the prophet, given survival.
    pub terminal: Probability,
    pub branches: Vec<Branch>,
}

impl Expansion {
    fn value_with(&self, mut value_of: impl FnMut(&InformationSet) -> Result<Probability, PbeError>) -> Result<Probability, PbeError> {
        if self.mass.is_zero() {
            return Ok(self.decided.clone());
        }
        let mut expectation = self.terminal.clone();
        for b in &self.branches {
            expectation = expectation + &b.probability * &value_of(&b.successor)?;
        }
        Ok(&self.decided + &(&self.mass * &expectation))
    }
}

/// Value of a node that is settled before the vote when the prophet stays
/// hidden, or `None` if play continues.
fn decided_value(node: &Node) -> Option<Probability> {
    match node.status() {
        NodeStatus::CitizensWon => Some(Probability::one()),
        NodeStatus::WerewolvesWon => Some(Probability::zero()),
        // The modulus vote hits a werewolf half the time; then the werewolves
        // defend by going all-in, or the lone werewolf is simply voted out.
        NodeStatus::Parity => {
            Some(Probability::ratio(1, 2) * parity_defence(node.wolves, false))
        }
        NodeStatus::Live => None,
    }
}

fn group(weighted: Vec<(Probability, Transition)>) -> Result<(Probability, Vec<Branch>), PbeError> {
    let mut terminal = Probability::zero();
    let mut classes: BTreeMap<OutcomeClass, Vec<(Probability, Node)>> = BTreeMap::new();
    for (weight, t) in weighted {
        let mass = &weight * &t.probability;
        match (t.successor, t.payoff) {
            (Some(node), _) => classes.entry(t.outcome).or_default().push((mass, node)),
            (None, Some(payoff)) => terminal = terminal + &mass * &payoff,
            (None, None) => unreachable!("terminal steps carry a payoff"),
        }
    }
    let mut branches = Vec::with_capacity(classes.len());
    for (outcome, entries) in classes {
        let probability: Probability = entries.iter().map(|(w, _)| w.clone()).sum();
        let successor = InformationSet::normalized(entries)?;
        branches.push(Branch {
            outcome,
            probability,
            successor,
        });
    }
    Ok((terminal, branches))
}

/// Filters decided nodes, then applies one vote, check and kill to the rest
/// and groups the results by what the prophet observes.
pub fn expand(set: &InformationSet) -> Result<Expansion, PbeError> {
    let mut decided = Probability::zero();
    let mut survivors = Vec::new();
    for e in set.entries() {
        match decided_value(&e.node) {
            Some(v) => decided = decided + &e.weight * &v,
            None => survivors.push((e.weight.clone(), e.node)),
        }
    }
    let mass: Probability = survivors.iter().map(|(w, _)| w.clone()).sum();
    if mass.is_zero() {
        return Ok(Expansion {
            decided,
            mass,
            terminal: Probability::zero(),
            branches: Vec::new(),
        });
    }
    let mut weighted = Vec::new();
    for (w, node) in survivors {
        let w = &w / &mass;
        for t in transition_table(node)? {
            weighted.push((w.clone(), t));
        }
    }
    let (terminal, branches) = group(weighted)?;
    Ok(Expansion {
        decided,
        mass,
        terminal,
        branches,
    })
}

/// The first night of a game with one prophet, `villagers` and `wolves`.
/// Returns `None` when the werewolves have already won at the start.
pub fn first_night_expansion(villagers: u32, wolves: u32) -> Result<Option<Expansion>, PbeError> {
    if villagers == 0 || wolves == 0 {
        return Err(PbeError::InvalidConfig { villagers, wolves });
    }
    if wolves > villagers {
        return Ok(None);
    }
    let weighted = first_night(villagers, wolves)
        .into_iter()
        .map(|t| (Probability::one(), t))
        .collect();
    let (terminal, branches) = group(weighted)?;
    Ok(Some(Expansion {
        decided: Probability::zero(),
        mass: Probability::one(),
        terminal,
        branches,
    }))
}

/// Σ α · (citizen win probability after revealing in that node).
pub fn reveal_value(set: &InformationSet) -> Result<Probability, PbeError> {
    let mut total = Probability::zero();
    for e in set.entries() {
        let n = e.node;
        let s = s_reveal(RevealState::new(
            n.villagers,
            n.wolves,
            n.checked_villagers,
            n.checked_wolves,
        ))?;
        total = total + &e.weight * &s;
    }
    Ok(total)
}

/// Memoized backward induction over information sets.
#[derive(Debug, Default)]
pub struct Solver {
    tie_break: TieBreak,
    memo: HashMap<InformationSet, Decision>,
}

impl Solver {
    pub fn new(tie_break: TieBreak) -> Self {
        Solver {
            tie_break,
            memo: HashMap::new(),
        }
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn decision(&self, set: &InformationSet) -> Option<&Decision> {
        self.memo.get(set)
    }

    pub fn hiding_value(&mut self, set: &InformationSet) -> Result<Probability, PbeError> {
        let limit = set.players() + 2;
        self.hiding_at(set, 0, limit)
    }

    pub fn optimal_value(&mut self, set: &InformationSet) -> Result<(Action, Probability), PbeError> {
        let limit = set.players() + 2;
        let d = self.decide(set, 0, limit)?;
        Ok((d.action, d.value().clone()))
    }

    fn hiding_at(&mut self, set: &InformationSet, depth: u32, limit: u32) -> Result<Probability, PbeError> {
        if depth > limit {
            return Err(PbeError::NonTermination { depth });
        }
        let expansion = expand(set)?;
        expansion.value_with(|next| Ok(self.decide(next, depth + 1, limit)?.value().clone()))
    }

    fn decide(&mut self, set: &InformationSet, depth: u32, limit: u32) -> Result<Decision, PbeError> {
        if let Some(d) = self.memo.get(set) {
            return Ok(d.clone());
        }
        let reveal = reveal_value(set)?;
        let hide = self.hiding_at(set, depth, limit)?;
        let action = match reveal.cmp(&hide) {
            std::cmp::Ordering::Greater => Action::Revealing,
            std::cmp::Ordering::Less => Action::Hiding,
            std::cmp::Ordering::Equal => match self.tie_break {
                TieBreak::Reveal => Action::Revealing,
                TieBreak::Hide => Action::Hiding,
            },
        };
        let d = Decision {
            action,
            reveal_value: reveal,
            hiding_value: hide,
        };
        self.memo.insert(set.clone(), d.clone());
        Ok(d)
    }

    /// Solves the game from its first night.
    pub fn solve(mut self, villagers: u32, wolves: u32) -> Result<Policy, PbeError> {
        let root_value = match first_night_expansion(villagers, wolves)? {
            None => Probability::zero(),
            Some(expansion) => {
                let limit = villagers + wolves + 2;
                expansion.value_with(|next| Ok(self.decide(next, 1, limit)?.value().clone()))?
            }
        };
        Ok(Policy {
            villagers,
            wolves,
            tie_break: self.tie_break,
            root_value,
            sets: self.memo.into_iter().collect(),
        })
    }
}

pub fn solve(villagers: u32, wolves: u32) -> Result<Policy, PbeError> {
    Solver::new(TieBreak::Reveal).solve(villagers, wolves)
}

pub fn solve_with(villagers: u32, wolves: u32, tie_break: TieBreak) -> Result<Policy, PbeError> {
    Solver::new(tie_break).solve(villagers, wolves)
}

/// The prophet's optimal decision for every information set it can reach
/// while hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub villagers: u32,
    pub wolves: u32,
    pub tie_break: TieBreak,
    pub root_value: Probability,
    pub sets: BTreeMap<InformationSet, Decision>,
}

impl Policy {
    pub fn get(&self, set: &InformationSet) -> Option<&Decision> {
        self.sets.get(set)
    }

    pub fn action(&self, set: &InformationSet) -> Option<Action> {
        self.sets.get(set).map(|d| d.action)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Readable listing, one information set per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "game: {} villagers, {} werewolves, 1 prophet\nroot value: {} ({})\n",
            self.villagers,
            self.wolves,
            self.root_value,
            self.root_value.to_decimal(6)
        );
        for (set, d) in &self.sets {
            out.push_str(&format!(
                "{set}: {:?} (reveal {}, hide {})\n",
                d.action, d.reveal_value, d.hiding_value
            ));
        }
        out
    }
}

/// Exact citizen win probability when the prophet follows `choose` at every
/// information set (self-kill excluded).
pub fn evaluate_policy(
    villagers: u32,
    wolves: u32,
    choose: &dyn Fn(&InformationSet) -> Action,
) -> Result<Probability, PbeError> {
    fn value(
        set: &InformationSet,
        choose: &dyn Fn(&InformationSet) -> Action,
        memo: &mut HashMap<InformationSet, Probability>,
        depth: u32,
        limit: u32,
    ) -> Result<Probability, PbeError> {
        if let Some(v) = memo.get(set) {
            return Ok(v.clone());
        }
        if depth > limit {
            return Err(PbeError::NonTermination { depth });
        }
        let v = match choose(set) {
            Action::Revealing => reveal_value(set)?,
            Action::Hiding => {
                expand(set)?.value_with(|next| value(next, choose, memo, depth + 1, limit))?
            }
        };
        memo.insert(set.clone(), v.clone());
        Ok(v)
    }
    let mut memo = HashMap::new();
    let limit = villagers + wolves + 2;
    match first_night_expansion(villagers, wolves)? {
        None => Ok(Probability::zero()),
        Some(e) => e.value_with(|next| value(next, choose, &mut memo, 1, limit)),
    }
}

/// Exact citizen win probability when the prophet reveals at the start of
/// day `round` if still alive and hidden, and never otherwise.
pub fn fixed_round_value(villagers: u32, wolves: u32, round: Option<u32>) -> Result<Probability, PbeError> {
    // each hidden day starts two players down from the previous one
    let target = round.and_then(|x| (villagers + wolves + 1).checked_sub(2 * x));
    evaluate_policy(villagers, wolves, &|set| {
        if Some(set.players()) == target {
            Action::Revealing
        } else {
            Action::Hiding
        }
    })
}
