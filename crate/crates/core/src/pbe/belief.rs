use std::collections::HashMap;

use super::node::InformationSet;
use super::solver::{expand, first_night_expansion, Action, Expansion, Policy};
use super::transition::{CheckClass, KillClass, OutcomeClass, VoteClass};
use crate::engine::{EngineError, EventKind, GameState, KillReason, PlayerId, ProphetAdvisor, Role};

/// Follows a game from the prophet's seat, keeps its belief up to date and
/// answers each day with the policy's action.
#[derive(Debug)]
pub struct BeliefTracker<'a> {
    policy: &'a Policy,
    current: Option<InformationSet>,
    cursor: usize,
    checked: HashMap<PlayerId, Role>,
}

impl<'a> BeliefTracker<'a> {
    pub fn new(policy: &'a Policy) -> Self {
        BeliefTracker {
            policy,
            current: None,
            cursor: 0,
            checked: HashMap::new(),
        }
    }

    /// The belief at the most recent consultation.
    pub fn current(&self) -> Option<&InformationSet> {
        self.current.as_ref()
    }

    /// Reads the events since the last consultation and names what the
    /// prophet saw.
    fn observe(&mut self, state: &GameState) -> Result<OutcomeClass, EngineError> {
        let prophet = state
            .prophet_alive()
            .ok_or_else(|| EngineError::Advisor("consulted without a living prophet".into()))?;
        let mut vote = VoteClass::NoVote;
        let mut check = CheckClass::NoCheck;
        let mut kill = None;
        for event in &state.events()[self.cursor..] {
            match &event.kind {
                EventKind::Vote { .. } => {
                    let target = event.target.expect("votes have a target");
                    vote = match self.checked.get(&target) {
                        _ if target == prophet => VoteClass::Prophet,
                        Some(Role::Villager) => VoteClass::CheckedVillager,
                        Some(Role::Werewolf) => VoteClass::CheckedWerewolf,
                        _ => VoteClass::Unchecked,
                    };
                }
                EventKind::Check { result } => {
                    self.checked.insert(event.target.expect("checks have a target"), *result);
                    check = match result {
                        Role::Werewolf => CheckClass::WerewolfChecked,
                        _ => CheckClass::VillagerChecked,
                    };
                }
                EventKind::Kill { reason } => {
                    if *reason == KillReason::SelfKill {
                        return Err(EngineError::Advisor(
                            "werewolf self-kill is outside the solved model".into(),
                        ));
                    }
                    let target = event.target.expect("kills have a target");
                    kill = Some(if self.checked.contains_key(&target) {
                        KillClass::CheckedVillagerKilled
                    } else {
                        KillClass::UncheckedVillagerKilled
                    });
                }
                EventKind::Reveal { .. } | EventKind::AllIn { .. } | EventKind::GameOver { .. } => {
                    return Err(EngineError::Advisor(format!(
                        "unexpected event {:?} while the prophet is hidden",
                        event.kind
                    )));
                }
            }
        }
        self.cursor = state.events().len();
        let kill = kill.ok_or_else(|| EngineError::Advisor("no night kill observed".into()))?;
        Ok(OutcomeClass { vote, check, kill })
    }
}

fn pbe_error(e: super::PbeError) -> EngineError {
    EngineError::Advisor(e.to_string())
}

fn follow(expansion: Expansion, outcome: OutcomeClass, from: &str) -> Result<InformationSet, EngineError> {
    expansion
        .branches
        .into_iter()
        .find(|b| b.outcome == outcome)
        .map(|b| b.successor)
        .ok_or_else(|| EngineError::Advisor(format!("observation {outcome} is impossible from {from}")))
}

impl ProphetAdvisor for BeliefTracker<'_> {
    fn reveal_today(&mut self, state: &GameState) -> Result<bool, EngineError> {
        let outcome = self.observe(state)?;
        let next = match self.current.take() {
            None => {
                let expansion = first_night_expansion(self.policy.villagers, self.policy.wolves)
                    .map_err(pbe_error)?
                    .ok_or_else(|| EngineError::Advisor("game was decided at the start".into()))?;
                follow(expansion, outcome, "the first night")?
            }
            Some(prev) => {
                let expansion = expand(&prev).map_err(pbe_error)?;
                follow(expansion, outcome, &prev.to_string())?
            }
        };
        let decision = self.policy.get(&next).ok_or_else(|| {
            EngineError::Advisor(format!("information set {next} is not covered by the policy"))
        })?;
        let reveal = decision.action == Action::Revealing;
        self.current = Some(next);
        Ok(reveal)
    }
}
