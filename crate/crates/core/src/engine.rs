//! Seedable state machine for a single Werewolf game.
//!
//! The game starts at night and alternates night and day. At night the
//! prophet (if alive) checks one unchecked player and then the werewolves kill
//! one player. During the day the prophet may reveal its checks and then one
//! player is voted out.
//!
//! Behaviour is fixed by the honesty rule. Before any reveal, night kills are
//! uniform over non-werewolves and the day vote is the modulus protocol, i.e.
//! a uniform draw over everyone alive. After a reveal, citizens vote out
//! published werewolves in check order and otherwise vote uniformly among
//! players that are neither the prophet nor published villagers; werewolves
//! kill the prophet first, then published villagers, then anyone else.
//!
//! At parity (werewolves equal citizens at a vote) a werewolf vote target
//! triggers the all-in defection: the werewolves force a tie against a
//! designated citizen, and the system breaks each tie with a fair coin.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Chance;

/// Seat number, 1-based, stable for the whole game.
pub type PlayerId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("engine invariant violated: {0}")]
    Invariant(String),
    #[error("game did not terminate within {rounds} rounds")]
    NonTermination { rounds: u32 },
    #[error("prophet advisor failed: {0}")]
    Advisor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Villager,
    Werewolf,
    Prophet,
}

impl Role {
    pub fn is_werewolf(self) -> bool {
        self == Role::Werewolf
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Villager => "Villager",
            Role::Werewolf => "Werewolf",
            Role::Prophet => "Prophet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    CitizenGroup,
    WerewolfGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Night,
    Day,
}

/// How the werewolves play the day vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum WolfStrategy {
    /// Always obey the modulus vote.
    Random,
    /// Obey the modulus vote, but go all-in at parity when a werewolf is targeted.
    #[default]
    RandomPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub villagers: u32,
    pub werewolves: u32,
    pub prophet: bool,
    /// Day on which the prophet reveals, if alive and not yet revealed.
    pub reveal_round: Option<u32>,
    pub werewolf_self_kill_probability: f64,
    /// Last round whose night may see a self-kill; `None` means every night.
    pub self_kill_until_round: Option<u32>,
    pub wolf_strategy: WolfStrategy,
}

impl GameConfig {
    pub fn new(villagers: u32, werewolves: u32, prophet: bool) -> Self {
        GameConfig {
            villagers,
            werewolves,
            prophet,
            reveal_round: None,
            werewolf_self_kill_probability: 0.0,
            self_kill_until_round: None,
            wolf_strategy: WolfStrategy::RandomPlus,
        }
    }

    pub fn with_reveal_round(mut self, round: Option<u32>) -> Self {
        self.reveal_round = round;
        self
    }

    pub fn with_strategy(mut self, strategy: WolfStrategy) -> Self {
        self.wolf_strategy = strategy;
        self
    }

    pub fn with_self_kill(mut self, probability: f64, until_round: Option<u32>) -> Self {
        self.werewolf_self_kill_probability = probability;
        self.self_kill_until_round = until_round;
        self
    }

    pub fn players(&self) -> u32 {
        self.villagers + self.werewolves + u32::from(self.prophet)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.werewolves == 0 {
            return Err(EngineError::InvalidConfig(
                "at least one werewolf is required".into(),
            ));
        }
        if self.players() < 2 {
            return Err(EngineError::InvalidConfig(format!(
                "at least two players are required, got {}",
                self.players()
            )));
        }
        if !(0.0..=1.0).contains(&self.werewolf_self_kill_probability) {
            return Err(EngineError::InvalidConfig(format!(
                "self-kill probability {} is outside [0, 1]",
                self.werewolf_self_kill_probability
            )));
        }
        if self.reveal_round == Some(0) {
            return Err(EngineError::InvalidConfig("reveal round starts at 1".into()));
        }
        if self.reveal_round.is_some() && !self.prophet {
            return Err(EngineError::InvalidConfig(
                "a reveal round needs a prophet".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: PlayerId,
    pub role: Role,
    /// Inspected by the prophet (privately, unless published).
    pub checked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KillReason {
    RandomNonWerewolf,
    RevealedProphet,
    CheckedVillager,
    SelfKill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VoteReason {
    /// Modulus vote over every alive player.
    RandomVote,
    /// Uniform vote excluding the prophet and published villagers.
    RestrictedRandomVote,
    /// A published werewolf is voted out.
    CheckedWerewolf,
    /// The system broke an all-in tie.
    AllInTie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    Kill { reason: KillReason },
    Check { result: Role },
    Reveal { disclosed: Vec<(PlayerId, Role)> },
    /// The werewolves defected at parity; `wolf` was the pending vote target.
    AllIn { wolf: PlayerId },
    Vote { reason: VoteReason },
    GameOver { winner: Winner },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    pub phase: Phase,
    #[serde(flatten)]
    pub kind: EventKind,
    pub actor: Option<PlayerId>,
    pub target: Option<PlayerId>,
}

/// Decides whether a living, unrevealed prophet reveals at the start of a day.
pub trait ProphetAdvisor {
    fn reveal_today(&mut self, state: &GameState) -> Result<bool, EngineError>;
}

/// Reveal on a fixed day, or never.
#[derive(Debug, Clone, Copy)]
pub struct FixedRound(pub Option<u32>);

impl ProphetAdvisor for FixedRound {
    fn reveal_today(&mut self, state: &GameState) -> Result<bool, EngineError> {
        Ok(self.0 == Some(state.round()))
    }
}

#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    seating: Vec<Player>,
    phase: Phase,
    round: u32,
    alive: Vec<Player>,
    checks: Vec<(PlayerId, Role)>,
    published: Vec<(PlayerId, Role)>,
    revealed: bool,
    all_in_active: bool,
    designated_victim: Option<PlayerId>,
    events: Vec<Event>,
    winner: Option<Winner>,
}

impl GameState {
    /// Deals roles uniformly at random over the seats.
    pub fn new(config: GameConfig, chance: &mut impl Chance) -> Result<Self, EngineError> {
        config.validate()?;
        let mut roles = role_multiset(&config);
        for i in (1..roles.len()).rev() {
            let j = chance.below(i + 1);
            roles.swap(i, j);
        }
        Self::with_roles(config, roles)
    }

    /// Starts a game with a fixed seating (seat `i + 1` gets `roles[i]`).
    pub fn with_roles(config: GameConfig, roles: Vec<Role>) -> Result<Self, EngineError> {
        config.validate()?;
        let mut expected = role_multiset(&config);
        let mut given = roles.clone();
        expected.sort();
        given.sort();
        if expected != given {
            return Err(EngineError::InvalidConfig(format!(
                "seating {roles:?} does not match the configured role counts"
            )));
        }
        let seating: Vec<Player> = roles
            .into_iter()
            .enumerate()
            .map(|(i, role)| Player {
                id: i as PlayerId + 1,
                role,
                checked: false,
            })
            .collect();
        let mut state = GameState {
            config,
            alive: seating.clone(),
            seating,
            phase: Phase::Night,
            round: 1,
            checks: Vec::new(),
            published: Vec::new(),
            revealed: false,
            all_in_active: false,
            designated_victim: None,
            events: Vec::new(),
            winner: None,
        };
        state.settle();
        Ok(state)
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn round(&self) -> u32 {
        self.round
    }
    /// Alive players in seating order.
    pub fn alive(&self) -> &[Player] {
        &self.alive
    }
    /// Initial seating, dead players included.
    pub fn seating(&self) -> &[Player] {
        &self.seating
    }
    pub fn revealed(&self) -> bool {
        self.revealed
    }
    pub fn all_in_active(&self) -> bool {
        self.all_in_active
    }
    pub fn designated_victim(&self) -> Option<PlayerId> {
        self.designated_victim
    }
    pub fn events(&self) -> &[Event] {
        &self.events
    }
    pub fn winner(&self) -> Option<Winner> {
        self.winner
    }
    /// The prophet's private check ledger, in check order.
    pub fn checks(&self) -> &[(PlayerId, Role)] {
        &self.checks
    }
    /// Checks made public by a reveal, in check order.
    pub fn published(&self) -> &[(PlayerId, Role)] {
        &self.published
    }

    pub fn role_of(&self, id: PlayerId) -> Option<Role> {
        self.seating.iter().find(|p| p.id == id).map(|p| p.role)
    }

    pub fn is_alive(&self, id: PlayerId) -> bool {
        self.alive.iter().any(|p| p.id == id)
    }

    pub fn alive_werewolves(&self) -> usize {
        self.alive.iter().filter(|p| p.role.is_werewolf()).count()
    }

    pub fn alive_citizens(&self) -> usize {
        self.alive.len() - self.alive_werewolves()
    }

    pub fn prophet_alive(&self) -> Option<PlayerId> {
        self.alive
            .iter()
            .find(|p| p.role == Role::Prophet)
            .map(|p| p.id)
    }

    fn is_published(&self, id: PlayerId) -> bool {
        self.published.iter().any(|&(p, _)| p == id)
    }

    /// Published information still matters: the revealed prophet or a
    /// published player is alive.
    pub fn public_information(&self) -> bool {
        self.revealed
            && (self.prophet_alive().is_some()
                || self.published.iter().any(|&(id, _)| self.is_alive(id)))
    }

    /// Outcome of the game if it is decided.
    ///
    /// Werewolves win once they outnumber the citizens, or when they equal
    /// them going into a night (the kill then hands them the majority).
    /// Day-start parity is left to the vote.
    pub fn winner_check(&self) -> Option<Winner> {
        let wolves = self.alive_werewolves();
        let citizens = self.alive_citizens();
        if wolves == 0 {
            Some(Winner::CitizenGroup)
        } else if wolves > citizens || (wolves == citizens && self.phase == Phase::Night) {
            Some(Winner::WerewolfGroup)
        } else {
            None
        }
    }

    /// The modulus vote: uniform over every alive player.
    pub fn modulus_vote(&self, chance: &mut impl Chance) -> Result<PlayerId, EngineError> {
        let ids: Vec<PlayerId> = self.alive.iter().map(|p| p.id).collect();
        pick(&ids, chance).ok_or_else(|| EngineError::Invariant("vote over an empty roster".into()))
    }

    fn pick_where(
        &self,
        chance: &mut impl Chance,
        keep: impl Fn(&Player) -> bool,
    ) -> Option<PlayerId> {
        let ids: Vec<PlayerId> = self.alive.iter().filter(|p| keep(p)).map(|p| p.id).collect();
        pick(&ids, chance)
    }

    fn push(&mut self, kind: EventKind, actor: Option<PlayerId>, target: Option<PlayerId>) {
        self.events.push(Event {
            round: self.round,
            phase: self.phase,
            kind,
            actor,
            target,
        });
    }

    fn eliminate(&mut self, id: PlayerId) -> Result<(), EngineError> {
        let pos = self
            .alive
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| EngineError::Invariant(format!("player {id} is not alive")))?;
        self.alive.remove(pos);
        Ok(())
    }

    fn settle(&mut self) {
        if let Some(winner) = self.winner_check() {
            self.winner = Some(winner);
            self.push(EventKind::GameOver { winner }, None, None);
        }
    }

    fn ensure_running(&self, phase: Phase) -> Result<(), EngineError> {
        if self.winner.is_some() {
            return Err(EngineError::Invariant("the game is already over".into()));
        }
        if self.phase != phase {
            return Err(EngineError::Invariant(format!(
                "expected {phase:?} phase, found {:?}",
                self.phase
            )));
        }
        Ok(())
    }

    /// Night: the prophet checks, then the werewolves kill.
    pub fn advance_night(&mut self, chance: &mut impl Chance) -> Result<(), EngineError> {
        self.ensure_running(Phase::Night)?;
        if self.alive_werewolves() == 0 {
            return Err(EngineError::Invariant("night with no werewolf alive".into()));
        }

        if let Some(prophet) = self.prophet_alive() {
            if let Some(target) = self.pick_where(chance, |p| p.id != prophet && !p.checked) {
                let result = self.role_of(target).expect("alive player has a seat");
                self.checks.push((target, result));
                if let Some(p) = self.alive.iter_mut().find(|p| p.id == target) {
                    p.checked = true;
                }
                self.push(EventKind::Check { result }, Some(prophet), Some(target));
            }
        }

        let q = self.config.werewolf_self_kill_probability;
        let self_kill_allowed = self
            .config
            .self_kill_until_round
            .is_none_or(|last| self.round <= last);
        let self_kill = self_kill_allowed && q > 0.0 && (q >= 1.0 || chance.bernoulli(q));

        let (target, reason) = if self_kill {
            let t = self.pick_where(chance, |p| p.role.is_werewolf());
            (t, KillReason::SelfKill)
        } else if self.revealed && !self.all_in_active {
            if let Some(prophet) = self.prophet_alive() {
                (Some(prophet), KillReason::RevealedProphet)
            } else {
                let published: Vec<PlayerId> = self
                    .published
                    .iter()
                    .filter(|&&(id, role)| role == Role::Villager && self.is_alive(id))
                    .map(|&(id, _)| id)
                    .collect();
                match pick(&published, chance) {
                    Some(t) => (Some(t), KillReason::CheckedVillager),
                    None => (
                        self.pick_where(chance, |p| !p.role.is_werewolf()),
                        KillReason::RandomNonWerewolf,
                    ),
                }
            }
        } else {
            (
                self.pick_where(chance, |p| !p.role.is_werewolf()),
                KillReason::RandomNonWerewolf,
            )
        };
        let target =
            target.ok_or_else(|| EngineError::Invariant("no one left to kill".into()))?;
        self.eliminate(target)?;
        self.push(EventKind::Kill { reason }, None, Some(target));
        if self.designated_victim == Some(target) {
            self.designated_victim = None;
        }

        self.phase = Phase::Day;
        self.settle();
        Ok(())
    }

    /// Day: the prophet's action, then the vote.
    pub fn advance_day(
        &mut self,
        chance: &mut impl Chance,
        advisor: &mut dyn ProphetAdvisor,
    ) -> Result<(), EngineError> {
        self.ensure_running(Phase::Day)?;

        if let Some(prophet) = self.prophet_alive() {
            if !self.all_in_active {
                let publish = if self.revealed {
                    self.checks.len() > self.published.len()
                } else {
                    advisor.reveal_today(self)?
                };
                if publish {
                    let fresh: Vec<(PlayerId, Role)> =
                        self.checks[self.published.len()..].to_vec();
                    self.published.extend_from_slice(&fresh);
                    self.revealed = true;
                    self.push(EventKind::Reveal { disclosed: fresh }, Some(prophet), None);
                }
            }
        }

        let (target, reason) = if self.all_in_active {
            self.all_in_vote(chance)?
        } else {
            let (pending, reason) = self.honest_vote_target(chance)?;
            let wolves = self.alive_werewolves();
            let at_parity = wolves == self.alive_citizens();
            let pending_is_wolf = self.role_of(pending).is_some_and(Role::is_werewolf);
            if self.config.wolf_strategy == WolfStrategy::RandomPlus
                && pending_is_wolf
                && at_parity
                && (wolves >= 2 || self.public_information())
            {
                self.all_in_active = true;
                self.push(EventKind::AllIn { wolf: pending }, None, None);
                self.all_in_tie(pending, chance)?
            } else {
                (pending, reason)
            }
        };

        self.eliminate(target)?;
        self.push(EventKind::Vote { reason }, None, Some(target));
        if self.designated_victim == Some(target) {
            self.designated_victim = None;
        }
        self.phase = Phase::Night;
        self.round += 1;
        self.settle();
        Ok(())
    }

    fn honest_vote_target(
        &self,
        chance: &mut impl Chance,
    ) -> Result<(PlayerId, VoteReason), EngineError> {
        if !self.revealed {
            return Ok((self.modulus_vote(chance)?, VoteReason::RandomVote));
        }
        let known_wolf = self
            .published
            .iter()
            .find(|&&(id, role)| role == Role::Werewolf && self.is_alive(id));
        if let Some(&(id, _)) = known_wolf {
            return Ok((id, VoteReason::CheckedWerewolf));
        }
        self.pick_where(chance, |p| {
            p.role != Role::Prophet && !(p.role == Role::Villager && self.is_published(p.id))
        })
        .map(|id| (id, VoteReason::RestrictedRandomVote))
        .ok_or_else(|| EngineError::Invariant("no eligible vote target".into()))
    }

    fn all_in_tie(
        &mut self,
        wolf: PlayerId,
        chance: &mut impl Chance,
    ) -> Result<(PlayerId, VoteReason), EngineError> {
        let victim = match self.designated_victim.filter(|&v| self.is_alive(v)) {
            Some(v) => v,
            None => {
                let v = self
                    .pick_where(chance, |p| !p.role.is_werewolf())
                    .ok_or_else(|| EngineError::Invariant("all-in without citizens".into()))?;
                self.designated_victim = Some(v);
                v
            }
        };
        let eliminated = if chance.below(2) == 0 { victim } else { wolf };
        Ok((eliminated, VoteReason::AllInTie))
    }

    fn all_in_vote(
        &mut self,
        chance: &mut impl Chance,
    ) -> Result<(PlayerId, VoteReason), EngineError> {
        let wolf = self
            .alive
            .iter()
            .find(|p| p.role.is_werewolf())
            .map(|p| p.id)
            .ok_or_else(|| EngineError::Invariant("all-in with no werewolf".into()))?;
        if self.alive_werewolves() < self.alive_citizens() {
            // Citizens hold the majority; the exposed werewolf goes.
            return Ok((wolf, VoteReason::CheckedWerewolf));
        }
        self.all_in_tie(wolf, chance)
    }

    /// Plays nights and days until a winner emerges.
    pub fn play_out(
        mut self,
        chance: &mut impl Chance,
        advisor: &mut dyn ProphetAdvisor,
    ) -> Result<GameRecord, EngineError> {
        let limit = self.config.players() + 2;
        while self.winner.is_none() {
            if self.round > limit {
                return Err(EngineError::NonTermination { rounds: limit });
            }
            match self.phase {
                Phase::Night => self.advance_night(chance)?,
                Phase::Day => self.advance_day(chance, advisor)?,
            }
        }
        let winner = self.winner.expect("loop exits on a winner");
        let rounds_played = self.events.last().map_or(0, |e| e.round);
        Ok(GameRecord {
            winner,
            rounds_played,
            seating: self.seating,
            events: self.events,
        })
    }
}

fn role_multiset(config: &GameConfig) -> Vec<Role> {
    let mut roles = vec![Role::Villager; config.villagers as usize];
    roles.extend(std::iter::repeat_n(Role::Werewolf, config.werewolves as usize));
    if config.prophet {
        roles.push(Role::Prophet);
    }
    roles
}

fn pick(ids: &[PlayerId], chance: &mut impl Chance) -> Option<PlayerId> {
    match ids.len() {
        0 => None,
        1 => Some(ids[0]),
        n => Some(ids[chance.below(n)]),
    }
}

/// Runs one game with the configured reveal round.
pub fn run_game(config: GameConfig, chance: &mut impl Chance) -> Result<GameRecord, EngineError> {
    let mut advisor = FixedRound(config.reveal_round);
    run_game_with(config, chance, &mut advisor)
}

pub fn run_game_with(
    config: GameConfig,
    chance: &mut impl Chance,
    advisor: &mut dyn ProphetAdvisor,
) -> Result<GameRecord, EngineError> {
    GameState::new(config, chance)?.play_out(chance, advisor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub winner: Winner,
    pub rounds_played: u32,
    pub seating: Vec<Player>,
    pub events: Vec<Event>,
}

impl GameRecord {
    /// One JSON object per line, one line per event.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Human-readable transcript in the style of a game log.
    pub fn transcript(&self) -> Vec<String> {
        let role = |id: PlayerId| {
            self.seating
                .iter()
                .find(|p| p.id == id)
                .map(|p| p.role)
                .unwrap_or(Role::Villager)
        };
        let mut lines = vec![format!(
            "Initial role assignment: {}",
            self.seating
                .iter()
                .map(|p| format!("Player {}: {}", p.id, p.role))
                .collect::<Vec<_>>()
                .join(", ")
        )];
        for e in &self.events {
            let t = e.target.unwrap_or(0);
            let line = match &e.kind {
                EventKind::Kill { reason } => {
                    let why = match reason {
                        KillReason::RandomNonWerewolf => "random choosing non-werewolf",
                        KillReason::RevealedProphet => "Prioritizing killing the Prophet",
                        KillReason::CheckedVillager => "Prioritizing killing the checked Villager",
                        KillReason::SelfKill => "self-kill",
                    };
                    format!("Night: The Werewolf group killed Player {t} (Reason: {why})")
                }
                EventKind::Check { result } => {
                    format!("Night: The Prophet checked Player {t}, Result: {result}")
                }
                EventKind::Reveal { disclosed } => format!(
                    "Day: The Prophet revealed information: {}",
                    disclosed
                        .iter()
                        .map(|(id, r)| format!("Player {id} is a {r}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                EventKind::AllIn { wolf } => format!(
                    "Day: Player {wolf} was about to be voted out; \"All in\" strategy triggered"
                ),
                EventKind::Vote { reason } => {
                    let why = match reason {
                        VoteReason::RandomVote => "random voting out",
                        VoteReason::RestrictedRandomVote => {
                            "Random voting out except the Prophet and checked Villagers"
                        }
                        VoteReason::CheckedWerewolf => "Prophet revealed the Werewolf",
                        VoteReason::AllInTie => "tie broken at random",
                    };
                    format!(
                        "Day: Player {t} was voted out (Reason: {why}) [{}]",
                        role(t)
                    )
                }
                EventKind::GameOver { winner } => match winner {
                    Winner::CitizenGroup => "Game over: Citizen group won!".to_string(),
                    Winner::WerewolfGroup => "Game over: Werewolf group won!".to_string(),
                },
            };
            lines.push(line);
        }
        lines
    }
}
