//! Werewolf (Mafia) game analysis: exact win probabilities, a seedable game
//! engine, Monte Carlo estimation and a belief-state solver for when the
//! prophet should reveal.

pub mod cli;
pub mod engine;
pub mod exact;
pub mod mc;
pub mod pbe;
pub mod rng;
