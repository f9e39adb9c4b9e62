use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PbeError;
use crate::exact::Probability;

/// A world the prophet considers possible at the start of a day: villagers
/// alive, werewolves alive, checked villagers alive, checked werewolves alive.
/// The prophet itself is alive and not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub villagers: u32,
    pub wolves: u32,
    pub checked_villagers: u32,
    pub checked_wolves: u32,
}

/// Where a node stands before the day's vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    CitizensWon,
    WerewolvesWon,
    /// Citizens (prophet included) equal werewolves.
    Parity,
    Live,
}

impl Node {
    pub fn new(villagers: u32, wolves: u32, checked_villagers: u32, checked_wolves: u32) -> Self {
        Node {
            villagers,
            wolves,
            checked_villagers,
            checked_wolves,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.checked_villagers <= self.villagers && self.checked_wolves <= self.wolves
    }

    pub fn validate(&self) -> Result<(), PbeError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(PbeError::InvalidNode(*self))
        }
    }

    pub fn status(&self) -> NodeStatus {
        let citizens = self.villagers + 1;
        if self.wolves == 0 {
            NodeStatus::CitizensWon
        } else if citizens < self.wolves {
            NodeStatus::WerewolvesWon
        } else if citizens == self.wolves {
            NodeStatus::Parity
        } else {
            NodeStatus::Live
        }
    }

    /// Players alive other than the prophet.
    pub fn players(&self) -> u32 {
        self.villagers + self.wolves
    }

    /// What the prophet observes directly: players alive and the checked
    /// players still alive on each side.
    pub fn signature(&self) -> (u32, u32, u32) {
        (self.players(), self.checked_villagers, self.checked_wolves)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.villagers, self.wolves, self.checked_villagers, self.checked_wolves
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightedNode {
    pub node: Node,
    pub weight: Probability,
}

/// The prophet's belief: a distribution over nodes with the same number of
/// players alive. Entries are sorted by node with duplicates merged, so equal
/// beliefs compare equal.
///
/// Beliefs reached by play also agree on the checked counts (see
/// [`InformationSet::is_consistent`]); hand-built mixtures need not.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InformationSet {
    entries: Vec<WeightedNode>,
}

impl InformationSet {
    pub fn single(node: Node) -> Result<Self, PbeError> {
        node.validate()?;
        Ok(InformationSet {
            entries: vec![WeightedNode {
                node,
                weight: Probability::one(),
            }],
        })
    }

    /// Builds a set from weights that must already sum to one.
    pub fn new(entries: impl IntoIterator<Item = (Probability, Node)>) -> Result<Self, PbeError> {
        let set = Self::collect(entries)?;
        let total: Probability = set.entries.iter().map(|e| e.weight.clone()).sum();
        if !total.is_one() {
            return Err(PbeError::NotNormalized(total));
        }
        Ok(set)
    }

    /// Builds a set from positive masses, rescaling them to sum to one.
    pub fn normalized(
        entries: impl IntoIterator<Item = (Probability, Node)>,
    ) -> Result<Self, PbeError> {
        let mut set = Self::collect(entries)?;
        let total: Probability = set.entries.iter().map(|e| e.weight.clone()).sum();
        for e in &mut set.entries {
            e.weight = &e.weight / &total;
        }
        Ok(set)
    }

    fn collect(entries: impl IntoIterator<Item = (Probability, Node)>) -> Result<Self, PbeError> {
        let mut merged: BTreeMap<Node, Probability> = BTreeMap::new();
        for (weight, node) in entries {
            node.validate()?;
            if weight.is_zero() {
                continue;
            }
            if weight < Probability::zero() {
                return Err(PbeError::NegativeWeight(node, weight));
            }
            let slot = merged.entry(node).or_insert_with(Probability::zero);
            *slot = &*slot + &weight;
        }
        let entries: Vec<WeightedNode> = merged
            .into_iter()
            .map(|(node, weight)| WeightedNode { node, weight })
            .collect();
        let first = entries.first().ok_or(PbeError::EmptySet)?;
        let players = first.node.players();
        if let Some(odd) = entries.iter().find(|e| e.node.players() != players) {
            return Err(PbeError::InconsistentSet(first.node, odd.node));
        }
        Ok(InformationSet { entries })
    }

    pub fn entries(&self) -> &[WeightedNode] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Players alive other than the prophet.
    pub fn players(&self) -> u32 {
        self.entries[0].node.players()
    }

    /// Every node shows the prophet the same checked counts.
    pub fn is_consistent(&self) -> bool {
        let signature = self.entries[0].node.signature();
        self.entries.iter().all(|e| e.node.signature() == signature)
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.entries.iter().map(|e| e.node)
    }
}

impl fmt::Display for InformationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.len() == 1 {
            return write!(f, "{}", self.entries[0].node);
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}·{}", e.weight, e.node)?;
        }
        Ok(())
    }
}
