//! Policy documents in JSON.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::node::{InformationSet, Node};
use super::solver::{Action, Decision, Policy, TieBreak};
use super::PbeError;
use crate::exact::Probability;

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    villagers: u32,
    wolves: u32,
    tie_break: TieBreak,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct EntryDoc {
    N: u32,
    M: u32,
    n: u32,
    m: u32,
    weight: Probability,
}

#[derive(Serialize, Deserialize)]
struct SetDoc {
    entries: Vec<EntryDoc>,
    action: Action,
    reveal_value: Probability,
    hiding_value: Probability,
}

#[derive(Serialize, Deserialize)]
struct PolicyDoc {
    config: ConfigDoc,
    root_value: Probability,
    information_sets: Vec<SetDoc>,
}

pub fn policy_to_json(policy: &Policy) -> String {
    let doc = PolicyDoc {
        config: ConfigDoc {
            villagers: policy.villagers,
            wolves: policy.wolves,
            tie_break: policy.tie_break,
        },
        root_value: policy.root_value.clone(),
        information_sets: policy
            .sets
            .iter()
            .map(|(set, d)| SetDoc {
                entries: set
                    .entries()
                    .iter()
                    .map(|e| EntryDoc {
                        N: e.node.villagers,
                        M: e.node.wolves,
                        n: e.node.checked_villagers,
                        m: e.node.checked_wolves,
                        weight: e.weight.clone(),
                    })
                    .collect(),
                action: d.action,
                reveal_value: d.reveal_value.clone(),
                hiding_value: d.hiding_value.clone(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("policy documents always serialize");
    text.push('\n');
    text
}

pub fn policy_from_json(text: &str) -> Result<Policy, PbeError> {
    let doc: PolicyDoc = serde_json::from_str(text)?;
    let mut sets = BTreeMap::new();
    for s in doc.information_sets {
        let set = InformationSet::new(
            s.entries
                .into_iter()
                .map(|e| (e.weight, Node::new(e.N, e.M, e.n, e.m))),
        )?;
        let decision = Decision {
            action: s.action,
            reveal_value: s.reveal_value,
            hiding_value: s.hiding_value,
        };
        if sets.insert(set.clone(), decision).is_some() {
            return Err(PbeError::Format(format!("information set {set} appears twice")));
        }
    }
    Ok(Policy {
        villagers: doc.config.villagers,
        wolves: doc.config.wolves,
        tie_break: doc.config.tie_break,
        root_value: doc.root_value,
        sets,
    })
}

pub fn export_policy(policy: &Policy, path: &Path) -> Result<(), PbeError> {
    std::fs::write(path, policy_to_json(policy)).map_err(|source| PbeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn import_policy(path: &Path) -> Result<Policy, PbeError> {
    let text = std::fs::read_to_string(path).map_err(|source| PbeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    policy_from_json(&text)
}
