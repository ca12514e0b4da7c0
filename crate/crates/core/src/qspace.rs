//! Finite quantum spaces: a quotient map on a finite label set, together
//! with the equivalence relation and blocks it induces.
//!
//! The quotient map is stored as the class assignment; the pair set is always
//! derived, so non-transitive relations cannot be represented at all.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};

/// A finite set of points with a total class assignment (the quotient map).
/// Points and class labels are opaque strings ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuantumSpace {
    points: Vec<String>,
    class_of: BTreeMap<String, String>,
}

/// One equivalence class: a class label with the full preimage of that label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub class_label: String,
    pub members: Vec<String>,
}

impl FiniteQuantumSpace {
    /// Validates that `class_of` is total on `points` and mentions no
    /// foreign points.
    pub fn new(points: Vec<String>, class_of: BTreeMap<String, String>) -> Result<Self> {
        let mut sorted = points;
        sorted.sort();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            return Err(Error::InvalidSpace("duplicate point labels".into()));
        }
        for p in &sorted {
            if !class_of.contains_key(p) {
                return Err(Error::InvalidSpace(format!(
                    "point {p:?} has no class assignment"
                )));
            }
        }
        for key in class_of.keys() {
            if sorted.binary_search(key).is_err() {
                return Err(Error::InvalidSpace(format!(
                    "class assignment references unknown point {key:?}"
                )));
            }
        }
        Ok(Self {
            points: sorted,
            class_of,
        })
    }

    /// The space whose relation is the diagonal: every point its own class.
    pub fn discrete(points: Vec<String>) -> Result<Self> {
        let class_of = points.iter().map(|p| (p.clone(), p.clone())).collect();
        Self::new(points, class_of)
    }

    /// One single class containing every point.
    pub fn full(points: Vec<String>, class_label: &str) -> Result<Self> {
        let class_of = points
            .iter()
            .map(|p| (p.clone(), class_label.to_string()))
            .collect();
        Self::new(points, class_of)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn class_of(&self, point: &str) -> Option<&str> {
        self.class_of.get(point).map(String::as_str)
    }

    pub fn assignments(&self) -> &BTreeMap<String, String> {
        &self.class_of
    }

    /// The partition into blocks, ordered lexicographically by class label;
    /// members are sorted within each block.
    pub fn blocks(&self) -> Vec<Block> {
        let mut by_class: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for p in &self.points {
            by_class
                .entry(self.class_of[p].as_str())
                .or_default()
                .push(p.clone());
        }
        by_class
            .into_iter()
            .map(|(class_label, members)| Block {
                class_label: class_label.to_string(),
                members,
            })
            .collect()
    }

    /// All ordered pairs within common blocks; the induced equivalence
    /// relation as a set.
    pub fn relation_pairs(&self) -> BTreeSet<(String, String)> {
        let mut pairs = BTreeSet::new();
        for block in self.blocks() {
            for x in &block.members {
                for y in &block.members {
                    pairs.insert((x.clone(), y.clone()));
                }
            }
        }
        pairs
    }

    /// True when every class is a singleton.
    pub fn is_discrete(&self) -> bool {
        self.blocks().iter().all(|b| b.members.len() == 1)
    }

    /// Rebuilds a space from a set of pairs, grouping points into classes by
    /// connectivity. Used to check that `blocks` and `relation_pairs`
    /// round-trip.
    pub fn from_pairs(pairs: &BTreeSet<(String, String)>) -> Result<Self> {
        let mut points: BTreeSet<String> = BTreeSet::new();
        for (x, y) in pairs {
            points.insert(x.clone());
            points.insert(y.clone());
        }
        let points: Vec<String> = points.into_iter().collect();
        let mut class_of: BTreeMap<String, String> = BTreeMap::new();
        for p in &points {
            // Representative: lexicographically least point related to p.
            let rep = pairs
                .iter()
                .filter(|(x, _)| x == p)
                .map(|(_, y)| y.clone())
                .min()
                .unwrap_or_else(|| p.clone());
            class_of.insert(p.clone(), rep);
        }
        Self::new(points, class_of)
    }
}

// JSON form: {"points": [...], "classes": {"point": "class", ...}}.
impl<'de> Deserialize<'de> for FiniteQuantumSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<String>,
            classes: BTreeMap<String, String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        FiniteQuantumSpace::new(raw.points, raw.classes).map_err(D::Error::custom)
    }
}
