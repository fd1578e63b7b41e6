//! Object-class and attribute vocabularies, loaded from two-column TSV files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::question::lemma_phrase;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryFileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

fn rows(text: &str) -> impl Iterator<Item = (usize, Result<(String, String), RegistryFileError>)> + '_ {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let mut cols = line.split('\t').map(str::trim);
        let row = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => Ok((a.to_lowercase(), b.to_lowercase())),
            _ => Err(RegistryFileError::Line { line: i + 1, message: "expected two tab-separated columns".into() }),
        };
        Some((i + 1, row))
    })
}

/// Object classes with their super-categories.
#[derive(Debug, Clone, Default)]
pub struct ClassRegistry {
    classes: BTreeMap<String, String>,
    by_lemma: HashMap<String, String>,
    supers: BTreeSet<String>,
    supers_by_lemma: HashMap<String, String>,
}

impl ClassRegistry {
    pub fn parse(text: &str) -> Result<Self, RegistryFileError> {
        let mut reg = ClassRegistry::default();
        for (line, row) in rows(text) {
            let (label, sup) = row?;
            if reg.classes.contains_key(&label) {
                return Err(RegistryFileError::Line { line, message: format!("duplicate class {label:?}") });
            }
            reg.by_lemma.insert(lemma_phrase(&label), label.clone());
            reg.supers_by_lemma.insert(lemma_phrase(&sup), sup.clone());
            reg.supers.insert(sup.clone());
            reg.classes.insert(label, sup);
        }
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.classes.contains_key(&label.to_lowercase())
    }

    pub fn supercategory(&self, label: &str) -> Option<&str> {
        self.classes.get(&label.to_lowercase()).map(String::as_str)
    }

    /// Class named by a phrase, comparing lemma forms ("tennis rackets").
    pub fn class_for(&self, phrase: &str) -> Option<&str> {
        self.by_lemma.get(&lemma_phrase(phrase)).map(String::as_str)
    }

    /// Super-category named by a phrase ("animals" -> "animal").
    pub fn superclass_for(&self, phrase: &str) -> Option<&str> {
        self.supers_by_lemma.get(&lemma_phrase(phrase)).map(String::as_str)
    }

    pub fn supercategories(&self) -> impl Iterator<Item = &str> {
        self.supers.iter().map(String::as_str)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &str)> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Attribute super-categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Action,
    Sport,
    Scene,
    Object,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Action => "action",
            AttributeKind::Sport => "sport",
            AttributeKind::Scene => "scene",
            AttributeKind::Object => "object",
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttributeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "action" => Ok(AttributeKind::Action),
            "sport" => Ok(AttributeKind::Sport),
            "scene" => Ok(AttributeKind::Scene),
            "object" => Ok(AttributeKind::Object),
            other => Err(format!("unknown attribute super-category {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AttributeRegistry {
    attributes: BTreeMap<String, AttributeKind>,
}

impl AttributeRegistry {
    pub fn parse(text: &str) -> Result<Self, RegistryFileError> {
        let mut reg = AttributeRegistry::default();
        for (line, row) in rows(text) {
            let (label, kind) = row?;
            let kind = kind.parse().map_err(|message| RegistryFileError::Line { line, message })?;
            if reg.attributes.insert(label.clone(), kind).is_some() {
                return Err(RegistryFileError::Line { line, message: format!("duplicate attribute {label:?}") });
            }
        }
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn kind(&self, label: &str) -> Option<AttributeKind> {
        self.attributes.get(&label.to_lowercase()).copied()
    }

    pub fn count(&self, kind: AttributeKind) -> usize {
        self.attributes.values().filter(|k| **k == kind).count()
    }
}
