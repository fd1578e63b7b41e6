//! Question parsing: tokenization, template matching and slot qualifiers.

mod lemma;
mod registry;
mod slots;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lemma::{lemma_phrase, lemmatize, tokenize, tokenize_and_lemmatize, Token};
pub use registry::{RegistryError, TemplateRegistry};
pub use slots::{parse_slot_qualifiers, HeadClass, Location, SizeQualifier, SlotPhrase};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty question")]
    Empty,
    #[error("unrecognized question: no template matches {0:?}")]
    UnrecognizedQuestion(String),
}

/// What a slot captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Obj,
    Person,
    Animal,
    Food,
    Concept,
    Taxonomy,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Obj => "obj",
            SlotKind::Person => "person",
            SlotKind::Animal => "animal",
            SlotKind::Food => "food",
            SlotKind::Concept => "concept",
            SlotKind::Taxonomy => "taxonomy",
        }
    }

    /// Kinds that name something visible, and so take size/location qualifiers.
    pub fn is_visual(self) -> bool {
        matches!(self, SlotKind::Obj | SlotKind::Person | SlotKind::Animal | SlotKind::Food)
    }
}

impl FromStr for SlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "obj" => SlotKind::Obj,
            "person" => SlotKind::Person,
            "animal" => SlotKind::Animal,
            "food" => SlotKind::Food,
            "concept" => SlotKind::Concept,
            "taxonomy" => SlotKind::Taxonomy,
            other => return Err(format!("unknown slot kind {other:?}")),
        })
    }
}

macro_rules! templates {
    ($($id:ident => [$($slot:literal : $kind:ident),*]),* $(,)?) => {
        /// Question templates, plus the two-image question types.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum TemplateId { $($id),* }

        impl TemplateId {
            pub const ALL: &'static [TemplateId] = &[$(TemplateId::$id),*];

            pub fn as_str(self) -> &'static str {
                match self { $(TemplateId::$id => stringify!($id)),* }
            }

            /// Slot names and kinds every phrasing of the template must capture.
            pub fn slots(self) -> &'static [(&'static str, SlotKind)] {
                match self { $(TemplateId::$id => &[$(($slot, SlotKind::$kind)),*]),* }
            }
        }

        impl FromStr for TemplateId {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($id) => Ok(TemplateId::$id),)*
                    other => Err(format!("unknown template {other:?}")),
                }
            }
        }
    };
}

templates! {
    IsThereAny => ["concept": Concept],
    IsImgRelate => ["concept": Concept],
    WhatIs => ["obj": Obj],
    ImgScene => [],
    ColorOf => ["obj": Obj],
    HowMany => ["concept": Concept],
    ObjAction => ["obj": Person],
    IsSameThing => ["obj1": Obj, "obj2": Obj],
    MostRelObj => ["obj": Obj, "concept": Concept],
    ListObj => [],
    IsTheA => ["obj": Obj, "concept": Concept],
    SportEquip => [],
    AnimalClass => ["taxonomy": Taxonomy, "animal": Animal],
    LocIntro => ["obj": Obj],
    YearIntro => ["obj": Obj],
    FoodIngredient => ["food": Food],
    LargestObj => ["concept": Concept],
    AreAllThe => ["obj": Obj, "concept": Concept],
    CommProp => ["obj1": Obj, "obj2": Concept],
    AnimalRelative => ["animal": Animal],
    AnimalSame => ["animal1": Animal, "animal2": Animal, "taxonomy": Taxonomy],
    FirstIntro => ["obj1": Obj, "obj2": Concept],
    ListSameYear => ["obj": Obj],
    TwoImageCommon => [],
    MostRelatedImage => ["concept": Concept],
}

impl TemplateId {
    /// Questions about two or more images rather than one.
    pub fn is_multi_image(self) -> bool {
        matches!(self, TemplateId::TwoImageCommon | TemplateId::MostRelatedImage)
    }

    /// Templates whose answers come with a reason derived from KB paths.
    /// Purely visual templates carry none.
    pub fn is_reason_bearing(self) -> bool {
        !matches!(
            self,
            TemplateId::WhatIs
                | TemplateId::ColorOf
                | TemplateId::ImgScene
                | TemplateId::ObjAction
                | TemplateId::ListObj
                | TemplateId::IsSameThing
        )
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A question matched to a template, with its slot phrases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedQuestion {
    pub template: TemplateId,
    pub slots: BTreeMap<String, SlotPhrase>,
    /// Words captured by flagged alternations, e.g. `extreme -> smallest`.
    pub flags: BTreeMap<String, String>,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl ParsedQuestion {
    pub fn slot(&self, name: &str) -> Option<&SlotPhrase> {
        self.slots.get(name)
    }

    pub fn flag(&self, name: &str) -> Option<&str> {
        self.flags.get(name).map(String::as_str)
    }
}
