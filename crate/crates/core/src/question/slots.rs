//! Size and location qualifiers on object phrases.

use std::fmt;

use serde::Serialize;

use super::{SlotKind, Token};
use crate::image::ClassRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeQualifier {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Left,
    Right,
    Top,
    Bottom,
    Center,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Location::Left => "left",
            Location::Right => "right",
            Location::Top => "top",
            Location::Bottom => "bottom",
            Location::Center => "center",
        })
    }
}

impl fmt::Display for SizeQualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeQualifier::Small => "small",
            SizeQualifier::Large => "large",
        })
    }
}

pub(crate) fn size_word(lemma: &str) -> Option<SizeQualifier> {
    match lemma {
        "small" | "smaller" | "little" | "tiny" => Some(SizeQualifier::Small),
        "large" | "larger" | "big" | "bigger" | "huge" => Some(SizeQualifier::Large),
        _ => None,
    }
}

pub(crate) fn location_word(lemma: &str) -> Option<Location> {
    match lemma {
        "left" | "leftmost" => Some(Location::Left),
        "right" | "rightmost" => Some(Location::Right),
        "top" | "upper" => Some(Location::Top),
        "bottom" | "lower" => Some(Location::Bottom),
        "center" | "centre" | "middle" | "central" => Some(Location::Center),
        _ => None,
    }
}

/// How the head of an object phrase relates to the class registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "name", rename_all = "lowercase")]
pub enum HeadClass {
    /// A specific object class, e.g. "dog".
    Class(String),
    /// A super-category, e.g. "animal".
    Superclass(String),
    /// "object" or "thing": every object.
    Any,
    /// Not in the registry.
    Unknown,
}

/// A captured slot phrase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotPhrase {
    pub kind: SlotKind,
    /// Surface text as written.
    pub text: String,
    /// Lemmas of the whole phrase.
    pub lemmas: String,
    pub size: Option<SizeQualifier>,
    pub location: Option<Location>,
    /// Lemmas left after removing qualifiers.
    pub head: String,
    /// Surface text left after removing qualifiers.
    pub head_text: String,
    pub head_class: HeadClass,
}

impl SlotPhrase {
    pub fn has_qualifiers(&self) -> bool {
        self.size.is_some() || self.location.is_some()
    }
}

/// Splits leading size/location words off a phrase and classifies the rest.
/// Concept and taxonomy phrases are kept whole.
/// Words that name a detected `person`.
const PERSON_WORDS: &[&str] =
    &["man", "men", "woman", "women", "boy", "girl", "child", "children", "kid", "people", "guy", "lady", "player"];

pub fn parse_slot_qualifiers(kind: SlotKind, tokens: &[Token], classes: &ClassRegistry) -> SlotPhrase {
    let join = |ts: &[Token], f: fn(&Token) -> &str| {
        let mut out = String::new();
        for t in ts {
            if !out.is_empty() && !t.is_punct() {
                out.push(' ');
            }
            out.push_str(f(t));
        }
        out
    };
    let mut size = None;
    let mut location = None;
    let mut start = 0;
    if kind.is_visual() {
        while start + 1 < tokens.len() {
            let lemma = tokens[start].lemma.as_str();
            if size.is_none() && size_word(lemma).is_some() {
                size = size_word(lemma);
            } else if location.is_none() && location_word(lemma).is_some() {
                location = location_word(lemma);
            } else {
                break;
            }
            start += 1;
        }
    }
    let rest = &tokens[start..];
    let head = join(rest, |t| &t.lemma);
    let head_class = if !kind.is_visual() {
        HeadClass::Unknown
    } else if matches!(head.as_str(), "object" | "thing" | "item") {
        HeadClass::Any
    } else if let Some(c) = classes.class_for(&head) {
        HeadClass::Class(c.to_string())
    } else if PERSON_WORDS.contains(&head.as_str()) && classes.class_for("person").is_some() {
        HeadClass::Class("person".into())
    } else if let Some(s) = classes.superclass_for(&head) {
        HeadClass::Superclass(s.to_string())
    } else {
        HeadClass::Unknown
    };
    SlotPhrase {
        kind,
        text: join(tokens, |t| &t.surface),
        lemmas: join(tokens, |t| &t.lemma),
        size,
        location,
        head,
        head_text: join(rest, |t| &t.surface),
        head_class,
    }
}

/// True when every token is a size or location word.
pub(crate) fn only_qualifiers(tokens: &[Token]) -> bool {
    tokens.iter().all(|t| size_word(&t.lemma).is_some() || location_word(&t.lemma).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::question::tokenize_and_lemmatize;

    fn classes() -> ClassRegistry {
        ClassRegistry::parse(crate::data::CLASSES).unwrap()
    }

    fn phrase(text: &str) -> SlotPhrase {
        parse_slot_qualifiers(SlotKind::Obj, &tokenize_and_lemmatize(text).unwrap(), &classes())
    }

    #[test]
    fn location_and_superclass() {
        let p = phrase("right animal");
        assert_eq!(p.location, Some(Location::Right));
        assert_eq!(p.size, None);
        assert_eq!(p.head, "animal");
        assert_eq!(p.head_class, HeadClass::Superclass("animal".into()));
    }

    #[test]
    fn bare_specific_class() {
        let p = phrase("dog");
        assert!(!p.has_qualifiers());
        assert_eq!(p.head_class, HeadClass::Class("dog".into()));
    }

    #[test]
    fn every_qualifier_ordering() {
        for text in ["large left vehicle", "left large vehicle"] {
            let p = phrase(text);
            assert_eq!((p.size, p.location), (Some(SizeQualifier::Large), Some(Location::Left)), "{text}");
            assert_eq!(p.head, "vehicle");
            assert_eq!(p.head_class, HeadClass::Superclass("vehicle".into()));
        }
        let sizes = [("small", SizeQualifier::Small), ("large", SizeQualifier::Large)];
        let locs = [
            ("left", Location::Left),
            ("right", Location::Right),
            ("top", Location::Top),
            ("bottom", Location::Bottom),
            ("center", Location::Center),
        ];
        for (sw, s) in sizes {
            for (lw, l) in locs {
                for text in
                    [format!("{sw} {lw} dog"), format!("{lw} {sw} dog"), format!("{lw} dog"), format!("{sw} dog")]
                {
                    let p = phrase(&text);
                    assert_eq!(p.head, "dog", "{text}");
                    assert_eq!(p.size.is_some(), text.contains(sw));
                    assert_eq!(p.location.is_some(), text.contains(lw));
                    if text.contains(sw) {
                        assert_eq!(p.size, Some(s));
                    }
                    if text.contains(lw) {
                        assert_eq!(p.location, Some(l));
                    }
                }
            }
        }
    }

    #[test]
    fn concepts_keep_their_adjectives() {
        let toks = tokenize_and_lemmatize("large intestine").unwrap();
        let p = parse_slot_qualifiers(SlotKind::Concept, &toks, &classes());
        assert_eq!(p.size, None);
        assert_eq!(p.head, "large intestine");
    }

    #[test]
    fn a_lone_qualifier_is_the_head() {
        // "the left" alone leaves something to name
        let p = phrase("left");
        assert_eq!(p.location, None);
        assert_eq!(p.head, "left");
    }
}
