//! Template registry: a small pattern language over lemmas.
//!
//! One pattern per line, `TemplateId: pattern`, tried in file order. Pattern
//! elements:
//!
//! - `word` matches one token by lemma;
//! - `(a|b c)` matches one of the alternatives; `(a|b)@name` also records the
//!   matched lemmas under `name`;
//! - `[ ... ]` is optional (no slots inside);
//! - `<kind:name>` captures a slot phrase of the given kind.
//!
//! Slots are lazy, except the last slot of a pattern, which is greedy.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use super::slots::only_qualifiers;
use super::{
    lemmatize, parse_slot_qualifiers, tokenize_and_lemmatize, ParseError, ParsedQuestion, SlotKind, TemplateId, Token,
};
use crate::image::ClassRegistry;
use crate::vocab::TaxonomyRank;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("template file line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("template {0} has no pattern")]
    MissingTemplate(TemplateId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Elem {
    Word(String),
    Alt { options: Vec<Vec<String>>, flag: Option<String> },
    Slot { name: String, kind: SlotKind },
}

#[derive(Debug, Clone)]
struct Pattern {
    template: TemplateId,
    elems: Vec<Elem>,
    line: usize,
}

/// Lemmas a visual slot phrase may not contain: they belong to the pattern.
const VISUAL_STOP: &[&str] = &[
    "the",
    "a",
    "an",
    "of",
    "do",
    "is",
    "are",
    "was",
    "were",
    "be",
    "and",
    "or",
    "in",
    "on",
    "to",
    "this",
    "these",
    "that",
    "those",
    "largest",
    "smallest",
    "most",
    "more",
    "relate",
    "same",
    "thing",
    "kind",
    "type",
    "image",
    "picture",
    "photo",
    "with",
    "for",
    "there",
    "any",
    "all",
    "what",
    "which",
    "how",
    "many",
    "belong",
    "introduce",
    "invent",
    "have",
    "common",
    "scene",
    "color",
    "first",
    "originally",
    "earlier",
    "as",
    "than",
];

const DETERMINERS: &[&str] = &["the", "a", "an", "any", "this", "these", "those", "that", "some"];

fn slot_accepts(kind: SlotKind, toks: &[Token]) -> bool {
    if toks.is_empty() || toks.iter().any(Token::is_punct) {
        return false;
    }
    match kind {
        SlotKind::Taxonomy => toks.len() == 1 && TaxonomyRank::from_str(&toks[0].lemma).is_ok(),
        SlotKind::Concept => !DETERMINERS.contains(&toks[0].lemma.as_str()),
        _ => !toks.iter().any(|t| VISUAL_STOP.contains(&t.lemma.as_str())) && !only_qualifiers(toks),
    }
}

/// Raw pattern pieces before optional groups are expanded.
enum Piece {
    Elem(Elem),
    Optional(Vec<Elem>),
}

fn lemma_of(word: &str) -> String {
    if word.chars().all(|c| c.is_ascii_punctuation()) {
        word.to_string()
    } else {
        lemmatize(word)
    }
}

fn parse_pattern(src: &str) -> Result<Vec<Piece>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut pieces = Vec::new();
    let mut optional: Option<Vec<Elem>> = None;
    let is_special = |c: char| "[]()<>|@".contains(c);
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let elem = match c {
            '[' => {
                if optional.is_some() {
                    return Err("nested optional group".into());
                }
                optional = Some(Vec::new());
                i += 1;
                continue;
            }
            ']' => {
                let group = optional.take().ok_or("unbalanced ']'")?;
                if group.is_empty() {
                    return Err("empty optional group".into());
                }
                pieces.push(Piece::Optional(group));
                i += 1;
                continue;
            }
            '(' => {
                let close = chars[i..].iter().position(|&c| c == ')').ok_or("unclosed '('")? + i;
                let body: String = chars[i + 1..close].iter().collect();
                let options: Vec<Vec<String>> =
                    body.split('|').map(|o| o.split_whitespace().map(lemma_of).collect::<Vec<_>>()).collect();
                if options.iter().any(Vec::is_empty) {
                    return Err("empty alternative".into());
                }
                i = close + 1;
                let mut flag = None;
                if chars.get(i) == Some(&'@') {
                    let start = i + 1;
                    i = start;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    if i == start {
                        return Err("missing flag name after '@'".into());
                    }
                    flag = Some(chars[start..i].iter().collect());
                }
                Elem::Alt { options, flag }
            }
            '<' => {
                let close = chars[i..].iter().position(|&c| c == '>').ok_or("unclosed '<'")? + i;
                let body: String = chars[i + 1..close].iter().collect();
                let (kind, name) = body.split_once(':').ok_or("slot must be <kind:name>")?;
                let kind = SlotKind::from_str(kind.trim())?;
                i = close + 1;
                if optional.is_some() {
                    return Err("slots may not be optional".into());
                }
                Elem::Slot { name: name.trim().to_string(), kind }
            }
            ')' | '>' | '|' | '@' => return Err(format!("unexpected {c:?}")),
            c if c.is_ascii_punctuation() => {
                i += 1;
                Elem::Word(c.to_string())
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !is_special(chars[i]) {
                    i += 1;
                }
                Elem::Word(lemma_of(&chars[start..i].iter().collect::<String>()))
            }
        };
        match optional.as_mut() {
            Some(group) => group.push(elem),
            None => pieces.push(Piece::Elem(elem)),
        }
    }
    if optional.is_some() {
        return Err("unclosed '['".into());
    }
    Ok(pieces)
}

/// Every combination of optional groups, with groups present before absent.
fn expand(pieces: &[Piece]) -> Vec<Vec<Elem>> {
    let mut out: Vec<Vec<Elem>> = vec![Vec::new()];
    for piece in pieces {
        match piece {
            Piece::Elem(e) => out.iter_mut().for_each(|seq| seq.push(e.clone())),
            Piece::Optional(group) => {
                out = out
                    .into_iter()
                    .flat_map(|seq| {
                        let mut with = seq.clone();
                        with.extend(group.iter().cloned());
                        [with, seq]
                    })
                    .collect();
            }
        }
    }
    out
}

struct Match {
    slots: Vec<(String, SlotKind, usize, usize)>,
    flags: BTreeMap<String, String>,
}

fn match_at(elems: &[Elem], toks: &[Token], ti: usize, m: &mut Match) -> bool {
    let Some((first, rest)) = elems.split_first() else {
        return ti == toks.len();
    };
    match first {
        Elem::Word(w) => ti < toks.len() && toks[ti].lemma == *w && match_at(rest, toks, ti + 1, m),
        Elem::Alt { options, flag } => {
            for opt in options {
                let end = ti + opt.len();
                if end <= toks.len() && toks[ti..end].iter().zip(opt).all(|(t, w)| t.lemma == *w) {
                    if let Some(f) = flag {
                        m.flags.insert(f.clone(), opt.join(" "));
                    }
                    if match_at(rest, toks, end, m) {
                        return true;
                    }
                    if let Some(f) = flag {
                        m.flags.remove(f);
                    }
                }
            }
            false
        }
        Elem::Slot { name, kind } => {
            let avail = toks.len() - ti;
            let greedy = !rest.iter().any(|e| matches!(e, Elem::Slot { .. }));
            let lens: Box<dyn Iterator<Item = usize>> =
                if greedy { Box::new((1..=avail).rev()) } else { Box::new(1..=avail) };
            for len in lens {
                if !slot_accepts(*kind, &toks[ti..ti + len]) {
                    continue;
                }
                m.slots.push((name.clone(), *kind, ti, ti + len));
                if match_at(rest, toks, ti + len, m) {
                    return true;
                }
                m.slots.pop();
            }
            false
        }
    }
}

/// Ordered set of template patterns.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    patterns: Vec<Pattern>,
}

impl TemplateRegistry {
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut patterns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let src = raw.trim();
            if src.is_empty() || src.starts_with('#') {
                continue;
            }
            let err = |message: String| RegistryError::Line { line, message };
            let (id, body) = src.split_once(':').ok_or_else(|| err("expected `Template: pattern`".into()))?;
            let template = TemplateId::from_str(id.trim()).map_err(err)?;
            let pieces = parse_pattern(body).map_err(err)?;
            let mut declared: Vec<(&str, SlotKind)> = pieces
                .iter()
                .filter_map(|p| match p {
                    Piece::Elem(Elem::Slot { name, kind }) => Some((name.as_str(), *kind)),
                    _ => None,
                })
                .collect();
            declared.sort();
            let mut expected = template.slots().to_vec();
            expected.sort();
            if declared != expected {
                return Err(err(format!("slots {declared:?} do not match {template}'s slots {expected:?}")));
            }
            for elems in expand(&pieces) {
                patterns.push(Pattern { template, elems, line });
            }
        }
        let reg = TemplateRegistry { patterns };
        if let Some(missing) = TemplateId::ALL.iter().find(|t| !reg.patterns.iter().any(|p| p.template == **t)) {
            return Err(RegistryError::MissingTemplate(*missing));
        }
        Ok(reg)
    }

    /// The registry shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(crate::data::TEMPLATES).expect("bundled template file is valid")
    }

    /// Number of expanded patterns.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    fn significant(tokens: &[Token]) -> &[Token] {
        let start = tokens.iter().position(|t| !t.is_punct()).unwrap_or(tokens.len());
        let end = tokens.iter().rposition(|t| !t.is_punct()).map_or(start, |e| e + 1);
        &tokens[start..end.max(start)]
    }

    fn try_pattern(&self, p: &Pattern, toks: &[Token], classes: &ClassRegistry) -> Option<ParsedQuestion> {
        let mut m = Match { slots: Vec::new(), flags: BTreeMap::new() };
        if !match_at(&p.elems, toks, 0, &mut m) {
            return None;
        }
        let slots = m
            .slots
            .into_iter()
            .map(|(name, kind, s, e)| (name, parse_slot_qualifiers(kind, &toks[s..e], classes)))
            .collect();
        Some(ParsedQuestion { template: p.template, slots, flags: m.flags, text: String::new(), tokens: Vec::new() })
    }

    /// Matches a question against the patterns in priority order.
    pub fn parse_question(&self, text: &str, classes: &ClassRegistry) -> Result<ParsedQuestion, ParseError> {
        let tokens = tokenize_and_lemmatize(text)?;
        let toks = Self::significant(&tokens);
        if toks.is_empty() {
            return Err(ParseError::Empty);
        }
        for p in &self.patterns {
            if let Some(mut q) = self.try_pattern(p, toks, classes) {
                log::debug!("question matched {} (template line {})", p.template, p.line);
                q.text = text.trim().to_string();
                q.tokens = tokens;
                return Ok(q);
            }
        }
        Err(ParseError::UnrecognizedQuestion(text.trim().to_string()))
    }

    /// Every template with at least one pattern matching the question.
    pub fn matching_templates(&self, text: &str, classes: &ClassRegistry) -> Vec<TemplateId> {
        let Ok(tokens) = tokenize_and_lemmatize(text) else { return Vec::new() };
        let toks = Self::significant(&tokens);
        let mut out: Vec<TemplateId> =
            self.patterns.iter().filter(|p| self.try_pattern(p, toks, classes).is_some()).map(|p| p.template).collect();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::question::{HeadClass, Location};

    fn classes() -> ClassRegistry {
        ClassRegistry::parse(crate::data::CLASSES).unwrap()
    }

    fn parse(text: &str) -> ParsedQuestion {
        TemplateRegistry::bundled().parse_question(text, &classes()).unwrap()
    }

    #[test]
    fn worked_example() {
        let q = parse("List the common properties of the right animal and zebra.");
        assert_eq!(q.template, TemplateId::CommProp);
        let obj = q.slot("obj1").unwrap();
        assert_eq!(obj.text, "right animal");
        assert_eq!(obj.location, Some(Location::Right));
        assert_eq!(obj.head_class, HeadClass::Superclass("animal".into()));
        assert_eq!(q.slot("obj2").unwrap().text, "zebra");
    }

    #[test]
    fn scene_question_has_no_slots() {
        let q = parse("What scene does this image describe?");
        assert_eq!(q.template, TemplateId::ImgScene);
        assert!(q.slots.is_empty());
    }

    #[test]
    fn flags_record_alternatives() {
        let q = parse("What is the smallest animal?");
        assert_eq!(q.template, TemplateId::LargestObj);
        assert_eq!(q.flag("extreme"), Some("smallest"));
        assert_eq!(parse("What is the biggest vehicle in this image?").flag("extreme"), Some("largest"));
    }

    #[test]
    fn final_slot_is_greedy() {
        let q = parse("Is the image related to animal-powered vehicle?");
        assert_eq!(q.template, TemplateId::IsImgRelate);
        assert_eq!(q.slot("concept").unwrap().text, "animal-powered vehicle");
    }

    #[test]
    fn unknown_question_is_structured_failure() {
        let err = TemplateRegistry::bundled().parse_question("Tell me a joke.", &classes()).unwrap_err();
        assert!(matches!(err, ParseError::UnrecognizedQuestion(_)));
        assert_eq!(TemplateRegistry::bundled().parse_question(" ?", &classes()).unwrap_err(), ParseError::Empty);
    }

    #[test]
    fn pattern_errors() {
        assert!(TemplateRegistry::parse("WhatIs: what is the [<obj:obj>]").is_err());
        assert!(TemplateRegistry::parse("WhatIs: what is the <concept:other>").is_err());
        assert!(TemplateRegistry::parse("Nope: what").is_err());
        assert!(TemplateRegistry::parse("WhatIs: what (is").is_err());
        assert!(matches!(
            TemplateRegistry::parse("WhatIs: what is the <obj:obj>"),
            Err(RegistryError::MissingTemplate(_))
        ));
    }

    #[test]
    fn optional_groups_expand_present_first() {
        let pieces = parse_pattern("a [b] c [(d|e)]").unwrap();
        let seqs = expand(&pieces);
        assert_eq!(seqs.len(), 4);
        assert_eq!(seqs[0].len(), 4);
        assert_eq!(seqs[3].len(), 2);
    }

    #[test]
    fn taxonomy_slot_takes_one_rank() {
        let q = parse("Are zebras and horses in the same family?");
        assert_eq!(q.template, TemplateId::AnimalSame);
        assert_eq!(q.slot("taxonomy").unwrap().lemmas, "family");
        assert_eq!(q.slot("animal1").unwrap().head, "zebra");
        assert!(TemplateRegistry::bundled()
            .parse_question("Are zebras and horses in the same herd?", &classes())
            .is_err());
    }
}
