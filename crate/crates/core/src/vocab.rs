//! Well-known predicate and namespace IRIs.
//!
//! KB predicates use their DBpedia / W3C IRIs. Predicates minted by the image
//! side of the pipeline live under [`LOCAL_NS`], which never overlaps a KB
//! namespace.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const RESOURCE_NS: &str = "http://dbpedia.org/resource/";
pub const ONTOLOGY_NS: &str = "http://dbpedia.org/ontology/";
pub const LOCAL_NS: &str = "http://vkbqa.example.org/ns#";
pub const IMAGE_NS: &str = "http://vkbqa.example.org/image/";
pub const ATTRIBUTE_NS: &str = "http://vkbqa.example.org/attribute/";
pub const SCENE_NS: &str = "http://vkbqa.example.org/scene/";
pub const OBJECT_CLASS_NS: &str = "http://vkbqa.example.org/objcat/";

/// Local-name prefix that marks a category entity in DBpedia.
pub const CATEGORY_PREFIX: &str = "Category:";

pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
pub const WIKI_PAGE_REDIRECTS: &str = "http://dbpedia.org/ontology/wikiPageRedirects";
pub const SUBJECT: &str = "http://purl.org/dc/terms/subject";
pub const BROADER: &str = "http://www.w3.org/2004/02/skos/core#broader";
pub const WIKI_LINK: &str = "http://dbpedia.org/ontology/wikiPageWikiLink";
pub const INGREDIENT: &str = "http://dbpedia.org/ontology/ingredient";

pub const KINGDOM: &str = "http://dbpedia.org/ontology/kingdom";
pub const PHYLUM: &str = "http://dbpedia.org/ontology/phylum";
pub const CLASS: &str = "http://dbpedia.org/ontology/class";
pub const ORDER: &str = "http://dbpedia.org/ontology/order";
pub const FAMILY: &str = "http://dbpedia.org/ontology/family";
pub const GENUS: &str = "http://dbpedia.org/ontology/genus";

pub const IMG_ATT: &str = "http://vkbqa.example.org/ns#img-att";
pub const IMG_SCN: &str = "http://vkbqa.example.org/ns#img-scn";
pub const CONTAIN: &str = "http://vkbqa.example.org/ns#contain";
pub const NAME: &str = "http://vkbqa.example.org/ns#name";
pub const COLOR: &str = "http://vkbqa.example.org/ns#color";
pub const SIZE: &str = "http://vkbqa.example.org/ns#size";
pub const SUPERCAT_NAME: &str = "http://vkbqa.example.org/ns#supercat-name";
pub const SAME_CONCEPT: &str = "http://vkbqa.example.org/ns#same-concept";

/// Short names accepted as bare predicates in query text, as written in
/// hand-authored query listings.
pub const BARE_NAMES: &[(&str, &str)] = &[
    ("label", LABEL),
    ("comment", COMMENT),
    ("wikiPageRedirects", WIKI_PAGE_REDIRECTS),
    ("subject", SUBJECT),
    ("broader", BROADER),
    ("WikiLink", WIKI_LINK),
    ("ingredient", INGREDIENT),
    ("kingdom", KINGDOM),
    ("phylum", PHYLUM),
    ("class", CLASS),
    ("order", ORDER),
    ("family", FAMILY),
    ("genus", GENUS),
    ("img-att", IMG_ATT),
    ("img-scn", IMG_SCN),
    ("contain", CONTAIN),
    ("name", NAME),
    ("color", COLOR),
    ("size", SIZE),
    ("supercat-name", SUPERCAT_NAME),
    ("same-concept", SAME_CONCEPT),
];

/// Returns the bare query name for a well-known predicate IRI.
pub fn bare_name(iri: &str) -> Option<&'static str> {
    BARE_NAMES.iter().find(|(_, v)| *v == iri).map(|(k, _)| *k)
}

/// True when the IRI names a DBpedia category entity.
pub fn is_category(iri: &str) -> bool {
    iri.strip_prefix(RESOURCE_NS).is_some_and(|local| local.starts_with(CATEGORY_PREFIX))
}

/// Builds a DBpedia resource IRI from a local name such as `Flying_disc`.
pub fn resource(local: &str) -> String {
    format!("{RESOURCE_NS}{local}")
}

/// Animal taxonomy ranks, most general first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyRank {
    Kingdom,
    Phylum,
    Class,
    Order,
    Family,
    Genus,
}

impl TaxonomyRank {
    pub const ALL: [TaxonomyRank; 6] = [
        TaxonomyRank::Kingdom,
        TaxonomyRank::Phylum,
        TaxonomyRank::Class,
        TaxonomyRank::Order,
        TaxonomyRank::Family,
        TaxonomyRank::Genus,
    ];

    pub fn predicate(self) -> &'static str {
        match self {
            TaxonomyRank::Kingdom => KINGDOM,
            TaxonomyRank::Phylum => PHYLUM,
            TaxonomyRank::Class => CLASS,
            TaxonomyRank::Order => ORDER,
            TaxonomyRank::Family => FAMILY,
            TaxonomyRank::Genus => GENUS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaxonomyRank::Kingdom => "kingdom",
            TaxonomyRank::Phylum => "phylum",
            TaxonomyRank::Class => "class",
            TaxonomyRank::Order => "order",
            TaxonomyRank::Family => "family",
            TaxonomyRank::Genus => "genus",
        }
    }
}

impl fmt::Display for TaxonomyRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaxonomyRank {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaxonomyRank::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("not a taxonomy rank: {s}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn bare_names_are_unique() {
        let iris: HashSet<_> = BARE_NAMES.iter().map(|(_, v)| *v).collect();
        let names: HashSet<_> = BARE_NAMES.iter().map(|(k, _)| *k).collect();
        assert_eq!(iris.len(), BARE_NAMES.len());
        assert_eq!(names.len(), BARE_NAMES.len());
    }

    #[test]
    fn local_predicates_do_not_share_kb_namespaces() {
        for iri in [IMG_ATT, IMG_SCN, CONTAIN, NAME, COLOR, SIZE, SUPERCAT_NAME, SAME_CONCEPT] {
            assert!(iri.starts_with(LOCAL_NS));
            assert!(!iri.starts_with(ONTOLOGY_NS));
            assert!(!iri.starts_with(RESOURCE_NS));
        }
    }

    #[test]
    fn category_detection() {
        assert!(is_category(&resource("Category:Religion")));
        assert!(!is_category(&resource("Religion")));
    }

    #[test]
    fn rank_round_trip() {
        for rank in TaxonomyRank::ALL {
            assert_eq!(rank.as_str().parse::<TaxonomyRank>().unwrap(), rank);
        }
        assert!("species".parse::<TaxonomyRank>().is_err());
    }
}
