use std::collections::BTreeMap;

use crate::store::Term;
use crate::vocab;

/// Prefix and bare-name table used to resolve abbreviated IRIs in query text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTable {
    prefixes: BTreeMap<String, String>,
    bare: BTreeMap<String, String>,
}

impl Default for PrefixTable {
    fn default() -> Self {
        let mut table = PrefixTable::empty();
        table.add_prefix("KB", vocab::RESOURCE_NS);
        table.add_prefix("dbo", vocab::ONTOLOGY_NS);
        table.add_prefix("ns", vocab::LOCAL_NS);
        table.add_prefix("img", vocab::IMAGE_NS);
        table.add_prefix("att", vocab::ATTRIBUTE_NS);
        table.add_prefix("scn", vocab::SCENE_NS);
        table.add_prefix("objcat", vocab::OBJECT_CLASS_NS);
        table.add_prefix("rdfs", "http://www.w3.org/2000/01/rdf-schema#");
        table.add_prefix("skos", "http://www.w3.org/2004/02/skos/core#");
        table.add_prefix("dct", "http://purl.org/dc/terms/");
        for (name, iri) in vocab::BARE_NAMES {
            table.add_bare(name, iri);
        }
        table
    }
}

impl PrefixTable {
    pub fn empty() -> Self {
        PrefixTable { prefixes: BTreeMap::new(), bare: BTreeMap::new() }
    }

    pub fn add_prefix(&mut self, prefix: &str, base: &str) {
        self.prefixes.insert(prefix.to_string(), base.to_string());
    }

    pub fn add_bare(&mut self, name: &str, iri: &str) {
        self.bare.insert(name.to_string(), iri.to_string());
    }

    /// Resolves `prefix:local` or a bare name.
    pub fn resolve(&self, name: &str) -> Option<String> {
        match name.split_once(':') {
            Some((prefix, local)) => self.prefixes.get(prefix).map(|base| format!("{base}{local}")),
            None => self.bare.get(name).cloned(),
        }
    }

    /// Shortest textual form for an IRI: a bare name, `prefix:local` when the
    /// local part is safe to write unescaped, else `<iri>`.
    pub fn compact_iri(&self, iri: &str) -> String {
        if let Some((name, _)) = self.bare.iter().find(|(_, v)| v.as_str() == iri) {
            return name.clone();
        }
        let best = self
            .prefixes
            .iter()
            .filter_map(|(p, base)| iri.strip_prefix(base.as_str()).map(|local| (p, local)))
            .filter(|(_, local)| is_safe_local(local))
            .min_by_key(|(_, local)| local.len());
        match best {
            Some((p, local)) => format!("{p}:{local}"),
            None => format!("<{iri}>"),
        }
    }

    pub fn compact(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.compact_iri(iri),
            other => other.to_string(),
        }
    }
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':')
}

/// Local names written unescaped: name characters, with `.` allowed only
/// between name characters.
fn is_safe_local(local: &str) -> bool {
    let chars: Vec<char> = local.chars().collect();
    !chars.is_empty()
        && chars
            .iter()
            .enumerate()
            .all(|(i, &c)| is_name_char(c) || (c == '.' && i > 0 && i + 1 < chars.len() && is_name_char(chars[i + 1])))
        && chars[0] != '-'
}
