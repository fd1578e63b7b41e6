//! KB snapshot loading, label lookup and redirect resolution.
//!
//! Snapshot format: one triple per line, N-Triples style, UTF-8:
//!
//! ```text
//! # comment
//! <http://s> <http://p> <http://o> .
//! <http://s> <http://p> "lexical"@en .
//! ```

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::sparql::PrefixTable;
use crate::store::{Graph, StoreError, Term, Triple};
use crate::vocab;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: usize,
    pub triples: usize,
    pub labels: usize,
    pub redirects: usize,
    /// Lines skipped in lenient mode, with their line numbers and messages.
    pub malformed: Vec<(usize, String)>,
}

/// Metadata about a loaded snapshot.
#[derive(Debug, Clone)]
pub struct KbSnapshot {
    pub source: Option<PathBuf>,
    pub prefixes: PrefixTable,
    pub stats: LoadStats,
}

impl KbSnapshot {
    pub fn triple_count(&self) -> usize {
        self.stats.triples
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
}

static LOADS: AtomicUsize = AtomicUsize::new(0);

/// Number of snapshots loaded by this process so far.
pub fn load_count() -> usize {
    LOADS.load(Ordering::SeqCst)
}

pub fn load_snapshot(path: &Path, options: LoadOptions) -> Result<(Graph, KbSnapshot), KbError> {
    let io_err = |source| KbError::Io { path: path.to_path_buf(), source };
    let file = File::open(path).map_err(io_err)?;
    let (graph, mut snap) = read_snapshot(BufReader::new(file), options).map_err(|e| match e {
        KbError::Io { source, .. } => io_err(source),
        other => other,
    })?;
    snap.source = Some(path.to_path_buf());
    log::info!(
        "loaded {} triples from {} ({} labels, {} redirects, {} skipped)",
        snap.stats.triples,
        path.display(),
        snap.stats.labels,
        snap.stats.redirects,
        snap.stats.malformed.len()
    );
    Ok((graph, snap))
}

pub fn parse_snapshot(text: &str, options: LoadOptions) -> Result<(Graph, KbSnapshot), KbError> {
    read_snapshot(text.as_bytes(), options)
}

pub fn read_snapshot<R: BufRead>(reader: R, options: LoadOptions) -> Result<(Graph, KbSnapshot), KbError> {
    LOADS.fetch_add(1, Ordering::SeqCst);
    let mut graph = Graph::new();
    let mut stats = LoadStats::default();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| KbError::Io { path: PathBuf::new(), source })?;
        stats.lines += 1;
        let parsed = parse_line(&line).and_then(|t| match t {
            Some(t) if t.predicate.as_iri() == Some(vocab::WIKI_PAGE_REDIRECTS) && !t.object.is_iri() => {
                Err("redirect target must be an IRI".to_string())
            }
            other => Ok(other),
        });
        match parsed {
            Ok(None) => {}
            Ok(Some(t)) => {
                let pred = t.predicate.as_iri().unwrap_or_default();
                let is_label = pred == vocab::LABEL;
                let is_redirect = pred == vocab::WIKI_PAGE_REDIRECTS;
                match graph.insert(t) {
                    Ok(true) => {
                        stats.triples += 1;
                        stats.labels += usize::from(is_label);
                        stats.redirects += usize::from(is_redirect);
                    }
                    Ok(false) => {}
                    Err(e) => fail(&mut stats, options, lineno, e.to_string())?,
                }
            }
            Err(message) => fail(&mut stats, options, lineno, message)?,
        }
    }
    Ok((graph, KbSnapshot { source: None, prefixes: PrefixTable::default(), stats }))
}

fn fail(stats: &mut LoadStats, options: LoadOptions, line: usize, message: String) -> Result<(), KbError> {
    if options.strict {
        return Err(KbError::Malformed { line, message });
    }
    log::warn!("snapshot line {line}: {message}");
    stats.malformed.push((line, message));
    Ok(())
}

/// Parses one snapshot line. Blank and `#` comment lines yield `None`.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let text = line.trim();
    if text.is_empty() || text.starts_with('#') {
        return Ok(None);
    }
    let mut rest = text;
    let subject = take_iri(&mut rest)?;
    let predicate = take_iri(&mut rest)?;
    rest = rest.trim_start();
    let object = if rest.starts_with('<') { take_iri(&mut rest)? } else { take_literal(&mut rest)? };
    if rest.trim() != "." {
        return Err(format!("expected '.' at end of line, found {:?}", rest.trim()));
    }
    let triple = Triple::new(subject, predicate, object);
    triple.validate().map_err(|e: StoreError| e.to_string())?;
    Ok(Some(triple))
}

fn take_iri(rest: &mut &str) -> Result<Term, String> {
    let s = rest.trim_start();
    let body = s.strip_prefix('<').ok_or_else(|| format!("expected '<', found {:?}", first_word(s)))?;
    let end = body.find('>').ok_or("unterminated IRI")?;
    *rest = &body[end + 1..];
    Ok(Term::iri(&body[..end]))
}

fn take_literal(rest: &mut &str) -> Result<Term, String> {
    let s = rest.trim_start();
    let body = s.strip_prefix('"').ok_or_else(|| format!("expected IRI or literal, found {:?}", first_word(s)))?;
    let mut lexical = String::new();
    let mut chars = body.char_indices();
    let end = loop {
        match chars.next() {
            None => return Err("unterminated literal".into()),
            Some((i, '"')) => break i,
            Some((_, '\\')) => match chars.next() {
                Some((_, 'n')) => lexical.push('\n'),
                Some((_, 'r')) => lexical.push('\r'),
                Some((_, 't')) => lexical.push('\t'),
                Some((_, c @ ('"' | '\\'))) => lexical.push(c),
                other => return Err(format!("bad escape {:?}", other.map(|(_, c)| c))),
            },
            Some((_, c)) => lexical.push(c),
        }
    };
    let after = &body[end + 1..];
    if let Some(tagged) = after.strip_prefix('@') {
        let len = tagged.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).unwrap_or(tagged.len());
        *rest = &tagged[len..];
        Ok(Term::lang_literal(lexical, &tagged[..len]))
    } else {
        *rest = after;
        Ok(Term::literal(lexical))
    }
}

fn first_word(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}

/// Writes every triple in sorted order, one per line.
pub fn write_snapshot<W: Write>(graph: &Graph, mut out: W) -> io::Result<()> {
    let mut triples: Vec<Triple> = graph.triples().collect();
    triples.sort();
    for t in triples {
        writeln!(out, "{t}")?;
    }
    out.flush()
}

fn english(lit: &Term) -> bool {
    matches!(lit.lang(), None | Some("en"))
}

/// Subjects whose English (or untagged) label equals `phrase`.
pub fn lookup_by_label(graph: &Graph, phrase: &str, case_insensitive: bool) -> BTreeSet<Term> {
    let Some(label) = graph.iri_id(vocab::LABEL) else {
        return BTreeSet::new();
    };
    graph
        .literal_subjects(label, phrase, case_insensitive)
        .iter()
        .filter(|(_, lit)| english(graph.term(*lit)))
        .map(|(s, _)| graph.term(*s).clone())
        .collect()
}

/// English label of an entity, if any (the smallest, for determinism).
pub fn label_of(graph: &Graph, entity: &Term) -> Option<String> {
    let id = graph.term_id(entity)?;
    let label = graph.iri_id(vocab::LABEL)?;
    graph
        .objects(id, label)
        .map(|l| graph.term(l))
        .filter(|l| !l.is_iri() && english(l))
        .map(|l| l.lexical().to_string())
        .min()
}

/// Label, or a readable form of the IRI's local name.
pub fn display_name(graph: &Graph, entity: &Term) -> String {
    label_of(graph, entity).unwrap_or_else(|| {
        let local = entity.local_name();
        local.strip_prefix(vocab::CATEGORY_PREFIX).unwrap_or(local).replace('_', " ")
    })
}

/// Where a redirect chain from one entity ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redirect {
    pub target: Term,
    /// Entities visited after the start, ending with `target`.
    pub chain: Vec<Term>,
    pub cycle: bool,
}

/// Follows redirect edges to a fixed point. A cycle resolves to its smallest
/// member, so that every entity on or leading into the cycle agrees.
pub fn resolve_redirect(graph: &Graph, entity: &Term) -> Redirect {
    let mut current = entity.clone();
    let mut chain = Vec::new();
    let Some(pred) = graph.iri_id(vocab::WIKI_PAGE_REDIRECTS) else {
        return Redirect { target: current, chain, cycle: false };
    };
    loop {
        let next = graph.term_id(&current).and_then(|id| graph.objects(id, pred).next()).map(|t| graph.term(t).clone());
        match next {
            None => return Redirect { target: current, chain, cycle: false },
            Some(n) if n == *entity || chain.contains(&n) => {
                log::warn!("redirect cycle at {}", n.lexical());
                let start = chain.iter().position(|c| *c == n).map_or(0, |i| i + 1);
                let cycle_min = std::iter::once(&n).chain(&chain[start..]).min().expect("non-empty").clone();
                if chain.last() != Some(&cycle_min) {
                    chain.push(cycle_min.clone());
                }
                return Redirect { target: cycle_min, chain, cycle: true };
            }
            Some(n) => {
                chain.push(n.clone());
                current = n;
            }
        }
    }
}

pub fn resolve_redirects(graph: &Graph, entities: &BTreeSet<Term>) -> BTreeSet<Term> {
    entities.iter().map(|e| resolve_redirect(graph, e).target).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
# three lines
<http://dbpedia.org/resource/Religion> <http://www.w3.org/2000/01/rdf-schema#label> \"Religion\"@en .
<http://dbpedia.org/resource/Relig.> <http://dbpedia.org/ontology/wikiPageRedirects> <http://dbpedia.org/resource/Religion> .
<http://dbpedia.org/resource/Religion> <http://purl.org/dc/terms/subject> <http://dbpedia.org/resource/Category:Religion> .
";

    fn r(s: &str) -> Term {
        Term::iri(vocab::resource(s))
    }

    #[test]
    fn empty_file() {
        let (g, snap) = parse_snapshot("", LoadOptions::default()).unwrap();
        assert!(g.is_empty());
        assert_eq!(snap.stats, LoadStats::default());
    }

    #[test]
    fn counts_labels_and_redirects() {
        let (g, snap) = parse_snapshot(FIXTURE, LoadOptions::default()).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!((snap.stats.labels, snap.stats.redirects), (1, 1));
    }

    #[test]
    fn strict_and_lenient_modes() {
        let text = format!("{FIXTURE}<a> <b> garbage .\n<http://x> <http://y> \"z\" .\n");
        let err = parse_snapshot(&text, LoadOptions { strict: true }).unwrap_err();
        assert!(matches!(err, KbError::Malformed { line: 5, .. }), "{err}");
        let (g, snap) = parse_snapshot(&text, LoadOptions { strict: false }).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(snap.stats.malformed.len(), 1);
        assert_eq!(snap.stats.malformed[0].0, 5);
    }

    #[test]
    fn literal_redirect_rejected() {
        let text = "<http://a> <http://dbpedia.org/ontology/wikiPageRedirects> \"b\" .";
        assert!(parse_snapshot(text, LoadOptions { strict: true }).is_err());
    }

    #[test]
    fn line_parsing() {
        let t = parse_line(r#"<http://s> <http://p> "a \"q\" \\ b"@en-GB ."#).unwrap().unwrap();
        assert_eq!(t.object, Term::lang_literal("a \"q\" \\ b", "en-GB"));
        assert!(parse_line("  # hi").unwrap().is_none());
        assert!(parse_line("<http://s> <http://p> <http://o>").is_err());
        assert!(parse_line("<> <http://p> <http://o> .").is_err());
        assert!(parse_line(r#""s" <http://p> <http://o> ."#).is_err());
    }

    #[test]
    fn round_trip() {
        let (g, _) = parse_snapshot(FIXTURE, LoadOptions { strict: true }).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&g, &mut buf).unwrap();
        let (g2, _) = parse_snapshot(std::str::from_utf8(&buf).unwrap(), LoadOptions { strict: true }).unwrap();
        let a: BTreeSet<_> = g.triples().collect();
        let b: BTreeSet<_> = g2.triples().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn label_lookup_modes() {
        let text = format!(
            "{FIXTURE}<http://dbpedia.org/resource/Category:Religion> <http://www.w3.org/2000/01/rdf-schema#label> \"Religion\"@en .\n\
             <http://dbpedia.org/resource/Religion> <http://www.w3.org/2000/01/rdf-schema#label> \"Religion\"@de .\n\
             <http://dbpedia.org/resource/Rel_de> <http://www.w3.org/2000/01/rdf-schema#label> \"Religion\"@de .\n"
        );
        let (g, _) = parse_snapshot(&text, LoadOptions::default()).unwrap();
        let both = BTreeSet::from([r("Category:Religion"), r("Religion")]);
        assert_eq!(lookup_by_label(&g, "Religion", false), both);
        assert!(lookup_by_label(&g, "religion", false).is_empty());
        assert_eq!(lookup_by_label(&g, "religion", true), both);
        assert!(lookup_by_label(&g, "Xyzzy", true).is_empty());
    }

    #[test]
    fn redirects_follow_chains_and_survive_cycles() {
        let link = |a: &str, b: &str| {
            format!("<{}> <{}> <{}> .\n", vocab::resource(a), vocab::WIKI_PAGE_REDIRECTS, vocab::resource(b))
        };
        let text = [link("A", "B"), link("B", "C"), link("X", "Y"), link("Y", "X")].concat();
        let (g, _) = parse_snapshot(&text, LoadOptions::default()).unwrap();
        let res = resolve_redirect(&g, &r("A"));
        assert_eq!(res.target, r("C"));
        assert_eq!(res.chain, vec![r("B"), r("C")]);
        assert_eq!(resolve_redirect(&g, &r("Q")).target, r("Q"));
        let cyc = resolve_redirect(&g, &r("X"));
        assert!(cyc.cycle);
        assert_eq!(cyc.target, r("X"));
        assert_eq!(resolve_redirect(&g, &r("Y")).target, r("X"));
    }
}
