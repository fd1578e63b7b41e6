//! A loaded KB plus image annotations, answering questions over them.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::answer::{Answer, AnswerError, Engine};
use crate::config::{ConfigError, SessionConfig};
use crate::image::{
    build_image_graph, link_concepts, load_annotation_dir, AnnotationError, AttributeRegistry, ClassRegistry,
    ImageAnnotation, ImageHandle, LinkReport, ValidateOptions,
};
use crate::kb::{self, KbError, KbSnapshot, LoadOptions};
use crate::question::{ParseError, ParsedQuestion, TemplateRegistry};
use crate::store::Graph;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Registry { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AskError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown image {0:?}")]
    UnknownImage(String),
    #[error("no image selected")]
    NoImage,
    #[error(transparent)]
    Answer(#[from] AnswerError),
}

impl AskError {
    /// Process exit code: 2 for questions no template recognizes, 3 for
    /// other structured failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AskError::Parse(_) => 2,
            _ => 3,
        }
    }
}

pub struct Session {
    pub config: SessionConfig,
    pub graph: Graph,
    pub snapshot: KbSnapshot,
    pub images: BTreeMap<String, ImageHandle>,
    pub classes: ClassRegistry,
    pub attributes: AttributeRegistry,
    pub templates: TemplateRegistry,
    pub links: BTreeMap<String, LinkReport>,
}

fn read(path: &Path) -> Result<String, SessionError> {
    fs::read_to_string(path).map_err(|source| SessionError::Io { path: path.to_path_buf(), source })
}

fn registry_text(path: &Option<PathBuf>, bundled: &'static str) -> Result<(String, String), SessionError> {
    match path {
        Some(p) => Ok((read(p)?, p.display().to_string())),
        None => Ok((bundled.to_string(), "<bundled>".into())),
    }
}

impl Session {
    /// Loads everything named by the config; unset paths use the bundled data.
    pub fn load(config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let options = LoadOptions { strict: config.strict_parse };
        let (graph, snapshot) = match &config.kb {
            Some(p) => kb::load_snapshot(p, options)?,
            None => kb::parse_snapshot(crate::data::MINI_KB, options)?,
        };
        let annotations = match &config.annotations {
            Some(dir) => load_annotation_dir(dir)?,
            None => crate::data::fixture_images(),
        };
        Self::from_parts(config, graph, snapshot, annotations)
    }

    /// Builds a session from an already loaded graph and annotations.
    pub fn from_parts(
        config: SessionConfig,
        mut graph: Graph,
        snapshot: KbSnapshot,
        annotations: Vec<ImageAnnotation>,
    ) -> Result<Self, SessionError> {
        config.validate()?;
        let (text, path) = registry_text(&config.classes, crate::data::CLASSES)?;
        let classes =
            ClassRegistry::parse(&text).map_err(|e| SessionError::Registry { path, message: e.to_string() })?;
        let (text, path) = registry_text(&config.attributes, crate::data::ATTRIBUTES)?;
        let attributes =
            AttributeRegistry::parse(&text).map_err(|e| SessionError::Registry { path, message: e.to_string() })?;
        let (text, path) = registry_text(&config.templates, crate::data::TEMPLATES)?;
        let templates =
            TemplateRegistry::parse(&text).map_err(|e| SessionError::Registry { path, message: e.to_string() })?;

        let mut images = BTreeMap::new();
        let mut links = BTreeMap::new();
        let options = ValidateOptions { strict_classes: config.strict_classes };
        for ann in annotations {
            ann.validate(&classes, options)?;
            if config.strict_classes {
                for a in &ann.attributes {
                    if attributes.kind(&a.label) != Some(a.supercategory) {
                        return Err(AnnotationError::Invalid {
                            image: ann.image_id.clone(),
                            message: format!(
                                "attribute {:?} is not a known {} attribute",
                                a.label,
                                a.supercategory.as_str()
                            ),
                        }
                        .into());
                    }
                }
            }
            if images.contains_key(&ann.image_id) {
                return Err(AnnotationError::DuplicateImage(ann.image_id).into());
            }
            let handle = build_image_graph(&mut graph, &ann)?;
            links.insert(ann.image_id.clone(), link_concepts(&mut graph, &handle)?);
            images.insert(ann.image_id.clone(), handle);
        }
        Ok(Session { config, graph, snapshot, images, classes, attributes, templates, links })
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.classes, self.config.engine())
    }

    pub fn parse(&self, question: &str) -> Result<ParsedQuestion, ParseError> {
        self.templates.parse_question(question, &self.classes)
    }

    pub fn image(&self, id: &str) -> Option<&ImageHandle> {
        self.images.get(id)
    }

    /// Parses and answers one question about the given images.
    pub fn ask<S: AsRef<str>>(&self, image_ids: &[S], question: &str) -> Result<Answer, AskError> {
        let parsed = self.parse(question)?;
        if image_ids.is_empty() {
            return Err(AskError::NoImage);
        }
        let handles = image_ids
            .iter()
            .map(|id| self.image(id.as_ref()).ok_or_else(|| AskError::UnknownImage(id.as_ref().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.engine().answer(&parsed, &handles)?)
    }

    /// Line-oriented interactive loop. `:image a[,b]` selects images,
    /// `:images` lists them and `:quit` exits; anything else is a question.
    pub fn repl<R: BufRead, W: Write>(
        &self,
        input: R,
        mut out: W,
        mut current: Vec<String>,
        verbose: bool,
    ) -> io::Result<()> {
        writeln!(out, "{} images loaded; current: {}", self.images.len(), show_images(&current))?;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == ":quit" || line == ":q" {
                break;
            } else if line == ":images" {
                for id in self.images.keys() {
                    writeln!(out, "{id}")?;
                }
            } else if let Some(rest) = line.strip_prefix(":image") {
                let ids = split_ids(rest);
                match ids.iter().find(|id| !self.images.contains_key(*id)) {
                    Some(bad) => writeln!(out, "error: unknown image {bad:?}")?,
                    None if ids.is_empty() => writeln!(out, "error: usage :image <id>[,<id>]")?,
                    None => {
                        current = ids;
                        writeln!(out, "current: {}", show_images(&current))?;
                    }
                }
            } else if line.starts_with(':') {
                writeln!(out, "error: unknown command {line}")?;
            } else {
                match self.ask(&current, line) {
                    Ok(a) => out.write_all(format_answer(&a, verbose).as_bytes())?,
                    Err(e) => writeln!(out, "error: {e}")?,
                }
            }
            out.flush()?;
        }
        Ok(())
    }
}

fn show_images(ids: &[String]) -> String {
    if ids.is_empty() {
        "none".into()
    } else {
        ids.join(",")
    }
}

/// Splits `a,b` or `a b` into image ids.
pub fn split_ids(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Plain-text rendering shared by `ask` and the REPL.
pub fn format_answer(a: &Answer, verbose: bool) -> String {
    let mut s = format!("answer: {}\n", a.text);
    for line in a.reason_lines() {
        s.push_str(&format!("reason: {line}\n"));
    }
    for n in &a.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    if verbose {
        for q in &a.queries {
            s.push_str("query:\n");
            for l in q.lines() {
                s.push_str(&format!("  {l}\n"));
            }
        }
    }
    s
}
