//! Image annotations and the RDF triples they become.
//!
//! Each image contributes:
//!
//! ```text
//! Img   contain  Obj            Obj  name  ObjCat     ObjCat  name           "giraffe"
//! Obj   size     "area"         Obj  color "brown"    ObjCat  supercat-name  "animal"
//! Img   img-att  Att            Att  name  "grazing"  Att     supercat-name  "action"
//! Img   img-scn  Scn            Scn  name  "savanna"  Scn     supercat-name  "scene"
//! ```
//!
//! Category nodes (ObjCat, Att, Scn) are shared between images and linked to
//! KB entities with `same-concept`.

mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use registry::{AttributeKind, AttributeRegistry, ClassRegistry, RegistryFileError};

use crate::linker::resolve_concept_phrase;
use crate::store::{Graph, StoreError, Term};
use crate::vocab;

pub const MAX_ATTRIBUTES: usize = 10;
pub const MAX_SCENES: usize = 3;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("image {image}: {message}")]
    Invalid { image: String, message: String },
    #[error("duplicate image id {0}")]
    DuplicateImage(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    pub id: u32,
    pub label: String,
    pub supercategory: String,
    /// x, y, width, height in pixels.
    pub bbox: [f64; 4],
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

impl DetectedObject {
    pub fn area(&self) -> u64 {
        (self.bbox[2] * self.bbox[3]).round() as u64
    }

    pub fn center(&self) -> (f64, f64) {
        (self.bbox[0] + self.bbox[2] / 2.0, self.bbox[1] + self.bbox[3] / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub label: String,
    pub supercategory: AttributeKind,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub label: String,
    pub score: f64,
}

/// Detector output for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAnnotation {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub objects: Vec<DetectedObject>,
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub scenes: Vec<Scene>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Reject object labels missing from the class registry.
    pub strict_classes: bool,
}

fn sorted_desc(scores: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = scores.collect();
    v.windows(2).all(|w| w[0] >= w[1])
}

impl ImageAnnotation {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self, classes: &ClassRegistry, options: ValidateOptions) -> Result<(), AnnotationError> {
        let bad = |message: String| Err(AnnotationError::Invalid { image: self.image_id.clone(), message });
        if self.image_id.trim().is_empty() {
            return bad("empty image_id".into());
        }
        if self.width == 0 || self.height == 0 {
            return bad("image has zero width or height".into());
        }
        if self.attributes.len() > MAX_ATTRIBUTES {
            return bad(format!("{} attributes (at most {MAX_ATTRIBUTES})", self.attributes.len()));
        }
        if self.scenes.len() > MAX_SCENES {
            return bad(format!("{} scenes (at most {MAX_SCENES})", self.scenes.len()));
        }
        let scores = self
            .objects
            .iter()
            .map(|o| o.score)
            .chain(self.attributes.iter().map(|a| a.score))
            .chain(self.scenes.iter().map(|s| s.score));
        for s in scores {
            if !(0.0..=1.0).contains(&s) {
                return bad(format!("score {s} outside [0, 1]"));
            }
        }
        if !sorted_desc(self.attributes.iter().map(|a| a.score)) {
            return bad("attributes not sorted by descending score".into());
        }
        if !sorted_desc(self.scenes.iter().map(|s| s.score)) {
            return bad("scenes not sorted by descending score".into());
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return bad(format!("duplicate object id {}", o.id));
            }
            let [x, y, w, h] = o.bbox;
            if !(w > 0.0 && h > 0.0) || x < 0.0 || y < 0.0 || x + w > self.width as f64 || y + h > self.height as f64 {
                return bad(format!("object {}: bbox {:?} outside {}x{}", o.id, o.bbox, self.width, self.height));
            }
            if o.label.trim().is_empty() {
                return bad(format!("object {}: empty label", o.id));
            }
            if options.strict_classes && !classes.contains(&o.label) {
                return bad(format!("object {}: unknown class {:?}", o.id, o.label));
            }
        }
        Ok(())
    }

    pub fn object(&self, id: u32) -> Option<&DetectedObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

/// Reads every `*.json` annotation in a directory, in file-name order.
pub fn load_annotation_dir(dir: &Path) -> Result<Vec<ImageAnnotation>, AnnotationError> {
    let io_err = |source| AnnotationError::Io { path: dir.to_path_buf(), source };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    let mut seen = BTreeSet::new();
    for path in paths {
        let ann = load_annotation(&path)?;
        if !seen.insert(ann.image_id.clone()) {
            return Err(AnnotationError::DuplicateImage(ann.image_id));
        }
        out.push(ann);
    }
    Ok(out)
}

pub fn load_annotation(path: &Path) -> Result<ImageAnnotation, AnnotationError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotationError::Io { path: path.to_path_buf(), source })?;
    ImageAnnotation::from_json(&text).map_err(|source| AnnotationError::Json { path: path.to_path_buf(), source })
}

/// IRI-safe form of a label: lowercase, spaces to underscores, other unsafe
/// characters percent-encoded.
pub fn iri_segment(label: &str) -> String {
    let mut out = String::new();
    for c in label.trim().to_lowercase().chars() {
        match c {
            ' ' => out.push('_'),
            c if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') => out.push(c),
            c => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    out.push_str(&format!("%{b:02X}"));
                }
            }
        }
    }
    out
}

pub fn image_iri(image_id: &str) -> String {
    format!("{}{}", vocab::IMAGE_NS, iri_segment(image_id))
}

pub fn object_iri(image_id: &str, object_id: u32) -> String {
    format!("{}{}-obj-{object_id}", vocab::IMAGE_NS, iri_segment(image_id))
}

pub fn object_class_iri(label: &str) -> String {
    format!("{}{}", vocab::OBJECT_CLASS_NS, iri_segment(label))
}

pub fn attribute_iri(label: &str) -> String {
    format!("{}{}", vocab::ATTRIBUTE_NS, iri_segment(label))
}

pub fn scene_iri(label: &str) -> String {
    format!("{}{}", vocab::SCENE_NS, iri_segment(label))
}

/// Where one image's entities live in the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageHandle {
    pub image: Term,
    pub annotation: ImageAnnotation,
    /// Object entities in annotation order.
    pub objects: Vec<Term>,
    pub object_ids: BTreeMap<u32, Term>,
    /// Object-class, attribute and scene category nodes of this image.
    pub categories: BTreeSet<Term>,
}

impl ImageHandle {
    pub fn id(&self) -> &str {
        &self.annotation.image_id
    }

    pub fn object_term(&self, id: u32) -> Option<&Term> {
        self.object_ids.get(&id)
    }

    /// Object id for an object entity of this image.
    pub fn object_id(&self, term: &Term) -> Option<u32> {
        self.object_ids.iter().find(|(_, t)| *t == term).map(|(id, _)| *id)
    }
}

/// Writes an image's triples into the graph.
pub fn build_image_graph(graph: &mut Graph, ann: &ImageAnnotation) -> Result<ImageHandle, AnnotationError> {
    let iri = |s: &str| Term::iri(s);
    let image = iri(&image_iri(&ann.image_id));
    let (contain, name, size, color, supercat) =
        (iri(vocab::CONTAIN), iri(vocab::NAME), iri(vocab::SIZE), iri(vocab::COLOR), iri(vocab::SUPERCAT_NAME));
    let mut handle = ImageHandle {
        image: image.clone(),
        annotation: ann.clone(),
        objects: Vec::new(),
        object_ids: BTreeMap::new(),
        categories: BTreeSet::new(),
    };
    let mut categories = BTreeSet::new();
    let mut category = |graph: &mut Graph, node: &Term, label: &str, sup: &str| -> Result<(), StoreError> {
        graph.insert_terms(node.clone(), name.clone(), Term::literal(label.trim().to_lowercase()))?;
        graph.insert_terms(node.clone(), supercat.clone(), Term::literal(sup.trim().to_lowercase()))?;
        categories.insert(node.clone());
        Ok(())
    };
    for o in &ann.objects {
        let obj = iri(&object_iri(&ann.image_id, o.id));
        let cat = iri(&object_class_iri(&o.label));
        graph.insert_terms(image.clone(), contain.clone(), obj.clone())?;
        graph.insert_terms(obj.clone(), name.clone(), cat.clone())?;
        graph.insert_terms(obj.clone(), size.clone(), Term::literal(o.area().to_string()))?;
        if let Some(c) = o.color.as_deref().filter(|c| !c.trim().is_empty()) {
            graph.insert_terms(obj.clone(), color.clone(), Term::literal(c.trim().to_lowercase()))?;
        }
        category(graph, &cat, &o.label, &o.supercategory)?;
        handle.objects.push(obj.clone());
        handle.object_ids.insert(o.id, obj);
    }
    for a in &ann.attributes {
        let node = iri(&attribute_iri(&a.label));
        graph.insert_terms(image.clone(), iri(vocab::IMG_ATT), node.clone())?;
        category(graph, &node, &a.label, a.supercategory.as_str())?;
    }
    for s in &ann.scenes {
        let node = iri(&scene_iri(&s.label));
        graph.insert_terms(image.clone(), iri(vocab::IMG_SCN), node.clone())?;
        category(graph, &node, &s.label, "scene")?;
    }
    handle.categories = categories;
    Ok(handle)
}

/// Outcome of linking category nodes to the KB.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LinkReport {
    /// `same-concept` triples added.
    pub linked: usize,
    /// Category names with no KB entity.
    pub unlinked: Vec<String>,
}

/// Category name stored on a category node.
pub fn category_name(graph: &Graph, node: &Term) -> Option<String> {
    let (n, p) = (graph.term_id(node)?, graph.iri_id(vocab::NAME)?);
    graph.objects(n, p).map(|o| graph.term(o)).find(|t| !t.is_iri()).map(|t| t.lexical().to_string())
}

/// Adds `same-concept` links from each category node of the image to the KB
/// entity its name resolves to. Nodes that already carry a link are skipped.
pub fn link_concepts(graph: &mut Graph, handle: &ImageHandle) -> Result<LinkReport, AnnotationError> {
    let same = Term::iri(vocab::SAME_CONCEPT);
    let mut report = LinkReport::default();
    let mut links = Vec::new();
    for node in &handle.categories {
        let already =
            graph.term_id(node).zip(graph.term_id(&same)).is_some_and(|(n, p)| graph.objects(n, p).next().is_some());
        if already {
            continue;
        }
        let Some(name) = category_name(graph, node) else { continue };
        match resolve_concept_phrase(graph, &name) {
            Some(res) => links.push((node.clone(), res.entity)),
            None => {
                log::warn!("no KB entity for category {name:?}");
                report.unlinked.push(name);
            }
        }
    }
    for (node, entity) in links {
        if graph.insert_terms(node, same.clone(), entity)? {
            report.linked += 1;
        }
    }
    Ok(report)
}
