//! Data files bundled into the library.

/// Object classes and their super-categories.
pub const CLASSES: &str = include_str!("../data/classes.tsv");
/// Attribute labels and their super-categories.
pub const ATTRIBUTES: &str = include_str!("../data/attributes.tsv");
/// Question template patterns.
pub const TEMPLATES: &str = include_str!("../data/templates.txt");
/// Desk-scale knowledge base snapshot.
pub const MINI_KB: &str = include_str!("../data/fixtures/mini_kb.nt");
/// Gold-labelled questions over the fixture images, one JSON record per line.
pub const QUESTIONS: &str = include_str!("../data/fixtures/questions.jsonl");

/// Fixture image annotations, in file-name order.
pub const FIXTURE_IMAGE_FILES: &[(&str, &str)] = &[
    ("airport.json", include_str!("../data/fixtures/images/airport.json")),
    ("dining.json", include_str!("../data/fixtures/images/dining.json")),
    ("farm.json", include_str!("../data/fixtures/images/farm.json")),
    ("kitchen.json", include_str!("../data/fixtures/images/kitchen.json")),
    ("office.json", include_str!("../data/fixtures/images/office.json")),
    ("railway-station.json", include_str!("../data/fixtures/images/railway-station.json")),
    ("street.json", include_str!("../data/fixtures/images/street.json")),
    ("tennis.json", include_str!("../data/fixtures/images/tennis.json")),
    ("two-animals.json", include_str!("../data/fixtures/images/two-animals.json")),
];

/// Parsed fixture annotations.
pub fn fixture_images() -> Vec<crate::image::ImageAnnotation> {
    FIXTURE_IMAGE_FILES
        .iter()
        .map(|(name, text)| {
            crate::image::ImageAnnotation::from_json(text).unwrap_or_else(|e| panic!("bundled {name} is invalid: {e}"))
        })
        .collect()
}
