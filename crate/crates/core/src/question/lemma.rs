//! Rule-based tokenizer and lemmatizer.

use serde::Serialize;

/// One token: original surface text plus its lowercased lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.surface.chars().all(|c| c.is_ascii_punctuation())
    }
}

const LEADING_PUNCT: &[char] = &['"', '\'', '(', '[', '{', '¿', '¡'];
const TRAILING_PUNCT: &[char] = &['?', '!', ',', ';', ':', '"', '\'', ')', ']', '}'];

/// Splits on whitespace and peels punctuation into separate tokens. A `.` is
/// split off only at the very end of the text, so abbreviations such as
/// `Relig.` survive inside a question.
pub fn tokenize(text: &str) -> Vec<String> {
    let chunks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    for (ci, chunk) in chunks.iter().enumerate() {
        let last_chunk = ci + 1 == chunks.len();
        let mut word = *chunk;
        let mut lead = Vec::new();
        while let Some(c) = word.chars().next().filter(|c| LEADING_PUNCT.contains(c)) {
            lead.push(c.to_string());
            word = &word[c.len_utf8()..];
        }
        let mut trail = Vec::new();
        // Only the '.' that ends the whole text.
        while let Some(c) =
            word.chars().last().filter(|c| TRAILING_PUNCT.contains(c) || (*c == '.' && last_chunk && trail.is_empty()))
        {
            trail.push(c.to_string());
            word = &word[..word.len() - c.len_utf8()];
        }
        out.extend(lead);
        if !word.is_empty() {
            out.push(word.to_string());
        }
        out.extend(trail.into_iter().rev());
    }
    out
}

/// Words whose trailing `s` is not a plural marker.
const KEEP: &[&str] = &[
    "is",
    "was",
    "has",
    "does",
    "this",
    "his",
    "its",
    "yes",
    "as",
    "us",
    "gas",
    "bus",
    "always",
    "perhaps",
    "species",
    "series",
    "news",
    "lens",
    "tennis",
    "chess",
    "physics",
    "mathematics",
    "whereas",
    "thus",
    "plus",
    "status",
    "canvas",
    "atlas",
    "iris",
    "corps",
    "less",
    "across",
    "famous",
    "various",
    "analysis",
    "basis",
    "octopus",
    "cactus",
    "hippopotamus",
    "walrus",
    "asparagus",
    "citrus",
    "virus",
    "platypus",
    "bonus",
    "census",
    "christmas",
    "its",
    "hers",
    "ours",
    "yours",
    "theirs",
    "cross",
    "grass",
    "glass",
    "dress",
    "mass",
    "class",
    "boss",
    "moss",
    "chaos",
    "pants",
    "shorts",
    "jeans",
    "scissors",
    "trousers",
    "lettuce",
    "swiss",
    "texas",
    "paris",
    "athletics",
    "gymnastics",
    "economics",
    "politics",
    "electronics",
    "mumps",
    "measles",
    "diabetes",
    "rabies",
    "herpes",
    "overseas",
    "whereabouts",
];

const IRREGULAR: &[(&str, &str)] = &[
    ("people", "person"),
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("teeth", "tooth"),
    ("feet", "foot"),
    ("oxen", "ox"),
    ("knives", "knife"),
    ("wives", "wife"),
    ("lives", "life"),
    ("leaves", "leaf"),
    ("wolves", "wolf"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("loaves", "loaf"),
    ("calves", "calf"),
    ("thieves", "thief"),
    ("scarves", "scarf"),
    ("elves", "elf"),
    ("buses", "bus"),
    ("axes", "axe"),
    ("cacti", "cactus"),
    ("fungi", "fungus"),
    ("octopi", "octopus"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("dice", "die"),
    ("cookies", "cookie"),
    ("movies", "movie"),
    ("pies", "pie"),
    ("ties", "tie"),
    ("shoes", "shoe"),
    ("toes", "toe"),
    ("canoes", "canoe"),
    ("horses", "horse"),
    ("houses", "house"),
    ("vases", "vase"),
    ("bases", "base"),
    ("cases", "case"),
    ("races", "race"),
    ("places", "place"),
    ("pieces", "piece"),
    ("faces", "face"),
    ("spaces", "space"),
    ("prices", "price"),
    ("slices", "slice"),
    ("sauces", "sauce"),
    ("juices", "juice"),
    ("noses", "nose"),
    ("roses", "rose"),
    ("hoses", "hose"),
    ("purses", "purse"),
    ("nurses", "nurse"),
    ("horseshoes", "horseshoe"),
    // verb forms the templates rely on
    ("doing", "do"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("invented", "invent"),
    ("invents", "invent"),
    ("inventing", "invent"),
    ("introduced", "introduce"),
    ("introduces", "introduce"),
    ("introducing", "introduce"),
    ("related", "relate"),
    ("relates", "relate"),
    ("describes", "describe"),
    ("described", "describe"),
    ("belongs", "belong"),
    ("contains", "contain"),
    ("played", "play"),
    ("plays", "play"),
    ("made", "make"),
    ("used", "use"),
    ("uses", "use"),
    ("needed", "need"),
    ("needs", "need"),
    ("found", "find"),
    ("came", "come"),
    ("comes", "come"),
    ("colour", "color"),
    ("colours", "color"),
    ("biggest", "largest"),
];

/// Lemma of one lowercased word.
pub fn lemmatize(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some((_, l)) = IRREGULAR.iter().find(|(k, _)| *k == w) {
        return l.to_string();
    }
    if KEEP.contains(&w.as_str()) || !w.chars().all(|c| c.is_alphabetic() || c == '-') {
        return w;
    }
    // Hyphenated compounds inflect on the last part.
    if let Some((head, tail)) = w.rsplit_once('-') {
        if !tail.is_empty() && !head.is_empty() {
            return format!("{head}-{}", lemmatize(tail));
        }
    }
    let n = w.len();
    if n <= 3 {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if n > 4 {
            return format!("{stem}y");
        }
    }
    if w.ends_with("ves") {
        return w[..n - 1].to_string();
    }
    for suffix in ["sses", "shes", "ches", "xes", "oes"] {
        if w.ends_with(suffix) {
            return w[..n - 2].to_string();
        }
    }
    if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return w[..n - 1].to_string();
    }
    w
}

pub fn tokenize_and_lemmatize(text: &str) -> Result<Vec<Token>, super::ParseError> {
    if text.trim().is_empty() {
        return Err(super::ParseError::Empty);
    }
    Ok(tokenize(text)
        .into_iter()
        .map(|surface| {
            let lemma =
                if surface.chars().all(|c| c.is_ascii_punctuation()) { surface.clone() } else { lemmatize(&surface) };
            Token { surface, lemma }
        })
        .collect())
}

/// Lemmas of a phrase joined by single spaces, punctuation dropped.
pub fn lemma_phrase(text: &str) -> String {
    tokenize(text)
        .iter()
        .filter(|t| !t.chars().all(|c| c.is_ascii_punctuation()))
        .map(|t| lemmatize(t))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lemmas(text: &str) -> Vec<String> {
        tokenize_and_lemmatize(text).unwrap().into_iter().map(|t| t.lemma).collect()
    }

    #[test]
    fn plural_stripping() {
        assert_eq!(lemmas("Is there any dogs?"), ["is", "there", "any", "dog", "?"]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(tokenize_and_lemmatize("").is_err());
        assert!(tokenize_and_lemmatize("   ").is_err());
    }

    #[test]
    fn abbreviations_keep_their_period() {
        assert_eq!(tokenize("Is the image related to Relig.?"), ["Is", "the", "image", "related", "to", "Relig.", "?"]);
        assert_eq!(
            tokenize("List the common properties of the right animal and zebra."),
            ["List", "the", "common", "properties", "of", "the", "right", "animal", "and", "zebra", "."]
        );
        assert_eq!(
            tokenize("Which came first, the car or the bus?"),
            ["Which", "came", "first", ",", "the", "car", "or", "the", "bus", "?"]
        );
    }

    #[test]
    fn noun_and_verb_rules() {
        for (w, l) in [
            ("giraffes", "giraffe"),
            ("boxes", "box"),
            ("dishes", "dish"),
            ("glasses", "glass"),
            ("berries", "berry"),
            ("people", "person"),
            ("knives", "knife"),
            ("gloves", "glove"),
            ("tomatoes", "tomato"),
            ("horses", "horse"),
            ("tennis", "tennis"),
            ("doing", "do"),
            ("invented", "invent"),
            ("introduced", "introduce"),
            ("is", "is"),
            ("are", "are"),
            ("animal-powered", "animal-powered"),
            ("vehicles", "vehicle"),
            ("bus", "bus"),
            ("species", "species"),
            ("ingredients", "ingredient"),
            ("relatives", "relative"),
        ] {
            assert_eq!(lemmatize(w), l, "{w}");
        }
    }

    #[test]
    fn lemma_phrases() {
        assert_eq!(lemma_phrase("Tennis rackets"), "tennis racket");
        assert_eq!(lemma_phrase("hot dog"), "hot dog");
    }
}
