//! Swadesh-style wordlists: parsing, normalization and the meaning inventory.
//!
//! A wordlist file is UTF-8 TSV. The first header cell is `meaning`, every
//! further header cell names a language, and each following row holds the
//! forms for one meaning. Empty cells are missing words.
//!
//! All stored forms are reduced to the alphabet `a..z` plus space.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::BufRead;

use log::warn;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("duplicate language column `{0}`")]
    DuplicateLanguage(String),
    #[error("row {row}, column {column}: no transliteration rule for character {ch:?}")]
    Unmappable { row: usize, column: usize, ch: char },
    #[error("a corpus needs at least 2 languages, found {0}")]
    TooFewLanguages(usize),
    #[error("lexicon `{language}` is laid out for {found} meanings, inventory has {expected}")]
    InventoryMismatch { language: String, found: usize, expected: usize },
    #[error("transliteration map line {line}: {msg}")]
    Translit { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CorpusError {
    fn from(e: std::io::Error) -> Self {
        CorpusError::Io(e.to_string())
    }
}

/// Why a raw cell could not become a [`WordForm`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("character {ch:?} at offset {offset} has no transliteration rule")]
    Unmappable { ch: char, offset: usize },
    #[error("form is empty after normalization")]
    Empty,
}

/// One slot of the meaning inventory. Ids run `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meaning {
    pub id: usize,
    pub gloss: String,
}

/// A word over `a..z` and single inner spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordForm(String);

impl WordForm {
    /// Accepts `text` only if it already satisfies the alphabet rules.
    pub fn new(text: &str) -> Option<Self> {
        let bytes = text.as_bytes();
        if bytes.is_empty() || bytes[0] == b' ' || bytes[bytes.len() - 1] == b' ' {
            return None;
        }
        let mut prev_space = false;
        for &b in bytes {
            match b {
                b'a'..=b'z' => prev_space = false,
                b' ' if !prev_space => prev_space = true,
                _ => return None,
            }
        }
        Some(WordForm(text.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Length in characters, spaces included.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for WordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered `FROM -> TO` rewrite rules applied after ASCII lowercasing.
///
/// At each position the longest matching `FROM` wins. An empty `TO` deletes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransliterationMap {
    rules: Vec<(String, String)>,
}

impl TransliterationMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rule(mut self, from: &str, to: &str) -> Self {
        self.insert(from, to);
        self
    }

    /// Adds a rule, replacing any earlier rule with the same source.
    pub fn insert(&mut self, from: &str, to: &str) {
        let from = from.to_ascii_lowercase();
        if let Some(rule) = self.rules.iter_mut().find(|(f, _)| *f == from) {
            rule.1 = to.to_owned();
        } else {
            self.rules.push((from, to.to_owned()));
        }
        // longest source first, so matching is greedy
        self.rules
            .sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Parses `FROM<TAB>TO` lines. `#` starts a comment line; blank lines are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut map = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (from, to) = line.split_once('\t').ok_or_else(|| CorpusError::Translit {
                line: lineno,
                msg: "expected FROM<TAB>TO".into(),
            })?;
            if from.is_empty() {
                return Err(CorpusError::Translit {
                    line: lineno,
                    msg: "empty source string".into(),
                });
            }
            if let Some(bad) = to.chars().find(|c| !matches!(c, 'a'..='z' | ' ')) {
                return Err(CorpusError::Translit {
                    line: lineno,
                    msg: format!("target contains {bad:?}, outside a..z and space"),
                });
            }
            map.insert(from, to);
        }
        Ok(map)
    }

    fn match_at<'a>(&'a self, rest: &str) -> Option<(&'a str, &'a str)> {
        self.rules
            .iter()
            .find(|(from, _)| rest.starts_with(from.as_str()))
            .map(|(f, t)| (f.as_str(), t.as_str()))
    }
}

/// Lowercases (ASCII only), transliterates, collapses whitespace and trims.
pub fn normalize_form(raw: &str, translit: &TransliterationMap) -> Result<WordForm, NormalizeError> {
    let lowered = raw.to_ascii_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut pos = 0;
    while pos < lowered.len() {
        let rest = &lowered[pos..];
        if let Some((from, to)) = translit.match_at(rest) {
            out.push_str(to);
            pos += from.len();
            continue;
        }
        let ch = rest.chars().next().expect("non-empty remainder");
        if ch.is_ascii_lowercase() {
            out.push(ch);
        } else if ch.is_whitespace() {
            out.push(' ');
        } else {
            return Err(NormalizeError::Unmappable {
                ch,
                offset: raw[..pos].chars().count(),
            });
        }
        pos += ch.len_utf8();
    }
    let collapsed = out.split(' ').filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ");
    WordForm::new(&collapsed).ok_or(NormalizeError::Empty)
}

/// How a cell holding comma-separated variants is stored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VariantPolicy {
    /// Keep the first usable variant only.
    #[default]
    First,
    /// Keep every variant; word distance becomes the minimum over variant pairs.
    All,
}

/// One present entry of a lexicon. Holds a single form unless parsed with
/// [`VariantPolicy::All`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    forms: Vec<WordForm>,
}

impl Entry {
    pub fn single(form: WordForm) -> Self {
        Entry { forms: vec![form] }
    }

    /// Returns `None` for an empty list.
    pub fn from_variants(forms: Vec<WordForm>) -> Option<Self> {
        (!forms.is_empty()).then_some(Entry { forms })
    }

    pub fn primary(&self) -> &WordForm {
        &self.forms[0]
    }

    pub fn forms(&self) -> &[WordForm] {
        &self.forms
    }
}

/// The wordlist of one language, indexed by meaning id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    language: String,
    entries: Vec<Option<Entry>>,
}

impl Lexicon {
    /// An empty lexicon over an inventory of `size` meanings.
    pub fn new(language: impl Into<String>, size: usize) -> Self {
        Lexicon {
            language: language.into(),
            entries: vec![None; size],
        }
    }

    /// Builds a lexicon from `(meaning id, form)` pairs. Panics on an id outside `1..=size`.
    pub fn from_forms<'a>(
        language: impl Into<String>,
        size: usize,
        forms: impl IntoIterator<Item = (usize, &'a str)>,
    ) -> Self {
        let mut lex = Lexicon::new(language, size);
        for (id, text) in forms {
            let form = WordForm::new(text).unwrap_or_else(|| panic!("invalid word form {text:?}"));
            lex.set(id, Some(Entry::single(form)));
        }
        lex
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    /// Inventory size this lexicon is laid out for.
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn set(&mut self, id: usize, entry: Option<Entry>) {
        assert!(id >= 1 && id <= self.entries.len(), "meaning id {id} out of range");
        self.entries[id - 1] = entry;
    }

    pub fn get(&self, id: usize) -> Option<&Entry> {
        self.entries.get(id.checked_sub(1)?)?.as_ref()
    }

    /// Present entries as `(meaning id, entry)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &Entry)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (i + 1, e)))
    }

    pub fn present_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Drops the given meanings; used for word-level resampling.
    pub fn without_meanings(&self, ids: &BTreeSet<usize>) -> Lexicon {
        let mut lex = self.clone();
        for &id in ids {
            if id >= 1 && id <= lex.entries.len() {
                lex.entries[id - 1] = None;
            }
        }
        lex
    }
}

/// Meaning ids where both lexicons hold a form.
pub fn shared_meanings(a: &Lexicon, b: &Lexicon) -> BTreeSet<usize> {
    a.entries
        .iter()
        .zip(&b.entries)
        .enumerate()
        .filter(|(_, (x, y))| x.is_some() && y.is_some())
        .map(|(i, _)| i + 1)
        .collect()
}

/// Options for [`parse_corpus`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub translit: TransliterationMap,
    pub variants: VariantPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    meanings: Vec<Meaning>,
    lexicons: Vec<Lexicon>,
}

impl Corpus {
    pub fn new(meanings: Vec<Meaning>, lexicons: Vec<Lexicon>) -> Result<Self, CorpusError> {
        if lexicons.len() < 2 {
            return Err(CorpusError::TooFewLanguages(lexicons.len()));
        }
        for (i, m) in meanings.iter().enumerate() {
            if m.id != i + 1 {
                return Err(CorpusError::Format {
                    line: 0,
                    msg: format!("meaning ids must be contiguous from 1, found {} at position {}", m.id, i + 1),
                });
            }
        }
        let mut seen = HashSet::new();
        for lex in &lexicons {
            if !seen.insert(lex.language.as_str()) {
                return Err(CorpusError::DuplicateLanguage(lex.language.clone()));
            }
            if lex.size() != meanings.len() {
                return Err(CorpusError::InventoryMismatch {
                    language: lex.language.clone(),
                    found: lex.size(),
                    expected: meanings.len(),
                });
            }
        }
        Ok(Corpus { meanings, lexicons })
    }

    /// Convenience constructor with glosses `m1..mM`.
    pub fn from_lexicons(lexicons: Vec<Lexicon>) -> Result<Self, CorpusError> {
        let size = lexicons.first().map_or(0, Lexicon::size);
        let meanings = (1..=size)
            .map(|id| Meaning {
                id,
                gloss: format!("m{id}"),
            })
            .collect();
        Corpus::new(meanings, lexicons)
    }

    pub fn meanings(&self) -> &[Meaning] {
        &self.meanings
    }

    pub fn lexicons(&self) -> &[Lexicon] {
        &self.lexicons
    }

    pub fn languages(&self) -> Vec<String> {
        self.lexicons.iter().map(|l| l.language.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.lexicons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicons.is_empty()
    }

    /// A corpus keeping only the lexicons at `keep` (in the given order).
    pub fn select(&self, keep: &[usize]) -> Result<Corpus, CorpusError> {
        let lexicons = keep.iter().map(|&i| self.lexicons[i].clone()).collect();
        Corpus::new(self.meanings.clone(), lexicons)
    }

    /// A corpus with the given meaning ids blanked in every lexicon.
    pub fn without_meanings(&self, ids: &BTreeSet<usize>) -> Corpus {
        Corpus {
            meanings: self.meanings.clone(),
            lexicons: self.lexicons.iter().map(|l| l.without_meanings(ids)).collect(),
        }
    }

    /// Writes the wordlist TSV layout. Variants are joined with `, `.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("meaning");
        for lex in &self.lexicons {
            out.push('\t');
            out.push_str(&lex.language);
        }
        out.push('\n');
        for m in &self.meanings {
            out.push_str(&m.gloss);
            for lex in &self.lexicons {
                out.push('\t');
                if let Some(entry) = lex.get(m.id) {
                    let forms: Vec<&str> = entry.forms().iter().map(WordForm::as_str).collect();
                    out.push_str(&forms.join(", "));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a wordlist TSV into a [`Corpus`].
///
/// Rows shorter than the header are padded with missing cells. Cells that
/// normalize to nothing become missing entries and are logged.
pub fn parse_corpus<R: BufRead>(source: R, opts: &ParseOptions) -> Result<Corpus, CorpusError> {
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => {
                return Err(CorpusError::Format {
                    line: 1,
                    msg: "missing header row".into(),
                })
            }
        }
    };
    let header = header.strip_suffix('\r').unwrap_or(&header);
    let header = header.strip_prefix('\u{feff}').unwrap_or(header);
    let mut cols = header.split('\t');
    let first = cols.next().unwrap_or_default().trim();
    if !first.eq_ignore_ascii_case("meaning") {
        return Err(CorpusError::Format {
            line: 1,
            msg: format!("first header cell must be `meaning`, found `{first}`"),
        });
    }
    let languages: Vec<String> = cols.map(|c| c.trim().to_owned()).collect();
    let mut seen = HashSet::new();
    for (i, lang) in languages.iter().enumerate() {
        if lang.is_empty() {
            return Err(CorpusError::Format {
                line: 1,
                msg: format!("empty language name in column {}", i + 2),
            });
        }
        if !seen.insert(lang.as_str()) {
            return Err(CorpusError::DuplicateLanguage(lang.clone()));
        }
    }
    if languages.len() < 2 {
        return Err(CorpusError::TooFewLanguages(languages.len()));
    }

    let mut meanings = Vec::new();
    let mut cells: Vec<Vec<Option<Entry>>> = vec![Vec::new(); languages.len()];
    for (idx, line) in lines {
        let line = line?;
        let row = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let gloss = fields.next().unwrap_or_default().trim().to_owned();
        if gloss.is_empty() {
            return Err(CorpusError::Format {
                line: row,
                msg: "empty meaning label".into(),
            });
        }
        let fields: Vec<&str> = fields.collect();
        if fields.len() > languages.len() {
            return Err(CorpusError::Format {
                line: row,
                msg: format!("{} cells for {} languages", fields.len(), languages.len()),
            });
        }
        for (col, lang_cells) in cells.iter_mut().enumerate() {
            let raw = fields.get(col).copied().unwrap_or("");
            let entry = parse_cell(raw, opts).map_err(|ch| CorpusError::Unmappable {
                row,
                column: col + 2,
                ch,
            })?;
            if entry.is_none() && !raw.trim().is_empty() {
                warn!(
                    "row {row}, column {}: `{raw}` is empty after normalization, treated as missing",
                    col + 2
                );
            }
            lang_cells.push(entry);
        }
        meanings.push(Meaning {
            id: meanings.len() + 1,
            gloss,
        });
    }

    let lexicons = languages
        .into_iter()
        .zip(cells)
        .map(|(language, entries)| Lexicon { language, entries })
        .collect();
    Corpus::new(meanings, lexicons)
}

fn parse_cell(raw: &str, opts: &ParseOptions) -> Result<Option<Entry>, char> {
    let mut forms = Vec::new();
    for variant in raw.split(',') {
        match normalize_form(variant, &opts.translit) {
            Ok(form) => {
                forms.push(form);
                if opts.variants == VariantPolicy::First {
                    break;
                }
            }
            Err(NormalizeError::Empty) => {}
            Err(NormalizeError::Unmappable { ch, .. }) => return Err(ch),
        }
    }
    Ok(Entry::from_variants(forms))
}
