//! Word and language distances.
//!
//! The word distance is the Levenshtein distance divided by the length of the
//! longer word. The lexical distance between two languages is the mean word
//! distance over the meanings both lexicons attest.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{shared_meanings, Corpus, Entry, Lexicon, WordForm};
use crate::matrix::{write_tsv, Square};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("languages `{0}` and `{1}` share no meanings; their distance is undefined")]
    NoOverlap(String, String),
    #[error("cannot impute: no defined off-diagonal distances")]
    NothingToImpute,
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

/// Unit-cost edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// Normalized distance between two words, kept as the exact ratio
/// `edits / longer_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordDistance {
    pub edits: usize,
    pub longer_len: usize,
}

impl WordDistance {
    pub fn value(self) -> f64 {
        self.edits as f64 / self.longer_len as f64
    }
}

pub fn word_distance(a: &WordForm, b: &WordForm) -> WordDistance {
    WordDistance {
        edits: levenshtein(a.as_str(), b.as_str()),
        longer_len: a.len().max(b.len()),
    }
}

/// Smallest word distance over all variant pairs. With single-form entries
/// this is just [`word_distance`] on the primary forms.
pub fn entry_distance(a: &Entry, b: &Entry) -> WordDistance {
    let mut best = word_distance(a.primary(), b.primary());
    for fa in a.forms() {
        for fb in b.forms() {
            let d = word_distance(fa, fb);
            if d.value() < best.value() {
                best = d;
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalDistance {
    pub value: f64,
    /// Number of meanings attested in both lexicons.
    pub overlap: usize,
}

/// Mean word distance over the shared meanings of `a` and `b`.
///
/// Terms are summed in ascending order so the result does not depend on
/// how the meaning inventory is ordered.
pub fn lexical_distance(a: &Lexicon, b: &Lexicon) -> Result<LexicalDistance, MetricError> {
    let shared = shared_meanings(a, b);
    if shared.is_empty() {
        return Err(MetricError::NoOverlap(a.language().into(), b.language().into()));
    }
    let mut terms: Vec<f64> = shared
        .iter()
        .map(|&id| {
            let (x, y) = (a.get(id).expect("shared"), b.get(id).expect("shared"));
            entry_distance(x, y).value()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    let sum: f64 = terms.iter().sum();
    Ok(LexicalDistance {
        value: sum / terms.len() as f64,
        overlap: terms.len(),
    })
}

/// Symmetric language-by-language lexical distances.
///
/// Undefined entries (no shared meanings) hold `NaN` until imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    languages: Vec<String>,
    values: Square<f64>,
    overlaps: Option<Square<usize>>,
    imputed: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Serial,
    #[default]
    Parallel,
}

/// All `N(N-1)/2` pairwise lexical distances of a corpus.
pub fn distance_matrix(corpus: &Corpus) -> DistanceMatrix {
    distance_matrix_with(corpus, Schedule::Parallel)
}

pub fn distance_matrix_with(corpus: &Corpus, schedule: Schedule) -> DistanceMatrix {
    let lex = corpus.lexicons();
    let n = lex.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let compute = |&(i, j): &(usize, usize)| (i, j, lexical_distance(&lex[i], &lex[j]));
    let results: Vec<_> = match schedule {
        Schedule::Serial => pairs.iter().map(compute).collect(),
        Schedule::Parallel => pairs.par_iter().map(compute).collect(),
    };

    let mut values = Square::filled(n, 0.0);
    let mut overlaps = Square::filled(n, 0usize);
    for i in 0..n {
        overlaps.set(i, i, lex[i].present_count());
    }
    let mut undefined = 0;
    for (i, j, res) in results {
        match res {
            Ok(d) => {
                values.set_sym(i, j, d.value);
                overlaps.set_sym(i, j, d.overlap);
            }
            Err(_) => {
                values.set_sym(i, j, f64::NAN);
                undefined += 1;
            }
        }
    }
    if undefined > 0 {
        warn!("{undefined} language pair(s) share no meanings; their distances are undefined");
    }
    DistanceMatrix {
        languages: corpus.languages(),
        values,
        overlaps: Some(overlaps),
        imputed: Vec::new(),
    }
}

impl DistanceMatrix {
    /// A matrix not derived from a corpus (no overlap counts). `NaN` marks
    /// an undefined entry.
    pub fn from_values(languages: Vec<String>, values: Square<f64>) -> Result<Self, MetricError> {
        let m = DistanceMatrix {
            languages,
            values,
            overlaps: None,
            imputed: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), MetricError> {
        let n = self.languages.len();
        if self.values.size() != n {
            return Err(MetricError::Malformed(format!(
                "{} labels for a {}x{} grid",
                n,
                self.values.size(),
                self.values.size()
            )));
        }
        if let Some(o) = &self.overlaps {
            if o.size() != n {
                return Err(MetricError::Malformed("overlap grid size mismatch".into()));
            }
        }
        for i in 0..n {
            if self.values.get(i, i) != 0.0 {
                return Err(MetricError::Malformed(format!("non-zero diagonal at `{}`", self.languages[i])));
            }
            for j in i + 1..n {
                let (a, b) = (self.values.get(i, j), self.values.get(j, i));
                if !(a == b || (a.is_nan() && b.is_nan())) {
                    return Err(MetricError::Malformed(format!(
                        "asymmetric entry `{}`/`{}`",
                        self.languages[i], self.languages[j]
                    )));
                }
                if !a.is_nan() && !(0.0..=1.0).contains(&a) {
                    return Err(MetricError::Malformed(format!(
                        "distance {a} for `{}`/`{}` outside [0, 1]",
                        self.languages[i], self.languages[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    /// `None` when the pair is undefined.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.values.get(i, j);
        (!v.is_nan()).then_some(v)
    }

    pub fn overlap(&self, i: usize, j: usize) -> Option<usize> {
        self.overlaps.as_ref().map(|o| o.get(i, j))
    }

    pub fn values(&self) -> &Square<f64> {
        &self.values
    }

    pub fn imputed(&self) -> &[(usize, usize)] {
        &self.imputed
    }

    /// Number of upper-triangle entries holding a defined value.
    pub fn defined_pairs(&self) -> usize {
        self.values.pairs().filter(|&(i, j)| self.get(i, j).is_some()).count()
    }

    pub fn undefined_pairs(&self) -> Vec<(usize, usize)> {
        self.values.pairs().filter(|&(i, j)| self.get(i, j).is_none()).collect()
    }

    /// Defined pairs supported by fewer than `min_overlap` shared meanings.
    pub fn weak_pairs(&self, min_overlap: usize) -> Vec<(usize, usize, usize)> {
        let Some(o) = &self.overlaps else {
            return Vec::new();
        };
        self.values
            .pairs()
            .filter(|&(i, j)| self.get(i, j).is_some())
            .map(|(i, j)| (i, j, o.get(i, j)))
            .filter(|&(_, _, k)| k < min_overlap)
            .collect()
    }

    /// Replaces every undefined entry with the mean of the defined
    /// off-diagonal entries. Returns the imputed pairs.
    pub fn impute_missing(&mut self) -> Result<Vec<(usize, usize)>, MetricError> {
        let missing = self.undefined_pairs();
        if missing.is_empty() {
            return Ok(missing);
        }
        let mut defined: Vec<f64> = self.values.pairs().filter_map(|(i, j)| self.get(i, j)).collect();
        if defined.is_empty() {
            return Err(MetricError::NothingToImpute);
        }
        defined.sort_by(f64::total_cmp);
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        for &(i, j) in &missing {
            self.values.set_sym(i, j, mean);
            warn!(
                "imputed distance {mean:.6} for `{}`/`{}` (no shared meanings)",
                self.languages[i], self.languages[j]
            );
        }
        self.imputed.extend_from_slice(&missing);
        Ok(missing)
    }

    /// Keeps the rows/columns at `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> DistanceMatrix {
        let pick = |i: usize, j: usize| self.values.get(keep[i], keep[j]);
        let k = keep.len();
        let mut values = Square::filled(k, 0.0);
        for i in 0..k {
            for j in 0..k {
                values.set(i, j, pick(i, j));
            }
        }
        let overlaps = self.overlaps.as_ref().map(|o| {
            let mut s = Square::filled(k, 0);
            for i in 0..k {
                for j in 0..k {
                    s.set(i, j, o.get(keep[i], keep[j]));
                }
            }
            s
        });
        let imputed = self
            .imputed
            .iter()
            .filter_map(|&(a, b)| {
                let ia = keep.iter().position(|&x| x == a)?;
                let ib = keep.iter().position(|&x| x == b)?;
                Some((ia.min(ib), ia.max(ib)))
            })
            .collect();
        DistanceMatrix {
            languages: keep.iter().map(|&i| self.languages[i].clone()).collect(),
            values,
            overlaps,
            imputed,
        }
    }

    /// Distances with 6 decimals; undefined entries print as `NA`.
    pub fn to_tsv(&self) -> String {
        write_tsv(&self.languages, |i, j| match self.get(i, j) {
            Some(v) => format!("{v:.6}"),
            None => "NA".into(),
        })
    }

    /// Overlap counts, or `None` for a matrix not built from a corpus.
    pub fn overlaps_tsv(&self) -> Option<String> {
        let o = self.overlaps.as_ref()?;
        Some(write_tsv(&self.languages, |i, j| o.get(i, j).to_string()))
    }

    pub fn to_bundle(&self) -> DistanceBundle {
        let n = self.len();
        DistanceBundle {
            languages: self.languages.clone(),
            values: (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect(),
            overlaps: self.overlaps.as_ref().map(Square::rows),
            imputed: self
                .imputed
                .iter()
                .map(|&(i, j)| [self.languages[i].clone(), self.languages[j].clone()])
                .collect(),
        }
    }

    pub fn from_bundle(bundle: DistanceBundle) -> Result<Self, MetricError> {
        let values = bundle
            .values
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        let values = Square::from_rows(values).ok_or_else(|| MetricError::Malformed("grid is not square".into()))?;
        let overlaps = match bundle.overlaps {
            Some(rows) => {
                Some(Square::from_rows(rows).ok_or_else(|| MetricError::Malformed("overlap grid is not square".into()))?)
            }
            None => None,
        };
        let index = |name: &str| {
            bundle
                .languages
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| MetricError::Malformed(format!("imputed pair names unknown language `{name}`")))
        };
        let mut imputed = Vec::new();
        for [a, b] in &bundle.imputed {
            let (i, j) = (index(a)?, index(b)?);
            imputed.push((i.min(j), i.max(j)));
        }
        let m = DistanceMatrix {
            languages: bundle.languages,
            values,
            overlaps,
            imputed,
        };
        m.validate()?;
        Ok(m)
    }
}

/// JSON form of a [`DistanceMatrix`]: `{languages, values, overlaps, imputed}`.
/// Undefined values serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBundle {
    pub languages: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    #[serde(default)]
    pub overlaps: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imputed: Vec<[String; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Lexicon};
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    /// Breadth-first search over edit scripts. Independent of the DP table:
    /// explores every string reachable by single insert/delete/substitute
    /// steps over the union alphabet until `b` is found.
    fn edit_bfs(a: &str, b: &str) -> usize {
        let alphabet: Vec<char> = {
            let mut s: Vec<char> = a.chars().chain(b.chars()).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let max_len = a.chars().count().max(b.chars().count());
        let mut seen = HashSet::from([a.to_owned()]);
        let mut queue = VecDeque::from([(a.to_owned(), 0)]);
        while let Some((s, d)) = queue.pop_front() {
            if s == b {
                return d;
            }
            let chars: Vec<char> = s.chars().collect();
            let mut next = Vec::new();
            for i in 0..chars.len() {
                let mut del = chars.clone();
                del.remove(i);
                next.push(del);
                for &c in &alphabet {
                    if c != chars[i] {
                        let mut sub = chars.clone();
                        sub[i] = c;
                        next.push(sub);
                    }
                }
            }
            if chars.len() < max_len {
                for i in 0..=chars.len() {
                    for &c in &alphabet {
                        let mut ins = chars.clone();
                        ins.insert(i, c);
                        next.push(ins);
                    }
                }
            }
            for n in next {
                let n: String = n.into_iter().collect();
                if seen.insert(n.clone()) {
                    queue.push_back((n, d + 1));
                }
            }
        }
        unreachable!("b is always reachable")
    }

    fn wf(s: &str) -> WordForm {
        WordForm::new(s).unwrap()
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(edit_bfs("kitten", "sitting"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(edit_bfs("ab", "b"), 1);
        assert_eq!(levenshtein("ab", "b"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
    }

    #[test]
    fn levenshtein_metric_axioms_exhaustive() {
        let mut words = vec![String::new()];
        for len in 1..=4 {
            for bits in 0..(1u32 << len) {
                words.push((0..len).map(|k| if bits >> k & 1 == 1 { 'b' } else { 'a' }).collect());
            }
        }
        let n = words.len();
        let mut d = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = levenshtein(&words[i], &words[j]);
                assert_eq!(d[i][j] == 0, i == j);
                assert!(d[i][j] <= words[i].len().max(words[j].len()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i][j], d[j][i]);
                for k in 0..n {
                    assert!(d[i][k] <= d[i][j] + d[j][k]);
                }
            }
        }
    }

    #[test]
    fn word_distance_examples() {
        assert_eq!(word_distance(&wf("ab"), &wf("cb")).value(), 0.5);
        assert_eq!(word_distance(&wf("abcdefgh"), &wf("abcdefgx")).value(), 0.125);
        assert_eq!(word_distance(&wf("water"), &wf("water")).value(), 0.0);
        // space is an ordinary character
        assert_eq!(word_distance(&wf("a b"), &wf("ab")), WordDistance { edits: 1, longer_len: 3 });
    }

    #[test]
    fn variant_minimum() {
        let a = Entry::from_variants(vec![wf("grande"), wf("grosso")]).unwrap();
        let b = Entry::single(wf("gros"));
        assert_eq!(entry_distance(&a, &b), word_distance(&wf("grosso"), &wf("gros")));
    }

    #[test]
    fn lexical_distance_examples() {
        let a = Lexicon::from_forms("a", 3, [(1, "acqua"), (2, "cane"), (3, "sole")]);
        let same = lexical_distance(&a, &a.clone()).unwrap();
        assert_eq!(same, LexicalDistance { value: 0.0, overlap: 3 });

        let x = Lexicon::from_forms("x", 2, [(1, "ab"), (2, "abcdefgh")]);
        let y = Lexicon::from_forms("y", 2, [(1, "cb"), (2, "abcdefgx")]);
        assert_eq!(lexical_distance(&x, &y).unwrap(), LexicalDistance { value: 0.3125, overlap: 2 });
        assert_eq!(lexical_distance(&x, &y), lexical_distance(&y, &x));

        let e = Lexicon::new("e", 2);
        assert_eq!(lexical_distance(&x, &e), Err(MetricError::NoOverlap("x".into(), "e".into())));
    }

    #[test]
    fn matrix_of_identical_lexicons_is_zero() {
        let a = Lexicon::from_forms("a", 2, [(1, "ab"), (2, "cd")]);
        let b = Lexicon::from_forms("b", 2, [(1, "ab"), (2, "cd")]);
        let m = distance_matrix(&Corpus::from_lexicons(vec![a, b]).unwrap());
        assert_eq!(m.get(0, 1), Some(0.0));
        assert_eq!(m.overlap(0, 1), Some(2));
    }

    #[test]
    fn three_language_fixture() {
        // hand computed:
        // a-b: ab/ab=0, cd/ce=1/2 -> 0.25
        // a-c: ab/xb=1/2, cd/cd=0 -> 0.25 ; only meaning 1 and 2 shared
        // b-c: ab/xb=1/2, ce/cd=1/2 -> 0.5
        let a = Lexicon::from_forms("a", 2, [(1, "ab"), (2, "cd")]);
        let b = Lexicon::from_forms("b", 2, [(1, "ab"), (2, "ce")]);
        let c = Lexicon::from_forms("c", 2, [(1, "xb"), (2, "cd")]);
        let m = distance_matrix(&Corpus::from_lexicons(vec![a, b, c]).unwrap());
        assert_eq!(m.get(0, 1), Some(0.25));
        assert_eq!(m.get(0, 2), Some(0.25));
        assert_eq!(m.get(1, 2), Some(0.5));
        assert_eq!(m.get(2, 1), Some(0.5));
        assert_eq!(m.get(1, 1), Some(0.0));
        assert_eq!(m.defined_pairs(), 3);
    }

    #[test]
    fn undefined_pairs_flagged_and_imputed() {
        let a = Lexicon::from_forms("a", 2, [(1, "ab")]);
        let b = Lexicon::from_forms("b", 2, [(2, "cd")]);
        let c = Lexicon::from_forms("c", 2, [(1, "ab"), (2, "cx")]);
        let mut m = distance_matrix(&Corpus::from_lexicons(vec![a, b, c]).unwrap());
        assert_eq!(m.undefined_pairs(), vec![(0, 1)]);
        assert_eq!(m.get(0, 1), None);
        assert!(m.to_tsv().contains("NA"));
        let imputed = m.impute_missing().unwrap();
        assert_eq!(imputed, vec![(0, 1)]);
        assert_eq!(m.get(0, 1), Some(0.25)); // mean of 0 and 0.5
        assert_eq!(m.to_bundle().imputed, vec![["a".to_string(), "b".to_string()]]);
    }

    #[test]
    fn weak_pairs_reported() {
        let a = Lexicon::from_forms("a", 3, [(1, "ab"), (2, "cd"), (3, "ef")]);
        let b = Lexicon::from_forms("b", 3, [(1, "ab")]);
        let m = distance_matrix(&Corpus::from_lexicons(vec![a, b]).unwrap());
        assert_eq!(m.weak_pairs(2), vec![(0, 1, 1)]);
        assert!(m.weak_pairs(1).is_empty());
    }

    #[test]
    fn tsv_layout() {
        let a = Lexicon::from_forms("a", 1, [(1, "abc")]);
        let b = Lexicon::from_forms("b", 1, [(1, "abd")]);
        let m = distance_matrix(&Corpus::from_lexicons(vec![a, b]).unwrap());
        assert_eq!(m.to_tsv(), "\ta\tb\na\t0.000000\t0.333333\nb\t0.333333\t0.000000\n");
        assert_eq!(m.overlaps_tsv().unwrap(), "\ta\tb\na\t1\t1\nb\t1\t1\n");
    }

    #[test]
    fn bundle_roundtrip_and_validation() {
        let a = Lexicon::from_forms("a", 2, [(1, "ab")]);
        let b = Lexicon::from_forms("b", 2, [(2, "cd")]);
        let m = distance_matrix(&Corpus::from_lexicons(vec![a, b]).unwrap());
        let json = serde_json::to_string(&m.to_bundle()).unwrap();
        let back = DistanceMatrix::from_bundle(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.get(0, 1), None);
        assert_eq!(back.overlap(0, 1), Some(0));

        let bad = DistanceBundle {
            languages: vec!["a".into(), "b".into()],
            values: vec![vec![Some(0.0), Some(0.2)], vec![Some(0.3), Some(0.0)]],
            overlaps: None,
            imputed: vec![],
        };
        assert!(matches!(DistanceMatrix::from_bundle(bad), Err(MetricError::Malformed(_))));
    }

    proptest! {
        #[test]
        fn levenshtein_matches_bfs(a in "[abc]{0,4}", b in "[abc]{0,4}") {
            prop_assert_eq!(levenshtein(&a, &b), edit_bfs(&a, &b));
        }

        #[test]
        fn word_distance_symmetric_and_bounded(a in "[a-z]( ?[a-z]){0,10}", b in "[a-z]( ?[a-z]){0,10}") {
            let (a, b) = (wf(&a), wf(&b));
            let d = word_distance(&a, &b);
            prop_assert_eq!(d, word_distance(&b, &a));
            prop_assert!((0.0..=1.0).contains(&d.value()));
        }

        #[test]
        fn lexical_distance_ignores_meaning_order(
            forms in prop::collection::vec(("[a-e]{1,6}", "[a-e]{1,6}", any::<bool>()), 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let m = forms.len();
            let mut perm: Vec<usize> = (1..=m).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pick = |order: &[usize], second: bool| {
                let mut lex = Lexicon::new(if second { "b" } else { "a" }, m);
                for (slot, &src) in order.iter().enumerate() {
                    let (x, y, present) = &forms[src - 1];
                    if second && !present { continue; }
                    let text = if second { y } else { x };
                    lex.set(slot + 1, Some(Entry::single(wf(text))));
                }
                lex
            };
            let ident: Vec<usize> = (1..=m).collect();
            let d1 = lexical_distance(&pick(&ident, false), &pick(&ident, true));
            let d2 = lexical_distance(&pick(&perm, false), &pick(&perm, true));
            prop_assert_eq!(d1, d2);
        }
    }
}
