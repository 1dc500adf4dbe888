//! Fixtures shared by the benchmarks.

use lexichron_core::{Corpus, Entry, Lexicon, WordForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A corpus of random lowercase words, 3 to 9 letters each, with every cell filled.
pub fn random_corpus(languages: usize, meanings: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicons = (0..languages)
        .map(|l| {
            let mut lex = Lexicon::new(format!("L{l:03}"), meanings);
            for m in 1..=meanings {
                let len = rng.random_range(3..=9);
                let word: String = (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
                lex.set(m, Some(Entry::single(WordForm::new(&word).unwrap())));
            }
            lex
        })
        .collect();
    Corpus::from_lexicons(lexicons).expect("generated corpus is valid")
}
