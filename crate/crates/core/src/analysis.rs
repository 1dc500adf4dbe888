//! Jackknife stability of UPGMA trees and a deterministic forward simulator.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`; replicate `r` reads from stream `r` of that seed,
//! so serial and parallel runs draw identical removals on every platform.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chrono::{distance_from_time, time_matrix, ChronoError, ChronoParams};
use crate::corpus::{Corpus, CorpusError, Entry, Lexicon, Meaning, WordForm};
use crate::matrix::Square;
use crate::metric::{distance_matrix, DistanceMatrix, MetricError};
use crate::phylo::{clade_overlap, clades, upgma, PhyloError, PhyloTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("cannot remove {remove_k} of {available}: at least {min_left} must remain")]
    TooSmall {
        remove_k: usize,
        available: usize,
        min_left: usize,
    },
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Chrono(#[from] ChronoError),
    #[error(transparent)]
    Phylo(#[from] PhyloError),
}

/// A tree with known heights used as simulation ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTree(pub PhyloTree);

impl ReferenceTree {
    pub fn tree(&self) -> &PhyloTree {
        &self.0
    }
}

/// Distances each leaf pair would have under the model after separating
/// `2 * height(lca)` years ago.
pub fn simulate_distance_matrix(t: &ReferenceTree, p: &ChronoParams) -> Result<DistanceMatrix, AnalysisError> {
    let labels = t.0.leaf_labels();
    let cophenetic = t.0.cophenetic(&labels)?;
    let n = labels.len();
    let mut values = Square::filled(n, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            values.set_sym(i, j, distance_from_time(cophenetic[i][j], p)?);
        }
    }
    Ok(DistanceMatrix::from_values(labels, values)?)
}

#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub recovered: PhyloTree,
    /// Largest absolute height difference over matching clades, in years.
    pub max_height_error: f64,
    pub clades_match: bool,
}

/// Simulates distances from `t`, converts them back to times and rebuilds
/// the tree with UPGMA.
pub fn pipeline_roundtrip(t: &ReferenceTree, p: &ChronoParams) -> Result<Roundtrip, AnalysisError> {
    let d = simulate_distance_matrix(t, p)?;
    let times = time_matrix(&d, p)?;
    let recovered = upgma(&times)?;
    let want = t.0.clade_heights();
    let got = recovered.clade_heights();
    let clades_match = want.keys().eq(got.keys());
    let max_height_error = want
        .iter()
        .filter_map(|(c, h)| got.get(c).map(|g| (g - h).abs()))
        .fold(0.0, f64::max);
    Ok(Roundtrip {
        recovered,
        max_height_error,
        clades_match,
    })
}

/// A random binary ultrametric tree: `leaves` leaves labeled `L00, L01, ...`,
/// joined pairwise at `leaves - 1` heights drawn uniformly from
/// `[min_height, max_height]` and applied in increasing order.
pub fn random_reference_tree(
    leaves: usize,
    min_height: f64,
    max_height: f64,
    seed: u64,
) -> Result<ReferenceTree, AnalysisError> {
    if leaves < 2 {
        return Err(AnalysisError::Invalid(format!("need at least 2 leaves, got {leaves}")));
    }
    if !(min_height > 0.0 && max_height >= min_height) {
        return Err(AnalysisError::Invalid(format!(
            "bad height range [{min_height}, {max_height}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (leaves - 1).to_string().len().max(2);
    let mut pool: Vec<PhyloTree> = (0..leaves)
        .map(|i| PhyloTree::leaf(format!("L{i:0width$}")))
        .collect();
    let mut heights: Vec<f64> = (1..leaves).map(|_| rng.random_range(min_height..=max_height)).collect();
    heights.sort_by(f64::total_cmp);
    for h in heights {
        let i = rng.random_range(0..pool.len());
        let a = pool.swap_remove(i);
        let j = rng.random_range(0..pool.len());
        let b = pool.swap_remove(j);
        pool.push(PhyloTree::join(a, b, h)?);
    }
    Ok(ReferenceTree(pool.pop().expect("one tree left")))
}

/// Builds a wordlist whose lexical distances are exactly ultrametric along
/// `t`.
///
/// Heights are scaled to integer innovation counts so that the tree's total
/// branch length uses at most 80% of `meanings`. Along each branch that many
/// fresh meanings are replaced by a form sharing no letter with the previous
/// one, so each replaced meaning contributes a word distance of exactly 1.
/// The lexical distance of two leaves is then `2 * H(lca) / meanings` where
/// `H` is the scaled integer height.
pub fn synthesize_corpus(t: &ReferenceTree, meanings: usize) -> Result<Corpus, AnalysisError> {
    let tree = &t.0;
    let total_length: f64 = tree
        .nodes()
        .iter()
        .flat_map(|n| n.children.iter().map(move |&c| n.height - tree.node(c).height))
        .sum();
    if total_length <= 0.0 {
        return Err(AnalysisError::Invalid("tree has no positive branch length".into()));
    }
    let scale = 0.8 * meanings as f64 / total_length;
    let int_height = |h: f64| (h * scale).floor() as usize;

    // walk from the root, handing out meaning ids in order
    let mut next_meaning = 1usize;
    let mut lexicons = Vec::new();
    let root_forms: Vec<u8> = vec![0; meanings + 1];
    let mut stack = vec![(tree.root(), root_forms)];
    while let Some((id, forms)) = stack.pop() {
        let node = tree.node(id);
        if node.is_leaf() {
            let mut lex = Lexicon::new(node.label.clone().expect("leaf label"), meanings);
            for m in 1..=meanings {
                let letter = (b'a' + forms[m]) as char;
                let word: String = std::iter::repeat_n(letter, 3).collect();
                lex.set(m, Some(Entry::single(WordForm::new(&word).expect("letters"))));
            }
            lexicons.push(lex);
            continue;
        }
        for &c in node.children.iter().rev() {
            let steps = int_height(node.height) - int_height(tree.node(c).height);
            let mut child_forms = forms.clone();
            for _ in 0..steps {
                let m = next_meaning;
                next_meaning += 1;
                child_forms[m] = 1;
            }
            stack.push((c, child_forms));
        }
    }
    debug_assert!(next_meaning - 1 <= meanings);
    lexicons.sort_by(|a, b| a.language().cmp(b.language()));
    let inventory = (1..=meanings)
        .map(|id| Meaning {
            id,
            gloss: format!("m{id:03}"),
        })
        .collect();
    Ok(Corpus::new(inventory, lexicons)?)
}

/// What a jackknife replicate removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMode {
    /// Remove languages (leaves).
    #[default]
    Languages,
    /// Remove meanings from every wordlist.
    Meanings,
}

#[derive(Debug, Clone)]
pub struct JackknifeOptions {
    pub remove_k: usize,
    pub replicates: usize,
    pub seed: u64,
    pub mode: ResampleMode,
    /// Replace undefined distances with the family-wide mean instead of failing.
    pub impute_missing: bool,
}

impl Default for JackknifeOptions {
    fn default() -> Self {
        JackknifeOptions {
            remove_k: 5,
            replicates: 100,
            seed: 0,
            mode: ResampleMode::Languages,
            impute_missing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CladeFrequency {
    pub clade: Vec<String>,
    /// Fraction of evaluated replicates whose tree contains the restricted clade.
    pub freq: f64,
    /// Replicates in which the restricted clade still had at least 2 leaves.
    pub evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub seed: u64,
    pub replicates: usize,
    pub remove_k: usize,
    pub mode: ResampleMode,
    pub clade_frequencies: Vec<CladeFrequency>,
    pub mean_jaccard: f64,
}

impl StabilityReport {
    pub fn frequency(&self, clade: &[String]) -> Option<f64> {
        self.clade_frequencies.iter().find(|c| c.clade == clade).map(|c| c.freq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn build_tree(corpus: &Corpus, p: &ChronoParams, impute: bool) -> Result<PhyloTree, AnalysisError> {
    let mut d = distance_matrix(corpus);
    if impute {
        d.impute_missing()?;
    } else if let Some(&(i, j)) = d.undefined_pairs().first() {
        return Err(MetricError::NoOverlap(d.languages()[i].clone(), d.languages()[j].clone()).into());
    }
    Ok(upgma(&time_matrix(&d, p)?)?)
}

/// The stream for replicate `r` of `seed`.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Rebuilds the tree after removing `remove_k` random languages (or
/// meanings) per replicate and reports how often each clade of the full tree
/// survives.
pub fn jackknife(corpus: &Corpus, p: &ChronoParams, opts: &JackknifeOptions) -> Result<StabilityReport, AnalysisError> {
    if opts.replicates == 0 {
        return Err(AnalysisError::NoReplicates);
    }
    let n = corpus.len();
    let m = corpus.meanings().len();
    match opts.mode {
        ResampleMode::Languages if opts.remove_k + 3 > n => {
            return Err(AnalysisError::TooSmall {
                remove_k: opts.remove_k,
                available: n,
                min_left: 3,
            })
        }
        ResampleMode::Meanings if n < 3 || opts.remove_k >= m => {
            return Err(AnalysisError::TooSmall {
                remove_k: opts.remove_k,
                available: m,
                min_left: 1,
            })
        }
        _ => {}
    }

    let full = build_tree(corpus, p, opts.impute_missing)?;
    let full_clades: Vec<Vec<String>> = clades(&full).into_set().into_iter().collect();

    let run = |r: usize| -> Result<(Vec<Option<bool>>, f64), AnalysisError> {
        let mut rng = replicate_rng(opts.seed, r);
        let tree = match opts.mode {
            ResampleMode::Languages => {
                let mut removed: Vec<usize> = sample(&mut rng, n, opts.remove_k).into_vec();
                removed.sort_unstable();
                let keep: Vec<usize> = (0..n).filter(|i| removed.binary_search(i).is_err()).collect();
                build_tree(&corpus.select(&keep)?, p, opts.impute_missing)?
            }
            ResampleMode::Meanings => {
                let drop: BTreeSet<usize> = sample(&mut rng, m, opts.remove_k).into_iter().map(|i| i + 1).collect();
                build_tree(&corpus.without_meanings(&drop), p, opts.impute_missing)?
            }
        };
        let kept: BTreeSet<String> = tree.leaf_labels().into_iter().collect();
        let present = clades(&tree);
        let hits = full_clades
            .iter()
            .map(|c| {
                let restricted: Vec<String> = c.iter().filter(|l| kept.contains(*l)).cloned().collect();
                (restricted.len() >= 2).then(|| present.contains(&restricted))
            })
            .collect();
        Ok((hits, clade_overlap(&full, &tree)?.jaccard))
    };
    let outcomes: Vec<(Vec<Option<bool>>, f64)> =
        (0..opts.replicates).into_par_iter().map(run).collect::<Result<_, _>>()?;

    let mut tally: BTreeMap<&Vec<String>, (usize, usize)> = BTreeMap::new();
    for (hits, _) in &outcomes {
        for (clade, hit) in full_clades.iter().zip(hits) {
            let e = tally.entry(clade).or_default();
            if let Some(h) = hit {
                e.1 += 1;
                e.0 += usize::from(*h);
            }
        }
    }
    let clade_frequencies = tally
        .into_iter()
        .map(|(clade, (hit, evaluated))| CladeFrequency {
            clade: clade.clone(),
            freq: if evaluated == 0 { 1.0 } else { hit as f64 / evaluated as f64 },
            evaluated,
        })
        .collect();
    let mean_jaccard = outcomes.iter().map(|(_, j)| j).sum::<f64>() / outcomes.len() as f64;
    Ok(StabilityReport {
        seed: opts.seed,
        replicates: opts.replicates,
        remove_k: opts.remove_k,
        mode: opts.mode,
        clade_frequencies,
        mean_jaccard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chrono::PUBLISHED_PROFILE;
    use crate::metric::lexical_distance;
    use crate::phylo::PhyloTree;

    fn leaf(l: &str) -> PhyloTree {
        PhyloTree::leaf(l)
    }

    fn join(a: PhyloTree, b: PhyloTree, h: f64) -> PhyloTree {
        PhyloTree::join(a, b, h).unwrap()
    }

    #[test]
    fn simulate_two_leaves() {
        let t = ReferenceTree(join(leaf("A"), leaf("B"), 550.0));
        let d = simulate_distance_matrix(&t, &PUBLISHED_PROFILE).unwrap();
        // (1 - exp(-1100/1750)) / 1.09
        assert!((d.get(0, 1).unwrap() - 0.4281163393056771).abs() < 1e-15);
    }

    #[test]
    fn simulate_chain_of_three() {
        let t = ReferenceTree(join(join(leaf("A"), leaf("B"), 500.0), leaf("C"), 2000.0));
        let d = simulate_distance_matrix(&t, &PUBLISHED_PROFILE).unwrap();
        let near = -(-1000.0f64 / 1750.0).exp_m1() / 1.09;
        let far = -(-4000.0f64 / 1750.0).exp_m1() / 1.09;
        assert!((d.get(0, 1).unwrap() - near).abs() < 1e-15);
        assert_eq!(d.get(0, 2), d.get(1, 2));
        assert!((d.get(0, 2).unwrap() - far).abs() < 1e-15);
    }

    #[test]
    fn simulate_degenerate_tree() {
        let t = ReferenceTree(join(join(leaf("A"), leaf("B"), 0.0), leaf("C"), 0.0));
        let d = simulate_distance_matrix(&t, &PUBLISHED_PROFILE).unwrap();
        assert_eq!(d.defined_pairs(), 3);
        assert!(d.values().rows().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn roundtrip_small_cases() {
        let p = PUBLISHED_PROFILE;
        let two = ReferenceTree(join(leaf("A"), leaf("B"), 550.0));
        let r = pipeline_roundtrip(&two, &p).unwrap();
        assert!(r.clades_match);
        assert!(r.max_height_error < 1e-6);

        // two merges at the same height; the tie-break still gives the same clades
        let tied = ReferenceTree(join(
            join(leaf("A"), leaf("B"), 300.0),
            join(leaf("C"), leaf("D"), 300.0),
            900.0,
        ));
        let r = pipeline_roundtrip(&tied, &p).unwrap();
        assert!(r.clades_match);
        assert!(r.max_height_error < 1e-6);
        assert!(r.recovered.is_ultrametric());
    }

    #[test]
    fn roundtrip_random_ten_leaves() {
        for seed in 0..20 {
            let t = random_reference_tree(10, 100.0, 8000.0, seed).unwrap();
            let r = pipeline_roundtrip(&t, &PUBLISHED_PROFILE).unwrap();
            assert!(r.clades_match, "seed {seed}");
            assert!(r.max_height_error < 1e-6, "seed {seed}: {}", r.max_height_error);
        }
    }

    #[test]
    fn monotone_transform_keeps_topology() {
        for seed in 0..10 {
            let t = random_reference_tree(12, 100.0, 8000.0, seed).unwrap();
            let d = simulate_distance_matrix(&t, &PUBLISHED_PROFILE).unwrap();
            let by_distance = upgma(&d).unwrap();
            let by_time = upgma(&time_matrix(&d, &PUBLISHED_PROFILE).unwrap()).unwrap();
            assert_eq!(clades(&by_distance), clades(&by_time));
        }
    }

    #[test]
    fn random_trees_are_reproducible() {
        let a = random_reference_tree(8, 100.0, 8000.0, 7).unwrap();
        let b = random_reference_tree(8, 100.0, 8000.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.leaf_count(), 8);
        assert!(a.0.is_ultrametric());
        assert!(random_reference_tree(1, 100.0, 8000.0, 0).is_err());
    }

    #[test]
    fn synthetic_corpus_is_ultrametric() {
        let t = ReferenceTree(join(join(leaf("A"), leaf("B"), 500.0), leaf("C"), 2000.0));
        let c = synthesize_corpus(&t, 200).unwrap();
        let lex = c.lexicons();
        let ab = lexical_distance(&lex[0], &lex[1]).unwrap();
        let ac = lexical_distance(&lex[0], &lex[2]).unwrap();
        let bc = lexical_distance(&lex[1], &lex[2]).unwrap();
        assert_eq!(ab.overlap, 200);
        assert_eq!(ac.value, bc.value);
        assert!(ab.value < ac.value);
        // total branch length 500+500+1500+2000 = 4500, scale 160/4500
        assert_eq!(ab.value, 2.0 * (500.0f64 * 160.0 / 4500.0).floor() / 200.0);
        let tree = build_tree(&c, &PUBLISHED_PROFILE, false).unwrap();
        assert_eq!(clades(&tree), clades(&t.0));
    }

    fn well_separated() -> ReferenceTree {
        let a = join(join(leaf("A"), leaf("B"), 200.0), join(leaf("C"), leaf("D"), 250.0), 1200.0);
        let b = join(join(leaf("E"), leaf("F"), 300.0), join(leaf("G"), leaf("H"), 220.0), 1400.0);
        ReferenceTree(join(a, b, 3500.0))
    }

    #[test]
    fn jackknife_without_removal_is_perfect() {
        let c = synthesize_corpus(&well_separated(), 200).unwrap();
        let opts = JackknifeOptions {
            remove_k: 0,
            replicates: 5,
            ..Default::default()
        };
        let r = jackknife(&c, &PUBLISHED_PROFILE, &opts).unwrap();
        assert!(r.clade_frequencies.iter().all(|c| c.freq == 1.0 && c.evaluated == 5));
        assert_eq!(r.mean_jaccard, 1.0);
    }

    #[test]
    fn jackknife_is_deterministic_and_recovers_truth() {
        let truth = well_separated();
        let c = synthesize_corpus(&truth, 200).unwrap();
        let opts = JackknifeOptions {
            remove_k: 3,
            replicates: 40,
            seed: 11,
            ..Default::default()
        };
        let r1 = jackknife(&c, &PUBLISHED_PROFILE, &opts).unwrap();
        let r2 = jackknife(&c, &PUBLISHED_PROFILE, &opts).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        for clade in clades(&truth.0).iter() {
            assert_eq!(r1.frequency(clade), Some(1.0), "{clade:?}");
        }
        let other = JackknifeOptions { seed: 12, ..opts };
        let r3 = jackknife(&c, &PUBLISHED_PROFILE, &other).unwrap();
        assert_eq!(r3.seed, 12);
    }

    #[test]
    fn jackknife_meaning_mode() {
        let c = synthesize_corpus(&well_separated(), 200).unwrap();
        let opts = JackknifeOptions {
            remove_k: 20,
            replicates: 10,
            mode: ResampleMode::Meanings,
            ..Default::default()
        };
        let r = jackknife(&c, &PUBLISHED_PROFILE, &opts).unwrap();
        assert_eq!(r.mode, ResampleMode::Meanings);
        assert!(r.clade_frequencies.iter().all(|c| (0.0..=1.0).contains(&c.freq)));
    }

    #[test]
    fn jackknife_rejections() {
        let c = synthesize_corpus(&well_separated(), 50).unwrap();
        let p = PUBLISHED_PROFILE;
        let too_many = JackknifeOptions {
            remove_k: 6,
            ..Default::default()
        };
        assert!(matches!(jackknife(&c, &p, &too_many), Err(AnalysisError::TooSmall { .. })));
        let none = JackknifeOptions {
            replicates: 0,
            ..Default::default()
        };
        assert_eq!(jackknife(&c, &p, &none).unwrap_err(), AnalysisError::NoReplicates);
    }

    #[test]
    fn replicate_streams_differ() {
        let a: u64 = replicate_rng(1, 0).random();
        let b: u64 = replicate_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, replicate_rng(1, 0).random::<u64>());
    }
}
