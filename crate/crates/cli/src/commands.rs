use std::fs;

use log::{info, warn};
use serde_json::json;

use lexichron_core::{
    calibrate, distance_matrix, jackknife, rates_from_params, simulate_distance_matrix, synthesize_corpus,
    time_matrix, to_newick, upgma, ChronoParams, Corpus, DistanceMatrix, JackknifeOptions, MetricError, ParamsSpec,
    PhyloTree, ReferenceTree, ResampleMode, TimeMatrix,
};

use crate::error::CliError;
use crate::io::{load_matrix_input, read_json, write_file, write_json, Manifest, MatrixInput, RunConfig};
use crate::{Mode, TreeOn};

/// Distances of a corpus with undefined pairs either imputed or rejected.
fn corpus_distances(cfg: &RunConfig, corpus: &Corpus) -> Result<DistanceMatrix, CliError> {
    let mut d = distance_matrix(corpus);
    let weak = d.weak_pairs(cfg.common.min_overlap_warn);
    if !weak.is_empty() {
        warn!(
            "{} pair(s) share fewer than {} meanings",
            weak.len(),
            cfg.common.min_overlap_warn
        );
        for (i, j, k) in &weak {
            info!("  {} / {}: {k} shared meanings", d.languages()[*i], d.languages()[*j]);
        }
    }
    resolve_undefined(cfg, &mut d)?;
    Ok(d)
}

fn resolve_undefined(cfg: &RunConfig, d: &mut DistanceMatrix) -> Result<(), CliError> {
    let undefined = d.undefined_pairs();
    if undefined.is_empty() {
        return Ok(());
    }
    if cfg.common.impute_missing_pairs {
        d.impute_missing()?;
        return Ok(());
    }
    let (i, j) = undefined[0];
    let err = CliError::from(MetricError::NoOverlap(d.languages()[i].clone(), d.languages()[j].clone()));
    Err(err.context(format!(
        "{} undefined pair(s); rerun with --impute-missing-pairs to fill them with the mean distance",
        undefined.len()
    )))
}

fn write_distances(dir: &std::path::Path, d: &DistanceMatrix, manifest: &mut Manifest) -> Result<(), CliError> {
    manifest.output(&write_file(dir, "distances.tsv", &d.to_tsv())?);
    if let Some(overlaps) = d.overlaps_tsv() {
        manifest.output(&write_file(dir, "overlaps.tsv", &overlaps)?);
    }
    manifest.output(&write_json(dir, "distances.json", &d.to_bundle())?);
    Ok(())
}

fn write_times(dir: &std::path::Path, t: &TimeMatrix, manifest: &mut Manifest) -> Result<(), CliError> {
    let saturated = t.saturated_pairs();
    if !saturated.is_empty() {
        warn!(
            "{} pair(s) exceed the model asymptote; their times are clamped and marked with `*`",
            saturated.len()
        );
    }
    manifest.output(&write_file(dir, "times.tsv", &t.to_tsv())?);
    manifest.output(&write_json(dir, "times.json", &t.to_bundle())?);
    Ok(())
}

fn write_tree(dir: &std::path::Path, stem: &str, t: &PhyloTree, manifest: &mut Manifest) -> Result<String, CliError> {
    let newick = to_newick(t);
    manifest.output(&write_file(dir, &format!("{stem}.nwk"), &format!("{newick}\n"))?);
    manifest.output(&write_json(dir, &format!("{stem}.json"), &t.to_json_node())?);
    Ok(newick)
}

pub fn cmd_dist(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.input()?;
    let corpus = cfg.load_corpus(path)?;
    let d = corpus_distances(cfg, &corpus)?;
    let dir = cfg.out_dir()?;
    let mut manifest = Manifest::new("dist");
    manifest.inputs_from(cfg)?;
    write_distances(dir, &d, &mut manifest)?;
    manifest.write(cfg)?;
    println!(
        "{} languages, {} meanings, {} pair distances ({} imputed)",
        d.len(),
        corpus.meanings().len(),
        d.defined_pairs(),
        d.imputed().len()
    );
    Ok(())
}

fn distances_from_input(cfg: &RunConfig, input: MatrixInput) -> Result<DistanceMatrix, CliError> {
    match input {
        MatrixInput::Corpus(c) => corpus_distances(cfg, &c),
        MatrixInput::Distances(mut d) => {
            resolve_undefined(cfg, &mut d)?;
            Ok(d)
        }
        MatrixInput::Times(_) => Err(CliError::usage("input is already a time matrix")),
    }
}

pub fn cmd_time(cfg: &RunConfig) -> Result<(), CliError> {
    let input = load_matrix_input(cfg, cfg.input()?)?;
    let d = distances_from_input(cfg, input)?;
    let (params, desc) = cfg.params()?;
    let t = time_matrix(&d, &params)?;
    let dir = cfg.out_dir()?;
    let mut manifest = Manifest::new("time");
    manifest.inputs_from(cfg)?;
    manifest.params(desc);
    write_times(dir, &t, &mut manifest)?;
    manifest.write(cfg)?;
    println!(
        "{} languages, epsilon = {}, gamma = {}, {} saturated pair(s)",
        t.len(),
        params.epsilon(),
        params.gamma(),
        t.saturated_pairs().len()
    );
    Ok(())
}

pub fn cmd_tree(cfg: &RunConfig, on: TreeOn) -> Result<(), CliError> {
    let input = load_matrix_input(cfg, cfg.input()?)?;
    let mut manifest = Manifest::new("tree");
    manifest.inputs_from(cfg)?;
    manifest.options(json!({ "on": format!("{on:?}").to_lowercase() }));
    let tree = match (input, on) {
        (MatrixInput::Times(t), TreeOn::Times) => {
            if !t.saturated_pairs().is_empty() {
                warn!("{} saturated pair(s) enter the tree at the ceiling time", t.saturated_pairs().len());
            }
            upgma(&t)?
        }
        (MatrixInput::Times(_), TreeOn::Distances) => {
            return Err(CliError::usage("--on distances needs a wordlist or distance matrix input"))
        }
        (input, on) => {
            let d = distances_from_input(cfg, input)?;
            match on {
                TreeOn::Distances => upgma(&d)?,
                TreeOn::Times => {
                    let (params, desc) = cfg.params()?;
                    manifest.params(desc);
                    let t = time_matrix(&d, &params)?;
                    if !t.saturated_pairs().is_empty() {
                        warn!("{} saturated pair(s) enter the tree at the ceiling time", t.saturated_pairs().len());
                    }
                    upgma(&t)?
                }
            }
        }
    };
    debug_assert!(tree.is_ultrametric());
    let dir = cfg.out_dir()?;
    let newick = write_tree(dir, "tree", &tree, &mut manifest)?;
    manifest.write(cfg)?;
    println!("{newick}");
    Ok(())
}

pub fn cmd_calibrate(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg
        .common
        .input
        .as_deref()
        .or(cfg.common.params.as_deref())
        .ok_or_else(|| CliError::usage("calibrate needs an anchors file via --input or --params"))?;
    let spec: ParamsSpec = read_json(path)?;
    let ParamsSpec::Anchors { anchors } = spec else {
        return Err(CliError::usage(format!(
            "{} holds parameters, not anchors",
            path.display()
        )));
    };
    let [first, second] = anchors.as_slice() else {
        return Err(CliError::usage(format!("expected exactly 2 anchors, found {}", anchors.len())));
    };
    let params = calibrate(*first, *second)?;
    let (a, b) = rates_from_params(&params);
    let dir = cfg.out_dir()?;
    let mut manifest = Manifest::new("calibrate");
    manifest.input("anchors", path)?;
    let out = json!({ "epsilon": params.epsilon(), "gamma": params.gamma(), "a": a, "b": b });
    manifest.output(&write_json(dir, "params.json", &out)?);
    manifest.write(cfg)?;
    println!("epsilon = {}, gamma = {}, a = {a:e}, b = {b:e}", params.epsilon(), params.gamma());
    Ok(())
}

pub fn cmd_jackknife(cfg: &RunConfig, remove_k: usize, replicates: usize, mode: Mode) -> Result<(), CliError> {
    let path = cfg.input()?;
    let corpus = cfg.load_corpus(path)?;
    let (params, desc) = cfg.params()?;
    let opts = JackknifeOptions {
        remove_k,
        replicates,
        seed: cfg.common.seed,
        mode: match mode {
            Mode::Languages => ResampleMode::Languages,
            Mode::Meanings => ResampleMode::Meanings,
        },
        impute_missing: cfg.common.impute_missing_pairs,
    };
    let report = jackknife(&corpus, &params, &opts)?;
    let dir = cfg.out_dir()?;
    let mut manifest = Manifest::new("jackknife");
    manifest.inputs_from(cfg)?;
    manifest.params(desc);
    manifest.options(json!({ "remove_k": remove_k, "replicates": replicates, "mode": opts.mode }));
    manifest.output(&write_file(dir, "stability.json", &format!("{}\n", report.to_json()))?);
    manifest.write(cfg)?;
    let stable = report.clade_frequencies.iter().filter(|c| c.freq == 1.0).count();
    println!(
        "{} of {} clades preserved in every replicate, mean jaccard {:.4}",
        stable,
        report.clade_frequencies.len(),
        report.mean_jaccard
    );
    Ok(())
}

fn load_reference_tree(path: &std::path::Path) -> Result<ReferenceTree, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let ctx = format!("in {}", path.display());
    let tree = if is_json {
        let node = read_json(path)?;
        PhyloTree::from_json_node(&node).map_err(|e| CliError::from(e).context(ctx))?
    } else {
        let text = fs::read_to_string(path)?;
        lexichron_core::parse_newick(&text).map_err(|e| CliError::from(e).context(ctx))?
    };
    Ok(ReferenceTree(tree))
}

pub fn cmd_simulate(cfg: &RunConfig, meanings: Option<usize>) -> Result<(), CliError> {
    let reference = load_reference_tree(cfg.input()?)?;
    let (params, desc): (ChronoParams, _) = cfg.params()?;
    let d = simulate_distance_matrix(&reference, &params)?;
    let dir = cfg.out_dir()?;
    let mut manifest = Manifest::new("simulate");
    manifest.inputs_from(cfg)?;
    manifest.params(desc);
    manifest.options(json!({ "meanings": meanings }));
    write_distances(dir, &d, &mut manifest)?;
    write_tree(dir, "reference", reference.tree(), &mut manifest)?;
    if let Some(m) = meanings {
        let corpus = synthesize_corpus(&reference, m)?;
        manifest.output(&write_file(dir, "wordlist.tsv", &corpus.to_tsv())?);
    }
    manifest.write(cfg)?;
    println!("{} leaves simulated", d.len());
    Ok(())
}
