//! Input loading, output writing and run manifests.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lexichron_core::{
    parse_corpus, ChronoParams, Corpus, DistanceBundle, DistanceMatrix, ParamsSpec, ParseOptions, TimeMatrix,
    TransliterationMap, VariantPolicy, PUBLISHED_PROFILE, PUBLISHED_PROFILE_NAME,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::{Common, Variants};

/// Validated command-line configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub common: Common,
}

impl RunConfig {
    pub fn validate(common: Common) -> Result<Self, CliError> {
        for path in [&common.input, &common.translit, &common.params].into_iter().flatten() {
            if !path.is_file() {
                return Err(CliError::usage(format!("input file `{}` does not exist", path.display())));
            }
        }
        Ok(RunConfig { common })
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.common
            .input
            .as_deref()
            .ok_or_else(|| CliError::usage("--input is required for this subcommand"))
    }

    pub fn parse_options(&self) -> Result<ParseOptions, CliError> {
        let translit = match &self.common.translit {
            Some(path) => {
                let file = fs::File::open(path)?;
                TransliterationMap::parse(BufReader::new(file))
                    .map_err(|e| CliError::from(e).context(format!("in {}", path.display())))?
            }
            None => TransliterationMap::new(),
        };
        let variants = match self.common.variants {
            Variants::First => VariantPolicy::First,
            Variants::Min => VariantPolicy::All,
        };
        Ok(ParseOptions { translit, variants })
    }

    pub fn load_corpus(&self, path: &Path) -> Result<Corpus, CliError> {
        let opts = self.parse_options()?;
        let file = fs::File::open(path)?;
        parse_corpus(BufReader::new(file), &opts).map_err(|e| CliError::from(e).context(format!("in {}", path.display())))
    }

    /// Parameters from `--params`, or the published profile.
    pub fn params(&self) -> Result<(ChronoParams, Value), CliError> {
        match &self.common.params {
            Some(path) => {
                let spec: ParamsSpec = read_json(path)?;
                let p = spec
                    .resolve()
                    .map_err(|e| CliError::from(e).context(format!("in {}", path.display())))?;
                let desc = json!({"source": path.display().to_string(), "epsilon": p.epsilon(), "gamma": p.gamma()});
                Ok((p, desc))
            }
            None => Ok((
                PUBLISHED_PROFILE,
                json!({"profile": PUBLISHED_PROFILE_NAME, "epsilon": PUBLISHED_PROFILE.epsilon(), "gamma": PUBLISHED_PROFILE.gamma()}),
            )),
        }
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.common.out_dir)?;
        Ok(&self.common.out_dir)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::data(e).context(format!("parsing {}", path.display())))
}

/// What an input file turned out to contain.
pub enum MatrixInput {
    Corpus(Corpus),
    Distances(DistanceMatrix),
    Times(TimeMatrix),
}

/// Wordlist TSV, distance bundle JSON or time bundle JSON, by content.
pub fn load_matrix_input(cfg: &RunConfig, path: &Path) -> Result<MatrixInput, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return cfg.load_corpus(path).map(MatrixInput::Corpus);
    }
    let value: Value = read_json(path)?;
    let ctx = format!("in {}", path.display());
    if value.get("units").is_some() {
        let bundle = serde_json::from_value(value).map_err(|e| CliError::data(e).context(ctx.clone()))?;
        Ok(MatrixInput::Times(
            TimeMatrix::from_bundle(bundle).map_err(|e| CliError::from(e).context(ctx))?,
        ))
    } else {
        let bundle: DistanceBundle = serde_json::from_value(value).map_err(|e| CliError::data(e).context(ctx.clone()))?;
        Ok(MatrixInput::Distances(
            DistanceMatrix::from_bundle(bundle).map_err(|e| CliError::from(e).context(ctx))?,
        ))
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::data(e).context(format!("writing {}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::data)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Records everything that determines a run's outputs.
pub struct Manifest {
    command: &'static str,
    inputs: Vec<Value>,
    params: Value,
    options: Value,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest {
            command,
            inputs: Vec::new(),
            params: Value::Null,
            options: json!({}),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        self.inputs.push(json!({
            "role": role,
            "path": path.display().to_string(),
            "sha256": sha256_file(path)?,
        }));
        Ok(())
    }

    pub fn inputs_from(&mut self, cfg: &RunConfig) -> Result<(), CliError> {
        let c = &cfg.common;
        for (role, path) in [("input", &c.input), ("translit", &c.translit), ("params", &c.params)] {
            if let Some(p) = path {
                self.input(role, p)?;
            }
        }
        Ok(())
    }

    pub fn params(&mut self, params: Value) {
        self.params = params;
    }

    pub fn options(&mut self, options: Value) {
        self.options = options;
    }

    pub fn output(&mut self, path: &Path) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.outputs.push(name);
    }

    pub fn write(self, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        let c = &cfg.common;
        let value = json!({
            "tool": "lexichron",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": self.inputs,
            "params": self.params,
            "seed": c.seed,
            "options": {
                "impute_missing_pairs": c.impute_missing_pairs,
                "min_overlap_warn": c.min_overlap_warn,
                "variants": format!("{:?}", c.variants).to_lowercase(),
                "command": self.options,
            },
            "outputs": self.outputs,
        });
        write_json(&c.out_dir, &format!("{}.manifest.json", self.command), &value)
    }
}
