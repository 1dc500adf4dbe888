use lexichron_core::{AnalysisError, ChronoError, CorpusError, MetricError, PhyloError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Usage = 1,
    Data = 2,
    Model = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: Code::Usage,
            source: anyhow::anyhow!(msg.into()),
        }
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: Code::Data,
            source: e.into(),
        }
    }

    pub fn context(mut self, ctx: impl Into<String>) -> Self {
        self.source = self.source.context(ctx.into());
        self
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::data(e)
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::data(e)
    }
}

impl From<PhyloError> for CliError {
    fn from(e: PhyloError) -> Self {
        CliError::data(e)
    }
}

impl From<ChronoError> for CliError {
    fn from(e: ChronoError) -> Self {
        let code = match e {
            ChronoError::Malformed(_) | ChronoError::UndefinedEntry(..) => Code::Data,
            _ => Code::Model,
        };
        CliError { code, source: e.into() }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::TooSmall { .. } | AnalysisError::NoReplicates => CliError {
                code: Code::Usage,
                source: e.into(),
            },
            AnalysisError::Invalid(_) => CliError::data(e),
            AnalysisError::Corpus(e) => e.into(),
            AnalysisError::Metric(e) => e.into(),
            AnalysisError::Chrono(e) => e.into(),
            AnalysisError::Phylo(e) => e.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e)
    }
}
