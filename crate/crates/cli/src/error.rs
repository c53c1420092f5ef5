//! CLI failure taxonomy and the machine-readable stderr line.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Config file or flag value problems; messages carry `file:line`
    /// provenance where one exists.  Exits with code 2.
    #[error("{0}")]
    Config(String),
    /// Dataset, prediction-file, or run-directory problems.
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Corpus(#[from] hwk_core::corpus::CorpusError),
    #[error(transparent)]
    Feature(#[from] hwk_core::features::FeatureError),
    #[error(transparent)]
    Linear(#[from] hwk_core::linear::LinearError),
    #[error(transparent)]
    Neural(#[from] hwk_core::neural::NeuralError),
    #[error(transparent)]
    Eval(#[from] hwk_core::eval::EvalError),
    #[error(transparent)]
    Explain(#[from] hwk_core::explain::ExplainError),
    #[error(transparent)]
    Analysis(#[from] hwk_core::analysis::AnalysisError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Corpus(_) => "corpus",
            CliError::Feature(_) => "features",
            CliError::Linear(_) => "model",
            CliError::Neural(_) => "model",
            CliError::Eval(_) => "eval",
            CliError::Explain(_) => "explain",
            CliError::Analysis(_) => "analysis",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// One-line JSON for stderr: `{"error":"<category>","message":"..."}`.
    pub fn machine_line(&self) -> String {
        serde_json::json!({
            "error": self.category(),
            "message": self.to_string(),
        })
        .to_string()
    }
}
