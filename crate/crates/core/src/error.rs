use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed record in a tabular input.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Word-vector file whose shape does not match its header.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown {kind} `{name}`")]
    Lookup { kind: &'static str, name: String },

    /// One entry per connected component that holds no known vector.
    #[error("{}", infeasible_message(.uncovered))]
    Infeasible { uncovered: Vec<Vec<String>> },

    #[error("cannot compose an empty token list")]
    EmptyComposition,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("{}: {source}", .path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn infeasible_message(uncovered: &[Vec<String>]) -> String {
    let shown: Vec<String> = uncovered
        .iter()
        .take(5)
        .map(|c| {
            let head: Vec<&str> = c.iter().take(4).map(String::as_str).collect();
            if c.len() > 4 {
                format!("{{{}, ... ({} concepts)}}", head.join(", "), c.len())
            } else {
                format!("{{{}}}", head.join(", "))
            }
        })
        .collect();
    let more = if uncovered.len() > 5 { format!(" and {} more", uncovered.len() - 5) } else { String::new() };
    format!(
        "infeasible retrofitting problem: {} connected component(s) contain no known vector: {}{}",
        uncovered.len(),
        shown.join(", "),
        more
    )
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format { line, message: message.into() }
    }

    pub fn lookup(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Lookup { kind, name: name.into() }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File { path: path.into(), source: Box::new(self) }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Validation(_)
            | Error::Lookup { .. }
            | Error::EmptyComposition
            | Error::Eval(_) => 2,
            Error::Infeasible { .. } | Error::Singular(_) => 3,
            Error::Parse { .. } | Error::Format { .. } | Error::Json(_) => 4,
            Error::File { source, .. } => source.exit_code(),
            Error::Io(_) => 1,
        }
    }
}

/// Attach a file path to errors coming out of a reader-based loader.
pub(crate) trait ResultExt<T> {
    fn in_file(self, path: &std::path::Path) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn in_file(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|e| e.in_file(path))
    }
}
