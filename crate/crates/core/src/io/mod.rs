//! File formats: corpus, word vectors, score tables and manifests.

pub mod corpus;
pub mod manifest;
pub mod tables;
pub mod vectors;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::{Error, Result, ResultExt};

/// Buffered reader; errors name the path.
pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(Error::from).in_file(path)
}

/// Buffered writer, creating parent directories first.
pub fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::from).in_file(dir)?;
    }
    File::create(path).map(std::io::BufWriter::new).map_err(Error::from).in_file(path)
}
