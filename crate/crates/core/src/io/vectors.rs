//! Text word-vector format: a `N d` header, then `token v1 ... vd` per line.
//!
//! Tokens may contain single spaces (multi-word tag labels); the last `d`
//! fields of a line are always the vector. Files without a header are
//! accepted, in which case `d` is inferred from the first line.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::compose::TokenTable;
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result, ResultExt};

struct Header {
    count: Option<usize>,
    dim: usize,
}

/// Calls `visit(token, vector)` for every vector line, in file order.
/// Returns the dimension. `visit` returns `false` to stop early.
fn read_vectors(reader: impl BufRead, mut visit: impl FnMut(usize, String, Vec<f64>) -> Result<bool>) -> Result<usize> {
    let mut lines = reader.lines().enumerate();
    let mut header: Option<Header> = None;
    let mut pending: Option<(usize, String)> = None;

    for (n, line) in lines.by_ref() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() == 2 {
            if let (Ok(count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                header = Some(Header { count: Some(count), dim });
                break;
            }
        }
        if fields.len() < 2 {
            return Err(Error::format(n + 1, "expected a `N d` header or a vector line"));
        }
        header = Some(Header { count: None, dim: fields.len() - 1 });
        pending = Some((n, line));
        break;
    }
    let Some(header) = header else {
        return Err(Error::format(1, "empty vector file"));
    };
    if header.dim == 0 {
        return Err(Error::format(1, "vector dimension must be positive"));
    }

    let mut seen = 0usize;
    let mut stopped = false;
    let mut handle = |n: usize, line: &str| -> Result<bool> {
        let (token, vector) = parse_line(line, header.dim, n + 1)?;
        seen += 1;
        visit(n + 1, token, vector)
    };
    if let Some((n, line)) = pending {
        stopped = !handle(n, &line)?;
    }
    if !stopped {
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if !handle(n, &line)? {
                stopped = true;
                break;
            }
        }
    }
    if let (Some(count), false) = (header.count, stopped) {
        if count != seen {
            return Err(Error::format(1, format!("header declares {count} vectors, file holds {seen}")));
        }
    }
    Ok(header.dim)
}

fn parse_line(line: &str, dim: usize, lineno: usize) -> Result<(String, Vec<f64>)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < dim + 1 {
        return Err(Error::format(lineno, format!("expected a token and {dim} values, found {} fields", fields.len())));
    }
    let extra = fields.len() - (dim + 1);
    if fields[1..=extra].iter().any(|f| f.parse::<f64>().is_ok()) {
        return Err(Error::format(lineno, format!("expected {dim} values, found {}", fields.len() - 1)));
    }
    let token = fields[..=extra].join(" ");
    let vector = fields[extra + 1..]
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| Error::format(lineno, format!("`{f}` is not a number"))))
        .collect::<Result<Vec<f64>>>()?;
    Ok((token, vector))
}

/// Reads a token table; ranks are 1-based positions in the file.
///
/// With `keep`, only listed tokens are stored (ranks still count every
/// line). `max_rank` stops reading after that many vectors.
pub fn read_token_table(
    reader: impl BufRead,
    keep: Option<&HashSet<String>>,
    max_rank: Option<usize>,
) -> Result<TokenTable> {
    let mut table: Option<TokenTable> = None;
    let mut rank = 0usize;
    let dim = read_vectors(reader, |_, token, vector| {
        rank += 1;
        if max_rank.is_some_and(|m| rank > m) {
            return Ok(false);
        }
        let t = table.get_or_insert_with(|| TokenTable::new(vector.len()));
        if keep.is_none_or(|k| k.contains(&token)) {
            t.push(token, vector, rank)?;
        }
        Ok(true)
    })?;
    Ok(table.unwrap_or_else(|| TokenTable::new(dim)))
}

pub fn read_embeddings(reader: impl BufRead) -> Result<EmbeddingSet> {
    let mut set: Option<EmbeddingSet> = None;
    let dim = read_vectors(reader, |line, token, vector| {
        let s = set.get_or_insert_with(|| EmbeddingSet::new(vector.len()));
        if s.contains(&token) {
            return Err(Error::format(line, format!("duplicate entry `{token}`")));
        }
        s.insert(token, vector)?;
        Ok(true)
    })?;
    Ok(set.unwrap_or_else(|| EmbeddingSet::new(dim)))
}

/// Writes `set` with 17 significant digits per value, preserving order.
pub fn write_embeddings(set: &EmbeddingSet, writer: impl Write) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", set.len(), set.dim())?;
    for (id, v) in set.iter() {
        if id.trim() != id || id.is_empty() || id.contains(['\t', '\n', '\r']) || id.contains("  ") {
            return Err(Error::Validation(format!("identifier `{id}` cannot be written as a vector token")));
        }
        write!(w, "{id}")?;
        for x in v {
            write!(w, " {x:.16e}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_token_table(path: &Path, keep: Option<&HashSet<String>>, max_rank: Option<usize>) -> Result<TokenTable> {
    let file = File::open(path).map_err(Error::from).in_file(path)?;
    read_token_table(BufReader::new(file), keep, max_rank).in_file(path)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let file = File::open(path).map_err(Error::from).in_file(path)?;
    read_embeddings(BufReader::new(file)).in_file(path)
}

pub fn save_embeddings(set: &EmbeddingSet, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::from).in_file(dir)?;
    }
    let file = File::create(path).map_err(Error::from).in_file(path)?;
    write_embeddings(set, file).in_file(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut set = EmbeddingSet::new(3);
        set.insert("rock", vec![0.1, -1.0 / 3.0, 1e-300]).unwrap();
        set.insert("hip hop", vec![std::f64::consts::PI, 2.5e10, -0.0]).unwrap();
        let mut buf = Vec::new();
        write_embeddings(&set, &mut buf).unwrap();
        let back = read_embeddings(buf.as_slice()).unwrap();
        assert_eq!(back.ids(), set.ids());
        for (a, b) in back.iter().zip(set.iter()) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a.1), bits(b.1));
        }
    }

    #[test]
    fn empty_set_has_header() {
        let mut buf = Vec::new();
        write_embeddings(&EmbeddingSet::new(4), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 4\n");
        let back = read_embeddings(buf.as_slice()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 4);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let text = "2 3\na 1 2 3\nb 1 2\n";
        match read_embeddings(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "1 2\na 1 2 3\n";
        assert!(matches!(read_embeddings(text.as_bytes()), Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn header_count_mismatch() {
        assert!(matches!(read_embeddings("3 1\na 1\n".as_bytes()), Err(Error::Format { .. })));
    }

    #[test]
    fn headerless_files_and_ranks() {
        let text = "the 0.1 0.2\nof 0.3 0.4\nrock 0.5 0.6\n";
        let t = read_token_table(text.as_bytes(), None, None).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.rank("rock"), Some(3));

        let keep: HashSet<String> = ["rock".to_string()].into();
        let t = read_token_table(text.as_bytes(), Some(&keep), None).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.rank("rock"), Some(3));

        let t = read_token_table(text.as_bytes(), None, Some(2)).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.vector("rock").is_none());
    }

    #[test]
    fn duplicate_embedding_ids_rejected() {
        assert!(read_embeddings("2 1\na 1\na 2\n".as_bytes()).is_err());
    }
}
