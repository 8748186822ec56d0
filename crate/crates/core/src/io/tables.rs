//! Tab-separated score, ground-truth, fold and per-tag report files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::eval::FoldAssignment;
use crate::mapping::{LabelMatrix, ScoreMatrix};

const CORNER: &str = "item_id";

fn write_header(w: &mut impl Write, tags: &[String]) -> Result<()> {
    write!(w, "{CORNER}")?;
    for t in tags {
        write!(w, "\t{t}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_scores(m: &ScoreMatrix, mut w: impl Write) -> Result<()> {
    write_header(&mut w, &m.tags)?;
    for (id, row) in m.item_ids.iter().zip(&m.rows) {
        write!(w, "{id}")?;
        for x in row {
            write!(w, "\t{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_labels(m: &LabelMatrix, mut w: impl Write) -> Result<()> {
    write_header(&mut w, &m.tags)?;
    for (id, row) in m.item_ids.iter().zip(&m.rows) {
        write!(w, "{id}")?;
        for &x in row {
            write!(w, "\t{}", u8::from(x))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Column headers, row ids and cells of an id-keyed table.
type Table<T> = (Vec<String>, Vec<String>, Vec<Vec<T>>);

fn read_table<T>(reader: impl BufRead, parse: impl Fn(&str) -> Option<T>) -> Result<Table<T>> {
    let mut lines = reader.lines().enumerate();
    let tags: Vec<String> = match lines.next() {
        Some((_, header)) => header?.trim_end_matches('\r').split('\t').skip(1).map(str::to_string).collect(),
        None => return Ok((Vec::new(), Vec::new(), Vec::new())),
    };
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (n, line) in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != tags.len() + 1 {
            return Err(Error::parse(n + 1, format!("expected {} columns, found {}", tags.len() + 1, fields.len())));
        }
        let row = fields[1..]
            .iter()
            .map(|f| parse(f).ok_or_else(|| Error::parse(n + 1, format!("bad value `{f}`"))))
            .collect::<Result<Vec<T>>>()?;
        ids.push(fields[0].to_string());
        rows.push(row);
    }
    Ok((ids, tags, rows))
}

pub fn read_scores(reader: impl BufRead) -> Result<ScoreMatrix> {
    let (item_ids, tags, rows) = read_table(reader, |f| f.parse::<f64>().ok())?;
    Ok(ScoreMatrix { item_ids, tags, rows })
}

pub fn read_labels(reader: impl BufRead) -> Result<LabelMatrix> {
    let (item_ids, tags, rows) = read_table(reader, |f| match f {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })?;
    Ok(LabelMatrix { item_ids, tags, rows })
}

pub fn write_folds(item_ids: &[String], folds: &FoldAssignment, mut w: impl Write) -> Result<()> {
    for (id, f) in item_ids.iter().zip(&folds.fold_of) {
        writeln!(w, "{id}\t{f}")?;
    }
    Ok(())
}

/// `tag<TAB>auc`, with `NA` for tags whose AUC is undefined.
pub fn write_tag_auc(rows: &[(String, Option<f64>)], mut w: impl Write) -> Result<()> {
    writeln!(w, "tag\tauc")?;
    for (tag, auc) in rows {
        match auc {
            Some(a) => writeln!(w, "{tag}\t{a}")?,
            None => writeln!(w, "{tag}\tNA")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_and_label_tables_round_trip() {
        let scores = ScoreMatrix {
            item_ids: vec!["a".into(), "b".into()],
            tags: vec!["rock".into(), "hip hop".into()],
            rows: vec![vec![0.1, -2.0 / 3.0], vec![1.0, 0.0]],
        };
        let mut buf = Vec::new();
        write_scores(&scores, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("item_id\trock\thip hop\n"));
        assert_eq!(read_scores(buf.as_slice()).unwrap(), scores);

        let labels = LabelMatrix {
            item_ids: scores.item_ids.clone(),
            tags: scores.tags.clone(),
            rows: vec![vec![true, false], vec![false, false]],
        };
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(read_labels(buf.as_slice()).unwrap(), labels);
        assert!(read_labels("item_id\tx\na\t2\n".as_bytes()).is_err());
    }
}
