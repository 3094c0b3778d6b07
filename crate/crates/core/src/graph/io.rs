use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{CitationEdge, CitationNetwork, Paper};
use crate::error::{GladError, Result};

pub const PAPERS_FILE: &str = "papers.jsonl";
pub const CITATIONS_FILE: &str = "citations.jsonl";

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| GladError::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub(crate) fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a T>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_papers(path: &Path) -> Result<Vec<Paper>> {
    read_jsonl(path)
}

pub fn read_citations(path: &Path) -> Result<Vec<CitationEdge>> {
    read_jsonl(path)
}

pub fn write_papers(path: &Path, papers: &[Paper]) -> Result<()> {
    write_jsonl(path, papers)
}

pub fn write_citations(path: &Path, edges: &[CitationEdge]) -> Result<()> {
    write_jsonl(path, edges)
}

pub fn build_network(papers_file: &Path, citations_file: &Path) -> Result<CitationNetwork> {
    let papers = read_papers(papers_file)?;
    let edges = read_citations(citations_file)?;
    CitationNetwork::new(papers, edges)
}

/// Writes `papers.jsonl` and `citations.jsonl` into `dir`.
pub fn write_network(net: &CitationNetwork, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_papers(&dir.join(PAPERS_FILE), net.papers())?;
    write_citations(&dir.join(CITATIONS_FILE), net.edges())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeLabel;

    #[test]
    fn parse_error_carries_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        std::fs::write(
            &p,
            "{\"src\":\"a\",\"dst\":\"b\",\"context\":\"\",\"label\":0}\n\n{\"src\":\"a\",\"label\":7}\n",
        )
        .unwrap();
        match read_citations(&p) {
            Err(GladError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn roundtrip_through_files() {
        let papers = vec![
            Paper {
                id: "p1".into(),
                title: "One".into(),
                abstract_text: "alpha beta".into(),
                journal_id: "J1".into(),
                year: 2001,
                author_ids: vec!["x".into(), "y".into()],
                institution_ids: vec!["i1".into()],
                reference_ids: vec!["p2".into(), "ext".into()],
            },
            Paper {
                id: "p2".into(),
                title: "Two, \"quoted\"".into(),
                abstract_text: String::new(),
                journal_id: "J2".into(),
                year: 1999,
                author_ids: vec!["z".into()],
                institution_ids: vec![],
                reference_ids: vec![],
            },
        ];
        let edges = vec![CitationEdge {
            src: "p1".into(),
            dst: "p2".into(),
            context: "We use [REF], then\ttab".into(),
            label: EdgeLabel::Anomalous,
        }];
        let net = CitationNetwork::new(papers, edges).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_network(&net, dir.path()).unwrap();
        let back = build_network(
            &dir.path().join(PAPERS_FILE),
            &dir.path().join(CITATIONS_FILE),
        )
        .unwrap();
        assert_eq!(back.papers(), net.papers());
        assert_eq!(back.edges(), net.edges());
        let report = back.validate();
        assert_eq!(report.missing_abstracts, vec!["p2".to_string()]);
        assert_eq!(report.external_references, 1);
    }
}
