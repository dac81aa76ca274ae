//! Dataset loaders.
//!
//! Both loaders reject malformed records with the offending line number;
//! nothing is skipped silently.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::{Element, KeywordId, PayloadKind};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: duplicate element id {id}")]
    DuplicateId { line: u64, id: u64 },
    #[error("bad header: {0}")]
    Header(String),
}

fn malformed(line: u64, message: impl Into<String>) -> DataError {
    DataError::Malformed {
        line,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Keyword strings interned to dense ids in first-seen order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    ids: HashMap<String, KeywordId>,
    words: Vec<String>,
}

impl Vocabulary {
    pub fn intern(&mut self, word: &str) -> KeywordId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as KeywordId;
        self.ids.insert(word.to_owned(), id);
        self.words.push(word.to_owned());
        id
    }

    pub fn get(&self, word: &str) -> Option<KeywordId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: KeywordId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct TweetCorpus {
    pub elements: Vec<Element<f64>>,
    pub vocabulary: Vocabulary,
}

/// One line of a tweets file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: u64,
    pub keywords: Vec<String>,
    pub retweets: i64,
    pub source: u32,
}

/// Reads JSON-lines tweets `{"id", "keywords", "retweets", "source"}`.
///
/// Each tweet becomes a keyword bag with value `retweets / |keywords|`, the
/// count taken over distinct keywords. Blank lines are ignored.
pub fn load_tweets(path: &Path) -> Result<TweetCorpus, DataError> {
    parse_tweets(open(path)?)
}

pub fn parse_tweets<R: Read>(reader: R) -> Result<TweetCorpus, DataError> {
    let mut builder = TweetBuilder::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx as u64 + 1;
        let line = line.map_err(|e| malformed(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TweetRecord =
            serde_json::from_str(&line).map_err(|e| malformed(lineno, e.to_string()))?;
        builder.push(lineno, rec)?;
    }
    Ok(builder.finish())
}

/// Converts records in order, with the same checks as [`load_tweets`].
pub fn tweets_from_records(records: Vec<TweetRecord>) -> Result<TweetCorpus, DataError> {
    let mut builder = TweetBuilder::default();
    for (idx, rec) in records.into_iter().enumerate() {
        builder.push(idx as u64 + 1, rec)?;
    }
    Ok(builder.finish())
}

#[derive(Default)]
struct TweetBuilder {
    vocabulary: Vocabulary,
    elements: Vec<Element<f64>>,
    seen: HashSet<u64>,
}

impl TweetBuilder {
    fn push(&mut self, lineno: u64, rec: TweetRecord) -> Result<(), DataError> {
        if rec.keywords.is_empty() {
            return Err(malformed(lineno, "empty keyword list"));
        }
        if rec.retweets < 0 {
            return Err(malformed(lineno, format!("negative retweets {}", rec.retweets)));
        }
        if !self.seen.insert(rec.id) {
            return Err(DataError::DuplicateId {
                line: lineno,
                id: rec.id,
            });
        }
        let mut ids: Vec<KeywordId> = rec
            .keywords
            .iter()
            .map(|w| self.vocabulary.intern(w))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let value = rec.retweets as f64 / ids.len() as f64;
        self.elements
            .push(Element::keywords(rec.id, ids, value).with_source(rec.source));
        Ok(())
    }

    fn finish(self) -> TweetCorpus {
        TweetCorpus {
            elements: self.elements,
            vocabulary: self.vocabulary,
        }
    }
}

/// Reads embedding vectors from CSV with header `id,source,x0,...,x{d-1}`.
pub fn load_vectors(path: &Path) -> Result<Vec<Element<f64>>, DataError> {
    parse_vectors(open(path)?)
}

pub fn parse_vectors<R: Read>(reader: R) -> Result<Vec<Element<f64>>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| DataError::Header(e.to_string()))?
        .clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "id" || cols[1] != "source" {
        return Err(DataError::Header(format!(
            "expected id,source,x0,..., got {}",
            cols.join(",")
        )));
    }
    let d = cols.len() - 2;
    for (j, c) in cols[2..].iter().enumerate() {
        if *c != format!("x{j}") {
            return Err(DataError::Header(format!("column {} should be x{j}, got {c}", j + 2)));
        }
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != d + 2 {
            return Err(malformed(line, format!("expected {} fields, found {}", d + 2, row.len())));
        }
        let id: u64 = row[0]
            .trim()
            .parse()
            .map_err(|_| malformed(line, format!("bad id {:?}", &row[0])))?;
        let source: u32 = row[1]
            .trim()
            .parse()
            .map_err(|_| malformed(line, format!("bad source {:?}", &row[1])))?;
        let mut coords = Vec::with_capacity(d);
        for field in row.iter().skip(2) {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| malformed(line, format!("bad coordinate {field:?}")))?;
            if !x.is_finite() {
                return Err(malformed(line, format!("non-finite coordinate {field}")));
            }
            coords.push(x);
        }
        if !seen.insert(id) {
            return Err(DataError::DuplicateId { line, id });
        }
        out.push(Element::embedding(id, coords).with_source(source));
    }
    Ok(out)
}

/// Short description of a loaded ground set, used by `validate`.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSummary {
    pub elements: usize,
    pub kind: Option<PayloadKind>,
    pub sources: usize,
    pub dimension: Option<usize>,
}

pub fn summarize(elements: &[Element<f64>]) -> DatasetSummary {
    let sources: HashSet<u32> = elements.iter().map(|e| e.source).collect();
    let dimension = elements.first().and_then(|e| match &e.payload {
        crate::element::Payload::Embedding(v) => Some(v.coords.len()),
        _ => None,
    });
    DatasetSummary {
        elements: elements.len(),
        kind: elements.first().map(Element::kind),
        sources: sources.len(),
        dimension,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Payload;

    #[test]
    fn tweet_value_is_retweets_per_keyword() {
        let text = r#"{"id": 1, "keywords": ["a", "b"], "retweets": 8, "source": 3}
{"id": 2, "keywords": ["b"], "retweets": 0, "source": 0}
"#;
        let corpus = parse_tweets(text.as_bytes()).unwrap();
        assert_eq!(corpus.elements.len(), 2);
        match &corpus.elements[0].payload {
            Payload::Keywords(bag) => {
                assert_eq!(bag.value, 4.0);
                assert_eq!(bag.keywords, vec![0, 1]);
            }
            _ => panic!("wrong payload"),
        }
        assert_eq!(corpus.elements[0].source, 3);
        assert_eq!(corpus.vocabulary.get("b"), Some(1));
        assert_eq!(corpus.vocabulary.word(0), Some("a"));
    }

    #[test]
    fn empty_file_is_empty_ground_set() {
        assert!(parse_tweets(&b""[..]).unwrap().elements.is_empty());
    }

    #[test]
    fn tweet_errors_name_the_line() {
        let dup = "{\"id\": 1, \"keywords\": [\"a\"], \"retweets\": 1, \"source\": 0}\n\
                   {\"id\": 1, \"keywords\": [\"b\"], \"retweets\": 1, \"source\": 0}\n";
        assert!(matches!(
            parse_tweets(dup.as_bytes()),
            Err(DataError::DuplicateId { line: 2, id: 1 })
        ));
        let empty = "{\"id\": 1, \"keywords\": [], \"retweets\": 1, \"source\": 0}";
        assert!(matches!(parse_tweets(empty.as_bytes()), Err(DataError::Malformed { line: 1, .. })));
        let neg = "{\"id\": 1, \"keywords\": [\"a\"], \"retweets\": -2, \"source\": 0}";
        assert!(matches!(parse_tweets(neg.as_bytes()), Err(DataError::Malformed { line: 1, .. })));
        let missing = "\n{\"id\": 1, \"keywords\": [\"a\"], \"source\": 0}";
        assert!(matches!(parse_tweets(missing.as_bytes()), Err(DataError::Malformed { line: 2, .. })));
    }

    #[test]
    fn vectors_infer_dimension() {
        let text = "id,source,x0,x1,x2,x3\n1,0,0.5,1,2,3\n2,1,1,1,1,1\n";
        let v = parse_vectors(text.as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(summarize(&v).dimension, Some(4));
        assert_eq!(summarize(&v).sources, 2);
        let one = parse_vectors("id,source,x0\n7,0,1.5\n".as_bytes()).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn vector_errors() {
        let nan = "id,source,x0,x1\n1,0,NaN,1\n";
        assert!(matches!(parse_vectors(nan.as_bytes()), Err(DataError::Malformed { line: 2, .. })));
        let ragged = "id,source,x0,x1\n1,0,1,1\n2,0,1\n";
        assert!(matches!(parse_vectors(ragged.as_bytes()), Err(DataError::Malformed { .. })));
        let header = "id,src,x0\n1,0,1\n";
        assert!(matches!(parse_vectors(header.as_bytes()), Err(DataError::Header(_))));
    }
}
