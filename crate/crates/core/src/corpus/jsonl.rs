use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotatedSentence, Corpus, CorpusError, EventAnnotation, Token, Violation};

/// One line of the corpus file: parallel token arrays plus events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub tokens: Vec<String>,
    pub pos: Vec<String>,
    pub dep: Vec<String>,
    pub head: Vec<usize>,
    pub ner: Vec<String>,
    #[serde(default)]
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub verb_index: usize,
    #[serde(default)]
    pub location_indices: Vec<usize>,
}

impl SentenceRecord {
    /// Converts to a sentence, reporting arrays whose length disagrees with `tokens`.
    pub fn into_sentence(self) -> Result<AnnotatedSentence, Vec<Violation>> {
        let n = self.tokens.len();
        let mut bad = Vec::new();
        for (field, len) in [
            ("pos", self.pos.len()),
            ("dep", self.dep.len()),
            ("head", self.head.len()),
            ("ner", self.ner.len()),
        ] {
            if len != n {
                bad.push(Violation::LengthMismatch {
                    field,
                    expected: n,
                    found: len,
                });
            }
        }
        if !bad.is_empty() {
            return Err(bad);
        }
        let tokens = self
            .tokens
            .into_iter()
            .zip(self.pos)
            .zip(self.dep)
            .zip(self.head)
            .zip(self.ner)
            .enumerate()
            .map(|(index, ((((text, pos), dep), head), ner))| Token {
                index,
                text,
                pos,
                dep,
                head,
                ner,
            })
            .collect();
        let events = self
            .events
            .into_iter()
            .map(|e| EventAnnotation::new(e.verb_index, e.location_indices))
            .collect();
        Ok(AnnotatedSentence {
            id: self.id,
            source: self.source,
            tokens,
            events,
        })
    }
}

impl From<&AnnotatedSentence> for SentenceRecord {
    fn from(s: &AnnotatedSentence) -> Self {
        SentenceRecord {
            id: s.id.clone(),
            source: s.source.clone(),
            tokens: s.tokens.iter().map(|t| t.text.clone()).collect(),
            pos: s.tokens.iter().map(|t| t.pos.clone()).collect(),
            dep: s.tokens.iter().map(|t| t.dep.clone()).collect(),
            head: s.tokens.iter().map(|t| t.head).collect(),
            ner: s.tokens.iter().map(|t| t.ner.clone()).collect(),
            events: s
                .events
                .iter()
                .map(|e| EventRecord {
                    verb_index: e.verb_index,
                    location_indices: e.location_indices.iter().copied().collect(),
                })
                .collect(),
        }
    }
}

/// Reads a JSONL corpus, validating every sentence. Errors carry 1-based line numbers.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let mut corpus = parse_corpus(BufReader::new(file))?;
    corpus.provenance = path.display().to_string();
    Ok(corpus)
}

pub fn parse_corpus(reader: impl BufRead) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        let sentence_index = sentences.len();
        let sentence = record
            .into_sentence()
            .map_err(|violations| CorpusError::Invalid {
                sentence: sentence_index,
                line: Some(line_no),
                violations,
            })?;
        let violations = sentence.validate();
        if !violations.is_empty() {
            return Err(CorpusError::Invalid {
                sentence: sentence_index,
                line: Some(line_no),
                violations,
            });
        }
        sentences.push(sentence);
    }
    Ok(Corpus {
        sentences,
        provenance: String::new(),
    })
}

/// Checks every line instead of stopping at the first problem. Returns the
/// number of non-empty lines and one error per bad line.
pub fn scan_corpus(reader: impl BufRead) -> Result<(usize, Vec<CorpusError>), CorpusError> {
    let mut problems = Vec::new();
    let mut count = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sentence = count;
        count += 1;
        let parsed = serde_json::from_str::<SentenceRecord>(&line)
            .map_err(|e| CorpusError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
            .and_then(|r| {
                let s = r.into_sentence().map_err(|violations| CorpusError::Invalid {
                    sentence,
                    line: Some(i + 1),
                    violations,
                })?;
                let violations = s.validate();
                if violations.is_empty() {
                    Ok(())
                } else {
                    Err(CorpusError::Invalid {
                        sentence,
                        line: Some(i + 1),
                        violations,
                    })
                }
            });
        if let Err(e) = parsed {
            problems.push(e);
        }
    }
    Ok((count, problems))
}

/// Parses one sentence object (events optional) and validates it.
pub fn read_sentence_json(json: &str) -> Result<AnnotatedSentence, CorpusError> {
    let record: SentenceRecord = serde_json::from_str(json).map_err(|e| CorpusError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let sentence = record
        .into_sentence()
        .map_err(|violations| CorpusError::Invalid {
            sentence: 0,
            line: Some(1),
            violations,
        })?;
    let violations = sentence.validate();
    if !violations.is_empty() {
        return Err(CorpusError::Invalid {
            sentence: 0,
            line: Some(1),
            violations,
        });
    }
    Ok(sentence)
}

pub fn write_corpus(corpus: &Corpus, mut writer: impl Write) -> Result<(), CorpusError> {
    for s in &corpus.sentences {
        let line = serde_json::to_string(&SentenceRecord::from(s))
            .map_err(|e| CorpusError::Io(std::io::Error::other(e)))?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let file = File::create(path)?;
    write_corpus(corpus, BufWriter::new(file))
}
