//! Column (CoNLL-style) corpus format used by the sequence taggers.
//!
//! One token per line as `SURFACE<TAB>TAG`, a blank line between sentences,
//! and `-DOCSTART- <id>` lines between documents. Tags are `B-<Role>`,
//! `I-<Role>` or `O`. Converting to the canonical format synthesizes one
//! entity key per contiguous span: the column format carries no coreference.

use std::fs;
use std::path::Path;

use super::{AnnotatedCorpus, CorpusError, Document, EntityMention, RoleLabel, Span, Token};

const DOCSTART: &str = "-DOCSTART-";

pub fn load_column(path: impl AsRef<Path>) -> Result<AnnotatedCorpus, CorpusError> {
    let text = fs::read_to_string(path)?;
    parse_column(&text)
}

pub fn parse_column(text: &str) -> Result<AnnotatedCorpus, CorpusError> {
    let mut documents: Vec<Document> = Vec::new();
    let mut doc: Option<DocBuilder> = None;
    let mut sentence: Vec<(String, Tag)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix(DOCSTART) {
            if let Some(mut d) = doc.take() {
                d.flush_sentence(&mut sentence);
                documents.push(d.finish());
            }
            let id = rest.trim();
            let id = if id.is_empty() {
                format!("doc{}", documents.len())
            } else {
                id.to_string()
            };
            doc = Some(DocBuilder::new(id));
            continue;
        }
        if line.trim().is_empty() {
            if let Some(d) = doc.as_mut() {
                d.flush_sentence(&mut sentence);
            }
            continue;
        }
        let (surface, tag) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
            line: lineno + 1,
            message: "expected SURFACE<TAB>TAG".into(),
        })?;
        let tag = parse_tag(tag).map_err(|message| CorpusError::Parse {
            line: lineno + 1,
            message,
        })?;
        if doc.is_none() {
            doc = Some(DocBuilder::new(format!("doc{}", documents.len())));
        }
        sentence.push((surface.to_string(), tag));
    }
    if let Some(mut d) = doc.take() {
        d.flush_sentence(&mut sentence);
        documents.push(d.finish());
    }
    AnnotatedCorpus::new(documents)
}

pub fn to_column_string(corpus: &AnnotatedCorpus) -> String {
    let mut out = String::new();
    for doc in corpus.documents() {
        out.push_str(DOCSTART);
        out.push(' ');
        out.push_str(&doc.id);
        out.push_str("\n\n");
        let owner = doc.span_ownership();
        for (si, sent) in doc.sentences.iter().enumerate() {
            for (ti, tok) in sent.iter().enumerate() {
                let tag = match owner[si][ti] {
                    Some(mi) => {
                        let m = &doc.mentions[mi];
                        if ti == m.span.start {
                            format!("B-{}", m.role)
                        } else {
                            format!("I-{}", m.role)
                        }
                    }
                    None => "O".to_string(),
                };
                out.push_str(&tok.surface);
                out.push('\t');
                out.push_str(&tag);
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}

pub fn save_column(corpus: &AnnotatedCorpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    fs::write(path, to_column_string(corpus))?;
    Ok(())
}

#[derive(Clone, PartialEq)]
enum Tag {
    Outside,
    Begin(RoleLabel),
    Inside(RoleLabel),
}

fn parse_tag(s: &str) -> Result<Tag, String> {
    if s == "O" {
        return Ok(Tag::Outside);
    }
    if let Some(role) = s.strip_prefix("B-") {
        return role
            .parse()
            .map(Tag::Begin)
            .map_err(|_| format!("unknown role in tag {s:?}"));
    }
    if let Some(role) = s.strip_prefix("I-") {
        return role
            .parse()
            .map(Tag::Inside)
            .map_err(|_| format!("unknown role in tag {s:?}"));
    }
    Err(format!("malformed tag {s:?}"))
}

struct DocBuilder {
    id: String,
    sentences: Vec<Vec<Token>>,
    mentions: Vec<EntityMention>,
    next_entity: usize,
}

impl DocBuilder {
    fn new(id: String) -> Self {
        DocBuilder {
            id,
            sentences: Vec::new(),
            mentions: Vec::new(),
            next_entity: 0,
        }
    }

    fn flush_sentence(&mut self, sentence: &mut Vec<(String, Tag)>) {
        if sentence.is_empty() {
            return;
        }
        let si = self.sentences.len();
        let mut open: Option<(usize, RoleLabel)> = None;
        for (ti, (_, tag)) in sentence.iter().enumerate() {
            match tag {
                Tag::Outside => {
                    self.close(si, ti, &mut open);
                }
                Tag::Begin(role) => {
                    self.close(si, ti, &mut open);
                    open = Some((ti, *role));
                }
                Tag::Inside(role) => match open {
                    // A dangling I-X (after O or a different role) starts a
                    // fresh span, mirroring the taggers' repair convention.
                    Some((_, r)) if r == *role => {}
                    _ => {
                        self.close(si, ti, &mut open);
                        open = Some((ti, *role));
                    }
                },
            }
        }
        let end = sentence.len();
        self.close(si, end, &mut open);
        self.sentences
            .push(sentence.drain(..).map(|(s, _)| Token::new(s)).collect());
    }

    fn close(&mut self, sentence: usize, upto: usize, open: &mut Option<(usize, RoleLabel)>) {
        if let Some((start, role)) = open.take() {
            self.mentions.push(EntityMention {
                entity_key: format!("e{}", self.next_entity),
                span: Span {
                    sentence,
                    start,
                    end: upto - 1,
                },
                role,
                mention_ordinal: 0,
            });
            self.next_entity += 1;
        }
    }

    fn finish(self) -> Document {
        Document {
            id: self.id,
            sentences: self.sentences,
            mentions: self.mentions,
        }
    }
}
