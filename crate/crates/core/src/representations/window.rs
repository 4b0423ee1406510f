use crate::corpus::Document;

/// The normalized tokens feeding one mention's representation: the previous
/// and next `radius` tokens inside the mention's sentence, excluding the
/// entity's own tokens and anything preprocessing removed. At most
/// `2 * radius` tokens per contributing mention window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextWindow {
    pub mention_index: usize,
    pub tokens: Vec<String>,
}

/// Sentence-level context. Truncates silently at sentence boundaries.
pub fn extract_window(doc: &Document, mention_index: usize, radius: usize) -> ContextWindow {
    ContextWindow {
        mention_index,
        tokens: window_tokens(doc, mention_index, radius),
    }
}

fn window_tokens(doc: &Document, mention_index: usize, radius: usize) -> Vec<String> {
    let span = doc.mentions[mention_index].span;
    let sentence = &doc.sentences[span.sentence];
    let before = span.start.saturating_sub(radius)..span.start;
    let after = span.end + 1..(span.end + 1 + radius).min(sentence.len());
    before
        .chain(after)
        .map(|i| &sentence[i].normalized)
        .filter(|t| !t.is_empty())
        .cloned()
        .collect()
}

/// Document-level context: the windows of all earlier mentions of the same
/// entity, in document order, with this mention's own window last. Later
/// mentions never contribute to earlier ones.
pub fn extract_document_context(
    doc: &Document,
    mention_index: usize,
    radius: usize,
) -> ContextWindow {
    let key = &doc.mentions[mention_index].entity_key;
    let mut tokens = Vec::new();
    for (mi, m) in doc.mentions.iter().enumerate().take(mention_index + 1) {
        if &m.entity_key == key {
            tokens.extend(window_tokens(doc, mi, radius));
        }
    }
    ContextWindow {
        mention_index,
        tokens,
    }
}
