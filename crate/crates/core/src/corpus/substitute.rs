//! Rewrite a corpus so every entity mention becomes a single synthetic token
//! naming its role. Training on this stream is how role tokens acquire
//! vector representations in the same space as ordinary words.

use super::AnnotatedCorpus;

/// Emit the corpus as sentences of normalized tokens where each mention span
/// is collapsed to its role token (for example `<ORG_Accused>`). Non-mention
/// tokens pass through normalized; tokens removed by preprocessing are
/// skipped. Document and sentence order is preserved.
pub fn substitute_roles(corpus: &AnnotatedCorpus) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    for doc in corpus.documents() {
        let owner = doc.span_ownership();
        for (si, sent) in doc.sentences.iter().enumerate() {
            let mut out = Vec::with_capacity(sent.len());
            for (ti, tok) in sent.iter().enumerate() {
                match owner[si][ti] {
                    Some(mi) => {
                        let m = &doc.mentions[mi];
                        if ti == m.span.start {
                            out.push(m.role.token());
                        }
                    }
                    None => {
                        if !tok.normalized.is_empty() {
                            out.push(tok.normalized.clone());
                        }
                    }
                }
            }
            sentences.push(out);
        }
    }
    sentences
}
