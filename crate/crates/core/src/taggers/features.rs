//! Fixed word-feature template: the lowercased word, its first three
//! letters, an all-caps flag, and an initial-capital flag — for the current
//! word and both neighbors. Out-of-sentence neighbors contribute a boundary
//! sentinel word feature only.

const PREFIXES: [&str; 3] = ["-1", "0", "+1"];

pub fn position_features(tokens: &[String], position: usize) -> Vec<String> {
    let mut features = Vec::with_capacity(12);
    for (slot, prefix) in [-1i64, 0, 1].into_iter().zip(PREFIXES) {
        let index = position as i64 + slot;
        if index < 0 {
            features.push(format!("{prefix}:w=<s>"));
            continue;
        }
        let Some(word) = tokens.get(index as usize) else {
            features.push(format!("{prefix}:w=</s>"));
            continue;
        };
        let lower = word.to_lowercase();
        features.push(format!("{prefix}:w={lower}"));
        let p3: String = lower.chars().take(3).collect();
        features.push(format!("{prefix}:p3={p3}"));
        let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
        let has_letters = letters.peek().is_some();
        if has_letters && word.chars().filter(|c| c.is_alphabetic()).all(|c| c.is_uppercase()) {
            features.push(format!("{prefix}:caps"));
        }
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            if first.is_uppercase() && chars.all(|c| !c.is_uppercase()) {
                features.push(format!("{prefix}:icap"));
            }
        }
    }
    features
}
