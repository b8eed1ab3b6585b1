//! Whitespace-token chunking.

/// Groups whitespace tokens into consecutive runs of exactly `chunk_size`
/// tokens (the final chunk may be shorter), rejoined with single spaces.
/// Empty text produces no chunks.
///
/// `chunk_size` must be >= 1.
pub fn chunk_document(text: &str, chunk_size: usize) -> Vec<String> {
    assert!(chunk_size >= 1, "chunk_size must be >= 1");
    let tokens: Vec<&str> = text.split_whitespace().collect();
    tokens
        .chunks(chunk_size)
        .map(|run| run.join(" "))
        .collect()
}

/// Whitespace token count, the unit `chunk_document` groups by.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn chunk_lengths_follow_arithmetic() {
        let chunks = chunk_document(&words(130), 64);
        let lens: Vec<usize> = chunks.iter().map(|c| token_count(c)).collect();
        assert_eq!(lens, vec![64, 64, 2]);
    }

    #[test]
    fn exact_multiple_is_single_chunk() {
        let chunks = chunk_document(&words(64), 64);
        assert_eq!(chunks.len(), 1);
        assert_eq!(token_count(&chunks[0]), 64);
    }

    #[test]
    fn empty_text_has_no_chunks() {
        assert!(chunk_document("", 64).is_empty());
        assert!(chunk_document("  \n\t ", 64).is_empty());
    }

    #[test]
    fn chunks_rejoin_to_token_sequence() {
        let text = "  a\tb \n c d   e ";
        let chunks = chunk_document(text, 2);
        let rejoined = chunks.join(" ");
        let original: Vec<&str> = text.split_whitespace().collect();
        assert_eq!(rejoined, original.join(" "));
    }
}
