/// Counts prompt tokens. Implementations must be deterministic.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// Vocabulary-free estimate of a subword tokenizer.
///
/// Every maximal run of alphanumeric characters is a word; every other
/// non-whitespace character is one punctuation token. The count is the
/// number of punctuation tokens plus the word count inflated by 1.3 and
/// rounded up:
///
/// ```text
/// count = punctuation + ceil(1.3 * words)
/// ```
///
/// so `"aaaa bbbb"` counts 3 and `"a, b."` counts 5.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EstimatingTokenizer;

impl EstimatingTokenizer {
    /// `(words, punctuation)` of `text`.
    pub fn pieces(text: &str) -> (usize, usize) {
        let mut words = 0;
        let mut punctuation = 0;
        let mut in_word = false;
        for c in text.chars() {
            if c.is_alphanumeric() {
                if !in_word {
                    words += 1;
                }
                in_word = true;
            } else {
                in_word = false;
                if !c.is_whitespace() {
                    punctuation += 1;
                }
            }
        }
        (words, punctuation)
    }
}

impl Tokenizer for EstimatingTokenizer {
    fn count(&self, text: &str) -> usize {
        let (words, punctuation) = Self::pieces(text);
        punctuation + (13 * words).div_ceil(10)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_values() {
        let t = EstimatingTokenizer;
        assert_eq!(t.count(""), 0);
        assert_eq!(t.count("aaaa bbbb"), 3);
        assert_eq!(t.count("a, b."), 5);
        assert_eq!(t.count("### Response\n"), 5);
        assert_eq!(t.count("é1x"), 2);
    }

    proptest! {
        #[test]
        fn monotone_under_concatenation(a in "[a-c ,.\n]{0,30}", b in "[a-c ,.\n]{0,30}") {
            let t = EstimatingTokenizer;
            let joined = t.count(&format!("{a}{b}"));
            prop_assert!(joined >= t.count(&a).max(t.count(&b)));
        }
    }
}
