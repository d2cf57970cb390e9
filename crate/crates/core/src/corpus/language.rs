/// Texts shorter than this (in characters) are kept without detection.
pub const MIN_TEXT_CHARS: usize = 20;

/// Minimum share of stopword tokens for a text to count as English.
pub const STOPWORD_RATIO: f64 = 0.18;

/// The 100 most frequent English words.
pub const ENGLISH_STOPWORDS: [&str; 100] = [
    "the", "be", "to", "of", "and", "a", "in", "that", "have", "i", "it", "for", "not", "on", "with",
    "he", "as", "you", "do", "at", "this", "but", "his", "by", "from", "they", "we", "say", "her",
    "she", "or", "an", "will", "my", "one", "all", "would", "there", "their", "what", "so", "up",
    "out", "if", "about", "who", "get", "which", "go", "me", "when", "make", "can", "like", "time",
    "no", "just", "him", "know", "take", "people", "into", "year", "your", "good", "some", "could",
    "them", "see", "other", "than", "then", "now", "look", "only", "come", "its", "over", "think",
    "also", "back", "after", "use", "two", "how", "our", "work", "first", "well", "way", "even",
    "new", "want", "because", "any", "these", "give", "day", "most", "us",
];

pub trait LanguageDetector: Send + Sync {
    fn is_english(&self, text: &str) -> bool;
}

/// Classifies a text as English when enough of its word tokens are common
/// English function words.
#[derive(Debug, Clone, Copy)]
pub struct StopwordDetector {
    pub min_ratio: f64,
}

impl Default for StopwordDetector {
    fn default() -> Self {
        StopwordDetector {
            min_ratio: STOPWORD_RATIO,
        }
    }
}

impl StopwordDetector {
    pub fn stopword_ratio(text: &str) -> f64 {
        let mut total = 0usize;
        let mut hits = 0usize;
        for token in text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty()) {
            total += 1;
            let lower = token.to_lowercase();
            if ENGLISH_STOPWORDS.contains(&lower.as_str()) {
                hits += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64
        }
    }
}

impl LanguageDetector for StopwordDetector {
    fn is_english(&self, text: &str) -> bool {
        if text.chars().count() < MIN_TEXT_CHARS {
            return true;
        }
        Self::stopword_ratio(text) >= self.min_ratio
    }
}

/// Language filter with the default stopword detector.
pub fn is_english(text: &str) -> bool {
    StopwordDetector::default().is_english(text)
}
