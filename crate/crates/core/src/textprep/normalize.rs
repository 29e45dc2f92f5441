use super::PrepOptions;

/// Shortest token kept by [`normalize`].
pub const MIN_TOKEN_LEN: usize = 2;

/// True for non-empty strings of ASCII lowercase letters.
pub fn is_token(word: &str) -> bool {
    !word.is_empty() && word.bytes().all(|b| b.is_ascii_lowercase())
}

pub(crate) fn fold_apostrophes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}', '`'], "'")
}

/// Splits on every character that is not an ASCII lowercase letter.
pub fn split_alphabetic(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_ascii_lowercase())
        .filter(|w| !w.is_empty())
}

/// Lowercases `text`, expands abbreviations, strips everything that is not a
/// letter and removes stop words and one-letter fragments. Token order is
/// preserved.
pub fn normalize(text: &str, options: &PrepOptions) -> Vec<String> {
    let lowered = fold_apostrophes(&text.to_lowercase());
    let mut tokens = Vec::new();
    let mut keep = |word: &str| {
        if word.len() >= MIN_TOKEN_LEN && !options.stop_list.contains(word) {
            tokens.push(word.to_owned());
        }
    };
    // Chunks keep apostrophes so contractions can be looked up before the
    // apostrophe is stripped.
    for chunk in lowered
        .split(|c: char| !(c.is_ascii_lowercase() || c == '\''))
        .map(|c| c.trim_matches('\''))
        .filter(|c| !c.is_empty())
    {
        match options.abbreviation_map.get(chunk) {
            Some(expansion) => split_alphabetic(expansion).for_each(&mut keep),
            None => split_alphabetic(chunk).for_each(&mut keep),
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn lowercases_and_strips() {
        let options = PrepOptions::bare().with_stop_words(["the", "was"]);
        assert_eq!(
            normalize("The food was GREAT!!!", &options),
            ["food", "great"]
        );
    }

    #[test]
    fn empty_text() {
        assert!(normalize("", &PrepOptions::default()).is_empty());
    }

    #[test]
    fn expansion_precedes_stripping() {
        let mut options = PrepOptions::bare().with_stop_words(["do", "not"]);
        options.abbreviation_map = HashMap::from([("don't".to_owned(), "do not".to_owned())]);
        assert!(normalize("don't", &options).is_empty());
        assert!(normalize("DON\u{2019}T", &options).is_empty());
        assert_eq!(normalize("'don't'", &options), Vec::<String>::new());
    }

    #[test]
    fn unmapped_contraction_splits() {
        assert_eq!(normalize("shan't", &PrepOptions::bare()), ["shan"]);
    }

    #[test]
    fn digits_split_words_and_short_fragments_drop() {
        assert_eq!(
            normalize("b4 the 2nd visit, 10/10 w0w", &PrepOptions::bare()),
            ["the", "nd", "visit"]
        );
    }

    #[test]
    fn non_ascii_letters_split() {
        assert_eq!(
            normalize("café crème", &PrepOptions::bare()),
            ["caf", "cr", "me"]
        );
    }

    #[test]
    fn default_options_drop_english_stop_words() {
        assert_eq!(
            normalize("I can't believe it's not butter", &PrepOptions::default()),
            ["believe", "butter"]
        );
    }
}
