use std::num::NonZeroUsize;

const ENGLISH: [&str; 20] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth",
    "eighteenth", "nineteenth", "twentieth",
];

const FRENCH: [&str; 20] = [
    "premier", "deuxième", "troisième", "quatrième", "cinquième", "sixième", "septième", "huitième",
    "neuvième", "dixième", "onzième", "douzième", "treizième", "quatorzième", "quinzième",
    "seizième", "dix-septième", "dix-huitième", "dix-neuvième", "vingtième",
];

/// Alternation matching every ordinal word understood by [`parse`], longest
/// forms first so that "dix-septième" wins over "septième".
pub(crate) fn pattern() -> String {
    let mut words: Vec<&str> = ENGLISH.iter().chain(FRENCH.iter()).copied().collect();
    words.extend(["première", "second", "seconde", "1er", "1re"]);
    words.sort_by_key(|w| std::cmp::Reverse(w.chars().count()));
    words.dedup();
    words.join("|")
}

pub(crate) fn parse(word: &str) -> Option<NonZeroUsize> {
    let lowered = word.to_lowercase();
    let n = match lowered.as_str() {
        "première" | "1er" | "1re" => 1,
        "seconde" => 2,
        w => {
            ENGLISH
                .iter()
                .position(|e| *e == w)
                .or_else(|| FRENCH.iter().position(|f| *f == w))?
                + 1
        }
    };
    NonZeroUsize::new(n)
}

/// English ordinal word, or "<n>th" past twenty.
pub(crate) fn english(n: NonZeroUsize) -> String {
    ENGLISH
        .get(n.get() - 1)
        .map_or_else(|| format!("{n}th"), |w| (*w).to_owned())
}
