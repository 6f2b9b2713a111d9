//! Finds article citations in amending text and resolves them against a
//! small corpus.
//!
//! cargo run -p lexcons --example extract_references

use lexcons::references::{extract_references, Corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/corpus.jsonl");
    let mut corpus = Corpus::load_jsonl(path)?;
    corpus.add_alias("the said Law", "Law of 12 March 1990")?;
    let aliases = corpus.alias_table();

    let texts = [
        "Article 10 of the Law of 12 March 1990 is amended as follows:",
        "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 is replaced by the following provisions:",
        "In Article 4 of the said Law, the words « in public » are deleted.",
        "Articles 7 and 12 of the Law of 12 March 1990 are repealed.",
        "The words « Article 99 » are replaced by the words « Article 100 ».",
    ];
    for text in texts {
        println!("{text}");
        let found = extract_references(text, &aliases);
        if found.is_empty() {
            println!("  (no reference outside quotations)");
        }
        for reference in &found {
            let outcome = match corpus.resolve(reference) {
                Ok(article) => format!("resolved, {} paragraph(s)", article.paragraphs().len()),
                Err(e) => format!("unresolved: {e}"),
            };
            println!("  {reference} [{}..{}] {outcome}", reference.raw_span().start, reference.raw_span().end);
        }
    }
    Ok(())
}
