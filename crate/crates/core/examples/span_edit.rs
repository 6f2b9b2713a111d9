//! The two-span edit representation: derive deletion and addition spans
//! from a gold triplet, then rebuild the response from the spans alone.
//!
//! cargo run -p lexcons --example span_edit

use lexcons::span::{derive_labels, insert_nl, reconstruct, write_span_labels, SpanLabelRecord};
use lexcons::ConsolidationTriplet;

const EXISTING: &str = "the duties corresponding to the post of Chief State Public Works Engineer in the second group referred to in Article 8 of this Decree are, for the post reporting to the Minister for Foreign Affairs:\n\
Charged with the duties of Deputy Director of Real Estate Operations in the Real Estate Affairs Department within the General Administration Department.";

const MODIFICATION: &str = "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 is replaced by the following provisions:\n\
« Assistant to the Deputy Director of Real Estate Operations. »";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let first = EXISTING.split('\n').next().unwrap_or_default();
    let gold = format!("{first}\nAssistant to the Deputy Director of Real Estate Operations.");
    let triplet = ConsolidationTriplet::new(MODIFICATION, EXISTING, Some(gold.clone()))?;

    let labels = derive_labels(&triplet)?;
    let marked_input: Vec<char> = insert_nl(EXISTING).chars().collect();
    let marked_instruction: Vec<char> = insert_nl(MODIFICATION).chars().collect();
    let show = |chars: &[char], r: &std::ops::Range<usize>| chars[r.clone()].iter().collect::<String>();
    println!("deletion {:?}: {:?}", labels.deletion, show(&marked_input, &labels.deletion));
    println!("addition {:?}: {:?}", labels.addition, show(&marked_instruction, &labels.addition));

    let rebuilt = reconstruct(EXISTING, MODIFICATION, &labels)?;
    assert_eq!(rebuilt, gold);
    println!("\nreconstructed:\n{rebuilt}");

    // Span predictions are exchanged as JSONL keyed by triplet id.
    let path = std::env::temp_dir().join("lexcons-span-labels.jsonl");
    write_span_labels(&path, &[SpanLabelRecord::new("2.1", &labels)])?;
    println!("\nwrote {}", path.display());
    Ok(())
}
