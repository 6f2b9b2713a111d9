//! Word error, normalized correctness, the rate table and the
//! correctness-by-length curve over a handful of records.
//!
//! cargo run -p lexcons --example evaluate

use std::collections::HashMap;

use lexcons::evaluation::{consolidation_report, curve_csv, is_correct, word_diff, word_error, DiffHunk};
use lexcons::{Backend, ConsolidationRecord, ConsolidationTriplet, GateOutcome};

fn record(id: &str, backend: Backend, prediction: Option<&str>, tokens: usize) -> ConsolidationRecord {
    let triplet = ConsolidationTriplet::new("The second sentence is deleted.", "One. Two.", None).unwrap();
    let gate = match prediction {
        Some(_) => GateOutcome::Possible,
        None => GateOutcome::ExcludedLength { token_count: tokens },
    };
    ConsolidationRecord::new(id, id.split('.').next().unwrap(), triplet, backend, prediction.map(Into::into), gate, vec![], tokens)
        .unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (prediction, gold) = ("The decision is posted online.", "The decision is published online.");
    let report = word_error(prediction, gold);
    println!("{prediction:?} vs {gold:?}: {report:?}");
    for hunk in word_diff(prediction, gold) {
        match hunk {
            DiffHunk::Equal(t) => print!("{t} "),
            DiffHunk::Delete(t) => print!("[-{t}-] "),
            DiffHunk::Insert(t) => print!("{{+{t}+}} "),
        }
    }
    println!();
    println!("case and accents are ignored: {}", is_correct("Élu pour TROIS ans.", "elu pour trois ans"));

    let llm = || Backend::Llm("local-model".into());
    let records = vec![
        record("1.rule", Backend::RuleBased, Some("One."), 300),
        record("2.rule", Backend::RuleBased, Some("Two."), 700),
        record("1.llm", llm(), Some("One."), 320),
        record("2.llm", llm(), None, 1100),
        record("3.llm", llm(), Some("Three!"), 800),
    ];
    let gold: HashMap<String, String> = [("1", "One."), ("2", "One."), ("3", "Three.")]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect();
    let report = consolidation_report(&records, &gold)?;
    println!("\n{}", report.render_table());
    println!("{}", curve_csv(&report.curve("llm:local-model", 250)));
    Ok(())
}
