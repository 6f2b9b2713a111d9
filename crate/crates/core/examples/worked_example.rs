//! Parses an amending article into operations and applies them with the
//! rule-based engine.
//!
//! cargo run -p lexcons --example worked_example

use lexcons::engine::{apply, consolidate, parse_amendment};
use lexcons::ConsolidationTriplet;

const INSTRUCTION: &str = "Article 10 is amended as follows:\n\
1° The words « in the last week of August » are replaced by the words « during the month of December »;\n\
2° The second sentence is deleted.";

const INPUT: &str = "Appointments are made each year in the last week of August. \
The general meeting of the order meets at the courthouse.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ops = parse_amendment(INSTRUCTION)?;
    for (i, op) in ops.iter().enumerate() {
        println!("op {}: {}", i + 1, serde_json::to_string(op)?);
    }

    // Each operation sees the output of the previous one.
    let mut text = INPUT.to_owned();
    for op in &ops {
        text = apply(&text, std::slice::from_ref(op))?;
        println!("  -> {text}");
    }

    let triplet = ConsolidationTriplet::new(INSTRUCTION, INPUT, None)?;
    let consolidated = consolidate(&triplet)?;
    assert_eq!(consolidated, text);
    println!("\nconsolidated: {consolidated}");
    Ok(())
}
