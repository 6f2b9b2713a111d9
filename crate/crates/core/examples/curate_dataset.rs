//! Writes a small triplet dataset with provenance, then curates it.
//!
//! cargo run -p lexcons --example curate_dataset

use lexcons::dataset::{curate, Dataset, DatasetEntry, Provenance};
use lexcons::ConsolidationTriplet;

fn entry(id: &str, instruction: &str, input: &str, response: &str) -> DatasetEntry {
    DatasetEntry {
        id: id.into(),
        triplet: ConsolidationTriplet::new(instruction, input, Some(response.into())).unwrap(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = Dataset::new(
        vec![
            entry("a", "The words « thirty » are replaced by the words « sixty ».", "Within thirty days.", "Within sixty days."),
            entry("b", "The words « days » are replaced by the words « Days ».", "Within thirty days.", "Within thirty Days."),
            entry("c", "In the table, « 120 » becomes « 150 ».", "| A | 120 |\n| B | 90 |", "| A | 150 |\n| B | 90 |"),
        ],
        Provenance {
            source_bill: Some("bill-2024-17".into()),
            snapshot_date: chrono::NaiveDate::from_ymd_opt(2024, 2, 1),
        },
    )?;
    let dir = std::env::temp_dir().join("lexcons-curate-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("triplets.jsonl");
    dataset.save(&path)?;

    let (curated, report) = curate(&Dataset::load(&path)?)?;
    println!("{report:?}");
    for e in curated.entries() {
        println!("kept {}: {}", e.id, e.triplet.instruction());
    }
    curated.save(dir.join("curated.jsonl"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
