//! Builds the instruction-tuning prompt for a triplet and shows how the
//! table and length gates decide whether a model may be called.
//!
//! cargo run -p lexcons --example prompt_gate

use lexcons::llm::{build_prompt, default_few_shot, gate, BackendConfig, EstimatingTokenizer, Tokenizer};
use lexcons::ConsolidationTriplet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tokenizer = EstimatingTokenizer;
    let config = BackendConfig::default();
    let triplet = ConsolidationTriplet::new(
        "The second sentence is deleted.",
        "The board meets monthly. It may invite experts.",
        None,
    )?;

    let zero_shot = build_prompt(&triplet, &[], &tokenizer);
    println!("{}", zero_shot.text);
    println!("zero-shot: {} tokens -> {:?}", zero_shot.token_count, gate(&zero_shot, &triplet, &config));
    let few_shot = build_prompt(&triplet, &default_few_shot(), &tokenizer);
    println!("few-shot:  {} tokens -> {:?}", few_shot.token_count, gate(&few_shot, &triplet, &config));

    let long_input = "The board meets monthly. ".repeat(250);
    let long = ConsolidationTriplet::new("The second sentence is deleted.", long_input.trim(), None)?;
    let prompt = build_prompt(&long, &[], &tokenizer);
    println!("long input: {:?}", gate(&prompt, &long, &config));

    let table = ConsolidationTriplet::new(
        "In the second row, the words « 120 » are replaced by the words « 150 ».",
        "| Grade | Allowance |\n| A | 120 |",
        None,
    )?;
    let prompt = build_prompt(&table, &[], &tokenizer);
    println!("table input: {:?}", gate(&prompt, &table, &config));

    println!("\n\"aaaa bbbb\" counts {} tokens", tokenizer.count("aaaa bbbb"));
    Ok(())
}
