//! Runs the whole pipeline on the bundled bill and corpus with the rule,
//! span and model backends. The model is a stand-in that echoes the input,
//! so the example needs no server.
//!
//! cargo run -p lexcons --example run_pipeline

use std::sync::Arc;

use lexcons::llm::{CompletionClient, LlmError, Prompt};
use lexcons::pipeline::{run_with_client, BackendKind, PipelineConfig};
use lexcons::span::{derive_labels, write_span_labels, SpanLabelRecord};
use lexcons::ConsolidationTriplet;

struct EchoInput;

impl CompletionClient for EchoInput {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let input = prompt.text.rsplit("### Input\n").next().unwrap_or_default();
        Ok(input.split("\n\n### Response").next().unwrap_or_default().to_owned())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let mut config = PipelineConfig::load(format!("{data}/run.toml"))?;
    let out = std::env::temp_dir().join("lexcons-run-example");
    config.output = out.clone();
    config.backends = vec![BackendKind::All];

    // Span predictions would come from a trained tagger; here one is derived
    // from a known gold text for modification 2.1.
    let existing = "the duties corresponding to the post of Chief State Public Works Engineer in the second group referred to in Article 8 of this Decree are, for the post reporting to the Minister for Foreign Affairs:\nCharged with the duties of Deputy Director of Real Estate Operations in the Real Estate Affairs Department within the General Administration Department.";
    let instruction = "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 is replaced by the following provisions:\n« Assistant to the Deputy Director of Real Estate Operations. »";
    let gold = format!("{}\nAssistant to the Deputy Director of Real Estate Operations.", existing.split('\n').next().unwrap());
    let labels = derive_labels(&ConsolidationTriplet::new(instruction, existing, Some(gold))?)?;
    std::fs::create_dir_all(&out)?;
    let spans = out.join("span_predictions.jsonl");
    write_span_labels(&spans, &[SpanLabelRecord::new("2.1", &labels)])?;
    config.span_predictions = Some(spans);

    let output = run_with_client(&config, Some(Arc::new(EchoInput)))?;
    print!("{}", output.summary);
    for article in &output.consolidated {
        println!("\n[{} / Article {}] {} of {} applied\n{}", article.backend, article.article_id, article.applied, article.modifications.len(), article.text);
    }
    println!("\nrecords written to {}", out.display());
    Ok(())
}
