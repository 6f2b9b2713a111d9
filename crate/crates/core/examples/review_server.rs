//! Runs the pipeline on the bundled data and serves the result for review
//! on 127.0.0.1:8080 (or the address given as first argument).
//!
//! cargo run -p lexcons --example review_server
//! curl 'http://127.0.0.1:8080/records?status=pending'
//! curl -X POST http://127.0.0.1:8080/records/1.1.rule/approve
//! curl -X POST -H 'content-type: application/json' \
//!      -d '{"gold_text":"..."}' http://127.0.0.1:8080/records/1.2.rule/amend
//! curl http://127.0.0.1:8080/stats

use std::collections::HashMap;

use lexcons::pipeline::{run, PipelineConfig};
use lexcons::review::{serve, ReviewStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let mut config = PipelineConfig::load(format!("{data}/run.toml"))?;
    config.output = std::env::temp_dir().join("lexcons-review-example");
    let output = run(&config)?;
    print!("{}", output.summary);

    let bind = std::env::args().nth(1).unwrap_or(config.bind);
    let store = ReviewStore::open(&config.output, HashMap::new())?;
    println!("serving {} on http://{bind}", config.output.display());
    serve(store, &bind, false)?;
    Ok(())
}
