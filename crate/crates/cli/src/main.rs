use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lexcons::dataset::{self, curate, Dataset};
use lexcons::evaluation::{consolidation_report, correctness_curve, curve_csv, default_thresholds};
use lexcons::pipeline::{self, BackendKind, BackendSet, PipelineConfig, RECORDS_FILE};
use lexcons::references::Corpus;
use lexcons::review::{self, ReviewStore};
use lexcons::splitter::{flatten_simple_modifications, split_article, HierarchyConfig};
use lexcons::ConsolidationTriplet;
use serde_json::json;

/// Consolidates legislative texts: splits bills, locates the articles they
/// amend, applies the amendments and scores the results.
#[derive(Parser)]
#[command(name = "lexcons", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Backends to run; repeat or use `all`.
    #[arg(long, global = true, value_delimiter = ',')]
    backend: Vec<BackendKind>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split bill articles into simple modifications.
    Split {
        #[arg(long)]
        bill: Option<PathBuf>,
    },
    /// Extract and resolve the references of every simple modification.
    Extract {
        #[arg(long)]
        bill: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Consolidate a triplet dataset, or a single instruction and input.
    Consolidate(ConsolidateArgs),
    /// Score consolidation records against gold texts.
    Evaluate {
        #[arg(long)]
        records: PathBuf,
        /// JSON object of gold texts keyed by record or modification id.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Triplet dataset whose responses serve as gold texts.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Prompt-length step of the correctness curve.
        #[arg(long, default_value_t = 100)]
        step: usize,
    },
    /// Drop triplets without an actual change and triplets with tables.
    Curate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Run the whole pipeline described by --config.
    Run,
    /// Serve a run directory for review.
    Serve {
        /// Run directory; defaults to the configured output.
        #[arg(long)]
        run_dir: Option<PathBuf>,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        /// Allow binding a non-loopback address.
        #[arg(long)]
        allow_remote: bool,
    },
}

#[derive(Args)]
struct ConsolidateArgs {
    /// JSONL of `{id, instruction, input, response?}`.
    #[arg(long, conflicts_with_all = ["instruction", "input"])]
    dataset: Option<PathBuf>,
    #[arg(long, requires = "input")]
    instruction: Option<String>,
    #[arg(long, requires = "instruction")]
    input: Option<String>,
    /// Span labels keyed by dataset id, for the span backend.
    #[arg(long)]
    spans: Option<PathBuf>,
    #[arg(long)]
    templates: Option<PathBuf>,
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = real_main(Cli::parse()) {
        // Library errors already embed their sources in their message.
        let mut message = String::new();
        for cause in e.chain().map(ToString::to_string) {
            if !message.contains(&cause) {
                message = if message.is_empty() { cause } else { format!("{message}: {cause}") };
            }
        }
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    let config = cli
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .transpose()
        .context("loading configuration")?;
    match cli.command {
        Command::Split { bill } => {
            let bill = required(bill, config.as_ref().map(|c| &c.bill), "--bill")?;
            let hierarchy = hierarchy(config.as_ref());
            let bill = pipeline::load_bill(&bill)?;
            let mut lines = Vec::new();
            for article in bill.articles() {
                match split_article(article, &hierarchy) {
                    Ok(root) => {
                        for (k, m) in flatten_simple_modifications(&root).into_iter().enumerate() {
                            lines.push(json!({
                                "id": format!("{}.{}", article.number(), k + 1),
                                "bill_article": article.number(),
                                "path": m.path,
                                "text": m.text,
                            }));
                        }
                    }
                    Err(e) => eprintln!("article {}: {e}", article.number()),
                }
            }
            emit_jsonl(cli.output.as_deref(), &lines)
        }
        Command::Extract { bill, corpus } => {
            let bill = required(bill, config.as_ref().map(|c| &c.bill), "--bill")?;
            let corpus_path = required(corpus, config.as_ref().map(|c| &c.corpus), "--corpus")?;
            let mut corpus = Corpus::load_jsonl(&corpus_path)?;
            if let Some(c) = &config {
                for (alias, canonical) in &c.aliases {
                    corpus.add_alias(alias, canonical)?;
                }
            }
            let bill = pipeline::load_bill(&bill)?;
            let (items, summary) = pipeline::extract_stage(&bill, &corpus, &hierarchy(config.as_ref()));
            eprintln!(
                "{} simple modifications, {} resolved",
                summary.simple_modifications, summary.resolved_modifications
            );
            emit_jsonl(cli.output.as_deref(), &items)
        }
        Command::Consolidate(args) => consolidate(args, &cli.backend, cli.output.as_deref(), config.as_ref()),
        Command::Evaluate {
            records,
            gold,
            dataset: triplets,
            step,
        } => {
            let records = dataset::load_records(&records)?;
            let mut gold_map: HashMap<String, String> = match gold {
                Some(path) => pipeline::load_gold(path)?,
                None => HashMap::new(),
            };
            if let Some(path) = triplets {
                for entry in Dataset::load(&path)?.entries() {
                    if let Some(r) = entry.triplet.response() {
                        gold_map.entry(entry.id.clone()).or_insert_with(|| r.to_owned());
                    }
                }
            }
            let report = consolidation_report(&records, &gold_map)?;
            println!("{}", report.render_table());
            if let Some(we) = &report.overall.word_error {
                println!(
                    "word error: mean {:.2}, median {:.1}, 95% CI ±{:.2} over {} predictions",
                    we.mean, we.median, we.ci95_halfwidth, we.n
                );
            }
            if let Some(dir) = cli.output {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
                let samples: Vec<_> = report.samples.values().flatten().copied().collect();
                let curve = correctness_curve(&samples, &default_thresholds(&samples, step));
                std::fs::write(dir.join("curve.csv"), curve_csv(&curve))?;
                for backend in report.per_backend.keys() {
                    let name = backend.replace([':', '/'], "_");
                    std::fs::write(dir.join(format!("curve.{name}.csv")), curve_csv(&report.curve(backend, step)))?;
                }
                eprintln!("wrote report.json and curves to {}", dir.display());
            }
            Ok(())
        }
        Command::Curate { dataset: path } => {
            let Some(out) = cli.output else {
                bail!("curate needs --output");
            };
            let (curated, report) = curate(&Dataset::load(&path)?)?;
            curated.save(&out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Run => {
            let Some(mut config) = config else {
                bail!("run needs --config");
            };
            if let Some(out) = cli.output {
                config.output = out;
            }
            if !cli.backend.is_empty() {
                config.backends = cli.backend;
            }
            let output = pipeline::run(&config)?;
            print!("{}", output.summary);
            eprintln!("wrote {}", config.output.display());
            Ok(())
        }
        Command::Serve {
            run_dir,
            gold,
            bind,
            allow_remote,
        } => {
            let dir = required(run_dir, config.as_ref().map(|c| &c.output), "--run-dir")?;
            let gold = match gold.or_else(|| config.as_ref().and_then(|c| c.gold.clone())) {
                Some(path) => pipeline::load_gold(path)?,
                None => HashMap::new(),
            };
            let bind = bind
                .or_else(|| config.as_ref().map(|c| c.bind.clone()))
                .unwrap_or_else(|| "127.0.0.1:8080".into());
            if !dir.join(RECORDS_FILE).exists() {
                bail!("{} has no {RECORDS_FILE}", dir.display());
            }
            let store = ReviewStore::open(&dir, gold)?;
            eprintln!("serving {} on http://{bind}", dir.display());
            review::serve(store, &bind, allow_remote)?;
            Ok(())
        }
    }
}

fn consolidate(
    args: ConsolidateArgs,
    backends: &[BackendKind],
    output: Option<&Path>,
    config: Option<&PipelineConfig>,
) -> Result<()> {
    let kinds = if backends.is_empty() {
        config.map_or_else(|| vec![BackendKind::Rule], |c| c.backends.clone())
    } else {
        backends.to_vec()
    };
    let templates = pipeline::load_templates(
        args.templates
            .as_deref()
            .or(config.and_then(|c| c.templates.as_deref())),
    )?;
    let spans = pipeline::load_span_predictions(
        args.spans
            .as_deref()
            .or(config.and_then(|c| c.span_predictions.as_deref())),
    )?;
    let llm_config = config.map(|c| c.llm.clone()).unwrap_or_default();
    let client = if pipeline::expand_backends(&kinds).contains(&BackendKind::Llm) {
        Some(pipeline::http_client(&llm_config)?)
    } else {
        None
    };
    let set = BackendSet::new(&kinds, &templates, spans, client.map(|c| (c, &llm_config)));

    if let (Some(instruction), Some(input)) = (args.instruction, args.input) {
        let triplet = ConsolidationTriplet::new(instruction, input, None)?;
        for &kind in set.kinds() {
            let record = set.record(kind, "cli", "cli", triplet.clone(), Vec::new());
            match record.prediction() {
                Some(text) if set.kinds().len() == 1 => println!("{text}"),
                Some(text) => println!("[{}]\n{text}", record.backend()),
                None => eprintln!("[{}] {:?}", record.backend(), record.gate()),
            }
        }
        return Ok(());
    }
    let Some(path) = args.dataset else {
        bail!("consolidate needs --dataset, or --instruction with --input");
    };
    let ds = Dataset::load(&path)?;
    let records: Vec<_> = ds
        .entries()
        .iter()
        .flat_map(|e| {
            let set = &set;
            set.kinds().iter().map(move |&kind| {
                let id = if set.kinds().len() == 1 {
                    e.id.clone()
                } else {
                    format!("{}.{}", e.id, set.backend(kind))
                };
                set.record(kind, id, &e.id, e.triplet.clone().with_response(None), Vec::new())
            })
        })
        .collect();
    let possible = records.iter().filter(|r| r.prediction().is_some()).count();
    eprintln!("{} records, {possible} consolidated", records.len());
    match output {
        Some(out) => dataset::save_records(out, &records)?,
        None => emit_jsonl(None, &records)?,
    }
    Ok(())
}

fn hierarchy(config: Option<&PipelineConfig>) -> HierarchyConfig {
    config.map(|c| c.hierarchy.clone()).unwrap_or_default()
}

fn required(flag: Option<PathBuf>, configured: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| configured.cloned())
        .with_context(|| format!("{name} is required without --config"))
}

fn emit_jsonl<T: serde::Serialize>(output: Option<&Path>, items: &[T]) -> Result<()> {
    match output {
        Some(path) => Ok(dataset::write_jsonl(path, items)?),
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for item in items {
                serde_json::to_writer(&mut out, item)?;
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}
