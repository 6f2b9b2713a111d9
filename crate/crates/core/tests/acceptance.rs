//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed:
//!
//! cargo test -p lexcons --test acceptance

mod common;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lexcons::engine::{apply, consolidate, parse_amendment, render_section, AmendmentOp, Scope};
use lexcons::evaluation::{
    consolidation_report, correctness_curve, default_thresholds, word_error, CurveSample,
    NOT_APPLICABLE,
};
use lexcons::llm::{build_prompt, gate, BackendConfig, EstimatingTokenizer};
use lexcons::pipeline::{run_with_client, BackendKind, PipelineConfig, RECORDS_FILE};
use lexcons::span::{derive_labels, reconstruct, SpanError};
use lexcons::splitter::{split_text, HierarchyConfig};
use lexcons::{Backend, ConsolidationRecord, ConsolidationTriplet, GateOutcome};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use common::{brute_edit_distance, random_hierarchy, synthetic_bill, ToyArticle};

/// Wall-clock budgets.
const WORKED_EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const SPAN_EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const WORD_ERROR_BUDGET: Duration = Duration::from_secs(30);
const SYNTHETIC_BUDGET: Duration = Duration::from_secs(60);

/// Sample sizes.
const WORD_ERROR_PAIRS: usize = 1000;
const WORD_ERROR_MAX_LEN: usize = 8;
const SYNTHETIC_TRIPLETS: usize = 600;
const HIERARCHIES: usize = 1000;
const CURVE_FIXTURES: usize = 100;
const DETERMINISM_ARTICLES: usize = 10;

/// Largest tolerated gap between two rates that must be equal.
const RATE_TOLERANCE: f64 = 1e-12;

const SEED: u64 = 0x1e9c_0d5e;

const WORKED_INSTRUCTION: &str = "Article 10 is amended as follows:\n1° The words « in the last week of August » are replaced by the words « during the month of December »;\n2° The second sentence is deleted.";
const WORKED_INPUT: &str = "Appointments are made each year in the last week of August. The general meeting of the order meets at the courthouse.";
const WORKED_RESPONSE: &str = "Appointments are made each year during the month of December.";

const SPAN_PARAGRAPH_1: &str = "the duties corresponding to the post of Chief State Public Works Engineer in the second group referred to in Article 8 of this Decree are, for the post reporting to the Minister for Foreign Affairs:";
const SPAN_PARAGRAPH_2: &str = "Charged with the duties of Deputy Director of Real Estate Operations in the Real Estate Affairs Department within the General Administration Department.";
const SPAN_MODIFICATION: &str = "The second paragraph of Article 1 of the above-mentioned Order of 4 May 2007 is replaced by the following provisions:\n« Assistant to the Deputy Director of Real Estate Operations. »";
const SPAN_NEW_PARAGRAPH: &str = "Assistant to the Deputy Director of Real Estate Operations.";

type Outcome = Result<String, String>;

fn check(cond: bool, detail: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn within(budget: Duration, started: Instant) -> Result<Duration, String> {
    let elapsed = started.elapsed();
    check(elapsed < budget, format!("took {elapsed:?}, budget {budget:?}"))?;
    Ok(elapsed)
}

fn worked_example() -> Outcome {
    let started = Instant::now();
    let triplet = ConsolidationTriplet::new(WORKED_INSTRUCTION, WORKED_INPUT, None).map_err(|e| e.to_string())?;
    let out = consolidate(&triplet).map_err(|e| e.to_string())?;
    let elapsed = within(WORKED_EXAMPLE_BUDGET, started)?;
    check(out == WORKED_RESPONSE, format!("got {out:?}"))?;
    Ok(format!("exact response in {elapsed:?}"))
}

fn span_example() -> Outcome {
    let started = Instant::now();
    let existing = format!("{SPAN_PARAGRAPH_1}\n{SPAN_PARAGRAPH_2}");
    let gold = format!("{SPAN_PARAGRAPH_1}\n{SPAN_NEW_PARAGRAPH}");

    let ops = parse_amendment(SPAN_MODIFICATION).map_err(|e| e.to_string())?;
    let by_rules = apply(&existing, &ops).map_err(|e| e.to_string())?;
    check(by_rules == gold, format!("rule engine gave {by_rules:?}"))?;

    let triplet = ConsolidationTriplet::new(SPAN_MODIFICATION, existing.as_str(), Some(gold.clone()))
        .map_err(|e| e.to_string())?;
    let labels = derive_labels(&triplet).map_err(|e| e.to_string())?;
    let by_spans = reconstruct(&existing, SPAN_MODIFICATION, &labels).map_err(|e| e.to_string())?;
    check(by_spans == gold, format!("span reconstruction gave {by_spans:?}"))?;
    let elapsed = within(SPAN_EXAMPLE_BUDGET, started)?;
    Ok(format!("both paths replace paragraph 2, {elapsed:?}"))
}

fn word_error_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED);
    let vocabulary = ["law", "article", "code", "the", "of", "decree"];
    let mut mismatches = Vec::new();
    for _ in 0..WORD_ERROR_PAIRS {
        let words = |rng: &mut StdRng| -> Vec<&str> {
            let n = rng.random_range(0..=WORD_ERROR_MAX_LEN);
            (0..n).map(|_| *vocabulary.choose(rng).expect("non-empty")).collect()
        };
        let (a, b) = (words(&mut rng), words(&mut rng));
        let report = word_error(&a.join(" "), &b.join(" "));
        let expected = brute_edit_distance(&a, &b);
        let consistent = report.total == report.additions + report.deletions + report.substitutions;
        if report.total != expected || !consistent {
            mismatches.push(format!("{a:?} / {b:?}: {} vs {expected}", report.total));
        }
    }
    let elapsed = within(WORD_ERROR_BUDGET, started)?;
    check(
        mismatches.is_empty(),
        format!("{} mismatches, first: {}", mismatches.len(), mismatches.first().cloned().unwrap_or_default()),
    )?;
    Ok(format!("{WORD_ERROR_PAIRS} pairs, 0 mismatches, {elapsed:?}"))
}

fn synthetic_triplets() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let (mut exact, mut single, mut single_ok, mut not_derivable) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for i in 0..SYNTHETIC_TRIPLETS {
        let mut toy = ToyArticle::random(&mut rng);
        let input = toy.render();
        let ops: Vec<_> = (0..rng.random_range(1..=3)).map(|_| toy.random_op(&mut rng)).collect();
        let gold = toy.render();
        let instruction = render_section(&(i + 1).to_string(), &ops);
        let triplet = ConsolidationTriplet::new(instruction.clone(), input.clone(), Some(gold.clone()))
            .map_err(|e| e.to_string())?;
        match consolidate(&triplet) {
            Ok(pred) if word_error(&pred, &gold).total == 0 && pred == gold => exact += 1,
            Ok(pred) => failures.push(format!("#{i}: {instruction:?} on {input:?} gave {pred:?}, want {gold:?}")),
            Err(e) => failures.push(format!("#{i}: {instruction:?}: {e}")),
        }
        if ops.len() == 1 && gold != input {
            single += 1;
            let adds_paragraph = matches!(
                ops[0],
                AmendmentOp::AppendText { scope: Scope::WholeArticle, .. }
            );
            match derive_labels(&triplet) {
                // A new paragraph needs a line break the instruction never contains.
                Err(SpanError::AdditionNotFound(_)) if adds_paragraph => not_derivable += 1,
                labels => match labels.and_then(|l| reconstruct(&input, &instruction, &l)) {
                    Ok(text) if text == gold => single_ok += 1,
                    other => failures.push(format!("#{i} spans: {instruction:?} on {input:?}: {other:?}")),
                },
            }
        }
    }
    let elapsed = within(SYNTHETIC_BUDGET, started)?;
    check(
        failures.is_empty(),
        format!(
            "{exact}/{SYNTHETIC_TRIPLETS} exact, {single_ok}/{} derivable single-edit; first failure {}",
            single - not_derivable,
            failures.first().cloned().unwrap_or_default()
        ),
    )?;
    Ok(format!(
        "{exact}/{SYNTHETIC_TRIPLETS} exact (word error 0), {single_ok}/{single_ok} derivable single-edit span round trips ({not_derivable} paragraph appends not derivable), {elapsed:?}"
    ))
}

fn hierarchies() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let config = HierarchyConfig::default();
    let mut total_leaves = 0;
    for i in 0..HIERARCHIES {
        let (text, leaves) = random_hierarchy(&mut rng);
        let root = split_text(&text, &config).map_err(|e| format!("#{i} {text:?}: {e}"))?;
        check(root.reassemble() == text, format!("#{i}: reassembly differs for {text:?}"))?;
        check(
            root.leaf_count() == leaves,
            format!("#{i}: {} leaves, expected {leaves}, in {text:?}", root.leaf_count()),
        )?;
        total_leaves += leaves;
    }
    Ok(format!("{HIERARCHIES} articles byte-exact, {total_leaves} leaves matched"))
}

fn gate_boundaries() -> Outcome {
    let config = BackendConfig::default();
    check(config.max_prompt_tokens == 1024, "default budget is not 1024")?;
    let tokenizer = EstimatingTokenizer;
    let base = ConsolidationTriplet::new("The second sentence is deleted.", "One. Two.", None).map_err(|e| e.to_string())?;
    let base_count = build_prompt(&base, &[], &tokenizer).token_count;
    // Each '§' is one punctuation token and leaves the word count alone.
    let padded = |target: usize| -> Result<(ConsolidationTriplet, usize), String> {
        let input = format!("One. Two. {}", "§".repeat(target - base_count));
        let t = ConsolidationTriplet::new("The second sentence is deleted.", input, None).map_err(|e| e.to_string())?;
        let n = build_prompt(&t, &[], &tokenizer).token_count;
        Ok((t, n))
    };
    let (t1023, n1023) = padded(1023)?;
    let (t1024, n1024) = padded(1024)?;
    check(n1023 == 1023 && n1024 == 1024, format!("padding produced {n1023} and {n1024} tokens"))?;
    let g1023 = gate(&build_prompt(&t1023, &[], &tokenizer), &t1023, &config);
    let g1024 = gate(&build_prompt(&t1024, &[], &tokenizer), &t1024, &config);
    check(g1023 == GateOutcome::Possible, format!("1023 tokens: {g1023:?}"))?;
    check(
        g1024 == GateOutcome::ExcludedLength { token_count: 1024 },
        format!("1024 tokens: {g1024:?}"),
    )?;
    let table = ConsolidationTriplet::new(
        "In the table, the words « 120 » are replaced by the words « 150 ».",
        "| Grade | Allowance |\n| A | 120 |",
        None,
    )
    .map_err(|e| e.to_string())?;
    let g_table = gate(&build_prompt(&table, &[], &tokenizer), &table, &config);
    check(g_table == GateOutcome::ExcludedTable, format!("table: {g_table:?}"))?;
    Ok("1023 possible, 1024 excluded for length, table excluded".into())
}

fn curve() -> Outcome {
    let fixture = [(500, true), (800, false), (1200, true)].map(|(prompt_tokens, correct)| CurveSample {
        prompt_tokens,
        correct,
    });
    let points = correctness_curve(&fixture, &[1000, 2000]);
    check(points.len() == 2, format!("{points:?}"))?;
    check(
        points[0].length_threshold == 1000 && (points[0].correctness_rate - 0.5).abs() < RATE_TOLERANCE,
        format!("first point {:?}", points[0]),
    )?;
    check(
        points[1].length_threshold == 2000 && (points[1].correctness_rate - 2.0 / 3.0).abs() < RATE_TOLERANCE,
        format!("second point {:?}", points[1]),
    )?;

    let mut rng = StdRng::seed_from_u64(SEED + 3);
    for i in 0..CURVE_FIXTURES {
        let samples: Vec<CurveSample> = (0..rng.random_range(1..60))
            .map(|_| CurveSample {
                prompt_tokens: rng.random_range(1..3000),
                correct: rng.random_bool(0.6),
            })
            .collect();
        let overall = samples.iter().filter(|s| s.correct).count() as f64 / samples.len() as f64;
        let step = rng.random_range(50..500);
        let last = correctness_curve(&samples, &default_thresholds(&samples, step))
            .pop()
            .ok_or_else(|| format!("fixture {i}: empty curve"))?;
        check(
            last.n_samples == samples.len() && (last.correctness_rate - overall).abs() < RATE_TOLERANCE,
            format!("fixture {i}: last point {last:?}, overall {overall}"),
        )?;
    }
    Ok(format!("fixture points exact, final point = overall rate on {CURVE_FIXTURES} fixtures"))
}

/// Smallest record counts whose rates print as the given per-mille values.
fn counts_for(possible_permille: u64, correct_permille: u64) -> Option<(u64, u64, u64)> {
    // round(1000 * k / n) == target, with k / n strictly inside the
    // rounding interval so no tie is involved.
    let rounds_to = |k: u64, n: u64, target: u64| 2000 * k > (2 * target - 1) * n && 2000 * k < (2 * target + 1) * n;
    (1..5000u64).find_map(|records| {
        (1..=records).find_map(|possible| {
            if !rounds_to(possible, records, possible_permille) {
                return None;
            }
            (0..=possible)
                .find(|&c| rounds_to(c, possible, correct_permille))
                .map(|correct| (records, possible, correct))
        })
    })
}

fn rate_table() -> Outcome {
    let rows = [("llm:gpt-3.5", 913, 614), ("llm:llama-2", 498, 632)];
    let mut records = Vec::new();
    let mut gold = HashMap::new();
    for (name, possible_pm, correct_pm) in rows {
        let (n, p, c) = counts_for(possible_pm, correct_pm).ok_or_else(|| format!("no counts for {name}"))?;
        let backend = Backend::Llm(name.trim_start_matches("llm:").into());
        for k in 0..n {
            let id = format!("{name}.{k}");
            let triplet = ConsolidationTriplet::new("The article is repealed.", "Text.", None).map_err(|e| e.to_string())?;
            let (prediction, verdict) = if k < p {
                (Some("right".to_owned()), GateOutcome::Possible)
            } else {
                (None, GateOutcome::ExcludedLength { token_count: 2000 })
            };
            gold.insert(id.clone(), if k < c { "right" } else { "wrong" }.to_owned());
            records.push(
                ConsolidationRecord::new(id.clone(), id, triplet, backend.clone(), prediction, verdict, vec![], 100)
                    .map_err(|e| e.to_string())?,
            );
        }
    }
    let table = consolidation_report(&records, &gold).map_err(|e| e.to_string())?.render_table();
    let lines: Vec<&str> = table.lines().collect();
    let cells = |line: &str| -> Vec<String> {
        line.trim_matches('|').split('|').map(|c| c.trim().to_owned()).collect()
    };
    check(lines.len() == 4, format!("table has {} lines:\n{table}", lines.len()))?;
    check(
        cells(lines[0]) == ["Model", "Rate of possible consolidations", "Correctness rate among possible consolidations"],
        format!("header {:?}", lines[0]),
    )?;
    check(lines[1].chars().all(|c| c == '|' || c == '-'), format!("rule {:?}", lines[1]))?;
    check(cells(lines[2]) == ["llm:gpt-3.5", "91.3%", "61.4%"], format!("row {:?}", lines[2]))?;
    check(cells(lines[3]) == ["llm:llama-2", "49.8%", "63.2%"], format!("row {:?}", lines[3]))?;
    let width = lines[0].chars().count();
    check(lines.iter().all(|l| l.chars().count() == width), "rows are not aligned")?;
    check(!table.contains(NOT_APPLICABLE), "unexpected n/a cell")?;
    Ok("49.8%/63.2% and 91.3%/61.4% rendered in aligned columns".into())
}

fn deterministic_records() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 4);
    let (bill, corpus) = synthetic_bill(&mut rng, DETERMINISM_ARTICLES);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("bill.json"), bill).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("corpus.jsonl"), corpus).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let mut config = PipelineConfig::new(
            dir.path().join("corpus.jsonl"),
            dir.path().join("bill.json"),
            dir.path().join(run),
        );
        config.backends = vec![BackendKind::Rule];
        config.workers = 4;
        let out = run_with_client(&config, None::<Arc<dyn lexcons::llm::CompletionClient>>).map_err(|e| e.to_string())?;
        check(out.summary.articles == DETERMINISM_ARTICLES, format!("{} articles", out.summary.articles))?;
        files.push(std::fs::read(dir.path().join(run).join(RECORDS_FILE)).map_err(|e| e.to_string())?);
    }
    check(!files[0].is_empty(), "no records written")?;
    check(files[0] == files[1], "record files differ between runs")?;
    Ok(format!("two runs, {} identical bytes", files[0].len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("worked example consolidates exactly", worked_example),
        ("span example via rules and via spans", span_example),
        ("word error equals brute-force edit distance", word_error_oracle),
        ("synthetic triplets reproduce gold", synthetic_triplets),
        ("hierarchical articles reassemble", hierarchies),
        ("gate boundaries", gate_boundaries),
        ("correctness curve", curve),
        ("rate table layout", rate_table),
        ("rule backend runs are byte-identical", deterministic_records),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
