use serde::{Deserialize, Serialize};

use super::{BackendConfig, Tokenizer};
use crate::model::{ConsolidationTriplet, GateOutcome};

pub const RESPONSE_HEADER: &str = "### Response";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub token_count: usize,
    pub few_shot: bool,
}

fn block(instruction: &str, input: &str) -> String {
    format!("### Instruction\n{instruction}\n\n### Input\n{input}\n\n{RESPONSE_HEADER}\n")
}

/// Lays out `triplet` as an instruction-tuning prompt with an empty response
/// field. Few-shot examples come first, each a complete block with its
/// response filled in.
pub fn build_prompt(
    triplet: &ConsolidationTriplet,
    few_shot_examples: &[ConsolidationTriplet],
    tokenizer: &dyn Tokenizer,
) -> Prompt {
    let mut text = String::new();
    for example in few_shot_examples {
        text.push_str(&block(example.instruction(), example.input()));
        text.push_str(example.response().unwrap_or_default());
        text.push_str("\n\n");
    }
    text.push_str(&block(triplet.instruction(), triplet.input()));
    Prompt {
        token_count: tokenizer.count(&text),
        text,
        few_shot: !few_shot_examples.is_empty(),
    }
}

fn is_table_row(line: &str) -> bool {
    line.chars().filter(|c| matches!(c, '|' | '\t')).count() >= 2
}

/// Two consecutive lines each holding at least two `|` or tab separators.
pub fn contains_table(text: &str) -> bool {
    let rows: Vec<bool> = text.lines().map(is_table_row).collect();
    rows.windows(2).any(|w| w[0] && w[1])
}

/// Decides whether the prompt may be sent: tables exclude first, then
/// prompts at or above the token budget.
pub fn gate(prompt: &Prompt, triplet: &ConsolidationTriplet, config: &BackendConfig) -> GateOutcome {
    if contains_table(triplet.instruction()) || contains_table(triplet.input()) {
        GateOutcome::ExcludedTable
    } else if prompt.token_count >= config.max_prompt_tokens {
        GateOutcome::ExcludedLength {
            token_count: prompt.token_count,
        }
    } else {
        GateOutcome::Possible
    }
}

/// Built-in few-shot examples in the drafting style of the default
/// templates. They are illustrative and not tied to any reference set.
pub fn default_few_shot() -> Vec<ConsolidationTriplet> {
    [
        (
            "Article 4 is amended as follows:\n1° In the first paragraph, the words « thirty days » are replaced by the words « two months »;\n2° The second paragraph is deleted.",
            "The request is examined within thirty days.\nA reminder may be sent.",
            "The request is examined within two months.",
        ),
        (
            "The first paragraph is supplemented by a sentence worded as follows: « The decision is published. »",
            "The board rules on the application.",
            "The board rules on the application. The decision is published.",
        ),
    ]
    .into_iter()
    .map(|(instruction, input, response)| {
        ConsolidationTriplet::new(instruction, input, Some(response.to_owned()))
            .expect("built-in example is valid")
    })
    .collect()
}
