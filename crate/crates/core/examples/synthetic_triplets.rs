//! Renders random amendment operations as drafting text and checks that
//! the engine reads them back.
//!
//! cargo run -p lexcons --example synthetic_triplets

use std::num::NonZeroUsize;

use lexcons::engine::{apply, parse_amendment, render_section, AmendmentOp, Scope};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = StdRng::seed_from_u64(7);
    let article = "The fee is ten euros. It is paid yearly.\nThe register is public.";
    let one = NonZeroUsize::MIN;
    for round in 0..5 {
        let op = match rng.random_range(0..4) {
            0 => AmendmentOp::ReplaceWords { old: "ten".into(), new: format!("{}", 20 + round), scope: Scope::Paragraph(one) },
            1 => AmendmentOp::DeleteSentence { ordinal: NonZeroUsize::new(2).unwrap(), scope: Scope::WholeArticle },
            2 => AmendmentOp::AppendText { new_text: "It may be consulted online.".into(), scope: Scope::Paragraph(NonZeroUsize::new(2).unwrap()) },
            _ => AmendmentOp::InsertAfterWords { anchor: "paid".into(), new_text: "in advance".into(), scope: Scope::WholeArticle },
        };
        let text = render_section("5", std::slice::from_ref(&op));
        let parsed = parse_amendment(&text)?;
        assert_eq!(parsed, [op]);
        println!("{text}\n  => {}\n", apply(article, &parsed)?.replace('\n', " / "));
    }
    Ok(())
}
