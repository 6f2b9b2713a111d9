//! Splits a nested bill article into its simple modifications.
//!
//! cargo run -p lexcons --example split_bill

use lexcons::splitter::{flatten_simple_modifications, split_text, HierarchyConfig};

const ARTICLE: &str = "The Labour Code is amended as follows:\n\
I. – Article L. 1225-4 is amended as follows:\n\
1° The words « ten weeks » are replaced by the words « fourteen weeks »;\n\
2° The second paragraph is amended as follows:\n\
a) The first sentence is deleted;\n\
b) The words « by registered letter » are deleted;\n\
II. – Article L. 1225-5 is repealed.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = HierarchyConfig::default();
    let root = split_text(ARTICLE, &config)?;
    assert_eq!(root.reassemble(), ARTICLE);
    println!("{} simple modifications\n", root.leaf_count());

    // Every leaf keeps the preambles of its ancestors, so it reads on its own.
    for m in flatten_simple_modifications(&root) {
        println!("[{}]\n{}\n", m.path_label(), m.text);
    }

    // A custom hierarchy, e.g. for bills numbered "1.", "1.1." and "(i)".
    let custom: HierarchyConfig = toml::from_str(
        r#"
        [[levels]]
        pattern = '\d+\.'
        rank = 1
        [[levels]]
        pattern = '\(i+\)'
        rank = 2
        "#,
    )?;
    let root = split_text("Preamble:\n1. first;\n(i) nested;\n(ii) other;\n2. last.", &custom)?;
    println!("custom hierarchy: {} leaves", root.leaf_count());
    Ok(())
}
