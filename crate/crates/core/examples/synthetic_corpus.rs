//! Generates a synthetic corpus with planted topics and an emerging topic,
//! and writes it to a directory given on the command line.

use std::path::PathBuf;

use dyntopic::synthetic::{generate, write_synthetic, SyntheticConfig};

fn main() -> dyntopic::Result<()> {
    let config = SyntheticConfig {
        emerging: true,
        ..SyntheticConfig::default()
    };
    let corpus = generate(&config)?;
    for (i, terms) in corpus.truth.topics.iter().enumerate() {
        println!("topic {i}: {}", terms[..5].join(" "));
    }
    if let Some(terms) = &corpus.truth.emerging {
        println!(
            "emerging in {}: {}",
            config.windows.last().unwrap(),
            terms[..5].join(" ")
        );
    }
    println!(
        "{} documents, {} word vectors",
        corpus.documents.len(),
        corpus.embeddings.len()
    );
    if let Some(dir) = std::env::args().nth(1) {
        write_synthetic(&corpus, &PathBuf::from(&dir))?;
        println!("wrote corpus.jsonl, embeddings.txt and truth.json to {dir}");
    }
    Ok(())
}
