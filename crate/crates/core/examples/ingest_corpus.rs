//! Tokenizes a small time-stamped corpus and prints the per-window TF-IDF
//! matrices over the shared vocabulary.

use dyntopic::corpus::{build_windowed_corpus, tokenize, Document, TokenizerConfig};

fn doc(id: &str, year: i32, text: &str) -> Document {
    Document {
        id: id.into(),
        year,
        text: text.into(),
    }
}

fn main() -> dyntopic::Result<()> {
    let docs = vec![
        doc(
            "a1",
            2020,
            "Path planning for a mobile robot in cluttered warehouses.",
        ),
        doc(
            "a2",
            2020,
            "Grasp planning with a robot arm and tactile sensing.",
        ),
        doc(
            "b1",
            2021,
            "Path planning under uncertainty for mobile robot fleets.",
        ),
        doc(
            "b2",
            2021,
            "Digital twin models for predictive maintenance.",
        ),
        doc(
            "c1",
            2022,
            "Digital twin calibration with tactile sensing data.",
        ),
        doc("c2", 2022, "Predictive maintenance of robot arm joints."),
    ];
    let config = TokenizerConfig {
        min_df: 1,
        ..TokenizerConfig::default()
    };
    println!("tokens of a1: {:?}", tokenize(&docs[0].text, &config));

    let corpus = build_windowed_corpus(&docs, &config)?;
    println!("vocabulary: {} terms", corpus.vocabulary.len());
    for m in &corpus.matrices {
        println!(
            "window {}: {} documents, {} nonzeros",
            m.window_label,
            m.n_rows(),
            m.nnz()
        );
        for (r, id) in m.rows.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = m.row(r).collect();
            row.sort_by(|a, b| b.1.total_cmp(&a.1));
            let top: Vec<String> = row
                .iter()
                .take(3)
                .map(|(c, w)| format!("{}={w:.3}", corpus.vocabulary.term(*c)))
                .collect();
            println!("  {id}: {}", top.join(" "));
        }
    }
    Ok(())
}
