//! Scores topic term lists with TC-W2V (word vectors) and C_UMass (document
//! co-occurrence).

use dyntopic::corpus::DocumentSets;
use dyntopic::metrics::{c_umass, parse_embeddings, tc_w2v};

const VECTORS: &str = "\
robot 0.9 0.1 0.0
arm 0.8 0.2 0.1
gripper 0.85 0.15 0.05
twin 0.0 0.1 0.9
maintenance 0.1 0.0 0.8
";

fn main() -> dyntopic::Result<()> {
    let (table, _) = parse_embeddings(VECTORS)?;
    let topics: Vec<Vec<String>> = [
        ["robot", "arm", "gripper"],
        ["robot", "twin", "maintenance"],
    ]
    .iter()
    .map(|t| t.iter().map(|s| s.to_string()).collect())
    .collect();
    let w2v = tc_w2v(&topics, &table);
    println!("tc-w2v per topic {:?}, mean {:.4}", w2v.per_topic, w2v.mean);

    let docs = DocumentSets::from_documents([
        vec!["robot", "arm", "gripper"],
        vec!["robot", "arm"],
        vec!["twin", "maintenance"],
        vec!["robot", "maintenance"],
    ]);
    let umass = c_umass(&topics, &docs);
    println!(
        "c_umass per topic {:?}, mean {:.4}",
        umass.per_topic, umass.mean
    );
    Ok(())
}
