//! Weak labels from hashtags, a Naive Bayes transfer model, and per-period
//! stances for every forum user, checked against the planted ground truth.
//!
//! cargo run --release --example stance_labeling -- [seed]

use stancecast::corpus::{generate_synthetic_corpus, SynthConfig, ThreadForest};
use stancecast::stance::{
    label_period_users, train_transfer_model, HashtagLexicon, LabelerConfig, Stance,
};

fn main() -> stancecast::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let corpus = generate_synthetic_corpus(
        &SynthConfig {
            users: 200,
            periods: 4,
            threads_per_period: 40,
            ..SynthConfig::default()
        },
        seed,
    )?;
    let lexicon = HashtagLexicon::default();
    let config = LabelerConfig::default();
    let transfer = train_transfer_model(&corpus.tweets, &lexicon, &config, seed)?;
    let e = &transfer.evaluation;
    println!(
        "{} weak labels from {} tweet authors; held out: accuracy {:.3}, macro-accuracy {:.3} ({} users)",
        transfer.weak_labels.len(),
        corpus.tweets.len(),
        e.accuracy,
        e.macro_accuracy,
        e.test_size
    );
    println!("vocabulary: {} stems", transfer.model.vocabulary().len());

    let forest = ThreadForest::build(corpus.entries.clone());
    let (stances, oov) = label_period_users(&transfer.model, &forest, &corpus.partition, config.cutoffs)?;
    for o in &oov {
        println!("period {}: {} users, OOV rate {:.3}", o.period, o.users, o.rate());
    }
    let mut confusion = [[0usize; 3]; 3];
    for (user, period, label) in stances.iter() {
        if let Some(truth) = corpus.ground_truth.get(user, period) {
            confusion[truth.index()][label.stance.index()] += 1;
        }
    }
    println!("\ntruth \\ assigned   A     N     P");
    for s in Stance::ALL {
        let row = confusion[s.index()];
        println!("{s:<16} {:>5} {:>5} {:>5}", row[0], row[1], row[2]);
    }
    Ok(())
}
