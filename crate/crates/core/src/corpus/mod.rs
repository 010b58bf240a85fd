//! Entries, thread forests, diffusions and time periods.

mod entry;
mod forest;
mod period;
pub mod synth;

pub use entry::{is_deleted_author, parse_entries, Entry, ParseReport, DELETED_AUTHOR};
pub use forest::{Diffusion, ForestDiagnostics, ThreadForest};
pub use period::{partition_periods, PeriodAssignment, TimePartition};
pub use synth::{generate_synthetic_corpus, SynthConfig, SyntheticCorpus};
