//! Lexicon-Grammar tables to an NLP lexicon of multiword adverbs.
//!
//! Tables and a class matrix are parsed ([`table`]), an extraction script
//! says how features map to output ([`script`]), base entries are generated
//! one per row ([`lexicon`]), variants are produced by six passes
//! ([`expand`]) and the result is deduplicated and flagged ([`curate`]).

pub mod compile;
pub mod curate;
pub mod error;
pub mod exec;
pub mod expand;
pub mod io;
pub mod lexicon;
pub mod realize;
pub mod script;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use expand::{run_pipeline, PassConfig, PipelineOutput};
pub use lexicon::{generate_base, LexEntry, PassKind};
pub use realize::{MorphoRules, Realizer, SymbolPolicy};
pub use script::{parse_script, ExtractionScript};
pub use table::{parse_class_matrix, parse_table, resolve_features, LgTable};
