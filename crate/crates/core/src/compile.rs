//! Tables + class matrix + script → base lexicon, the `compile` step.

use crate::curate::ValidationIssue;
use crate::error::Result;
use crate::exec::{self, ExecMode};
use crate::lexicon::{generate_base, LexEntry};
use crate::realize::{MorphoRules, Realizer, SymbolPolicy};
use crate::script::ExtractionScript;
use crate::table::{parse_table, resolve_features, validate_table, ClassMatrix, LgTable};

/// A table source and the id it is known by (usually the file stem).
#[derive(Clone, Debug)]
pub struct TableSource {
    pub table_id: String,
    pub text: String,
}

/// Parses each table, appends its class-constant features and checks that
/// every script template it triggers can be bound.
pub fn load_tables(sources: &[TableSource], classes: &ClassMatrix, script: &ExtractionScript) -> Result<Vec<LgTable>> {
    sources
        .iter()
        .map(|src| {
            let table = parse_table(&src.text, &src.table_id, script)?;
            let table = resolve_features(&table, classes, script)?;
            script.check_bindings(&table)?;
            Ok(table)
        })
        .collect()
}

pub fn realizer_for(script: &ExtractionScript, rules: MorphoRules, policy: SymbolPolicy) -> Realizer {
    Realizer::new(rules, policy, script.symbols.clone())
}

/// Base entries of all tables, in table order then row order, plus the
/// table-level validation issues.
pub fn compile_base(
    tables: &[LgTable],
    script: &ExtractionScript,
    realizer: &Realizer,
    mode: ExecMode,
) -> Result<(Vec<LexEntry>, Vec<ValidationIssue>)> {
    let per_table = exec::try_map(mode, tables, |t| generate_base(t, script, realizer, mode))?;
    let issues = tables.iter().flat_map(validate_table).collect();
    Ok((per_table.into_iter().flatten().collect(), issues))
}
