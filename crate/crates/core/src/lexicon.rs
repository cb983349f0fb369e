//! Lexicon entries and base generation: one entry per table row.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::realize::{Realizer, RowBindings, SurfaceForm};
use crate::script::{Action, ExtractionScript, FlatTemplate};
use crate::table::{CellValue, FeatureKind, LgTable, SlotRef, EMPTY_TOKEN};

/// The six generation passes, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PassKind {
    ParaphraseDirect,
    ParaphraseConstruction,
    Deletion,
    Permutation,
    Transformation,
    Intensification,
}

impl PassKind {
    pub const ALL: [PassKind; 6] = [
        PassKind::ParaphraseDirect,
        PassKind::ParaphraseConstruction,
        PassKind::Deletion,
        PassKind::Permutation,
        PassKind::Transformation,
        PassKind::Intensification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PassKind::ParaphraseDirect => "paraphrase-direct",
            PassKind::ParaphraseConstruction => "paraphrase-construction",
            PassKind::Deletion => "deletion",
            PassKind::Permutation => "permutation",
            PassKind::Transformation => "transformation",
            PassKind::Intensification => "intensification",
        }
    }

    /// Short tag used in generated entry ids.
    pub fn tag(self) -> &'static str {
        match self {
            PassKind::ParaphraseDirect => "para",
            PassKind::ParaphraseConstruction => "cpara",
            PassKind::Deletion => "del",
            PassKind::Permutation => "perm",
            PassKind::Transformation => "trans",
            PassKind::Intensification => "int",
        }
    }
}

impl fmt::Display for PassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PassKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PassKind::ALL
            .into_iter()
            .find(|p| p.name() == s || p.tag() == s)
            .ok_or_else(|| format!("unknown pass {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Base,
    Generated {
        pass: PassKind,
        parent: String,
        feature_id: String,
        template: String,
    },
}

impl Provenance {
    pub fn is_base(&self) -> bool {
        matches!(self, Provenance::Base)
    }

    pub fn pass(&self) -> Option<PassKind> {
        match self {
            Provenance::Base => None,
            Provenance::Generated { pass, .. } => Some(*pass),
        }
    }

    pub fn parent(&self) -> Option<&str> {
        match self {
            Provenance::Base => None,
            Provenance::Generated { parent, .. } => Some(parent),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgSlot {
    N0,
    N1,
    N2,
    Poss0,
    Poss2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selection {
    Human,
    NonHuman,
    Any,
    Unspecified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArgumentSpec {
    pub slot: ArgSlot,
    pub selection: Selection,
}

impl ArgSlot {
    pub fn name(self) -> &'static str {
        match self {
            ArgSlot::N0 => "N0",
            ArgSlot::N1 => "N1",
            ArgSlot::N2 => "N2",
            ArgSlot::Poss0 => "Poss0",
            ArgSlot::Poss2 => "Poss2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ArgSlot::N0, ArgSlot::N1, ArgSlot::N2, ArgSlot::Poss0, ArgSlot::Poss2]
            .into_iter()
            .find(|a| a.name() == s)
    }
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::Human => "Nhum",
            Selection::NonHuman => "N-hum",
            Selection::Any => "Nhum|N-hum",
            Selection::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Selection::Human, Selection::NonHuman, Selection::Any, Selection::Unspecified]
            .into_iter()
            .find(|v| v.name() == s)
    }

    fn from_columns(human: Option<bool>, non_human: Option<bool>) -> Option<Self> {
        let selection = match (human, non_human) {
            (None, None) => return None,
            (Some(true), Some(true)) => Selection::Any,
            (Some(true), _) => Selection::Human,
            (_, Some(true)) => Selection::NonHuman,
            _ => Selection::Unspecified,
        };
        Some(selection)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LexicalInfo {
    pub category: String,
    pub paraphrases: Vec<SurfaceForm>,
    /// (structure label, surface) of deletion/permutation/transformation variants.
    pub other_structures: Vec<(String, SurfaceForm)>,
    pub intensified: Vec<SurfaceForm>,
    /// Auxiliary lexical columns (`Adj`, `Ndomaine`, ...) with their values.
    pub lexical_values: Vec<(String, String)>,
    /// Human-reader helper columns; never part of any equality key.
    pub usage_note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Constructions {
    pub ids: Vec<String>,
    pub internal_structures: Vec<String>,
}

/// A duplicate folded into this entry by curation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedDuplicate {
    pub entry_id: String,
    pub table_id: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub entry_id: String,
    pub table_id: String,
    /// 1-based row of the source table.
    pub row: usize,
    pub surface: SurfaceForm,
    pub components: Vec<(SlotRef, Option<String>)>,
    pub lexical_info: LexicalInfo,
    pub arguments: Vec<ArgumentSpec>,
    pub constructions: Constructions,
    pub binary_features: BTreeMap<String, bool>,
    pub provenance: Provenance,
    pub merged: Vec<MergedDuplicate>,
}

impl LexEntry {
    pub fn is_base(&self) -> bool {
        self.provenance.is_base()
    }
}

/// Deterministic entry id: `TABLE#row` or `TABLE#row#tag#ordinal`.
pub fn entry_id(table_id: &str, row: usize, variant: Option<(&str, usize)>) -> String {
    match variant {
        None => format!("{table_id}#{row}"),
        Some((tag, ordinal)) => format!("{table_id}#{row}#{tag}#{ordinal}"),
    }
}

/// Template spelling the class structure from the `<ENT>` columns.
pub fn structure_template(table: &LgTable) -> FlatTemplate {
    let parts: Vec<String> = table.structure.iter().map(|s| format!("@{}@", s.column_id())).collect();
    FlatTemplate(parts.join(" "))
}

/// Label of the class's defining structure.
pub fn structure_label(table: &LgTable, script: &ExtractionScript) -> String {
    match script.structure_for(&table.table_id) {
        Some(label) => label.to_string(),
        None => table.structure.iter().map(SlotRef::as_str).collect::<Vec<_>>().join(" "),
    }
}

fn arguments(table: &LgTable, row: usize) -> Vec<ArgumentSpec> {
    let flag = |column: String| table.cell(row, &column).map(CellValue::is_plus);
    [ArgSlot::N0, ArgSlot::N1, ArgSlot::N2]
        .into_iter()
        .filter_map(|slot| {
            let human = flag(format!("{} =: Nhum", slot.name()));
            let non_human = flag(format!("{} =: N-hum", slot.name()));
            Selection::from_columns(human, non_human).map(|selection| ArgumentSpec { slot, selection })
        })
        .collect()
}

fn base_entry(table: &LgTable, script: &ExtractionScript, realizer: &Realizer, row: usize) -> Result<LexEntry> {
    let cells = &table.rows[row].cells;
    let surface = realizer.realize(&structure_template(table), &RowBindings { table, row })?;

    let mut components = Vec::new();
    let mut lexical_values = Vec::new();
    let mut notes = Vec::new();
    let mut construction_ids = Vec::new();
    let mut binary_features = BTreeMap::new();

    for (feature, cell) in table.features.iter().zip(cells) {
        match feature.kind {
            FeatureKind::EntryComponent => {
                let slot = SlotRef::parse(feature.slot().unwrap_or_default())?;
                components.push((slot, cell.text().map(String::from)));
            }
            FeatureKind::AuxLexical => {
                let declared_lexical = script
                    .rule_for(&table.table_id, &feature.id)
                    .is_some_and(|r| r.action == Action::Lexical);
                match (cell.text(), declared_lexical) {
                    // kept as `<E>` so templates still bind it to nothing
                    (text, true) => lexical_values.push((feature.id.clone(), text.unwrap_or(EMPTY_TOKEN).to_string())),
                    (Some(text), false) => notes.push(format!("{}: {text}", feature.id)),
                    (None, false) => {}
                }
            }
            kind => {
                let value = match cell {
                    CellValue::Plus => true,
                    CellValue::Minus => false,
                    other => {
                        return Err(Error::Invariant(format!(
                            "{} row {}: non-binary cell {other:?} in {kind} column",
                            table.table_id,
                            row + 1
                        )))
                    }
                };
                if kind == FeatureKind::Construction && value {
                    construction_ids.push(feature.id.clone());
                }
                binary_features.insert(feature.id.clone(), value);
            }
        }
    }

    Ok(LexEntry {
        entry_id: entry_id(&table.table_id, row + 1, None),
        table_id: table.table_id.clone(),
        row: row + 1,
        surface,
        components,
        lexical_info: LexicalInfo {
            category: script.category_for(&table.table_id).to_string(),
            lexical_values,
            usage_note: (!notes.is_empty()).then(|| notes.join("; ")),
            ..LexicalInfo::default()
        },
        arguments: arguments(table, row),
        constructions: Constructions {
            ids: construction_ids,
            internal_structures: vec![structure_label(table, script)],
        },
        binary_features,
        provenance: Provenance::Base,
        merged: Vec::new(),
    })
}

/// One base entry per row of a resolved table, in row order.
pub fn generate_base(
    table: &LgTable,
    script: &ExtractionScript,
    realizer: &Realizer,
    mode: ExecMode,
) -> Result<Vec<LexEntry>> {
    script.check_bindings(table)?;
    let rows: Vec<usize> = (0..table.rows.len()).collect();
    exec::try_map(mode, &rows, |&row| base_entry(table, script, realizer, row))
}
