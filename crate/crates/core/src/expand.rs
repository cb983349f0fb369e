//! Generation passes over base entries and the pipeline driver.
//!
//! Every pass reads base entries only; variants are never expanded again.
//! Placeholder values come from the parent entry itself (components,
//! auxiliary lexical values and binary features), so a base lexicon plus the
//! extraction script is enough to extend it.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::curate::{dedup, flag_suspicious, DuplicateRecord, ValidationIssue};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::lexicon::{entry_id, LexEntry, LexicalInfo, PassKind, Provenance};
use crate::realize::{Bindings, Realizer};
use crate::script::{ExtractionScript, FlatTemplate, ScriptRule};
use crate::stats::{compute_stats, StatsReport};
use crate::table::{CellValue, FeatureKind, EMPTY_TOKEN, ENT_MARKER};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassConfig {
    pub enabled: BTreeSet<PassKind>,
    pub mode: ExecMode,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig::all()
    }
}

impl PassConfig {
    pub fn all() -> Self {
        PassConfig {
            enabled: PassKind::ALL.into_iter().collect(),
            mode: ExecMode::default(),
        }
    }

    pub fn none() -> Self {
        PassConfig {
            enabled: BTreeSet::new(),
            mode: ExecMode::default(),
        }
    }

    pub fn only(passes: &[PassKind]) -> Self {
        PassConfig {
            enabled: passes.iter().copied().collect(),
            mode: ExecMode::default(),
        }
    }

    /// Parses a comma-separated pass list; `all` and `none` are accepted.
    pub fn parse(list: &str) -> std::result::Result<Self, String> {
        match list.trim() {
            "all" => return Ok(PassConfig::all()),
            "none" | "" => return Ok(PassConfig::none()),
            _ => {}
        }
        let passes = list
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<std::result::Result<Vec<PassKind>, _>>()?;
        Ok(PassConfig::only(&passes))
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    fn is_enabled(&self, pass: PassKind) -> bool {
        self.enabled.contains(&pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionRecord {
    pub new_entry: LexEntry,
    pub parent_id: String,
    pub pass: PassKind,
    pub feature_id: String,
    pub template: FlatTemplate,
}

/// Cells of a base entry, keyed by column id.
pub struct EntryBindings {
    table_id: String,
    cells: BTreeMap<String, CellValue>,
}

impl EntryBindings {
    pub fn new(entry: &LexEntry) -> Self {
        let mut cells = BTreeMap::new();
        for (slot, text) in &entry.components {
            let cell = match text {
                Some(t) => CellValue::Lex(t.clone()),
                None => CellValue::EmptySymbol,
            };
            cells.insert(format!("{ENT_MARKER}{slot}"), cell);
        }
        for (column, text) in &entry.lexical_info.lexical_values {
            let cell = if text == EMPTY_TOKEN { CellValue::EmptySymbol } else { CellValue::Lex(text.clone()) };
            cells.insert(column.clone(), cell);
        }
        for (feature, value) in &entry.binary_features {
            cells.insert(feature.clone(), if *value { CellValue::Plus } else { CellValue::Minus });
        }
        EntryBindings {
            table_id: entry.table_id.clone(),
            cells,
        }
    }
}

impl Bindings for EntryBindings {
    fn lookup(&self, column_id: &str) -> Option<&CellValue> {
        self.cells.get(column_id)
    }

    fn table_id(&self) -> &str {
        &self.table_id
    }
}

/// Does `rule` feed `pass`?
fn feeds(rule: &ScriptRule, pass: PassKind) -> bool {
    match (rule.action.feature_kind(), pass) {
        (FeatureKind::ParaphraseDirect, PassKind::ParaphraseDirect)
        | (FeatureKind::Deletion, PassKind::Deletion)
        | (FeatureKind::Permutation, PassKind::Permutation)
        | (FeatureKind::Transformation, PassKind::Transformation)
        | (FeatureKind::Intensifier, PassKind::Intensification) => true,
        (FeatureKind::Construction, PassKind::ParaphraseConstruction) => !rule.templates.is_empty(),
        _ => false,
    }
}

/// Runs one pass on one base entry. Rules are visited in script order,
/// templates in expansion order; ordinals count from 1 within the pass.
pub fn expand_pass(
    entry: &LexEntry,
    pass: PassKind,
    script: &ExtractionScript,
    realizer: &Realizer,
) -> Result<Vec<ExpansionRecord>> {
    if !entry.is_base() {
        return Err(Error::Invariant(format!("{} is not a base entry", entry.entry_id)));
    }
    let bindings = EntryBindings::new(entry);
    let mut records = Vec::new();
    for rule in &script.rules {
        if !feeds(rule, pass) || !rule.applies_to.matches(&entry.table_id) {
            continue;
        }
        // a more specific rule for the same feature shadows this one
        if script.rule_for(&entry.table_id, &rule.feature_id) != Some(rule) {
            continue;
        }
        if entry.binary_features.get(&rule.feature_id) != Some(&true) {
            continue;
        }
        for template in rule.flat_templates() {
            let surface = realizer.realize(&template, &bindings)?;
            let ordinal = records.len() + 1;
            let mut constructions = entry.constructions.clone();
            if pass == PassKind::ParaphraseConstruction && !constructions.ids.contains(&rule.feature_id) {
                constructions.ids.push(rule.feature_id.clone());
            }
            if let Some(label) = rule.action.structure_label() {
                if !constructions.internal_structures.iter().any(|s| s == label) {
                    constructions.internal_structures.push(label.to_string());
                }
            }
            let new_entry = LexEntry {
                entry_id: entry_id(&entry.table_id, entry.row, Some((pass.tag(), ordinal))),
                table_id: entry.table_id.clone(),
                row: entry.row,
                surface,
                components: entry.components.clone(),
                lexical_info: LexicalInfo {
                    category: entry.lexical_info.category.clone(),
                    lexical_values: entry.lexical_info.lexical_values.clone(),
                    usage_note: entry.lexical_info.usage_note.clone(),
                    ..LexicalInfo::default()
                },
                arguments: entry.arguments.clone(),
                constructions,
                binary_features: entry.binary_features.clone(),
                provenance: Provenance::Generated {
                    pass,
                    parent: entry.entry_id.clone(),
                    feature_id: rule.feature_id.clone(),
                    template: template.0.clone(),
                },
                merged: Vec::new(),
            };
            records.push(ExpansionRecord {
                new_entry,
                parent_id: entry.entry_id.clone(),
                pass,
                feature_id: rule.feature_id.clone(),
                template,
            });
        }
    }
    Ok(records)
}

pub fn expand_paraphrase_direct(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::ParaphraseDirect, script, realizer)
}

pub fn expand_paraphrase_construction(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::ParaphraseConstruction, script, realizer)
}

pub fn expand_deletion(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::Deletion, script, realizer)
}

pub fn expand_permutation(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::Permutation, script, realizer)
}

pub fn expand_transformation(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::Transformation, script, realizer)
}

pub fn expand_intensify(entry: &LexEntry, script: &ExtractionScript, realizer: &Realizer) -> Result<Vec<ExpansionRecord>> {
    expand_pass(entry, PassKind::Intensification, script, realizer)
}

/// Records the variants on their parent: surfaces in the matching
/// lexical-information list and variant structures among the parent's
/// internal structures.
fn attach_back_references(parent: &mut LexEntry, records: &[ExpansionRecord]) {
    for record in records {
        let surface = record.new_entry.surface.clone();
        match record.pass {
            PassKind::ParaphraseDirect | PassKind::ParaphraseConstruction => {
                parent.lexical_info.paraphrases.push(surface)
            }
            PassKind::Intensification => parent.lexical_info.intensified.push(surface),
            PassKind::Deletion | PassKind::Permutation | PassKind::Transformation => {
                let label = record
                    .new_entry
                    .constructions
                    .internal_structures
                    .last()
                    .cloned()
                    .unwrap_or_default();
                if !parent.constructions.internal_structures.contains(&label) {
                    parent.constructions.internal_structures.push(label.clone());
                }
                parent.lexical_info.other_structures.push((label, surface));
            }
        }
    }
}

/// All enabled passes on one base entry, in canonical pass order.
pub fn expand_entry(
    entry: &LexEntry,
    script: &ExtractionScript,
    realizer: &Realizer,
    config: &PassConfig,
) -> Result<(LexEntry, Vec<ExpansionRecord>)> {
    let mut records = Vec::new();
    for pass in PassKind::ALL.into_iter().filter(|p| config.is_enabled(*p)) {
        records.extend(expand_pass(entry, pass, script, realizer)?);
    }
    let mut parent = entry.clone();
    attach_back_references(&mut parent, &records);
    Ok((parent, records))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineOutput {
    pub lexicon: Vec<LexEntry>,
    pub records: Vec<ExpansionRecord>,
    pub duplicates: Vec<DuplicateRecord>,
    pub issues: Vec<ValidationIssue>,
    pub rejected: Vec<String>,
    pub stats: StatsReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordStatus {
    Kept,
    Duplicate,
    Rejected,
}

impl RecordStatus {
    pub fn name(self) -> &'static str {
        match self {
            RecordStatus::Kept => "kept",
            RecordStatus::Duplicate => "duplicate",
            RecordStatus::Rejected => "rejected",
        }
    }
}

impl PipelineOutput {
    /// Fate of every generated entry and of every removed base entry.
    pub fn statuses(&self) -> BTreeMap<String, RecordStatus> {
        let mut out = BTreeMap::new();
        for record in &self.records {
            out.insert(record.new_entry.entry_id.clone(), RecordStatus::Kept);
        }
        for dup in &self.duplicates {
            for id in &dup.removed {
                out.insert(id.clone(), RecordStatus::Duplicate);
            }
        }
        for id in &self.rejected {
            out.insert(id.clone(), RecordStatus::Rejected);
        }
        out
    }

    /// Removes the given entries, plus every variant of a removed base
    /// entry, and recomputes the statistics.
    pub fn reject(&mut self, ids: &HashSet<String>) -> Result<()> {
        let doomed: HashSet<String> = self
            .lexicon
            .iter()
            .filter(|e| ids.contains(&e.entry_id) || e.provenance.parent().is_some_and(|p| ids.contains(p)))
            .map(|e| e.entry_id.clone())
            .collect();
        self.lexicon.retain(|e| !doomed.contains(&e.entry_id));
        let mut rejected: Vec<String> = doomed.into_iter().collect();
        rejected.sort();
        self.rejected.extend(rejected);
        self.issues.retain(|i| !self.rejected.contains(&i.entry_id));
        self.stats = compute_stats(
            self.stats.initial,
            &pass_counts(&self.records),
            self.stats.duplicates_removed,
            self.rejected.len() as u64,
        )?;
        self.stats.check_identity(self.lexicon.len() as u64)
    }
}

fn pass_counts(records: &[ExpansionRecord]) -> Vec<(PassKind, u64)> {
    PassKind::ALL
        .into_iter()
        .map(|p| (p, records.iter().filter(|r| r.pass == p).count() as u64))
        .collect()
}

/// Expands every base entry, then deduplicates and flags the result.
/// Output order: each parent followed by its variants (pass order, then
/// rule and template order).
pub fn run_pipeline(
    base: &[LexEntry],
    script: &ExtractionScript,
    realizer: &Realizer,
    config: &PassConfig,
) -> Result<PipelineOutput> {
    if let Some(bad) = base.iter().find(|e| !e.is_base()) {
        return Err(Error::Invariant(format!("{} is not a base entry", bad.entry_id)));
    }
    let expanded = exec::try_map(config.mode, base, |e| expand_entry(e, script, realizer, config))?;

    let mut lexicon = Vec::new();
    let mut records = Vec::new();
    for (parent, entry_records) in expanded {
        lexicon.push(parent);
        lexicon.extend(entry_records.iter().map(|r| r.new_entry.clone()));
        records.extend(entry_records);
    }

    let curated = dedup(lexicon, config.mode);
    let mut issues = curated.issues;
    let flags = exec::map(config.mode, &curated.entries, flag_suspicious);
    issues.extend(flags.into_iter().flatten());

    let duplicates_removed = curated.duplicates.iter().map(|d| d.removed.len() as u64).sum();
    let stats = compute_stats(base.len() as u64, &pass_counts(&records), duplicates_removed, 0)?;
    stats.check_identity(curated.entries.len() as u64)?;

    Ok(PipelineOutput {
        lexicon: curated.entries,
        records,
        duplicates: curated.duplicates,
        issues,
        rejected: Vec::new(),
        stats,
    })
}
