//! Duplicate filtering and the manual-review queue.

use std::collections::HashMap;
use std::fmt;

use unicode_normalization::UnicodeNormalization;

use crate::exec::{self, ExecMode};
use crate::lexicon::{LexEntry, MergedDuplicate, PassKind, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IssueKind {
    SingleTokenResidue,
    AmalgamSuspect,
    EmptySurface,
    EmptyEntry,
    DuplicateOfBase,
    CrossTableDuplicate,
    AgreementUnchecked,
}

impl IssueKind {
    pub fn name(self) -> &'static str {
        match self {
            IssueKind::SingleTokenResidue => "SingleTokenResidue",
            IssueKind::AmalgamSuspect => "AmalgamSuspect",
            IssueKind::EmptySurface => "EmptySurface",
            IssueKind::EmptyEntry => "EmptyEntry",
            IssueKind::DuplicateOfBase => "DuplicateOfBase",
            IssueKind::CrossTableDuplicate => "CrossTableDuplicate",
            IssueKind::AgreementUnchecked => "AgreementUnchecked",
        }
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValidationIssue {
    pub entry_id: String,
    pub kind: IssueKind,
    pub detail: String,
}

impl ValidationIssue {
    pub fn new(entry_id: &str, kind: IssueKind, detail: impl Into<String>) -> Self {
        ValidationIssue {
            entry_id: entry_id.to_string(),
            kind,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuplicateRecord {
    pub kept: String,
    pub removed: Vec<String>,
    pub key: String,
}

/// NFC, lower case, single spaces, one apostrophe.
pub fn canonical_key(surface: &str) -> String {
    let normalized: String = surface.nfc().collect::<String>().replace(['’', 'ʼ'], "'");
    normalized
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Rank {
    generated: bool,
    table: String,
    row: usize,
    pass: Option<PassKind>,
    ordinal: usize,
}

fn rank(entry: &LexEntry) -> Rank {
    let ordinal = match entry.provenance {
        Provenance::Base => 0,
        Provenance::Generated { .. } => entry
            .entry_id
            .rsplit('#')
            .next()
            .and_then(|o| o.parse().ok())
            .unwrap_or(usize::MAX),
    };
    Rank {
        generated: !entry.is_base(),
        table: entry.table_id.clone(),
        row: entry.row,
        pass: entry.provenance.pass(),
        ordinal,
    }
}

fn duplicate_issues(kept: &LexEntry, removed: &[MergedDuplicate]) -> Vec<ValidationIssue> {
    removed
        .iter()
        .filter_map(|r| {
            let kind = if r.table_id != kept.table_id {
                IssueKind::CrossTableDuplicate
            } else if kept.is_base() {
                IssueKind::DuplicateOfBase
            } else {
                return None;
            };
            Some(ValidationIssue::new(
                &kept.entry_id,
                kind,
                format!("{} ({}) duplicates {:?}", r.entry_id, r.table_id, kept.surface.rendered),
            ))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DedupOutcome {
    pub entries: Vec<LexEntry>,
    pub duplicates: Vec<DuplicateRecord>,
    pub issues: Vec<ValidationIssue>,
}

/// Keeps one entry per canonical key: base before generated, then table id,
/// row, pass and ordinal. Survivors stay in input order and absorb the
/// removed entries as [`MergedDuplicate`]s.
pub fn dedup(entries: Vec<LexEntry>, mode: ExecMode) -> DedupOutcome {
    let keys = exec::map(mode, &entries, |e| canonical_key(&e.surface.rendered));

    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (index, key) in keys.iter().enumerate() {
        groups.entry(key.as_str()).or_default().push(index);
    }

    let mut removed_into: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut dropped = vec![false; entries.len()];
    for members in groups.values().filter(|m| m.len() > 1) {
        let mut ranked = members.clone();
        ranked.sort_by_cached_key(|&i| rank(&entries[i]));
        let (kept, rest) = ranked.split_first().expect("group is non-empty");
        for &r in rest {
            dropped[r] = true;
        }
        removed_into.insert(*kept, rest.to_vec());
    }

    let mut survivors_with_rank = Vec::new();
    let mut out = Vec::with_capacity(entries.len());
    let mut duplicates = Vec::new();
    let mut issues = Vec::new();

    for (index, mut entry) in entries.iter().cloned().enumerate() {
        if dropped[index] {
            continue;
        }
        if let Some(removed) = removed_into.get(&index) {
            let merged: Vec<MergedDuplicate> = removed
                .iter()
                .map(|&r| MergedDuplicate {
                    entry_id: entries[r].entry_id.clone(),
                    table_id: entries[r].table_id.clone(),
                    provenance: entries[r].provenance.clone(),
                })
                .collect();
            issues.extend(duplicate_issues(&entry, &merged));
            duplicates.push(DuplicateRecord {
                kept: entry.entry_id.clone(),
                removed: merged.iter().map(|m| m.entry_id.clone()).collect(),
                key: keys[index].clone(),
            });
            survivors_with_rank.push(rank(&entry));
            entry.merged.extend(merged);
        }
        out.push(entry);
    }

    // records and issues ordered by survivor rank, independent of input order
    let mut order: Vec<usize> = (0..duplicates.len()).collect();
    order.sort_by(|&a, &b| survivors_with_rank[a].cmp(&survivors_with_rank[b]));
    let duplicates: Vec<DuplicateRecord> = order.iter().map(|&i| duplicates[i].clone()).collect();
    issues.sort_by(|a, b| (a.kind, &a.entry_id, &a.detail).cmp(&(b.kind, &b.entry_id, &b.detail)));

    DedupOutcome {
        entries: out,
        duplicates,
        issues,
    }
}

/// Rebuilds duplicate records and issues from the merge history stored on
/// already-curated entries.
pub fn duplicates_from_merged(entries: &[LexEntry]) -> (Vec<DuplicateRecord>, Vec<ValidationIssue>) {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for entry in entries.iter().filter(|e| !e.merged.is_empty()) {
        records.push(DuplicateRecord {
            kept: entry.entry_id.clone(),
            removed: entry.merged.iter().map(|m| m.entry_id.clone()).collect(),
            key: canonical_key(&entry.surface.rendered),
        });
        issues.extend(duplicate_issues(entry, &entry.merged));
    }
    (records, issues)
}

/// The heuristics of the manual evaluation: single-word residue of
/// deletion/permutation, hyphen amalgams, empty surfaces, and
/// transformation outputs whose agreement was never checked.
pub fn flag_suspicious(entry: &LexEntry) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let id = &entry.entry_id;
    if entry.surface.is_empty() {
        issues.push(ValidationIssue::new(id, IssueKind::EmptySurface, "surface realizes to nothing"));
    }
    let pass = entry.provenance.pass();
    let words: Vec<&str> = entry.surface.words().collect();
    if matches!(pass, Some(PassKind::Deletion | PassKind::Permutation)) && words.len() == 1 {
        issues.push(ValidationIssue::new(
            id,
            IssueKind::SingleTokenResidue,
            format!("{:?} is a single word", entry.surface.rendered),
        ));
    }
    for word in &words {
        let detached = word.chars().count() > 1 && (word.ends_with('-') || word.starts_with('-'));
        let lost_clitic = matches!(*word, "ci" | "là") && entry.surface.rendered.contains(&format!("- {word}"));
        if detached || lost_clitic {
            issues.push(ValidationIssue::new(
                id,
                IssueKind::AmalgamSuspect,
                format!("{word:?} in {:?}", entry.surface.rendered),
            ));
        }
    }
    if pass == Some(PassKind::Transformation) {
        issues.push(ValidationIssue::new(
            id,
            IssueKind::AgreementUnchecked,
            format!("gender/number agreement of {:?} not verified", entry.surface.rendered),
        ));
    }
    issues
}

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

pub const REVIEW_HEADER: &str = "# kind\tentry_id\tdetail";

/// Tab-separated review queue, grouped by kind, one finding per line.
/// Duplicate records come last under the kind `Duplicate`.
pub fn review_report(issues: &[ValidationIssue], duplicates: &[DuplicateRecord]) -> String {
    let mut sorted: Vec<&ValidationIssue> = issues.iter().collect();
    sorted.sort_by(|a, b| (a.kind, &a.entry_id, &a.detail).cmp(&(b.kind, &b.entry_id, &b.detail)));
    sorted.dedup();

    let mut out = String::from(REVIEW_HEADER);
    out.push('\n');
    for issue in sorted {
        out.push_str(&format!("{}\t{}\t{}\n", issue.kind, clean(&issue.entry_id), clean(&issue.detail)));
    }
    for record in duplicates {
        out.push_str(&format!(
            "Duplicate\t{}\tremoved={} key={}\n",
            clean(&record.kept),
            clean(&record.removed.join(",")),
            clean(&record.key)
        ));
    }
    out
}
