//! Entry accounting: per-pass additions, rounded percentages and the
//! conservation identity `final = initial + added - duplicates - rejected`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lexicon::PassKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassLine {
    pub label: String,
    pub pass: Option<PassKind>,
    pub added: u64,
    /// Rounded percentage of the initial count; None when there are no
    /// initial entries.
    pub percent: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatsReport {
    pub initial: u64,
    pub per_pass: Vec<PassLine>,
    pub duplicates_removed: u64,
    pub rejected: u64,
    pub final_count: u64,
}

/// `100 * added / initial`, rounded half away from zero.
pub fn percent(added: u64, initial: u64) -> Result<u64> {
    if initial == 0 {
        return Err(Error::ZeroInitial);
    }
    let (added, initial) = (u128::from(added), u128::from(initial));
    Ok(((200 * added + initial) / (2 * initial)) as u64)
}

fn build(initial: u64, lines: Vec<(String, Option<PassKind>, u64)>, duplicates: u64, rejected: u64) -> Result<StatsReport> {
    let per_pass = lines
        .into_iter()
        .map(|(label, pass, added)| {
            PassLine {
                percent: percent(added, initial).ok(),
                label,
                pass,
                added,
            }
        })
        .collect::<Vec<_>>();
    let added: u64 = per_pass.iter().map(|l| l.added).sum();
    let final_count = (initial + added)
        .checked_sub(duplicates + rejected)
        .ok_or_else(|| Error::Invariant(format!("{duplicates} duplicates + {rejected} rejected exceed {initial} + {added} entries")))?;
    Ok(StatsReport {
        initial,
        per_pass,
        duplicates_removed: duplicates,
        rejected,
        final_count,
    })
}

/// Report over the six passes, in canonical order. Passes missing from
/// `added` count as zero.
pub fn compute_stats(initial: u64, added: &[(PassKind, u64)], duplicates: u64, rejected: u64) -> Result<StatsReport> {
    let lines = PassKind::ALL
        .into_iter()
        .map(|pass| {
            let count = added.iter().filter(|(p, _)| *p == pass).map(|(_, c)| c).sum();
            (pass.name().to_string(), Some(pass), count)
        })
        .collect();
    build(initial, lines, duplicates, rejected)
}

/// Report over arbitrary labelled groups (e.g. already-aggregated counts).
pub fn compute_grouped_stats(initial: u64, groups: &[(&str, u64)], duplicates: u64, rejected: u64) -> Result<StatsReport> {
    let lines = groups.iter().map(|(label, count)| (label.to_string(), None, *count)).collect();
    build(initial, lines, duplicates, rejected)
}

impl StatsReport {
    pub fn total_added(&self) -> u64 {
        self.per_pass.iter().map(|l| l.added).sum()
    }

    pub fn total_percent(&self) -> Result<u64> {
        percent(self.total_added(), self.initial)
    }

    /// Rounded percentage for one pass; `ZeroInitial` on an empty base.
    pub fn percent_of(&self, pass: PassKind) -> Result<u64> {
        percent(self.added_by(pass), self.initial)
    }

    pub fn added_by(&self, pass: PassKind) -> u64 {
        self.per_pass.iter().filter(|l| l.pass == Some(pass)).map(|l| l.added).sum()
    }

    /// (label, added, percent) for paraphrases, other structures and
    /// intensifying features.
    pub fn groups(&self) -> Result<Vec<(&'static str, u64, u64)>> {
        use PassKind::*;
        let groups: [(&str, &[PassKind]); 3] = [
            ("Paraphrases", &[ParaphraseDirect, ParaphraseConstruction]),
            ("Other structures", &[Deletion, Permutation, Transformation]),
            ("Intensifying features", &[Intensification]),
        ];
        groups
            .iter()
            .map(|(label, passes)| {
                let added = passes.iter().map(|p| self.added_by(*p)).sum();
                Ok((*label, added, percent(added, self.initial)?))
            })
            .collect()
    }

    /// Fails when the identity does not match an observed final count.
    pub fn check_identity(&self, observed_final: u64) -> Result<()> {
        let expected = self.initial + self.total_added() - self.duplicates_removed - self.rejected;
        if expected != self.final_count || observed_final != self.final_count {
            return Err(Error::Invariant(format!(
                "stats identity broken: {} + {} - {} - {} = {expected}, report says {}, lexicon has {observed_final}",
                self.initial,
                self.total_added(),
                self.duplicates_removed,
                self.rejected,
                self.final_count
            )));
        }
        Ok(())
    }

    /// Plain-text table shaped like the usual entry-count summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, label: &str, n: u64, pct: Option<Option<u64>>| {
            let pct = match pct {
                Some(Some(p)) => format!("(+{p}%)"),
                Some(None) => "(n/a)".to_string(),
                None => String::new(),
            };
            let _ = writeln!(out, "{label:<26}{:>10}  {pct}", thousands(n));
        };
        row(&mut out, "Initial entries", self.initial, None);
        for line in &self.per_pass {
            row(&mut out, &format!("  {}", line.label), line.added, Some(line.percent));
        }
        if self.per_pass.iter().all(|l| l.pass.is_some()) && self.initial > 0 {
            for (label, added, pct) in self.groups().unwrap_or_default() {
                row(&mut out, label, added, Some(Some(pct)));
            }
        }
        row(&mut out, "Added", self.total_added(), Some(self.total_percent().ok()));
        row(&mut out, "Duplicates removed", self.duplicates_removed, None);
        row(&mut out, "Rejected", self.rejected, None);
        row(&mut out, "Final entries", self.final_count, None);
        out
    }
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
