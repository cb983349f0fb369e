//! Surface realization: placeholder substitution followed by French
//! contraction, elision and spacing.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::script::{FlatTemplate, Segment};
use crate::table::{CellValue, LgTable, EMPTY_TOKEN};

/// A realized form. `tokens` is the pre-contraction token list; `rendered`
/// is the final text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SurfaceForm {
    pub tokens: Vec<String>,
    pub rendered: String,
}

impl SurfaceForm {
    pub fn is_empty(&self) -> bool {
        self.rendered.is_empty()
    }

    /// Whitespace-separated words of the rendered text.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.rendered.split_whitespace()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct ContractionRule {
    pub left: String,
    pub right: String,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct ElisionRule {
    pub word: String,
    pub result: String,
}

/// Contraction and elision tables. First matching rule wins.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct MorphoRules {
    #[serde(default, rename = "contraction")]
    pub contractions: Vec<ContractionRule>,
    #[serde(default, rename = "elision")]
    pub elisions: Vec<ElisionRule>,
    /// Words starting with a mute `h` (they elide like vowel-initial words).
    #[serde(default)]
    pub mute_h: Vec<String>,
}

const VOWELS: &str = "aàâäeéèêëiîïoôöuùûüæœAÀÂÄEÉÈÊËIÎÏOÔÖUÙÛÜÆŒ";

const DEFAULT_MUTE_H: &[&str] = &[
    "habitude", "habitudes", "heure", "heures", "heureux", "heureuse", "histoire", "histoires", "hiver",
    "homme", "hommes", "honneur", "hôpital", "huile", "humanité", "humeur", "hypothèse", "horizon",
];

impl Default for MorphoRules {
    fn default() -> Self {
        let contraction = |left: &str, right: &str, result: &str| ContractionRule {
            left: left.into(),
            right: right.into(),
            result: result.into(),
        };
        let elision = |word: &str, result: &str| ElisionRule {
            word: word.into(),
            result: result.into(),
        };
        MorphoRules {
            contractions: vec![
                contraction("de", "le", "du"),
                contraction("de", "les", "des"),
                contraction("à", "le", "au"),
                contraction("à", "les", "aux"),
            ],
            elisions: vec![
                elision("de", "d'"),
                elision("le", "l'"),
                elision("la", "l'"),
                elision("que", "qu'"),
            ],
            mute_h: DEFAULT_MUTE_H.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl MorphoRules {
    /// Loads rules from a TOML file with `[[contraction]]` (left, right,
    /// result) and `[[elision]]` (word, result) tables and a `mute_h` list.
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::MorphoRules(e.to_string()))
    }

    pub fn starts_with_vowel(&self, word: &str) -> bool {
        let Some(first) = word.chars().next() else {
            return false;
        };
        if VOWELS.contains(first) {
            return true;
        }
        if first == 'h' || first == 'H' {
            let lower = word.to_lowercase();
            return self.mute_h.iter().any(|h| *h == lower);
        }
        false
    }

    fn elided(&self, word: &str) -> Option<&str> {
        self.elisions.iter().find(|e| e.word == word).map(|e| e.result.as_str())
    }

    /// Preposition-determiner fusion, one left-to-right pass.
    pub fn contract(&self, tokens: &[String]) -> Vec<String> {
        self.contract_where(tokens, |_| true)
    }

    /// Contraction restricted to pairs where `eligible(i)` holds for the
    /// pair starting at `i`.
    fn contract_where(&self, tokens: &[String], eligible: impl Fn(usize) -> bool) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && eligible(i) {
                let (left, right) = (&tokens[i], &tokens[i + 1]);
                // `de le état` elides to `de l'état`, it never contracts
                let blocked = self.elided(right).is_some()
                    && tokens.get(i + 2).is_some_and(|next| self.starts_with_vowel(next));
                let rule = self.contractions.iter().find(|r| r.left == *left && r.right == *right);
                if let (Some(rule), false) = (rule, blocked) {
                    out.push(rule.result.clone());
                    i += 2;
                    continue;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        out
    }

    /// Apostrophe fusion of `de`, `le`, `la`, `que` before a vowel or mute h.
    pub fn elide(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if let (Some(elided), Some(next)) = (self.elided(&tokens[i]), tokens.get(i + 1)) {
                if self.starts_with_vowel(next) {
                    out.push(format!("{elided}{next}"));
                    i += 2;
                    continue;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        out
    }
}

fn glues_right(token: &str) -> bool {
    token.ends_with('\'') || token.ends_with('’') || (token.len() > 1 && token.ends_with('-'))
}

/// Joins tokens with single spaces, except after a token ending in an
/// apostrophe or a hyphen.
pub fn render(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, token) in tokens.iter().enumerate() {
        if i > 0 && !glues_right(&tokens[i - 1]) {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Realization of symbolic literal tokens such as `Poss2` or `Ddef`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPolicy {
    /// `None` keeps the symbol as a literal placeholder in the output.
    pub replacements: BTreeMap<String, Option<String>>,
}

impl Default for SymbolPolicy {
    fn default() -> Self {
        let mut replacements = BTreeMap::new();
        replacements.insert("Poss2".to_string(), Some("son".to_string()));
        replacements.insert("Ddef".to_string(), Some("la".to_string()));
        replacements.insert("N".to_string(), None);
        replacements.insert("Nhum".to_string(), None);
        SymbolPolicy { replacements }
    }
}

impl SymbolPolicy {
    /// Parses `SYM=word,SYM=keep,...` on top of the defaults. `default`
    /// alone yields the defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut policy = SymbolPolicy::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "default") {
            let (symbol, value) = item
                .split_once('=')
                .ok_or_else(|| Error::UnknownSymbolicToken(item.to_string()))?;
            let value = value.trim();
            let replacement = (value != "keep").then(|| value.to_string());
            policy.replacements.insert(symbol.trim().to_string(), replacement);
        }
        Ok(policy)
    }

    /// Canonical textual form, accepted back by [`SymbolPolicy::parse`].
    pub fn describe(&self) -> String {
        self.replacements
            .iter()
            .map(|(k, v)| format!("{k}={}", v.as_deref().unwrap_or("keep")))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Source of placeholder values.
pub trait Bindings {
    fn lookup(&self, column_id: &str) -> Option<&CellValue>;

    fn table_id(&self) -> &str {
        ""
    }
}

/// The cells of one table row.
#[derive(Clone, Copy, Debug)]
pub struct RowBindings<'a> {
    pub table: &'a LgTable,
    pub row: usize,
}

impl Bindings for RowBindings<'_> {
    fn lookup(&self, column_id: &str) -> Option<&CellValue> {
        self.table.cell(self.row, column_id)
    }

    fn table_id(&self) -> &str {
        &self.table.table_id
    }
}

impl Bindings for BTreeMap<String, CellValue> {
    fn lookup(&self, column_id: &str) -> Option<&CellValue> {
        self.get(column_id)
    }
}

/// Everything needed to turn a flat template into a surface form.
#[derive(Clone, Debug, Default)]
pub struct Realizer {
    pub rules: MorphoRules,
    pub policy: SymbolPolicy,
    pub symbols: Vec<String>,
}

impl Realizer {
    pub fn new(rules: MorphoRules, policy: SymbolPolicy, symbols: Vec<String>) -> Self {
        Realizer { rules, policy, symbols }
    }

    /// Substitutes placeholders and symbols, then contracts, elides and
    /// renders. Contraction only fires on pairs touching a substituted token.
    pub fn realize(&self, template: &FlatTemplate, bindings: &dyn Bindings) -> Result<SurfaceForm> {
        let mut tokens: Vec<String> = Vec::new();
        let mut substituted: Vec<bool> = Vec::new();

        for segment in template.segments()? {
            match segment {
                Segment::Literal(text) => {
                    for word in text.split_whitespace() {
                        if self.symbols.iter().any(|s| s == word) {
                            let replacement = self
                                .policy
                                .replacements
                                .get(word)
                                .ok_or_else(|| Error::UnknownSymbolicToken(word.to_string()))?;
                            tokens.push(replacement.clone().unwrap_or_else(|| word.to_string()));
                            substituted.push(true);
                        } else {
                            tokens.push(word.to_string());
                            substituted.push(false);
                        }
                    }
                }
                Segment::Placeholder(placeholder) => {
                    let column = placeholder.column_id();
                    let unbound = || Error::UnboundPlaceholder {
                        table: bindings.table_id().to_string(),
                        column: column.clone(),
                        template: template.0.clone(),
                    };
                    match bindings.lookup(&column).ok_or_else(unbound)? {
                        CellValue::Lex(text) => {
                            for word in text.split_whitespace().filter(|w| *w != EMPTY_TOKEN) {
                                if word.contains('@') {
                                    return Err(Error::UnknownCellToken {
                                        line: 0,
                                        feature: column.clone(),
                                        kind: "lexical".into(),
                                        token: text.clone(),
                                    });
                                }
                                tokens.push(word.to_string());
                                substituted.push(true);
                            }
                        }
                        CellValue::EmptySymbol => {}
                        CellValue::Plus | CellValue::Minus => return Err(unbound()),
                    }
                }
            }
        }

        let contracted = self
            .rules
            .contract_where(&tokens, |i| substituted[i] || substituted[i + 1]);
        let elided = self.rules.elide(&contracted);
        Ok(SurfaceForm {
            rendered: render(&elided),
            tokens,
        })
    }
}
