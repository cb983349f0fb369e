//! The extraction script: which feature triggers which generation action,
//! and with which surface templates.
//!
//! One rule per line:
//!
//! ```text
//! TABLES : "feature id" => ACTION[label] "template", "template"
//! ```
//!
//! `TABLES` is `*` or a `|`-separated list of table ids. `ACTION` is one of
//! `construction`, `paraphrase`, `deletion`, `permutation`,
//! `transformation`, `intensify`, `lexical` or `note`; the optional bracketed
//! label names the internal structure of the variant. Lines starting with
//! `%` are directives (`%symbols`, `%category`, `%structure`), `#` starts a
//! comment and a trailing `\` continues a rule on the next line.

use std::collections::HashSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::table::{default_kind, FeatureKind, KindResolver, LgTable, ENT_MARKER};

/// Symbolic literal tokens passed through to the realizer when no `%symbols`
/// directive is given.
pub const DEFAULT_SYMBOLS: &[&str] = &["Poss2", "Ddef", "N", "Nhum"];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TablePattern {
    Any,
    Tables(Vec<String>),
}

impl TablePattern {
    fn parse(text: &str) -> Self {
        let text = text.trim();
        if text == "*" {
            TablePattern::Any
        } else {
            TablePattern::Tables(text.split('|').map(|t| t.trim().to_string()).collect())
        }
    }

    pub fn matches(&self, table_id: &str) -> bool {
        match self {
            TablePattern::Any => true,
            TablePattern::Tables(ids) => ids.iter().any(|t| t == table_id),
        }
    }

    fn is_explicit_for(&self, table_id: &str) -> bool {
        matches!(self, TablePattern::Tables(_)) && self.matches(table_id)
    }
}

impl fmt::Display for TablePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TablePattern::Any => f.write_str("*"),
            TablePattern::Tables(ids) => f.write_str(&ids.join("|")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubstructureKind {
    Deletion,
    Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// A construction id; with templates it also yields paraphrases.
    EmitConstruction,
    EmitParaphrase,
    EmitSubstructure { kind: SubstructureKind, label: String },
    EmitTransformation { label: String },
    EmitIntensified,
    /// Declares an auxiliary lexical column (e.g. `Adj`, `Ndomaine`).
    Lexical,
    /// Declares a human-reader helper column copied into the usage note.
    Note,
}

impl Action {
    pub fn feature_kind(&self) -> FeatureKind {
        match self {
            Action::EmitConstruction => FeatureKind::Construction,
            Action::EmitParaphrase => FeatureKind::ParaphraseDirect,
            Action::EmitSubstructure {
                kind: SubstructureKind::Deletion,
                ..
            } => FeatureKind::Deletion,
            Action::EmitSubstructure {
                kind: SubstructureKind::Permutation,
                ..
            } => FeatureKind::Permutation,
            Action::EmitTransformation { .. } => FeatureKind::Transformation,
            Action::EmitIntensified => FeatureKind::Intensifier,
            Action::Lexical | Action::Note => FeatureKind::AuxLexical,
        }
    }

    /// Structure label of the variants this action produces, if any.
    pub fn structure_label(&self) -> Option<&str> {
        match self {
            Action::EmitSubstructure { label, .. } | Action::EmitTransformation { label } => Some(label),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptRule {
    pub feature_id: String,
    pub applies_to: TablePattern,
    pub action: Action,
    pub templates: Vec<FactorizedTemplate>,
    pub line: usize,
}

impl ScriptRule {
    /// All flat templates of the rule, in declaration then expansion order.
    pub fn flat_templates(&self) -> Vec<FlatTemplate> {
        self.templates.iter().flat_map(expand_alternation).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Text(String),
    /// Alternatives of one group; the empty alternative `E` is stored as "".
    Group(Vec<String>),
}

/// A template in LG factorized notation, e.g. `de (E+une) (façon + manière) @Adj@`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizedTemplate {
    pub source: String,
    pieces: Vec<Piece>,
}

impl FactorizedTemplate {
    pub fn parse(source: &str) -> Result<Self> {
        Self::parse_at(source, 0)
    }

    fn parse_at(source: &str, line: usize) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut group: Option<Vec<String>> = None;
        let mut in_placeholder = false;

        for ch in source.chars() {
            if ch == '@' {
                in_placeholder = !in_placeholder;
                text.push(ch);
                continue;
            }
            if in_placeholder {
                text.push(ch);
                continue;
            }
            match (ch, group.as_mut()) {
                ('(', Some(_)) => return Err(Error::NestedAlternation { line }),
                ('(', None) => {
                    if !text.is_empty() {
                        pieces.push(Piece::Text(std::mem::take(&mut text)));
                    }
                    group = Some(Vec::new());
                }
                ('+', Some(alts)) => alts.push(alternative(&std::mem::take(&mut text))),
                (')', Some(_)) => {
                    let mut alts = group.take().unwrap_or_default();
                    alts.push(alternative(&std::mem::take(&mut text)));
                    pieces.push(Piece::Group(alts));
                }
                (')', None) => {
                    return Err(Error::ScriptSyntax {
                        line,
                        message: format!("unbalanced ')' in template {source:?}"),
                    })
                }
                _ => text.push(ch),
            }
        }
        if group.is_some() {
            return Err(Error::UnterminatedGroup {
                line,
                what: "alternation group",
            });
        }
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        Ok(FactorizedTemplate {
            source: source.to_string(),
            pieces,
        })
    }

    /// Sizes of the alternation groups, left to right.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Group(alts) => Some(alts.len()),
                Piece::Text(_) => None,
            })
            .collect()
    }
}

fn alternative(raw: &str) -> String {
    let alt = raw.trim();
    if alt == "E" {
        String::new()
    } else {
        alt.to_string()
    }
}

fn normalize_spaces(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A template without alternation groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatTemplate(pub String);

impl FlatTemplate {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Splits the template into literal text and placeholders.
    pub fn segments(&self) -> Result<Vec<Segment>> {
        let parts: Vec<&str> = self.0.split('@').collect();
        if parts.len() % 2 == 0 {
            return Err(Error::MalformedPlaceholder(self.0.clone()));
        }
        let mut out = Vec::new();
        for (i, part) in parts.into_iter().enumerate() {
            if i % 2 == 0 {
                if !part.is_empty() {
                    out.push(Segment::Literal(part.to_string()));
                }
            } else {
                out.push(Segment::Placeholder(Placeholder::parse(part, &self.0)?));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for FlatTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Placeholder(Placeholder),
}

/// `@<ENT>X@` refers to an entry component, `@X@` to any other column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Placeholder {
    Entry(String),
    Column(String),
}

impl Placeholder {
    fn parse(inner: &str, template: &str) -> Result<Self> {
        let inner = inner.trim();
        let placeholder = match inner.strip_prefix(ENT_MARKER) {
            Some(slot) => Placeholder::Entry(slot.trim().to_string()),
            None => Placeholder::Column(inner.to_string()),
        };
        match &placeholder {
            Placeholder::Entry(name) | Placeholder::Column(name) if name.is_empty() => {
                Err(Error::MalformedPlaceholder(template.to_string()))
            }
            _ => Ok(placeholder),
        }
    }

    /// Id of the table column the placeholder reads.
    pub fn column_id(&self) -> String {
        match self {
            Placeholder::Entry(slot) => format!("{ENT_MARKER}{slot}"),
            Placeholder::Column(name) => name.clone(),
        }
    }
}

/// Expands every alternation group. Output order is lexicographic over the
/// groups' alternative order, leftmost group slowest.
pub fn expand_alternation(template: &FactorizedTemplate) -> Vec<FlatTemplate> {
    let mut partial = vec![String::new()];
    for piece in &template.pieces {
        match piece {
            Piece::Text(text) => partial.iter_mut().for_each(|p| p.push_str(text)),
            Piece::Group(alts) => {
                partial = partial
                    .iter()
                    .flat_map(|prefix| alts.iter().map(move |alt| format!("{prefix} {alt} ")))
                    .collect();
            }
        }
    }
    partial.into_iter().map(|p| FlatTemplate(normalize_spaces(&p))).collect()
}

/// Placeholders of a flat template in surface order.
pub fn template_placeholders(template: &FlatTemplate) -> Result<Vec<Placeholder>> {
    Ok(template
        .segments()?
        .into_iter()
        .filter_map(|s| match s {
            Segment::Placeholder(p) => Some(p),
            Segment::Literal(_) => None,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionScript {
    pub rules: Vec<ScriptRule>,
    pub symbols: Vec<String>,
    categories: Vec<(TablePattern, String)>,
    structures: Vec<(TablePattern, String)>,
    hash: String,
}

impl Default for ExtractionScript {
    fn default() -> Self {
        parse_script("").expect("empty script parses")
    }
}

impl ExtractionScript {
    /// Rule for `feature_id` in `table_id`; a rule naming the table wins over
    /// a wildcard rule.
    pub fn rule_for(&self, table_id: &str, feature_id: &str) -> Option<&ScriptRule> {
        let candidates = || self.rules.iter().filter(|r| r.feature_id == feature_id);
        candidates()
            .find(|r| r.applies_to.is_explicit_for(table_id))
            .or_else(|| candidates().find(|r| r.applies_to.matches(table_id)))
    }

    pub fn category_for(&self, table_id: &str) -> &str {
        lookup(&self.categories, table_id).unwrap_or("adverb")
    }

    /// Explicit defining-structure label of a class, when the `<ENT>`
    /// columns alone do not spell it (e.g. an implicit `de N2`).
    pub fn structure_for(&self, table_id: &str) -> Option<&str> {
        lookup(&self.structures, table_id)
    }

    pub fn is_symbol(&self, token: &str) -> bool {
        self.symbols.iter().any(|s| s == token)
    }

    /// SHA-256 of the script source, hex encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Checks that every template of every rule firing on `table` only
    /// references columns the table has.
    pub fn check_bindings(&self, table: &LgTable) -> Result<()> {
        for feature in &table.features {
            let Some(rule) = self.rule_for(&table.table_id, &feature.id) else {
                continue;
            };
            for flat in rule.flat_templates() {
                for placeholder in template_placeholders(&flat)? {
                    let column = placeholder.column_id();
                    if !table.has_column(&column) {
                        return Err(Error::UnboundPlaceholder {
                            table: table.table_id.clone(),
                            column,
                            template: flat.0.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn lookup<'a>(entries: &'a [(TablePattern, String)], table_id: &str) -> Option<&'a str> {
    entries
        .iter()
        .find(|(p, _)| p.is_explicit_for(table_id))
        .or_else(|| entries.iter().find(|(p, _)| p.matches(table_id)))
        .map(|(_, v)| v.as_str())
}

impl KindResolver for ExtractionScript {
    fn kind_of(&self, table_id: &str, feature_id: &str) -> FeatureKind {
        if feature_id.starts_with(ENT_MARKER) {
            return FeatureKind::EntryComponent;
        }
        match self.rule_for(table_id, feature_id) {
            Some(rule) => rule.action.feature_kind(),
            None => default_kind(feature_id),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Str(String),
    Word(String),
    Label(String),
    Arrow,
    Comma,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        match ch {
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => break,
            ',' => {
                chars.next();
                tokens.push(Token::Comma);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(escaped) => s.push(escaped),
                            None => return Err(Error::UnterminatedGroup { line, what: "string" }),
                        },
                        Some(c) => s.push(c),
                        None => return Err(Error::UnterminatedGroup { line, what: "string" }),
                    }
                }
                tokens.push(Token::Str(s));
            }
            '[' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some(']') => break,
                        Some(c) => s.push(c),
                        None => return Err(Error::UnterminatedGroup { line, what: "label" }),
                    }
                }
                tokens.push(Token::Label(s.trim().to_string()));
            }
            '=' => {
                chars.next();
                if chars.next() != Some('>') {
                    return Err(Error::ScriptSyntax {
                        line,
                        message: "expected '=>'".into(),
                    });
                }
                tokens.push(Token::Arrow);
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, ',' | '"' | '[' | '#' | '=') {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                tokens.push(Token::Word(s));
            }
        }
    }
    Ok(tokens)
}

/// Splits `line` at the first `:` outside double quotes.
fn split_pattern(line: &str) -> Option<(&str, &str)> {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            ':' if !quoted => return Some((&line[..i], &line[i + 1..])),
            _ => {}
        }
    }
    None
}

fn default_label(feature_id: &str) -> String {
    match feature_id.rsplit_once(" = ") {
        Some((_, rhs)) => rhs.trim().to_string(),
        None => feature_id.trim().to_string(),
    }
}

fn parse_rule(text: &str, line: usize) -> Result<ScriptRule> {
    let syntax = |message: &str| Error::ScriptSyntax {
        line,
        message: message.to_string(),
    };
    let (pattern, rest) = split_pattern(text).ok_or_else(|| syntax("missing ':' after table pattern"))?;
    let mut tokens = tokenize(rest, line)?.into_iter();

    let Some(Token::Str(feature_id)) = tokens.next() else {
        return Err(syntax("expected quoted feature id"));
    };
    if tokens.next() != Some(Token::Arrow) {
        return Err(syntax("expected '=>' after feature id"));
    }
    let Some(Token::Word(action_name)) = tokens.next() else {
        return Err(syntax("expected action"));
    };

    let mut label = None;
    let mut sources = Vec::new();
    let mut expect_template = true;
    for token in tokens {
        match token {
            Token::Label(l) if sources.is_empty() && label.is_none() => label = Some(l),
            Token::Str(s) if expect_template => {
                sources.push(s);
                expect_template = false;
            }
            Token::Comma if !expect_template => expect_template = true,
            other => return Err(syntax(&format!("unexpected {other:?}"))),
        }
    }
    if expect_template && !sources.is_empty() {
        return Err(syntax("trailing ','"));
    }

    let label = label.unwrap_or_else(|| default_label(&feature_id));
    let action = match action_name.as_str() {
        "construction" => Action::EmitConstruction,
        "paraphrase" => Action::EmitParaphrase,
        "deletion" => Action::EmitSubstructure {
            kind: SubstructureKind::Deletion,
            label,
        },
        "permutation" => Action::EmitSubstructure {
            kind: SubstructureKind::Permutation,
            label,
        },
        "transformation" => Action::EmitTransformation { label },
        "intensify" => Action::EmitIntensified,
        "lexical" => Action::Lexical,
        "note" => Action::Note,
        other => return Err(syntax(&format!("unknown action {other:?}"))),
    };
    let needs_templates = !matches!(action, Action::EmitConstruction | Action::Lexical | Action::Note);
    let allows_templates = !matches!(action, Action::Lexical | Action::Note);
    if needs_templates && sources.is_empty() {
        return Err(syntax(&format!("action {action_name} needs at least one template")));
    }
    if !allows_templates && !sources.is_empty() {
        return Err(syntax(&format!("action {action_name} takes no template")));
    }

    let templates = sources
        .iter()
        .map(|s| FactorizedTemplate::parse_at(s, line))
        .collect::<Result<Vec<_>>>()?;

    Ok(ScriptRule {
        feature_id,
        applies_to: TablePattern::parse(pattern),
        action,
        templates,
        line,
    })
}

/// Parses a directive argument list: bare words and quoted strings.
fn directive_args(text: &str, line: usize) -> Result<Vec<String>> {
    tokenize(text, line)?
        .into_iter()
        .map(|t| match t {
            Token::Word(w) | Token::Str(w) => Ok(w),
            other => Err(Error::ScriptSyntax {
                line,
                message: format!("unexpected {other:?} in directive"),
            }),
        })
        .collect()
}

/// Joins `\`-continued lines; yields (first line number, logical line).
fn logical_lines(source: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in source.lines().enumerate() {
        let raw = raw.trim_end_matches('\r');
        let (start, mut buf) = pending.take().unwrap_or((i + 1, String::new()));
        let (body, continues) = match raw.trim_end().strip_suffix('\\') {
            Some(body) => (body, true),
            None => (raw, false),
        };
        buf.push_str(body);
        if continues {
            buf.push(' ');
            pending = Some((start, buf));
        } else {
            out.push((start, buf));
        }
    }
    if let Some(p) = pending {
        out.push(p);
    }
    out
}

/// SHA-256 of a script source, hex encoded.
pub fn script_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

pub fn parse_script(source: &str) -> Result<ExtractionScript> {
    let mut rules: Vec<ScriptRule> = Vec::new();
    let mut symbols: Option<Vec<String>> = None;
    let mut categories = Vec::new();
    let mut structures = Vec::new();
    let mut seen = HashSet::new();

    for (line, text) in logical_lines(source) {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(directive) = trimmed.strip_prefix('%') {
            let (name, rest) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
            let args = directive_args(rest, line)?;
            match (name, args.as_slice()) {
                ("symbols", list) => symbols = Some(list.to_vec()),
                ("category", [pattern, value]) => categories.push((TablePattern::parse(pattern), value.clone())),
                ("structure", [pattern, value]) => structures.push((TablePattern::parse(pattern), value.clone())),
                _ => {
                    return Err(Error::ScriptSyntax {
                        line,
                        message: format!("bad directive %{name}"),
                    })
                }
            }
            continue;
        }
        let rule = parse_rule(trimmed, line)?;
        if !seen.insert((rule.applies_to.clone(), rule.feature_id.clone())) {
            return Err(Error::DuplicateRule {
                line,
                pattern: rule.applies_to.to_string(),
                feature: rule.feature_id,
            });
        }
        rules.push(rule);
    }

    Ok(ExtractionScript {
        rules,
        symbols: symbols.unwrap_or_else(|| DEFAULT_SYMBOLS.iter().map(|s| s.to_string()).collect()),
        categories,
        structures,
        hash: script_hash(source),
    })
}
