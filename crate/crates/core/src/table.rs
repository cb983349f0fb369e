//! Lexicon-grammar tables and the table of classes.
//!
//! A table is a tab-delimited matrix: the first line holds feature ids, every
//! following line is one lexical item. Columns whose id starts with `<ENT>`
//! hold the lexical components of the entry; the rest hold `+`/`-` values or,
//! for auxiliary lexical columns, free text.

use std::collections::HashSet;
use std::fmt;

use crate::curate::{IssueKind, ValidationIssue};
use crate::error::{Error, Result};
use crate::lexicon::entry_id;

/// Marker prefix of lexical-component columns.
pub const ENT_MARKER: &str = "<ENT>";
/// Literal token for a structurally present but lexically empty component.
pub const EMPTY_TOKEN: &str = "<E>";

const SLOT_NAMES: &[&str] = &[
    "Prép",
    "Prép1",
    "Prép2",
    "Prépv",
    "Det",
    "Det1",
    "Det2",
    "Detv",
    "C",
    "C1",
    "C2",
    "Cv",
    "Modif pré-adj",
    "Adj",
    "N",
    "N1",
    "N2",
    "V",
    "Conjc",
    "ConjS",
    "Adv",
];

/// A component symbol of a morphosyntactic structure (`Prép`, `Det1`, `C`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotRef(String);

impl SlotRef {
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        if SLOT_NAMES.contains(&name) {
            Ok(SlotRef(name.to_string()))
        } else {
            Err(Error::UnknownSlot(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The column id this slot is stored under.
    pub fn column_id(&self) -> String {
        format!("{ENT_MARKER}{}", self.0)
    }
}

impl fmt::Display for SlotRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Binary,
    EntryComponent,
    AuxLexical,
    Construction,
    ParaphraseDirect,
    Deletion,
    Permutation,
    Transformation,
    Intensifier,
}

impl FeatureKind {
    /// Columns of this kind hold text (or `<E>`), not `+`/`-`.
    pub fn is_lexical(self) -> bool {
        matches!(self, FeatureKind::EntryComponent | FeatureKind::AuxLexical)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Binary => "binary",
            FeatureKind::EntryComponent => "entry-component",
            FeatureKind::AuxLexical => "aux-lexical",
            FeatureKind::Construction => "construction",
            FeatureKind::ParaphraseDirect => "paraphrase",
            FeatureKind::Deletion => "deletion",
            FeatureKind::Permutation => "permutation",
            FeatureKind::Transformation => "transformation",
            FeatureKind::Intensifier => "intensifier",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureDef {
    pub id: String,
    pub kind: FeatureKind,
}

impl FeatureDef {
    /// The structure slot of an `<ENT>` column.
    pub fn slot(&self) -> Option<&str> {
        self.id.strip_prefix(ENT_MARKER)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellValue {
    Plus,
    Minus,
    Lex(String),
    EmptySymbol,
}

impl CellValue {
    pub fn is_plus(&self) -> bool {
        matches!(self, CellValue::Plus)
    }

    /// Text of a lexical cell; `None` for `<E>` and binary values.
    pub fn text(&self) -> Option<&str> {
        match self {
            CellValue::Lex(s) => Some(s),
            _ => None,
        }
    }

    fn token(&self) -> &str {
        match self {
            CellValue::Plus => "+",
            CellValue::Minus => "-",
            CellValue::Lex(s) => s,
            CellValue::EmptySymbol => EMPTY_TOKEN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub cells: Vec<CellValue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LgTable {
    pub table_id: String,
    pub structure: Vec<SlotRef>,
    pub features: Vec<FeatureDef>,
    pub rows: Vec<TableRow>,
}

impl LgTable {
    pub fn column(&self, feature_id: &str) -> Option<usize> {
        self.features.iter().position(|f| f.id == feature_id)
    }

    pub fn has_column(&self, feature_id: &str) -> bool {
        self.column(feature_id).is_some()
    }

    /// Cell of `row` (0-based) under `feature_id`.
    pub fn cell(&self, row: usize, feature_id: &str) -> Option<&CellValue> {
        let col = self.column(feature_id)?;
        self.rows.get(row).map(|r| &r.cells[col])
    }
}

/// Assigns a [`FeatureKind`] to each column of a table.
pub trait KindResolver {
    fn kind_of(&self, table_id: &str, feature_id: &str) -> FeatureKind;
}

/// Kinds known without a script: `<ENT>` columns are components, the
/// human-reader helper columns `Ppv` and `Précat type` are auxiliary text,
/// everything else is binary.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultKinds;

impl KindResolver for DefaultKinds {
    fn kind_of(&self, _table_id: &str, feature_id: &str) -> FeatureKind {
        default_kind(feature_id)
    }
}

pub(crate) fn default_kind(feature_id: &str) -> FeatureKind {
    if feature_id.starts_with(ENT_MARKER) {
        FeatureKind::EntryComponent
    } else if matches!(feature_id, "Ppv" | "Précat type") {
        FeatureKind::AuxLexical
    } else {
        FeatureKind::Binary
    }
}

fn classify_cell(raw: &str, kind: FeatureKind, feature: &str, line: usize) -> Result<CellValue> {
    let value = match (raw, kind.is_lexical()) {
        (EMPTY_TOKEN, true) => CellValue::EmptySymbol,
        ("+", false) => CellValue::Plus,
        ("-", false) => CellValue::Minus,
        // `@` would be read back as a placeholder delimiter
        (text, true) if !text.is_empty() && text != "+" && text != "-" && !text.contains('@') => {
            CellValue::Lex(text.to_string())
        }
        _ => {
            return Err(Error::UnknownCellToken {
                line,
                feature: feature.to_string(),
                kind: kind.to_string(),
                token: raw.to_string(),
            })
        }
    };
    Ok(value)
}

fn split_line(line: &str) -> Vec<&str> {
    line.trim_end_matches('\r').split('\t').map(str::trim).collect()
}

/// Parses a tab-delimited table.
pub fn parse_table(source: &str, table_id: &str, kinds: &impl KindResolver) -> Result<LgTable> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let Some((_, header)) = lines.next() else {
        return Ok(LgTable {
            table_id: table_id.to_string(),
            structure: Vec::new(),
            features: Vec::new(),
            rows: Vec::new(),
        });
    };

    let mut seen = HashSet::new();
    let mut features = Vec::new();
    let mut structure = Vec::new();
    for id in split_line(header) {
        if !seen.insert(id) {
            return Err(Error::DuplicateFeatureId(id.to_string()));
        }
        let kind = if id.starts_with(ENT_MARKER) {
            FeatureKind::EntryComponent
        } else {
            kinds.kind_of(table_id, id)
        };
        if let Some(slot) = id.strip_prefix(ENT_MARKER) {
            structure.push(SlotRef::parse(slot)?);
        }
        features.push(FeatureDef {
            id: id.to_string(),
            kind,
        });
    }

    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let raw = split_line(line);
        if raw.len() != features.len() {
            return Err(Error::RowArityMismatch {
                line: line_no,
                expected: features.len(),
                found: raw.len(),
            });
        }
        let cells = raw
            .iter()
            .zip(&features)
            .map(|(cell, f)| classify_cell(cell, f.kind, &f.id, line_no))
            .collect::<Result<Vec<_>>>()?;
        rows.push(TableRow { cells });
    }

    Ok(LgTable {
        table_id: table_id.to_string(),
        structure,
        features,
        rows,
    })
}

/// Writes a table back in the `.lgt` format.
pub fn serialize_table(table: &LgTable) -> String {
    let mut out = String::new();
    if table.features.is_empty() {
        return out;
    }
    let header: Vec<&str> = table.features.iter().map(|f| f.id.as_str()).collect();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<&str> = row.cells.iter().map(CellValue::token).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

/// Validity of a feature over a whole class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassValue {
    AlwaysValid,
    AlwaysInvalid,
    PerEntry,
    Undefined,
}

impl ClassValue {
    fn parse(token: &str, line: usize) -> Result<Self> {
        match token {
            "+" => Ok(ClassValue::AlwaysValid),
            "-" => Ok(ClassValue::AlwaysInvalid),
            "o" => Ok(ClassValue::PerEntry),
            "" => Ok(ClassValue::Undefined),
            other => Err(Error::UnknownValueToken {
                line,
                token: other.to_string(),
            }),
        }
    }
}

/// The table of classes: one row per class, one column per feature.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClassMatrix {
    pub classes: Vec<String>,
    pub features: Vec<String>,
    cells: Vec<Vec<ClassValue>>,
}

impl ClassMatrix {
    pub fn get(&self, class: &str, feature: &str) -> ClassValue {
        let Some(row) = self.classes.iter().position(|c| c == class) else {
            return ClassValue::Undefined;
        };
        let Some(col) = self.features.iter().position(|f| f == feature) else {
            return ClassValue::Undefined;
        };
        self.cells[row][col]
    }

    pub fn contains_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }
}

pub fn parse_class_matrix(source: &str) -> Result<ClassMatrix> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Ok(ClassMatrix::default());
    };
    let features: Vec<String> = split_line(header).into_iter().skip(1).map(String::from).collect();
    if let Some(dup) = first_duplicate(&features) {
        return Err(Error::DuplicateFeatureId(dup.to_string()));
    }

    let mut matrix = ClassMatrix {
        classes: Vec::new(),
        features,
        cells: Vec::new(),
    };
    for (line_no, line) in lines {
        let raw = split_line(line);
        let class = raw[0].to_string();
        if matrix.contains_class(&class) {
            return Err(Error::DuplicateClassId { line: line_no, class });
        }
        if raw.len() - 1 > matrix.features.len() {
            return Err(Error::UnknownValueToken {
                line: line_no,
                token: raw[matrix.features.len() + 1].to_string(),
            });
        }
        let mut row = raw[1..]
            .iter()
            .map(|t| ClassValue::parse(t, line_no))
            .collect::<Result<Vec<_>>>()?;
        row.resize(matrix.features.len(), ClassValue::Undefined);
        matrix.classes.push(class);
        matrix.cells.push(row);
    }
    Ok(matrix)
}

fn first_duplicate(ids: &[String]) -> Option<&str> {
    let mut seen = HashSet::new();
    ids.iter().map(String::as_str).find(|id| !seen.insert(*id))
}

/// Makes class-constant features explicit: every feature the class matrix
/// marks always valid (invalid) and the table lacks becomes a column of
/// `+` (`-`). Per-entry features must already be columns.
pub fn resolve_features(table: &LgTable, classes: &ClassMatrix, kinds: &impl KindResolver) -> Result<LgTable> {
    if !classes.contains_class(&table.table_id) {
        return Err(Error::UnknownClass(table.table_id.clone()));
    }
    let mut out = table.clone();
    for feature in &classes.features {
        let fill = match classes.get(&table.table_id, feature) {
            ClassValue::AlwaysValid => CellValue::Plus,
            ClassValue::AlwaysInvalid => CellValue::Minus,
            ClassValue::PerEntry => {
                if !table.has_column(feature) {
                    return Err(Error::InconsistentMatrix {
                        class: table.table_id.clone(),
                        feature: feature.clone(),
                    });
                }
                continue;
            }
            ClassValue::Undefined => continue,
        };
        if out.has_column(feature) {
            continue;
        }
        let kind = kinds.kind_of(&table.table_id, feature);
        if kind.is_lexical() {
            return Err(Error::InconsistentMatrix {
                class: table.table_id.clone(),
                feature: feature.clone(),
            });
        }
        out.features.push(FeatureDef {
            id: feature.clone(),
            kind,
        });
        for row in &mut out.rows {
            row.cells.push(fill.clone());
        }
    }
    Ok(out)
}

/// Structural problems of a parsed table. Never mutates the table.
pub fn validate_table(table: &LgTable) -> Vec<ValidationIssue> {
    let components: Vec<usize> = table
        .features
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == FeatureKind::EntryComponent)
        .map(|(i, _)| i)
        .collect();

    let mut issues = Vec::new();
    for (index, row) in table.rows.iter().enumerate() {
        let id = entry_id(&table.table_id, index + 1, None);
        let texts: Vec<&str> = components.iter().filter_map(|&c| row.cells[c].text()).collect();
        if texts.is_empty() {
            issues.push(ValidationIssue::new(&id, IssueKind::EmptyEntry, "all lexical components are <E>"));
        }
        for word in texts.iter().flat_map(|t| t.split_whitespace()) {
            if word.len() > 1 && (word.ends_with('-') || word.starts_with('-')) {
                issues.push(ValidationIssue::new(
                    &id,
                    IssueKind::AmalgamSuspect,
                    format!("component {word:?} carries a detached hyphen"),
                ));
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    const PCA: &str = "N0 =: Nhum\tN0 =: N-hum\tNeg obl\tPpv\t<ENT>Prép\t<ENT>Det\t<ENT>C\t<ENT>Modif pré-adj\t<ENT>Adj\tConjonction\n\
        -\t+\t-\t:se produire\tdans\tle\tcas\t<E>\tcontraire\t+\n\
        -\t+\t-\t:se produire\t<E>\tle\tcas\t<E>\téchéant\t-\n";

    #[test]
    fn parses_pca_rows() {
        let t = parse_table(PCA, "PCA", &DefaultKinds).unwrap();
        assert_eq!(t.rows.len(), 2);
        let names: Vec<&str> = t.structure.iter().map(SlotRef::as_str).collect();
        assert_eq!(names, ["Prép", "Det", "C", "Modif pré-adj", "Adj"]);
        assert_eq!(t.cell(0, "<ENT>Modif pré-adj"), Some(&CellValue::EmptySymbol));
        assert_eq!(t.cell(0, "<ENT>Prép"), Some(&CellValue::Lex("dans".into())));
        assert_eq!(t.cell(0, "Conjonction"), Some(&CellValue::Plus));
        assert_eq!(t.cell(1, "<ENT>Prép"), Some(&CellValue::EmptySymbol));
        assert_eq!(t.cell(0, "Ppv"), Some(&CellValue::Lex(":se produire".into())));
    }

    #[test]
    fn empty_table_is_valid() {
        let t = parse_table("<ENT>Adv\tbien Adv\n", "ADVMP", &DefaultKinds).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.features.len(), 2);
    }

    #[test]
    fn pcpc_empty_determiners() {
        let src = "<ENT>Prép1\t<ENT>Det1\t<ENT>C1\t<ENT>Prép2\t<ENT>Det2\t<ENT>C2\nà\t<E>\tcent\tpour\t<E>\tcent\n";
        let t = parse_table(src, "PCPC", &DefaultKinds).unwrap();
        assert_eq!(t.cell(0, "<ENT>Det1"), Some(&CellValue::EmptySymbol));
        assert_eq!(t.cell(0, "<ENT>Det2"), Some(&CellValue::EmptySymbol));
    }

    #[test]
    fn arity_mismatch_reports_line() {
        let src = "<ENT>Adv\tplus Adv\nbien\t+\nmal\n";
        match parse_table(src, "X", &DefaultKinds) {
            Err(Error::RowArityMismatch { line, expected, found }) => {
                assert_eq!((line, expected, found), (3, 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_tokens_in_the_wrong_column_kind() {
        let bad_binary = "<ENT>Adv\tplus Adv\nbien\toui\n";
        assert!(matches!(
            parse_table(bad_binary, "X", &DefaultKinds),
            Err(Error::UnknownCellToken { .. })
        ));
        let bad_lexical = "<ENT>Adv\tplus Adv\n+\t+\n";
        assert!(matches!(
            parse_table(bad_lexical, "X", &DefaultKinds),
            Err(Error::UnknownCellToken { .. })
        ));
        let empty_binary = "<ENT>Adv\tplus Adv\nbien\t<E>\n";
        assert!(parse_table(empty_binary, "X", &DefaultKinds).is_err());
        let at_sign = "<ENT>Adv\tplus Adv\nbi@en\t+\n";
        assert!(matches!(
            parse_table(at_sign, "X", &DefaultKinds),
            Err(Error::UnknownCellToken { .. })
        ));
    }

    #[test]
    fn duplicate_feature_and_unknown_slot() {
        assert_eq!(
            parse_table("<ENT>Adv\tF\tF\n", "X", &DefaultKinds),
            Err(Error::DuplicateFeatureId("F".into()))
        );
        assert_eq!(
            parse_table("<ENT>Pronom\n", "X", &DefaultKinds),
            Err(Error::UnknownSlot("Pronom".into()))
        );
    }

    #[test]
    fn serialize_round_trip() {
        let t = parse_table(PCA, "PCA", &DefaultKinds).unwrap();
        let text = serialize_table(&t);
        assert_eq!(text, PCA);
        assert_eq!(parse_table(&text, "PCA", &DefaultKinds).unwrap(), t);
    }

    // Hand-enumerated 3-class fixture: every (class, feature) value checked.
    const MATRIX: &str = "class\tAdv parlant, P\tAdj-ment = au niveau Adj\tbien Adv\n\
        ADVMP\t+\to\t-\n\
        PCA\t-\t\n\
        PADV\t\to\t+\n";

    #[test]
    fn class_matrix_by_enumeration() {
        use ClassValue::*;
        let m = parse_class_matrix(MATRIX).unwrap();
        let expected = [
            ("ADVMP", [AlwaysValid, PerEntry, AlwaysInvalid]),
            ("PCA", [AlwaysInvalid, Undefined, Undefined]),
            ("PADV", [Undefined, PerEntry, AlwaysValid]),
        ];
        for (class, values) in expected {
            for (feature, value) in m.features.clone().iter().zip(values) {
                assert_eq!(m.get(class, feature), value, "{class} / {feature}");
            }
        }
        assert_eq!(m.get("NOPE", "bien Adv"), Undefined);
    }

    #[test]
    fn class_matrix_errors() {
        assert!(matches!(
            parse_class_matrix("class\tF\nA\tx\n"),
            Err(Error::UnknownValueToken { line: 2, .. })
        ));
        assert!(matches!(
            parse_class_matrix("class\tF\nA\t+\nA\t-\n"),
            Err(Error::DuplicateClassId { line: 3, .. })
        ));
    }

    fn advmp() -> LgTable {
        let src = "<ENT>Adv\tAdj-ment = au niveau Adj\nlinguistiquement\t+\nbien\t-\nmal\t-\n";
        parse_table(src, "ADVMP", &DefaultKinds).unwrap()
    }

    #[test]
    fn resolve_appends_constant_columns() {
        let m = parse_class_matrix(MATRIX).unwrap();
        let t = advmp();
        let r = resolve_features(&t, &m, &DefaultKinds).unwrap();
        assert_eq!(r.features.len(), t.features.len() + 2);
        let plus: Vec<_> = r.rows.iter().map(|row| row.cells[2].clone()).collect();
        assert_eq!(plus, vec![CellValue::Plus; 3]);
        assert_eq!(r.features[2].id, "Adv parlant, P");
        assert!(r.rows.iter().all(|row| row.cells[3] == CellValue::Minus));
        // per-entry column untouched
        assert_eq!(r.rows[0].cells[1], t.rows[0].cells[1]);
        assert_eq!(resolve_features(&r, &m, &DefaultKinds).unwrap(), r);
    }

    #[test]
    fn resolve_skips_undefined_and_checks_per_entry() {
        let m = parse_class_matrix(MATRIX).unwrap();
        let pca = parse_table(PCA, "PCA", &DefaultKinds).unwrap();
        let r = resolve_features(&pca, &m, &DefaultKinds).unwrap();
        // one AlwaysInvalid column added; the Undefined ones are not
        assert_eq!(r.features.len(), pca.features.len() + 1);

        let padv = parse_table("<ENT>C\nenfin\n", "PADV", &DefaultKinds).unwrap();
        assert!(matches!(
            resolve_features(&padv, &m, &DefaultKinds),
            Err(Error::InconsistentMatrix { .. })
        ));
        let unknown = parse_table("<ENT>C\nenfin\n", "PV", &DefaultKinds).unwrap();
        assert_eq!(
            resolve_features(&unknown, &m, &DefaultKinds),
            Err(Error::UnknownClass("PV".into()))
        );
    }

    #[test]
    fn validate_flags_amalgams_and_empty_rows() {
        let src = "<ENT>Prép\t<ENT>Det\t<ENT>C\t<ENT>Modif pré-adj\t<ENT>Adj\n\
            à\tcette\theure-\t<E>\tci\n\
            <E>\t<E>\t<E>\t<E>\t<E>\n\
            dans\tle\tcas\t<E>\tcontraire\n";
        let t = parse_table(src, "PCA", &DefaultKinds).unwrap();
        let issues = validate_table(&t);
        let got: Vec<(&str, IssueKind)> = issues.iter().map(|i| (i.entry_id.as_str(), i.kind)).collect();
        assert_eq!(got, vec![("PCA#1", IssueKind::AmalgamSuspect), ("PCA#2", IssueKind::EmptyEntry)]);
        assert!(validate_table(&parse_table(PCA, "PCA", &DefaultKinds).unwrap()).is_empty());
    }
}
