//! Lexicon documents in two formats, plus the expansion-record sidecar.
//!
//! Text (`lgx`, version 1): a `%`-prefixed header, then one blank-line
//! separated block per entry, then `%end <count>` so truncation is caught.
//! Every line is tab-separated fields with `\\`, `\t`, `\n`, `\r` escaped.
//!
//! ```text
//! %lgx	1
//! %tool	lexgram 0.1.0
//! %table	PCDC
//! %script-hash	<sha256>
//! %script	<one line of the extraction script>
//!
//! entry	PCDC#1
//! table	PCDC
//! row	1
//! provenance	base
//! surface	jusqu'à la fin des temps	jusqu'à	la	fin	de	les	temps
//! component	Prép1	jusqu'à
//! [Lexical information]
//! category	adverb
//! other-structure	Prép1 Det1 C1	jusqu'à la fin	jusqu'à	la	fin
//! [Arguments]
//! argument	N0	Nhum
//! [Constructions]
//! structure	Prép1 Det1 C1 Prép2 Det2 C2
//! feature	Prép1 Det1 C1	+
//!
//! %end	1
//! ```
//!
//! XML (`lgx.xml`) carries the same content under `<lgx version="1">`.

use std::collections::{BTreeMap, HashSet};

use xmltree::{Element, EmitterConfig, XMLNode};

use crate::curate::DuplicateRecord;
use crate::error::{Error, Result};
use crate::expand::{PipelineOutput, RecordStatus};
use crate::lexicon::{
    ArgSlot, ArgumentSpec, Constructions, LexEntry, LexicalInfo, MergedDuplicate, PassKind, Provenance, Selection,
};
use crate::realize::SurfaceForm;
use crate::script::script_hash;
use crate::stats::{compute_stats, StatsReport};
use crate::table::{SlotRef, EMPTY_TOKEN};

pub const FORMAT_VERSION: &str = "1";
pub const TOOL: &str = concat!("lexgram ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Xml,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" | "lgx" => Ok(Format::Text),
            "xml" => Ok(Format::Xml),
            _ => Err(format!("unknown format {s:?} (expected text or xml)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Metadata {
    pub tool: String,
    pub tables: Vec<String>,
    pub script_hash: String,
    /// The extraction script, embedded so a lexicon can be extended later.
    pub script: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LexiconDocument {
    pub metadata: Metadata,
    pub entries: Vec<LexEntry>,
}

impl LexiconDocument {
    pub fn new(entries: Vec<LexEntry>, tables: Vec<String>, script_source: &str) -> Self {
        LexiconDocument {
            metadata: Metadata {
                tool: TOOL.to_string(),
                tables,
                script_hash: script_hash(script_source),
                script: Some(script_source.to_string()),
            },
            entries,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.entry_id.as_str()) {
                return Err(Error::schema(0, format!("duplicate entry id {}", entry.entry_id)));
            }
        }
        if let Some(script) = &self.metadata.script {
            if script_hash(script) != self.metadata.script_hash {
                return Err(Error::schema(0, "embedded script does not match its hash"));
            }
        }
        Ok(())
    }
}

pub fn export(doc: &LexiconDocument, format: Format) -> String {
    match format {
        Format::Text => export_text(doc),
        Format::Xml => export_xml(doc),
    }
}

pub fn import_lexicon(input: &str, format: Format) -> Result<LexiconDocument> {
    let doc = match format {
        Format::Text => import_text(input)?,
        Format::Xml => import_xml(input)?,
    };
    doc.validate()?;
    Ok(doc)
}

/// Picks the format from the content: XML starts with `<`.
pub fn sniff_format(input: &str) -> Format {
    if input.trim_start().starts_with('<') {
        Format::Xml
    } else {
        Format::Text
    }
}

// ---------------------------------------------------------------- escaping

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for ch in field.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(field: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(Error::schema(line, format!("bad escape \\{}", other.map(String::from).unwrap_or_default()))),
        }
    }
    Ok(out)
}

fn write_line(out: &mut String, key: &str, fields: &[&str]) {
    out.push_str(key);
    for f in fields {
        out.push('\t');
        out.push_str(&escape(f));
    }
    out.push('\n');
}

fn surface_fields(surface: &SurfaceForm) -> Vec<&str> {
    std::iter::once(surface.rendered.as_str())
        .chain(surface.tokens.iter().map(String::as_str))
        .collect()
}

fn provenance_fields(p: &Provenance) -> Vec<&str> {
    match p {
        Provenance::Base => vec!["base"],
        Provenance::Generated {
            pass,
            parent,
            feature_id,
            template,
        } => vec!["generated", pass.name(), parent, feature_id, template],
    }
}

// -------------------------------------------------------------- text export

pub fn export_text(doc: &LexiconDocument) -> String {
    let mut out = String::new();
    let meta = &doc.metadata;
    write_line(&mut out, "%lgx", &[FORMAT_VERSION]);
    write_line(&mut out, "%tool", &[&meta.tool]);
    for table in &meta.tables {
        write_line(&mut out, "%table", &[table]);
    }
    write_line(&mut out, "%script-hash", &[&meta.script_hash]);
    if let Some(script) = &meta.script {
        for line in script.split('\n') {
            write_line(&mut out, "%script", &[line]);
        }
    }
    for entry in &doc.entries {
        out.push('\n');
        write_entry(&mut out, entry);
    }
    out.push('\n');
    write_line(&mut out, "%end", &[&doc.entries.len().to_string()]);
    out
}

fn write_entry(out: &mut String, e: &LexEntry) {
    write_line(out, "entry", &[&e.entry_id]);
    write_line(out, "table", &[&e.table_id]);
    write_line(out, "row", &[&e.row.to_string()]);
    write_line(out, "provenance", &provenance_fields(&e.provenance));
    write_line(out, "surface", &surface_fields(&e.surface));
    for (slot, text) in &e.components {
        write_line(out, "component", &[slot.as_str(), text.as_deref().unwrap_or(EMPTY_TOKEN)]);
    }
    for m in &e.merged {
        let mut fields = vec![m.entry_id.as_str(), m.table_id.as_str()];
        fields.extend(provenance_fields(&m.provenance));
        write_line(out, "merged", &fields);
    }

    let info = &e.lexical_info;
    out.push_str("[Lexical information]\n");
    write_line(out, "category", &[&info.category]);
    for p in &info.paraphrases {
        write_line(out, "paraphrase", &surface_fields(p));
    }
    for (label, s) in &info.other_structures {
        let mut fields = vec![label.as_str()];
        fields.extend(surface_fields(s));
        write_line(out, "other-structure", &fields);
    }
    for s in &info.intensified {
        write_line(out, "intensified", &surface_fields(s));
    }
    for (column, value) in &info.lexical_values {
        write_line(out, "lexical-value", &[column, value]);
    }
    if let Some(note) = &info.usage_note {
        write_line(out, "usage-note", &[note]);
    }

    out.push_str("[Arguments]\n");
    for a in &e.arguments {
        write_line(out, "argument", &[a.slot.name(), a.selection.name()]);
    }

    out.push_str("[Constructions]\n");
    for id in &e.constructions.ids {
        write_line(out, "construction", &[id]);
    }
    for s in &e.constructions.internal_structures {
        write_line(out, "structure", &[s]);
    }
    for (feature, value) in &e.binary_features {
        write_line(out, "feature", &[feature, if *value { "+" } else { "-" }]);
    }
}

// -------------------------------------------------------------- text import

struct Line {
    number: usize,
    key: String,
    fields: Vec<String>,
}

impl Line {
    fn parse(number: usize, raw: &str) -> Result<Self> {
        let mut parts = raw.split('\t');
        let key = parts.next().unwrap_or_default().to_string();
        let fields = parts.map(|f| unescape(f, number)).collect::<Result<Vec<_>>>()?;
        Ok(Line { number, key, fields })
    }

    fn err(&self, message: impl std::fmt::Display) -> Error {
        Error::schema(self.number, message)
    }

    fn exactly(&self, n: usize) -> Result<&[String]> {
        if self.fields.len() != n {
            return Err(self.err(format!("{:?} takes {n} field(s), found {}", self.key, self.fields.len())));
        }
        Ok(&self.fields)
    }

    fn one(&self) -> Result<&str> {
        Ok(&self.exactly(1)?[0])
    }

    fn surface(&self, from: usize) -> Result<SurfaceForm> {
        let rest = self.fields.get(from..).filter(|r| !r.is_empty()).ok_or_else(|| self.err("missing surface"))?;
        Ok(SurfaceForm {
            rendered: rest[0].clone(),
            tokens: rest[1..].to_vec(),
        })
    }

    fn provenance(&self, from: usize) -> Result<Provenance> {
        let rest = self.fields.get(from..).unwrap_or_default();
        match rest {
            [kind] if kind == "base" => Ok(Provenance::Base),
            [kind, pass, parent, feature_id, template] if kind == "generated" => Ok(Provenance::Generated {
                pass: pass.parse().map_err(|e: String| self.err(e))?,
                parent: parent.clone(),
                feature_id: feature_id.clone(),
                template: template.clone(),
            }),
            _ => Err(self.err("malformed provenance")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Head,
    Lexical,
    Arguments,
    Constructions,
}

pub fn import_text(input: &str) -> Result<LexiconDocument> {
    let mut lines = input
        .split('\n')
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.strip_suffix('\r').unwrap_or(raw)))
        .peekable();

    let (n, first) = lines.next().ok_or_else(|| Error::schema(1, "empty input"))?;
    let first = Line::parse(n, first)?;
    if first.key != "%lgx" {
        return Err(first.err("missing %lgx header"));
    }
    let version = first.one()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnknownFormatVersion(version.to_string()));
    }

    let mut doc = LexiconDocument::default();
    let mut script_lines: Vec<String> = Vec::new();
    let mut current: Option<(LexEntry, Section)> = None;
    let mut end: Option<(usize, usize)> = None;
    let mut last_line = n;

    for (number, raw) in lines {
        last_line = number;
        if end.is_some() {
            if raw.is_empty() {
                continue;
            }
            return Err(Error::schema(number, "content after %end"));
        }
        if raw.is_empty() {
            if let Some((entry, _)) = current.take() {
                doc.entries.push(entry);
            }
            continue;
        }
        let line = Line::parse(number, raw)?;
        if let Some((entry, section)) = current.as_mut() {
            entry_line(entry, section, &line)?;
            continue;
        }
        match line.key.as_str() {
            "%tool" => doc.metadata.tool = line.one()?.to_string(),
            "%table" => doc.metadata.tables.push(line.one()?.to_string()),
            "%script-hash" => doc.metadata.script_hash = line.one()?.to_string(),
            "%script" => script_lines.push(line.one()?.to_string()),
            "%end" => {
                let count = line.one()?.parse().map_err(|_| line.err("bad entry count"))?;
                end = Some((number, count));
            }
            "entry" => current = Some((new_entry(line.one()?), Section::Head)),
            other => return Err(line.err(format!("unexpected {other:?}"))),
        }
    }
    if current.is_some() {
        return Err(Error::schema(last_line, "unterminated entry block (truncated file?)"));
    }
    let Some((end_line, count)) = end else {
        return Err(Error::schema(last_line, "missing %end trailer (truncated file?)"));
    };
    if count != doc.entries.len() {
        return Err(Error::schema(end_line, format!("%end says {count} entries, found {}", doc.entries.len())));
    }
    if !script_lines.is_empty() {
        doc.metadata.script = Some(script_lines.join("\n"));
    }
    Ok(doc)
}

fn new_entry(id: &str) -> LexEntry {
    LexEntry {
        entry_id: id.to_string(),
        table_id: String::new(),
        row: 0,
        surface: SurfaceForm::default(),
        components: Vec::new(),
        lexical_info: LexicalInfo::default(),
        arguments: Vec::new(),
        constructions: Constructions::default(),
        binary_features: BTreeMap::new(),
        provenance: Provenance::Base,
        merged: Vec::new(),
    }
}

fn entry_line(e: &mut LexEntry, section: &mut Section, line: &Line) -> Result<()> {
    let next = match line.key.as_str() {
        "[Lexical information]" => Some(Section::Lexical),
        "[Arguments]" => Some(Section::Arguments),
        "[Constructions]" => Some(Section::Constructions),
        _ => None,
    };
    if let Some(next) = next {
        if next <= *section {
            return Err(line.err(format!("section {} out of order", line.key)));
        }
        *section = next;
        return Ok(());
    }
    match (*section, line.key.as_str()) {
        (Section::Head, "table") => e.table_id = line.one()?.to_string(),
        (Section::Head, "row") => e.row = line.one()?.parse().map_err(|_| line.err("bad row number"))?,
        (Section::Head, "provenance") => e.provenance = line.provenance(0)?,
        (Section::Head, "surface") => e.surface = line.surface(0)?,
        (Section::Head, "component") => {
            let [slot, text] = line.exactly(2)? else { unreachable!() };
            let slot = SlotRef::parse(slot).map_err(|err| line.err(err))?;
            let text = (text != EMPTY_TOKEN).then(|| text.clone());
            e.components.push((slot, text));
        }
        (Section::Head, "merged") => {
            if line.fields.len() < 3 {
                return Err(line.err("malformed merged record"));
            }
            e.merged.push(MergedDuplicate {
                entry_id: line.fields[0].clone(),
                table_id: line.fields[1].clone(),
                provenance: line.provenance(2)?,
            });
        }
        (Section::Lexical, "category") => e.lexical_info.category = line.one()?.to_string(),
        (Section::Lexical, "paraphrase") => e.lexical_info.paraphrases.push(line.surface(0)?),
        (Section::Lexical, "other-structure") => {
            let label = line.fields.first().ok_or_else(|| line.err("missing label"))?.clone();
            e.lexical_info.other_structures.push((label, line.surface(1)?));
        }
        (Section::Lexical, "intensified") => e.lexical_info.intensified.push(line.surface(0)?),
        (Section::Lexical, "lexical-value") => {
            let [column, value] = line.exactly(2)? else { unreachable!() };
            e.lexical_info.lexical_values.push((column.clone(), value.clone()));
        }
        (Section::Lexical, "usage-note") => e.lexical_info.usage_note = Some(line.one()?.to_string()),
        (Section::Arguments, "argument") => {
            let [slot, selection] = line.exactly(2)? else { unreachable!() };
            e.arguments.push(ArgumentSpec {
                slot: ArgSlot::parse(slot).ok_or_else(|| line.err(format!("unknown argument slot {slot:?}")))?,
                selection: Selection::parse(selection)
                    .ok_or_else(|| line.err(format!("unknown selection {selection:?}")))?,
            });
        }
        (Section::Constructions, "construction") => e.constructions.ids.push(line.one()?.to_string()),
        (Section::Constructions, "structure") => e.constructions.internal_structures.push(line.one()?.to_string()),
        (Section::Constructions, "feature") => {
            let [feature, value] = line.exactly(2)? else { unreachable!() };
            let value = match value.as_str() {
                "+" => true,
                "-" => false,
                _ => return Err(line.err(format!("feature value must be + or -, found {value:?}"))),
            };
            e.binary_features.insert(feature.clone(), value);
        }
        (_, key) => return Err(line.err(format!("unexpected {key:?} here"))),
    }
    Ok(())
}

// --------------------------------------------------------------- XML export

fn element(name: &str, attrs: &[(&str, &str)]) -> Element {
    let mut el = Element::new(name);
    for (k, v) in attrs {
        el.attributes.insert(k.to_string(), v.to_string());
    }
    el
}

fn push(parent: &mut Element, child: Element) {
    parent.children.push(XMLNode::Element(child));
}

fn surface_element(name: &str, surface: &SurfaceForm, extra: &[(&str, &str)]) -> Element {
    let mut attrs = extra.to_vec();
    attrs.push(("text", &surface.rendered));
    let mut el = element(name, &attrs);
    for token in &surface.tokens {
        push(&mut el, element("token", &[("form", token)]));
    }
    el
}

fn provenance_element(p: &Provenance) -> Element {
    match p {
        Provenance::Base => element("provenance", &[("kind", "base")]),
        Provenance::Generated {
            pass,
            parent,
            feature_id,
            template,
        } => element(
            "provenance",
            &[
                ("kind", "generated"),
                ("pass", pass.name()),
                ("parent", parent),
                ("feature", feature_id),
                ("template", template),
            ],
        ),
    }
}

pub fn export_xml(doc: &LexiconDocument) -> String {
    let mut root = element("lgx", &[("version", FORMAT_VERSION)]);
    let meta = &doc.metadata;
    let mut metadata = element("metadata", &[("tool", &meta.tool), ("script-hash", &meta.script_hash)]);
    for table in &meta.tables {
        push(&mut metadata, element("table", &[("id", table)]));
    }
    if let Some(script) = &meta.script {
        let mut el = element("script", &[]);
        for line in script.split('\n') {
            push(&mut el, element("line", &[("text", line)]));
        }
        push(&mut metadata, el);
    }
    push(&mut root, metadata);

    for e in &doc.entries {
        let row = e.row.to_string();
        let mut entry = element("entry", &[("id", &e.entry_id), ("table", &e.table_id), ("row", &row)]);
        push(&mut entry, provenance_element(&e.provenance));
        push(&mut entry, surface_element("surface", &e.surface, &[]));
        for (slot, text) in &e.components {
            let mut attrs = vec![("slot", slot.as_str())];
            if let Some(text) = text {
                attrs.push(("value", text));
            }
            push(&mut entry, element("component", &attrs));
        }
        for m in &e.merged {
            let mut el = element("merged", &[("id", &m.entry_id), ("table", &m.table_id)]);
            push(&mut el, provenance_element(&m.provenance));
            push(&mut entry, el);
        }

        let info = &e.lexical_info;
        let mut lex = element("lexical-information", &[("category", &info.category)]);
        for p in &info.paraphrases {
            push(&mut lex, surface_element("paraphrase", p, &[]));
        }
        for (label, s) in &info.other_structures {
            push(&mut lex, surface_element("other-structure", s, &[("label", label)]));
        }
        for s in &info.intensified {
            push(&mut lex, surface_element("intensified", s, &[]));
        }
        for (column, value) in &info.lexical_values {
            push(&mut lex, element("lexical-value", &[("column", column), ("value", value)]));
        }
        if let Some(note) = &info.usage_note {
            push(&mut lex, element("usage-note", &[("text", note)]));
        }
        push(&mut entry, lex);

        let mut args = element("arguments", &[]);
        for a in &e.arguments {
            push(&mut args, element("argument", &[("slot", a.slot.name()), ("selection", a.selection.name())]));
        }
        push(&mut entry, args);

        let mut cons = element("constructions", &[]);
        for id in &e.constructions.ids {
            push(&mut cons, element("construction", &[("id", id)]));
        }
        for s in &e.constructions.internal_structures {
            push(&mut cons, element("structure", &[("label", s)]));
        }
        for (feature, value) in &e.binary_features {
            push(&mut cons, element("feature", &[("id", feature), ("value", if *value { "+" } else { "-" })]));
        }
        push(&mut entry, cons);
        push(&mut root, entry);
    }

    let mut buf = Vec::new();
    let config = EmitterConfig::new().perform_indent(true).indent_string("  ");
    root.write_with_config(&mut buf, config).expect("writing XML to memory cannot fail");
    let mut out = String::from_utf8(buf).expect("emitter writes UTF-8");
    out.push('\n');
    out
}

// --------------------------------------------------------------- XML import

fn attr<'a>(el: &'a Element, name: &str) -> Result<&'a str> {
    el.attributes
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| Error::schema(0, format!("<{}> lacks attribute {name:?}", el.name)))
}

fn children<'a>(el: &'a Element) -> impl Iterator<Item = &'a Element> {
    el.children.iter().filter_map(XMLNode::as_element)
}

fn child<'a>(el: &'a Element, name: &str) -> Result<&'a Element> {
    el.get_child(name)
        .ok_or_else(|| Error::schema(0, format!("<{}> lacks <{name}>", el.name)))
}

fn surface_from(el: &Element) -> Result<SurfaceForm> {
    Ok(SurfaceForm {
        rendered: attr(el, "text")?.to_string(),
        tokens: children(el)
            .filter(|c| c.name == "token")
            .map(|c| attr(c, "form").map(str::to_string))
            .collect::<Result<_>>()?,
    })
}

fn provenance_from(el: &Element) -> Result<Provenance> {
    let p = child(el, "provenance")?;
    match attr(p, "kind")? {
        "base" => Ok(Provenance::Base),
        "generated" => Ok(Provenance::Generated {
            pass: attr(p, "pass")?.parse().map_err(|e: String| Error::schema(0, e))?,
            parent: attr(p, "parent")?.to_string(),
            feature_id: attr(p, "feature")?.to_string(),
            template: attr(p, "template")?.to_string(),
        }),
        other => Err(Error::schema(0, format!("unknown provenance kind {other:?}"))),
    }
}

pub fn import_xml(input: &str) -> Result<LexiconDocument> {
    let root = Element::parse(input.as_bytes()).map_err(|e| Error::schema(0, format!("XML: {e}")))?;
    if root.name != "lgx" {
        return Err(Error::schema(0, format!("root element is <{}>, expected <lgx>", root.name)));
    }
    let version = attr(&root, "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnknownFormatVersion(version.to_string()));
    }
    let meta_el = child(&root, "metadata")?;
    let metadata = Metadata {
        tool: attr(meta_el, "tool")?.to_string(),
        script_hash: attr(meta_el, "script-hash")?.to_string(),
        tables: children(meta_el)
            .filter(|c| c.name == "table")
            .map(|c| attr(c, "id").map(str::to_string))
            .collect::<Result<_>>()?,
        script: match meta_el.get_child("script") {
            None => None,
            Some(s) => Some(
                children(s)
                    .map(|l| attr(l, "text"))
                    .collect::<Result<Vec<_>>>()?
                    .join("\n"),
            ),
        },
    };

    let mut entries = Vec::new();
    for el in children(&root).filter(|c| c.name == "entry") {
        entries.push(entry_from(el)?);
    }
    Ok(LexiconDocument { metadata, entries })
}

fn entry_from(el: &Element) -> Result<LexEntry> {
    let mut e = new_entry(attr(el, "id")?);
    e.table_id = attr(el, "table")?.to_string();
    e.row = attr(el, "row")?.parse().map_err(|_| Error::schema(0, "bad row number"))?;
    e.provenance = provenance_from(el)?;
    e.surface = surface_from(child(el, "surface")?)?;
    for c in children(el) {
        match c.name.as_str() {
            "component" => {
                let slot = SlotRef::parse(attr(c, "slot")?).map_err(|err| Error::schema(0, err))?;
                e.components.push((slot, c.attributes.get("value").cloned()));
            }
            "merged" => e.merged.push(MergedDuplicate {
                entry_id: attr(c, "id")?.to_string(),
                table_id: attr(c, "table")?.to_string(),
                provenance: provenance_from(c)?,
            }),
            _ => {}
        }
    }

    let lex = child(el, "lexical-information")?;
    e.lexical_info.category = attr(lex, "category")?.to_string();
    for c in children(lex) {
        match c.name.as_str() {
            "paraphrase" => e.lexical_info.paraphrases.push(surface_from(c)?),
            "other-structure" => e
                .lexical_info
                .other_structures
                .push((attr(c, "label")?.to_string(), surface_from(c)?)),
            "intensified" => e.lexical_info.intensified.push(surface_from(c)?),
            "lexical-value" => e
                .lexical_info
                .lexical_values
                .push((attr(c, "column")?.to_string(), attr(c, "value")?.to_string())),
            "usage-note" => e.lexical_info.usage_note = Some(attr(c, "text")?.to_string()),
            other => return Err(Error::schema(0, format!("unexpected <{other}> in lexical information"))),
        }
    }

    for c in children(child(el, "arguments")?) {
        let slot = attr(c, "slot")?;
        let selection = attr(c, "selection")?;
        e.arguments.push(ArgumentSpec {
            slot: ArgSlot::parse(slot).ok_or_else(|| Error::schema(0, format!("unknown argument slot {slot:?}")))?,
            selection: Selection::parse(selection)
                .ok_or_else(|| Error::schema(0, format!("unknown selection {selection:?}")))?,
        });
    }

    for c in children(child(el, "constructions")?) {
        match c.name.as_str() {
            "construction" => e.constructions.ids.push(attr(c, "id")?.to_string()),
            "structure" => e.constructions.internal_structures.push(attr(c, "label")?.to_string()),
            "feature" => {
                let value = match attr(c, "value")? {
                    "+" => true,
                    "-" => false,
                    v => return Err(Error::schema(0, format!("feature value must be + or -, found {v:?}"))),
                };
                e.binary_features.insert(attr(c, "id")?.to_string(), value);
            }
            other => return Err(Error::schema(0, format!("unexpected <{other}> in constructions"))),
        }
    }
    Ok(e)
}

// ---------------------------------------------------------- records sidecar

pub const RECORDS_HEADER: &str = "# entry_id\tparent\tpass\tfeature\ttemplate\tsurface\tstatus";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordRow {
    pub entry_id: String,
    /// None for base entries removed by curation.
    pub parent: Option<String>,
    pub pass: Option<PassKind>,
    pub feature: String,
    pub template: String,
    pub surface: String,
    pub status: RecordStatus,
}

/// One row per generated entry, then one per base entry that did not
/// survive curation.
pub fn record_rows(out: &PipelineOutput, base: &[LexEntry]) -> Vec<RecordRow> {
    let statuses = out.statuses();
    let mut rows: Vec<RecordRow> = out
        .records
        .iter()
        .map(|r| RecordRow {
            entry_id: r.new_entry.entry_id.clone(),
            parent: Some(r.parent_id.clone()),
            pass: Some(r.pass),
            feature: r.feature_id.clone(),
            template: r.template.0.clone(),
            surface: r.new_entry.surface.rendered.clone(),
            status: statuses[&r.new_entry.entry_id],
        })
        .collect();
    for entry in base {
        if let Some(status) = statuses.get(&entry.entry_id).filter(|s| **s != RecordStatus::Kept) {
            rows.push(RecordRow {
                entry_id: entry.entry_id.clone(),
                parent: None,
                pass: None,
                feature: String::new(),
                template: String::new(),
                surface: entry.surface.rendered.clone(),
                status: *status,
            });
        }
    }
    rows
}

pub fn write_records(rows: &[RecordRow]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.entry_id.as_str(),
            r.parent.as_deref().unwrap_or("-"),
            r.pass.map(PassKind::name).unwrap_or("base"),
            &r.feature,
            &r.template,
            &r.surface,
            r.status.name(),
        ];
        let escaped: Vec<String> = fields.iter().map(|f| escape(f)).collect();
        out.push_str(&escaped.join("\t"));
        out.push('\n');
    }
    out
}

pub fn parse_records(input: &str) -> Result<Vec<RecordRow>> {
    let mut rows = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let number = i + 1;
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields = raw.split('\t').map(|f| unescape(f, number)).collect::<Result<Vec<_>>>()?;
        let [entry_id, parent, pass, feature, template, surface, status] = <[String; 7]>::try_from(fields)
            .map_err(|f| Error::schema(number, format!("expected 7 fields, found {}", f.len())))?;
        let pass = match pass.as_str() {
            "base" => None,
            p => Some(p.parse().map_err(|e: String| Error::schema(number, e))?),
        };
        let status = match status.as_str() {
            "kept" => RecordStatus::Kept,
            "duplicate" => RecordStatus::Duplicate,
            "rejected" => RecordStatus::Rejected,
            s => return Err(Error::schema(number, format!("unknown status {s:?}"))),
        };
        rows.push(RecordRow {
            entry_id,
            parent: (parent != "-").then_some(parent),
            pass,
            feature,
            template,
            surface,
            status,
        });
    }
    Ok(rows)
}

/// Recomputes the report from a lexicon and its records sidecar, and
/// checks the conservation identity against the lexicon's size.
pub fn stats_from_records(entries: &[LexEntry], rows: &[RecordRow]) -> Result<StatsReport> {
    let kept_base = entries.iter().filter(|e| e.is_base()).count();
    let removed_base = rows.iter().filter(|r| r.pass.is_none()).count();
    let initial = (kept_base + removed_base) as u64;
    let added: Vec<(PassKind, u64)> = PassKind::ALL
        .into_iter()
        .map(|p| (p, rows.iter().filter(|r| r.pass == Some(p)).count() as u64))
        .collect();
    let count = |s: RecordStatus| rows.iter().filter(|r| r.status == s).count() as u64;
    let report = compute_stats(initial, &added, count(RecordStatus::Duplicate), count(RecordStatus::Rejected))?;
    report.check_identity(entries.len() as u64)?;
    Ok(report)
}

/// Duplicate groups as recorded on surviving entries.
pub fn duplicates_of(entries: &[LexEntry]) -> Vec<DuplicateRecord> {
    crate::curate::duplicates_from_merged(entries).0
}
