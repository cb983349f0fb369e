//! Shared test support: fixture loading, a brute-force reference expander
//! that shares no generation code with the library, and a seeded generator
//! of synthetic tables and scripts.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use lexgram::compile::{compile_base, load_tables, realizer_for, TableSource};
use lexgram::script::{Action, ExtractionScript};
use lexgram::table::{CellValue, LgTable};
use lexgram::{parse_class_matrix, parse_script, parse_table, ExecMode, LexEntry, MorphoRules, Realizer, SymbolPolicy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> String {
    fs::read_to_string(fixture_dir().join(name)).unwrap()
}

pub const FIXTURE_TABLES: &[&str] = &[
    "PADV", "PAC", "PCA", "PCDC", "PCDN", "PCPC", "ADVMP", "ADVMS", "ADVPS", "ADVPF",
];

pub struct Corpus {
    pub tables: Vec<LgTable>,
    pub script: ExtractionScript,
    pub script_src: String,
    pub realizer: Realizer,
    pub base: Vec<LexEntry>,
}

pub fn load_fixtures() -> Corpus {
    let script_src = fixture("extract.lgs");
    let script = parse_script(&script_src).unwrap();
    let classes = parse_class_matrix(&fixture("classes.lgm")).unwrap();
    let sources: Vec<TableSource> = FIXTURE_TABLES
        .iter()
        .map(|id| TableSource {
            table_id: id.to_string(),
            text: fixture(&format!("{id}.lgt")),
        })
        .collect();
    let tables = load_tables(&sources, &classes, &script).unwrap();
    let rules = MorphoRules::from_toml(&fixture("morpho.toml")).unwrap();
    let realizer = realizer_for(&script, rules, SymbolPolicy::default());
    let (base, _) = compile_base(&tables, &script, &realizer, ExecMode::Serial).unwrap();
    Corpus {
        tables,
        script,
        script_src,
        realizer,
        base,
    }
}

/// A synthetic table and the script that drives it.
pub fn synthetic_corpus(seed: u64) -> Corpus {
    let case = synthetic::case(seed);
    let script = parse_script(&case.script).unwrap();
    let table = parse_table(&case.table, &case.table_id, &script).unwrap();
    let realizer = realizer_for(&script, MorphoRules::default(), SymbolPolicy::default());
    let tables = vec![table];
    let (base, _) = compile_base(&tables, &script, &realizer, ExecMode::Serial).unwrap();
    Corpus {
        tables,
        script,
        script_src: case.script,
        realizer,
        base,
    }
}

pub mod oracle {
    //! Naive reference: rows × Plus features × flat templates, with its own
    //! alternation expansion, substitution, contraction, elision and render.

    use super::*;

    #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
    pub struct Variant {
        pub pass: &'static str,
        pub table: String,
        pub row: usize,
        pub feature: String,
        pub tokens: Vec<String>,
        pub surface: String,
    }

    const CONTRACTIONS: [(&str, &str, &str); 4] = [("de", "le", "du"), ("de", "les", "des"), ("à", "le", "au"), ("à", "les", "aux")];
    const ELISIONS: [(&str, &str); 4] = [("de", "d'"), ("le", "l'"), ("la", "l'"), ("que", "qu'")];
    const MUTE_H: [&str; 18] = [
        "habitude", "habitudes", "heure", "heures", "heureux", "heureuse", "histoire", "histoires", "hiver",
        "homme", "hommes", "honneur", "hôpital", "huile", "humanité", "humeur", "hypothèse", "horizon",
    ];

    fn pass_of(action: &Action, has_templates: bool) -> Option<&'static str> {
        match action {
            Action::EmitParaphrase => Some("paraphrase-direct"),
            Action::EmitConstruction if has_templates => Some("paraphrase-construction"),
            Action::EmitSubstructure { kind, .. } => Some(match kind {
                lexgram::script::SubstructureKind::Deletion => "deletion",
                lexgram::script::SubstructureKind::Permutation => "permutation",
            }),
            Action::EmitTransformation { .. } => Some("transformation"),
            Action::EmitIntensified => Some("intensification"),
            _ => None,
        }
    }

    /// `(a + b)` groups, `E` meaning nothing; leftmost group varies slowest.
    pub fn alternatives(template: &str) -> Vec<String> {
        let mut results = vec![String::new()];
        let mut rest = template;
        while let Some(open) = rest.find('(') {
            let close = open + rest[open..].find(')').expect("unbalanced group");
            for r in &mut results {
                r.push_str(&rest[..open]);
            }
            let options: Vec<&str> = rest[open + 1..close]
                .split('+')
                .map(str::trim)
                .map(|o| if o == "E" { "" } else { o })
                .collect();
            results = results
                .iter()
                .flat_map(|prefix| options.iter().map(move |o| format!("{prefix}{o}")))
                .collect();
            rest = &rest[close + 1..];
        }
        for r in &mut results {
            r.push_str(rest);
        }
        results
    }

    fn vowel_initial(word: &str) -> bool {
        let first = word.chars().next();
        match first {
            Some(c) if "aàâäeéèêëiîïoôöuùûüæœ".contains(c.to_lowercase().next().unwrap()) => true,
            Some('h') | Some('H') => MUTE_H.contains(&word.to_lowercase().as_str()),
            _ => false,
        }
    }

    pub fn contract(tokens: &[(String, bool)]) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && (tokens[i].1 || tokens[i + 1].1) {
                let (a, b) = (&tokens[i].0, &tokens[i + 1].0);
                let elides_instead = ELISIONS.iter().any(|(w, _)| w == b)
                    && tokens.get(i + 2).is_some_and(|(n, _)| vowel_initial(n));
                if let Some((_, _, r)) = CONTRACTIONS.iter().find(|(l, rr, _)| l == a && rr == b) {
                    if !elides_instead {
                        out.push(r.to_string());
                        i += 2;
                        continue;
                    }
                }
            }
            out.push(tokens[i].0.clone());
            i += 1;
        }
        out
    }

    pub fn elide(tokens: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if let Some((_, e)) = ELISIONS.iter().find(|(w, _)| *w == tokens[i]) {
                if let Some(next) = tokens.get(i + 1).filter(|n| vowel_initial(n)) {
                    out.push(format!("{e}{next}"));
                    i += 2;
                    continue;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        out
    }

    pub fn render(tokens: &[String]) -> String {
        let mut s = String::new();
        for (i, t) in tokens.iter().enumerate() {
            let prev_glues = i > 0 && {
                let p = &tokens[i - 1];
                p.ends_with('\'') || (p.chars().count() > 1 && p.ends_with('-'))
            };
            if i > 0 && !prev_glues {
                s.push(' ');
            }
            s.push_str(t);
        }
        s
    }

    /// Returns (raw tokens, rendered surface).
    pub fn realize(template: &str, cells: &BTreeMap<String, CellValue>, symbols: &[String]) -> (Vec<String>, String) {
        let policy: BTreeMap<&str, &str> = [("Poss2", "son"), ("Ddef", "la")].into();
        let mut tokens: Vec<(String, bool)> = Vec::new();
        for (i, piece) in template.split('@').enumerate() {
            if i % 2 == 1 {
                match &cells[piece] {
                    CellValue::Lex(text) => {
                        for w in text.split_whitespace().filter(|w| *w != "<E>") {
                            tokens.push((w.to_string(), true));
                        }
                    }
                    CellValue::EmptySymbol => {}
                    other => panic!("placeholder {piece} bound to {other:?}"),
                }
            } else {
                for w in piece.split_whitespace() {
                    if symbols.iter().any(|s| s == w) {
                        tokens.push((policy.get(w).copied().unwrap_or(w).to_string(), true));
                    } else {
                        tokens.push((w.to_string(), false));
                    }
                }
            }
        }
        let raw = tokens.iter().map(|(t, _)| t.clone()).collect();
        let surface = render(&elide(&contract(&tokens)));
        (raw, surface)
    }

    pub fn expand(tables: &[LgTable], script: &ExtractionScript) -> Vec<Variant> {
        let mut out = Vec::new();
        for table in tables {
            for (r, row) in table.rows.iter().enumerate() {
                let cells: BTreeMap<String, CellValue> = table
                    .features
                    .iter()
                    .zip(&row.cells)
                    .map(|(f, c)| (f.id.clone(), c.clone()))
                    .collect();
                for (feature, cell) in table.features.iter().zip(&row.cells) {
                    if *cell != CellValue::Plus {
                        continue;
                    }
                    let Some(rule) = script.rule_for(&table.table_id, &feature.id) else { continue };
                    let Some(pass) = pass_of(&rule.action, !rule.templates.is_empty()) else { continue };
                    for t in &rule.templates {
                        for flat in alternatives(&t.source) {
                            let (tokens, surface) = realize(&flat, &cells, &script.symbols);
                            out.push(Variant {
                                pass,
                                table: table.table_id.clone(),
                                row: r + 1,
                                feature: feature.id.clone(),
                                tokens,
                                surface,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Lower case, single spaces, typographic apostrophes unified, NFC.
    pub fn key(surface: &str) -> String {
        use unicode_normalization::UnicodeNormalization;
        let s: String = surface.nfc().collect();
        s.replace('’', "'").to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

pub mod synthetic {
    //! Seeded random table + script pairs. Deletion templates keep an
    //! ordered subset of the structure, permutation templates shuffle all of
    //! it, intensifiers prefix one word; the other actions get free-form
    //! templates with groups, symbols and literals.

    use super::*;

    pub struct Case {
        pub table_id: String,
        pub table: String,
        pub script: String,
    }

    const STRUCTURES: &[&[&str]] = &[
        &["Prép", "Det", "C", "Modif pré-adj", "Adj"],
        &["Prép1", "Det1", "C1", "Prép2", "Det2", "C2"],
        &["Prép", "Det", "Adj", "C"],
        &["Adv"],
        &["Prép1", "Det1", "C1"],
    ];
    const AUX: &[&str] = &["Adj", "Adj-n", "Ndomaine"];
    const WORDS: &[&str] = &[
        "de", "le", "les", "la", "à", "une", "un", "que", "état", "heure", "homme", "avenir", "temps", "fin", "cas",
        "arbre", "sincère", "haut", "ici", "heure-", "ci", "il", "les plus", "en", "pour", "bénéfice", "économie",
    ];
    const LITERALS: &[&str] = &["de", "le", "la", "à", "en", "au niveau", "du point de vue", "une", "tout", "très"];
    const ACTIONS: &[&str] = &["paraphrase", "construction", "deletion", "permutation", "transformation", "intensify"];

    fn quote(s: &str) -> String {
        format!("\"{s}\"")
    }

    fn free_template(rng: &mut ChaCha8Rng, columns: &[String]) -> String {
        let n = rng.gen_range(1..=5);
        let mut parts = Vec::new();
        for _ in 0..n {
            let part = match rng.gen_range(0..6) {
                0 | 1 => format!("@{}@", columns.choose(rng).unwrap()),
                2 => LITERALS.choose(rng).unwrap().to_string(),
                3 => format!("({} + {})", LITERALS.choose(rng).unwrap(), WORDS.choose(rng).unwrap()),
                4 => format!("(E + {})", LITERALS.choose(rng).unwrap()),
                _ => ["Poss2", "Ddef"].choose(rng).unwrap().to_string(),
            };
            parts.push(part);
        }
        parts.join(" ")
    }

    pub fn case(seed: u64) -> Case {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table_id = format!("SYN{seed}");
        let structure = *STRUCTURES.choose(&mut rng).unwrap();
        let ent: Vec<String> = structure.iter().map(|s| format!("<ENT>{s}")).collect();
        let aux: Vec<String> = AUX.iter().filter(|_| rng.gen_bool(0.6)).map(|s| s.to_string()).collect();
        let lexical: Vec<String> = ent.iter().chain(&aux).cloned().collect();

        let mut script = String::from("%symbols Poss2 Ddef\n");
        for a in &aux {
            script.push_str(&format!("* : {} => lexical\n", quote(a)));
        }
        let n_features = rng.gen_range(1..=6);
        let mut features = Vec::new();
        for i in 0..n_features {
            let id = format!("F{i}");
            let action = *ACTIONS.choose(&mut rng).unwrap();
            let n_templates = rng.gen_range(1..=3);
            let templates: Vec<String> = (0..n_templates)
                .map(|_| match action {
                    "deletion" => {
                        let keep: Vec<&String> = ent.iter().filter(|_| rng.gen_bool(0.6)).collect();
                        let keep = if keep.is_empty() { vec![&ent[0]] } else { keep };
                        keep.iter().map(|c| format!("@{c}@")).collect::<Vec<_>>().join(" ")
                    }
                    "permutation" => {
                        let mut order = ent.clone();
                        order.shuffle(&mut rng);
                        order.iter().map(|c| format!("@{c}@")).collect::<Vec<_>>().join(" ")
                    }
                    "intensify" => {
                        let word = ["(plus + moins)", "tout", "très", "bien"].choose(&mut rng).unwrap();
                        let body: Vec<String> = ent.iter().map(|c| format!("@{c}@")).collect();
                        format!("{word} {}", body.join(" "))
                    }
                    _ => free_template(&mut rng, &lexical),
                })
                .map(|t| quote(&t))
                .collect();
            // a third of the rules name the table explicitly
            let pattern = if rng.gen_bool(0.33) { table_id.clone() } else { "*".to_string() };
            script.push_str(&format!("{pattern} : {} => {action} {}\n", quote(&id), templates.join(", ")));
            features.push(id);
        }
        // one binary feature the script never mentions
        features.push("Neg obl".to_string());

        let header: Vec<String> = lexical.iter().chain(&features).cloned().collect();
        let mut table = header.join("\t");
        table.push('\n');
        let n_rows = rng.gen_range(0..=8);
        for _ in 0..n_rows {
            let mut cells = Vec::new();
            for _ in &lexical {
                cells.push(if rng.gen_bool(0.15) { "<E>".to_string() } else { WORDS.choose(&mut rng).unwrap().to_string() });
            }
            for _ in &features {
                cells.push(if rng.gen_bool(0.5) { "+" } else { "-" }.to_string());
            }
            table.push_str(&cells.join("\t"));
            table.push('\n');
        }
        Case {
            table_id,
            table,
            script,
        }
    }
}
