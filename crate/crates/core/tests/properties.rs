mod common;

use std::collections::{BTreeSet, HashMap};

use lexgram::curate::dedup;
use lexgram::io::{export, import_lexicon, Format, LexiconDocument};
use lexgram::lexicon::{LexEntry, PassKind};
use lexgram::realize::render;
use lexgram::script::{expand_alternation, FactorizedTemplate, FlatTemplate};
use lexgram::table::{parse_class_matrix, parse_table, resolve_features, serialize_table, CellValue, ClassValue};
use lexgram::{run_pipeline, ExecMode, MorphoRules, PassConfig, Realizer, SymbolPolicy};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn extended(corpus: &common::Corpus, mode: ExecMode) -> Vec<LexEntry> {
    run_pipeline(&corpus.base, &corpus.script, &corpus.realizer, &PassConfig::all().with_mode(mode))
        .unwrap()
        .lexicon
}

// ------------------------------------------------------------ templates

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["de", "la", "une", "façon", "manière", "plus", "moins", "tout", "x"]).prop_map(String::from)
}

fn group() -> impl Strategy<Value = (String, usize)> {
    (prop::collection::vec(word(), 1..4), any::<bool>()).prop_map(|(mut alts, empty)| {
        if empty {
            alts.push("E".into());
        }
        (format!("({})", alts.join(" + ")), alts.len())
    })
}

proptest! {
    #[test]
    fn alternation_size_is_the_product_of_group_sizes(
        parts in prop::collection::vec(prop_oneof![word().prop_map(|w| (w, 1)), group()], 0..6)
    ) {
        let source: Vec<&str> = parts.iter().map(|(p, _)| p.as_str()).collect();
        let template = FactorizedTemplate::parse(&source.join(" ")).unwrap();
        let expected: usize = parts.iter().map(|(_, n)| *n).product();
        prop_assert_eq!(template.group_sizes().iter().product::<usize>(), expected);
        let flat = expand_alternation(&template);
        prop_assert_eq!(flat.len(), expected);
        prop_assert!(flat.iter().all(|f| !f.0.contains(['(', ')', '+'])));
    }
}

// --------------------------------------------------------------- tables

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn table_round_trip(seed in any::<u64>()) {
        let case = common::synthetic::case(seed);
        let script = lexgram::parse_script(&case.script).unwrap();
        let table = parse_table(&case.table, &case.table_id, &script).unwrap();
        prop_assert_eq!(serialize_table(&table), case.table.clone());
        prop_assert_eq!(parse_table(&serialize_table(&table), &case.table_id, &script).unwrap(), table);
    }

    #[test]
    fn resolve_features_is_idempotent(seed in any::<u64>(), constants in prop::collection::vec(0u8..3, 0..6)) {
        let case = common::synthetic::case(seed);
        let script = lexgram::parse_script(&case.script).unwrap();
        let table = parse_table(&case.table, &case.table_id, &script).unwrap();
        let marks = ["+", "-", ""];
        let mut header = vec!["Classe".to_string(), "Neg obl".to_string()];
        let mut row = vec![case.table_id.clone(), "o".to_string()];
        for (i, c) in constants.iter().enumerate() {
            header.push(format!("K{i}"));
            row.push(marks[*c as usize].to_string());
        }
        let matrix = parse_class_matrix(&format!("{}\n{}\n", header.join("\t"), row.join("\t"))).unwrap();
        let once = resolve_features(&table, &matrix, &script).unwrap();
        let twice = resolve_features(&once, &matrix, &script).unwrap();
        prop_assert_eq!(&once, &twice);
        let added = constants.iter().filter(|c| **c < 2).count();
        prop_assert_eq!(once.features.len(), table.features.len() + added);
        for (i, c) in constants.iter().enumerate() {
            let id = format!("K{i}");
            let expected = match matrix.get(&case.table_id, &id) {
                ClassValue::AlwaysValid => Some(CellValue::Plus),
                ClassValue::AlwaysInvalid => Some(CellValue::Minus),
                _ => None,
            };
            prop_assert_eq!(expected.is_some(), *c < 2);
            for r in 0..once.rows.len() {
                prop_assert_eq!(once.cell(r, &id).cloned(), expected.clone());
            }
        }
    }
}

// ---------------------------------------------------------------- dedup

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dedup_idempotent_conserving_and_order_insensitive(seed in any::<u64>()) {
        let corpus = common::synthetic_corpus(seed);
        let out = run_pipeline(&corpus.base, &corpus.script, &corpus.realizer, &PassConfig::none()).unwrap();
        prop_assert_eq!(&out.lexicon, &dedup(corpus.base.clone(), ExecMode::Serial).entries);

        // raw lexicon: base + all variants, before curation
        let raw: Vec<LexEntry> = {
            let full = run_pipeline(&corpus.base, &corpus.script, &corpus.realizer, &PassConfig::all()).unwrap();
            let mut v = full.lexicon.clone();
            for e in &mut v {
                e.merged.clear();
            }
            for r in &full.records {
                if !v.iter().any(|e| e.entry_id == r.new_entry.entry_id) {
                    v.push(r.new_entry.clone());
                }
            }
            for e in &corpus.base {
                if !v.iter().any(|x| x.entry_id == e.entry_id) {
                    v.push(e.clone());
                }
            }
            v
        };
        let first = dedup(raw.clone(), ExecMode::Serial);
        let removed: usize = first.duplicates.iter().map(|d| d.removed.len()).sum();
        prop_assert_eq!(first.entries.len() + removed, raw.len());

        let second = dedup(first.entries.clone(), ExecMode::Parallel);
        prop_assert_eq!(&second.entries, &first.entries);
        prop_assert!(second.duplicates.is_empty());

        let mut shuffled = raw.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let ids = |v: &[LexEntry]| v.iter().map(|e| e.entry_id.clone()).collect::<BTreeSet<_>>();
        prop_assert_eq!(ids(&dedup(shuffled, ExecMode::Serial).entries), ids(&first.entries));
    }
}

// ------------------------------------------------------ token properties

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn sorted(v: &[String]) -> Vec<String> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn is_sub_multiset(small: &[String], big: &[String]) -> bool {
    let mut pool = big.to_vec();
    small.iter().all(|t| pool.iter().position(|p| p == t).map(|i| pool.swap_remove(i)).is_some())
}

/// `exact_permutations`: permutation templates reorder every slot of the
/// structure. The fixture script also has a permutation that folds the
/// determiner into the pre-adjectival modifier, so there only inclusion holds.
fn check_token_properties(corpus: &common::Corpus, exact_permutations: bool) {
    let out = run_pipeline(&corpus.base, &corpus.script, &corpus.realizer, &PassConfig::all()).unwrap();
    let parents: HashMap<&str, &LexEntry> = corpus.base.iter().map(|e| (e.entry_id.as_str(), e)).collect();
    for r in &out.records {
        let parent = parents[r.parent_id.as_str()];
        assert!(parent.is_base(), "variant of a variant");
        let (child, base) = (&r.new_entry.surface.tokens, &parent.surface.tokens);
        match r.pass {
            PassKind::Deletion => assert!(is_subsequence(child, base), "{child:?} ⊄ {base:?}"),
            PassKind::Permutation if exact_permutations => assert_eq!(sorted(child), sorted(base)),
            PassKind::Permutation => assert!(is_sub_multiset(child, base), "{child:?} ⊄ {base:?}"),
            PassKind::Intensification => {
                assert_eq!(child.len(), base.len() + 1);
                assert_eq!(&child[1..], &base[..]);
            }
            _ => {}
        }
    }
}

#[test]
fn token_properties_on_fixtures() {
    let corpus = common::load_fixtures();
    check_token_properties(&corpus, false);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn token_properties_on_synthetic_tables(seed in any::<u64>()) {
        check_token_properties(&common::synthetic_corpus(seed), true);
    }
}

// ---------------------------------------------------------- realization

fn cell_value() -> impl Strategy<Value = CellValue> {
    prop_oneof![
        Just(CellValue::EmptySymbol),
        prop::sample::select(vec!["de", "le", "les", "la", "à", "une", "état", "heure", "heure-", "ci", "les plus", "homme", "hiver"])
            .prop_map(|s| CellValue::Lex(s.to_string())),
    ]
}

fn template_piece() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("@<ENT>C@".to_string()),
        Just("@<ENT>Det@".to_string()),
        Just("@Adj@".to_string()),
        Just("Poss2".to_string()),
        Just("Ddef".to_string()),
        prop::sample::select(vec!["de", "le", "la", "à", "au niveau", "en", "que", "x"]).prop_map(String::from),
    ]
}

proptest! {
    #[test]
    fn realized_text_is_clean(
        pieces in prop::collection::vec(template_piece(), 0..8),
        c in cell_value(), det in cell_value(), adj in cell_value(),
    ) {
        let realizer = Realizer::new(MorphoRules::default(), SymbolPolicy::default(), vec!["Poss2".into(), "Ddef".into()]);
        let bindings: std::collections::BTreeMap<String, CellValue> =
            [("<ENT>C".to_string(), c), ("<ENT>Det".to_string(), det), ("Adj".to_string(), adj)].into();
        let s = realizer.realize(&FlatTemplate(pieces.join(" ")), &bindings).unwrap();
        prop_assert!(!s.rendered.contains('@'));
        prop_assert!(!s.rendered.contains("<E>"));
        prop_assert!(!s.rendered.contains("  "));
        prop_assert_eq!(s.rendered.trim(), s.rendered.as_str());
        prop_assert!(!s.rendered.contains("Poss2") && !s.rendered.contains("Ddef"));
    }

    #[test]
    fn contraction_and_elision_are_idempotent(
        tokens in prop::collection::vec(
            prop::sample::select(vec!["de", "le", "les", "la", "à", "une", "que", "état", "heure", "avenir", "temps", "cas", "il", "hiver", "haut"]),
            0..10,
        )
    ) {
        let rules = MorphoRules::default();
        let tokens: Vec<String> = tokens.into_iter().map(String::from).collect();
        let c = rules.contract(&tokens);
        prop_assert_eq!(rules.contract(&c), c.clone());
        let e = rules.elide(&tokens);
        prop_assert_eq!(rules.elide(&e), e.clone());
        let both = rules.elide(&rules.contract(&tokens));
        prop_assert_eq!(rules.elide(&rules.contract(&both)), both.clone());
        prop_assert!(!render(&both).contains("  "));
    }
}

// ------------------------------------------------ serialization, determinism

fn doc_for(corpus: &common::Corpus, entries: Vec<LexEntry>) -> LexiconDocument {
    let ids = corpus.tables.iter().map(|t| t.table_id.clone()).collect();
    LexiconDocument::new(entries, ids, &corpus.script_src)
}

#[test]
fn fixture_lexicon_round_trips_in_both_formats() {
    let corpus = common::load_fixtures();
    for entries in [corpus.base.clone(), extended(&corpus, ExecMode::Parallel)] {
        let doc = doc_for(&corpus, entries);
        for format in [Format::Text, Format::Xml] {
            let bytes = export(&doc, format);
            assert_eq!(import_lexicon(&bytes, format).unwrap(), doc);
        }
        let from_text = import_lexicon(&export(&doc, Format::Text), Format::Text).unwrap();
        let from_xml = import_lexicon(&export(&doc, Format::Xml), Format::Xml).unwrap();
        assert_eq!(from_text, from_xml);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_modes() {
    let a = common::load_fixtures();
    let b = common::load_fixtures();
    let runs = [
        extended(&a, ExecMode::Serial),
        extended(&a, ExecMode::Parallel),
        extended(&b, ExecMode::Parallel),
    ];
    for format in [Format::Text, Format::Xml] {
        let bytes: Vec<String> = runs.iter().map(|r| export(&doc_for(&a, r.clone()), format)).collect();
        assert!(bytes.windows(2).all(|w| w[0] == w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthetic_lexicons_round_trip(seed in any::<u64>()) {
        let corpus = common::synthetic_corpus(seed);
        let serial = extended(&corpus, ExecMode::Serial);
        let parallel = extended(&corpus, ExecMode::Parallel);
        prop_assert_eq!(&serial, &parallel);
        let doc = doc_for(&corpus, serial);
        for format in [Format::Text, Format::Xml] {
            prop_assert_eq!(import_lexicon(&export(&doc, format), format).unwrap(), doc.clone());
        }
    }
}
