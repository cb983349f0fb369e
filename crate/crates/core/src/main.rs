use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use lexgram::compile::{compile_base, load_tables, realizer_for, TableSource};
use lexgram::curate::{duplicates_from_merged, flag_suspicious, review_report};
use lexgram::io::{
    export, import_lexicon, parse_records, record_rows, sniff_format, stats_from_records, write_records, Format,
    LexiconDocument,
};
use lexgram::lexicon::PassKind;
use lexgram::stats::compute_stats;
use lexgram::{parse_class_matrix, parse_script, run_pipeline, ExecMode, MorphoRules, PassConfig, SymbolPolicy};

#[derive(Parser)]
#[command(name = "lexgram", version, about = "Lexicon-grammar tables to a syntactic lexicon")]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the base lexicon, one entry per table row.
    Compile {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        script: PathBuf,
        /// Contraction/elision rules (TOML); built-in French rules otherwise.
        #[arg(long)]
        morpho: Option<PathBuf>,
        #[arg(long, default_value = "default")]
        symbols: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Write table-level issues here.
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Add generated variants to a base lexicon.
    Extend {
        lexicon: PathBuf,
        /// Comma-separated passes, `all` or `none`.
        #[arg(long, default_value = "all")]
        passes: String,
        /// e.g. `Poss2=sa,N=keep`; `default` keeps the built-in policy.
        #[arg(long, default_value = "default")]
        symbols: String,
        /// Use this script instead of the one embedded in the lexicon.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        morpho: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        records: Option<PathBuf>,
        /// Entry ids to drop after review, one per line.
        #[arg(long)]
        reject: Option<PathBuf>,
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Flag suspicious entries and list duplicate groups.
    Validate {
        lexicon: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the entry-count report.
    Stats {
        lexicon: PathBuf,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Write a lexicon in the given format.
    Export {
        lexicon: PathBuf,
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read a text or XML lexicon, check it and write it as text.
    Import {
        input: PathBuf,
        #[arg(long)]
        format: Option<Format>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    Ok(text.replace("\r\n", "\n"))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("{}: cannot write", path.display()))
}

fn emit(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn format_for(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("xml") => Format::Xml,
        _ => Format::Text,
    }
}

fn load(path: &Path) -> anyhow::Result<LexiconDocument> {
    let text = read(path)?;
    import_lexicon(&text, sniff_format(&text)).with_context(|| path.display().to_string())
}

fn morpho(path: Option<&Path>) -> anyhow::Result<MorphoRules> {
    match path {
        Some(p) => MorphoRules::from_toml(&read(p)?).with_context(|| p.display().to_string()),
        None => Ok(MorphoRules::default()),
    }
}

fn table_id(path: &Path) -> anyhow::Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| anyhow!("{}: cannot derive a table id from the file name", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mode = if cli.serial { ExecMode::Serial } else { ExecMode::Parallel };
    match cli.command {
        Command::Compile {
            tables,
            classes,
            script,
            morpho: morpho_path,
            symbols,
            output,
            review,
        } => {
            let script_src = read(&script)?;
            let parsed = parse_script(&script_src).with_context(|| script.display().to_string())?;
            let matrix = parse_class_matrix(&read(&classes)?).with_context(|| classes.display().to_string())?;
            let mut sources = Vec::new();
            for path in &tables {
                sources.push(TableSource {
                    table_id: table_id(path)?,
                    text: read(path)?,
                });
            }
            // load one by one so a failure names its file
            let mut loaded = Vec::new();
            for (path, src) in tables.iter().zip(&sources) {
                let table = load_tables(std::slice::from_ref(src), &matrix, &parsed)
                    .with_context(|| path.display().to_string())?;
                loaded.extend(table);
            }
            let realizer = realizer_for(&parsed, morpho(morpho_path.as_deref())?, SymbolPolicy::parse(&symbols)?);
            let (entries, issues) = compile_base(&loaded, &parsed, &realizer, mode)?;
            let ids = loaded.iter().map(|t| t.table_id.clone()).collect();
            let doc = LexiconDocument::new(entries, ids, &script_src);
            write(&output, &export(&doc, format_for(&output)))?;
            if let Some(review) = review {
                write(&review, &review_report(&issues, &[]))?;
            }
            eprintln!("{} base entries from {} tables", doc.entries.len(), doc.metadata.tables.len());
        }
        Command::Extend {
            lexicon,
            passes,
            symbols,
            script,
            morpho: morpho_path,
            output,
            records,
            reject,
            review,
        } => {
            let doc = load(&lexicon)?;
            if let Some(e) = doc.entries.iter().find(|e| !e.is_base()) {
                bail!("{}: {} is a generated entry; extend takes a base lexicon", lexicon.display(), e.entry_id);
            }
            let script_src = match &script {
                Some(p) => read(p)?,
                None => doc
                    .metadata
                    .script
                    .clone()
                    .ok_or_else(|| anyhow!("{}: no embedded script; pass --script", lexicon.display()))?,
            };
            let parsed = parse_script(&script_src).with_context(|| match &script {
                Some(p) => p.display().to_string(),
                None => format!("{} (embedded script)", lexicon.display()),
            })?;
            let config = PassConfig::parse(&passes).map_err(|e| anyhow!("--passes: {e}"))?.with_mode(mode);
            let realizer = realizer_for(&parsed, morpho(morpho_path.as_deref())?, SymbolPolicy::parse(&symbols)?);

            let mut out = run_pipeline(&doc.entries, &parsed, &realizer, &config)?;
            if let Some(path) = &reject {
                let ids: HashSet<String> = read(path)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(str::to_string)
                    .collect();
                out.reject(&ids)?;
            }

            let rows = record_rows(&out, &doc.entries);
            let extended = LexiconDocument::new(out.lexicon.clone(), doc.metadata.tables.clone(), &script_src);
            write(&output, &export(&extended, format_for(&output)))?;
            if let Some(path) = &records {
                write(path, &write_records(&rows))?;
            }
            if let Some(path) = &review {
                write(path, &review_report(&out.issues, &out.duplicates))?;
            }
            // the sidecar must reproduce the in-memory report
            let recomputed = stats_from_records(&out.lexicon, &rows)?;
            if recomputed != out.stats {
                return Err(lexgram::Error::Invariant("records sidecar disagrees with pipeline stats".into()).into());
            }
            eprint!("{}", out.stats.render());
        }
        Command::Validate { lexicon, output } => {
            let doc = load(&lexicon)?;
            let mut issues: Vec<_> = doc.entries.iter().flat_map(flag_suspicious).collect();
            let (duplicates, dup_issues) = duplicates_from_merged(&doc.entries);
            issues.extend(dup_issues);
            emit(output.as_deref(), &review_report(&issues, &duplicates))?;
        }
        Command::Stats { lexicon, records } => {
            let doc = load(&lexicon)?;
            let report = match records {
                Some(path) => {
                    let rows = parse_records(&read(&path)?).with_context(|| path.display().to_string())?;
                    stats_from_records(&doc.entries, &rows)?
                }
                None => {
                    // without a sidecar, rebuild the counts from provenance
                    // and merged duplicates; rejections are unknown
                    let mut added = Vec::new();
                    let mut base = 0u64;
                    let mut removed = 0u64;
                    for e in &doc.entries {
                        let provenances = std::iter::once(&e.provenance).chain(e.merged.iter().map(|m| &m.provenance));
                        for p in provenances {
                            match p.pass() {
                                Some(pass) => added.push((pass, 1)),
                                None => base += 1,
                            }
                        }
                        removed += e.merged.len() as u64;
                    }
                    let added: Vec<(PassKind, u64)> = PassKind::ALL
                        .into_iter()
                        .map(|p| (p, added.iter().filter(|(q, _)| *q == p).count() as u64))
                        .collect();
                    let report = compute_stats(base, &added, removed, 0)?;
                    report.check_identity(doc.entries.len() as u64)?;
                    report
                }
            };
            print!("{}", report.render());
        }
        Command::Export { lexicon, format, output } => {
            let doc = load(&lexicon)?;
            emit(output.as_deref(), &export(&doc, format))?;
        }
        Command::Import { input, format, output } => {
            let text = read(&input)?;
            let format = format.unwrap_or_else(|| sniff_format(&text));
            let doc = import_lexicon(&text, format).with_context(|| input.display().to_string())?;
            write(&output, &export(&doc, format_for(&output)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let invariant = err.chain().any(|c| c.downcast_ref::<lexgram::Error>().is_some_and(|e| e.is_invariant()));
            ExitCode::from(if invariant { 2 } else { 1 })
        }
    }
}
