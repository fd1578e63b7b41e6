//! `vkbqa`: answer questions about annotated images from a knowledge base.
//!
//! Exit codes: 0 success, 1 load or I/O failure, 2 unrecognized question,
//! 3 any other structured answering failure (or failed gold checks).

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vkbqa::config::SessionConfig;
use vkbqa::eval::{
    aggregate, auto_check, read_jsonl, read_questions, read_score_log, run_batch, score_interactive, write_jsonl,
    AnswerRecord, ListMode, QuestionRecord, ScoreEntry,
};
use vkbqa::session::{format_answer, split_ids, Session};

/// Environment variable naming the default config file.
const CONFIG_ENV: &str = "VKBQA_CONFIG";

#[derive(Parser, Debug)]
#[command(name = "vkbqa", version, about = "Knowledge-base question answering over annotated images")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Opts {
    /// TOML session config; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// N-Triples KB snapshot (default: bundled mini-KB).
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    /// Directory of image annotation JSON files (default: bundled fixtures).
    #[arg(long, global = true)]
    annotations: Option<PathBuf>,
    /// Question template file.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Object class registry (TSV).
    #[arg(long, global = true)]
    classes: Option<PathBuf>,
    /// Attribute registry (TSV).
    #[arg(long, global = true)]
    attributes: Option<PathBuf>,
    /// Weight of the direct-relation term in correlation scores.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Correlation total an image must exceed to count as related.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Category hops allowed for is-a checks.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Fail on malformed KB lines instead of skipping them.
    #[arg(long, global = true)]
    strict_parse: bool,
    /// Reject annotation labels missing from the registries.
    #[arg(long, global = true)]
    strict_classes: bool,
    /// Print the executed queries.
    #[arg(long, global = true)]
    verbose_queries: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the KB and annotations and print statistics.
    LoadCheck,
    /// Answer one question.
    Ask {
        /// Image id, or two comma-separated ids for two-image questions.
        #[arg(long)]
        images: String,
        /// Print the answer as a JSON record.
        #[arg(long)]
        json: bool,
        question: String,
    },
    /// Answer questions interactively.
    Repl {
        /// Initially selected image id(s).
        #[arg(long)]
        images: Option<String>,
    },
    /// Answer a question file, writing one JSON answer record per line.
    Batch {
        /// Question records (JSON lines).
        questions: PathBuf,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check answers against gold answers, or collect and aggregate examiner scores.
    Eval {
        /// Question records (JSON lines).
        questions: PathBuf,
        /// Previously written answer records; answered afresh when omitted.
        #[arg(long)]
        answers: Option<PathBuf>,
        /// Examiner score log (TSV); scores are aggregated instead of gold checks.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Prompt for 1-5 scores, appending them to the score log.
        #[arg(long, requires = "scores")]
        interactive: bool,
        #[arg(long, default_value = "examiner")]
        examiner: String,
        /// Require name lists to match exactly instead of containing the gold names.
        #[arg(long)]
        exact_lists: bool,
        /// Write the machine-readable report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(base: Option<&Path>, p: Option<PathBuf>) -> Option<PathBuf> {
    match (base, p) {
        (Some(b), Some(p)) if p.is_relative() => Some(b.join(p)),
        (_, p) => p,
    }
}

/// Config file values, overridden by flags.
fn session_config(o: &Opts) -> Result<SessionConfig> {
    let mut c = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
            let mut c: SessionConfig =
                toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
            let base = path.parent();
            c.kb = resolve(base, c.kb);
            c.annotations = resolve(base, c.annotations);
            c.templates = resolve(base, c.templates);
            c.classes = resolve(base, c.classes);
            c.attributes = resolve(base, c.attributes);
            c
        }
        None => SessionConfig::default(),
    };
    macro_rules! take {
        ($($f:ident),*) => { $(if let Some(v) = o.$f.clone() { c.$f = Some(v); })* };
    }
    take!(kb, annotations, templates, classes, attributes);
    if let Some(v) = o.alpha {
        c.alpha = v;
    }
    if let Some(v) = o.threshold {
        c.threshold = v;
    }
    if let Some(v) = o.depth {
        c.depth = v;
    }
    c.strict_parse |= o.strict_parse;
    c.strict_classes |= o.strict_classes;
    c.validate()?;
    Ok(c)
}

fn load(o: &Opts) -> Result<Session> {
    let config = session_config(o)?;
    let start = Instant::now();
    let session = Session::load(config)?;
    log::info!(
        "loaded KB: {} triples, {} images in {:.2?} (load #{})",
        session.graph.len(),
        session.images.len(),
        start.elapsed(),
        vkbqa::kb::load_count()
    );
    for (image, report) in &session.links {
        if !report.unlinked.is_empty() {
            log::info!("{image}: no KB entity for {}", report.unlinked.join(", "));
        }
    }
    Ok(session)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_questions_file(path: &Path) -> Result<Vec<QuestionRecord>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_questions(BufReader::new(f)).with_context(|| format!("in {}", path.display()))
}

fn load_check(o: &Opts) -> Result<u8> {
    let s = load(o)?;
    let stats = &s.snapshot.stats;
    println!("triples: {}", s.graph.len());
    println!("labels: {}", stats.labels);
    println!("redirects: {}", stats.redirects);
    println!("malformed lines skipped: {}", stats.malformed.len());
    for (line, msg) in stats.malformed.iter().take(10) {
        println!("  line {line}: {msg}");
    }
    println!("images: {}", s.images.len());
    for (id, h) in &s.images {
        let report = &s.links[id];
        println!(
            "  {id}: {} objects, {} concepts linked, {} unlinked",
            h.objects.len(),
            h.categories.len() - report.unlinked.len(),
            report.unlinked.len()
        );
    }
    println!("templates: {} patterns", s.templates.len());
    Ok(0)
}

fn ask(o: &Opts, images: &str, question: &str, json: bool) -> Result<u8> {
    let s = load(o)?;
    let ids = split_ids(images);
    match s.ask(&ids, question) {
        Ok(a) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&a)?);
            } else {
                print!("{}", format_answer(&a, o.verbose_queries));
            }
            Ok(0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code() as u8)
        }
    }
}

fn repl(o: &Opts, images: Option<String>) -> Result<u8> {
    let s = load(o)?;
    let current = images.map(|i| split_ids(&i)).unwrap_or_default();
    s.repl(io::stdin().lock(), io::stdout().lock(), current, o.verbose_queries)?;
    Ok(0)
}

fn batch(o: &Opts, questions: &Path, out: &Option<PathBuf>) -> Result<u8> {
    let s = load(o)?;
    let qs = read_questions_file(questions)?;
    let answers = run_batch(&s, &qs);
    let mut w = output(out)?;
    write_jsonl(&answers, &mut w)?;
    w.flush()?;
    let errors = answers.iter().filter(|a| a.error.is_some()).count();
    for a in answers.iter().filter(|a| a.error.is_some()) {
        eprintln!("{}: {}", a.qid, a.text);
    }
    eprintln!("answered {} of {} questions ({errors} errors)", answers.len() - errors, answers.len());
    Ok(0)
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[allow(clippy::too_many_arguments)]
fn eval(
    o: &Opts,
    questions: &Path,
    answers: &Option<PathBuf>,
    scores: &Option<PathBuf>,
    interactive: bool,
    examiner: &str,
    exact_lists: bool,
    out: &Option<PathBuf>,
) -> Result<u8> {
    let qs = read_questions_file(questions)?;
    if scores.is_none() && !qs.iter().any(|q| q.gold.is_some()) {
        bail!("no gold answers in {}; use --scores with --interactive to score by hand", questions.display());
    }
    let records: Vec<AnswerRecord> = match answers {
        Some(p) => read_jsonl(BufReader::new(File::open(p).with_context(|| format!("cannot open {}", p.display()))?))?,
        None => run_batch(&load(o)?, &qs),
    };

    if let Some(log_path) = scores {
        let existing: Vec<ScoreEntry> = match File::open(log_path) {
            Ok(f) => read_score_log(BufReader::new(f))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e).with_context(|| format!("cannot read {}", log_path.display())),
        };
        let mut all = existing.clone();
        if interactive {
            let mut log = OpenOptions::new().create(true).append(true).open(log_path)?;
            let new =
                score_interactive(&records, &existing, examiner, io::stdin().lock(), io::stdout().lock(), now, |e| {
                    writeln!(log, "{}", e.to_line())?;
                    log.flush()?;
                    Ok(())
                })?;
            all.extend(new);
        }
        let report = aggregate(&all, &qs, &records)?;
        print!("{}", report.render_text());
        if let Some(p) = out {
            fs::write(p, report.to_json() + "\n").with_context(|| format!("cannot write {}", p.display()))?;
        }
        return Ok(0);
    }

    let mode = if exact_lists { ListMode::Exact } else { ListMode::Subset };
    let outcomes = auto_check(&records, &qs, mode);
    for o in outcomes.iter().filter(|o| !o.pass) {
        println!("FAIL {}: {}", o.qid, o.detail.as_deref().unwrap_or(""));
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("passed {passed} of {} gold checks", outcomes.len());
    if let Some(p) = out {
        fs::write(p, serde_json::to_string_pretty(&outcomes)? + "\n")
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(if passed == outcomes.len() { 0 } else { 3 })
}

fn run(cli: Cli) -> Result<u8> {
    let o = &cli.opts;
    match &cli.command {
        Command::LoadCheck => load_check(o),
        Command::Ask { images, json, question } => ask(o, images, question, *json),
        Command::Repl { images } => repl(o, images.clone()),
        Command::Batch { questions, out } => batch(o, questions, out),
        Command::Eval { questions, answers, scores, interactive, examiner, exact_lists, out } => {
            eval(o, questions, answers, scores, *interactive, examiner, *exact_lists, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
