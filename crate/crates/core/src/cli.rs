//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Data errors print
//! `error: <token>: <message>` on standard error.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::KeyValues;
use crate::counterfit::{counterfit, ConstraintSet, Losses, RetrofitConfig};
use crate::embeddings::{sense_max_similarity, word_cosine, EmbeddingError, VectorSpace};
use crate::eval::{
    bucketize, evaluate, format_sig, mcr, upper_bound, BucketSpec, DatasetPos, EvalDataset,
    EvalReport, Judgement, Policy, ReportFormat,
};
use crate::infocontent::{
    build_corpus_ic, build_intrinsic_ic, FrequencyTable, IcTable, SenseCredit,
};
use crate::measures::{word_similarity, Measure, MeasureConfig, MeasureError};
use crate::taxonomy::{Pos, Taxonomy};

#[derive(Debug, Parser)]
#[command(
    name = "lexsim",
    version,
    about = "Lexical semantic similarity toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a taxonomy file, then print its size.
    TaxoValidate { taxonomy: PathBuf },
    /// Word similarity under one taxonomic measure.
    Sim(SimArgs),
    /// Build an information content table.
    IcBuild(IcArgs),
    /// Counter-fit word vectors with synonym and antonym constraints.
    Retrofit(RetrofitArgs),
    /// Correlate a backend with gold judgements.
    Eval(EvalArgs),
    /// Agreement between two groups of ratings over the same pairs.
    UpperBound(UpperBoundArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Significant digits for printed numbers.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    precision: u32,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    measure: Measure,
    taxonomy: PathBuf,
    word1: String,
    word2: String,
    #[arg(long)]
    pos: Option<Pos>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ic: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct IcArgs {
    taxonomy: PathBuf,
    /// `word<TAB>count` file; without it the intrinsic estimate is built.
    #[arg(long)]
    freq: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, requires = "freq")]
    smoothing: f64,
    /// Credit every sense with the full word count instead of splitting it.
    #[arg(long, requires = "freq")]
    full_credit: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RetrofitArgs {
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long)]
    antonyms: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the vectors here and print per-epoch losses on standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[command(flatten)]
    format: Output,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Datasets evaluated with `--pos`.
    #[arg(required = true)]
    datasets: Vec<PathBuf>,
    /// A measure tag, `cosine` (word vectors) or `sense` (gloss sense
    /// embeddings over a taxonomy).
    #[arg(long)]
    backend: String,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    ic: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "n")]
    pos: DatasetPos,
    /// Extra verb datasets; with noun datasets this adds an MCR line.
    #[arg(long = "verb")]
    verb_datasets: Vec<PathBuf>,
    #[arg(long, default_value = "skip")]
    policy: Policy,
    /// `frequency`, `polysemy` or `intensity`.
    #[arg(long)]
    buckets: Option<String>,
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Maximum of a legacy rating scale to stretch to 0-10.
    #[arg(long)]
    rescale: Option<f64>,
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct UpperBoundArgs {
    ratings_a: PathBuf,
    ratings_b: PathBuf,
    #[arg(long)]
    rescale: Option<f64>,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Usage(String),
    Data(&'static str, String),
}

type CmdResult = Result<(), Failure>;

fn data<E: std::fmt::Display>(token: &'static str) -> impl Fn(E) -> Failure {
    move |e| Failure::Data(token, e.to_string())
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure::Data("io-error", e.to_string())
}

/// Reads every path up front so a missing file fails before any work.
fn read_all<const N: usize>(paths: [Option<&Path>; N]) -> Result<[Option<String>; N], Failure> {
    for p in paths.iter().flatten() {
        if !p.is_file() {
            return Err(Failure::Data(
                "io-error",
                format!("cannot read `{}`", p.display()),
            ));
        }
    }
    let mut out: [Option<String>; N] = std::array::from_fn(|_| None);
    for (slot, p) in out.iter_mut().zip(paths) {
        if let Some(p) = p {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Data("io-error", format!("{}: {e}", p.display())))?;
            *slot = Some(text);
        }
    }
    Ok(out)
}

fn measure_error(e: MeasureError) -> Failure {
    let token = match e {
        MeasureError::NoComparison { .. } => "no-comparison",
        MeasureError::UnknownWord { .. } => "unknown-word",
        MeasureError::UnknownSynset(_) => "unknown-synset",
        MeasureError::MissingIc(_) | MeasureError::IcCoverage(_) => "invalid-ic",
        MeasureError::InvalidConfig(_) => "invalid-config",
    };
    Failure::Data(token, e.to_string())
}

fn load_config(text: Option<&str>) -> Result<(MeasureConfig, RetrofitConfig), Failure> {
    let mut measures = MeasureConfig::default();
    let mut retrofit = RetrofitConfig::default();
    if let Some(text) = text {
        let bad = data("invalid-config");
        let mut kv: KeyValues = text.parse().map_err(&bad)?;
        measures.apply(&mut kv).map_err(&bad)?;
        retrofit.apply(&mut kv).map_err(&bad)?;
        kv.finish().map_err(&bad)?;
    }
    Ok((measures, retrofit))
}

fn parse_taxonomy_text(text: &str) -> Result<Taxonomy, Failure> {
    text.parse().map_err(data("invalid-taxonomy"))
}

/// `word#k`, `k` counting from 1 among the word's senses.
fn sense_label(t: &Taxonomy, word: &str, pos: Option<Pos>, synset: &str) -> String {
    let k = t
        .senses(word, pos)
        .iter()
        .position(|s| s.as_str() == synset)
        .map_or(0, |k| k + 1);
    format!("{word}#{k}")
}

fn cmd_taxo_validate(taxonomy: &Path, out: &mut dyn Write) -> CmdResult {
    let [text] = read_all([Some(taxonomy)])?;
    let t = parse_taxonomy_text(text.as_deref().unwrap_or_default())?;
    writeln!(
        out,
        "synsets\t{}\nroots\t{}\nmax_depth\t{}\nedges\t{}",
        t.len(),
        t.roots().len(),
        t.max_depth(),
        t.edge_count()
    )
    .map_err(io_fail)
}

fn cmd_sim(a: &SimArgs, out: &mut dyn Write) -> CmdResult {
    if a.measure.needs_ic() && a.ic.is_none() {
        return Err(Failure::Usage(format!(
            "--measure {} requires --ic",
            a.measure
        )));
    }
    let [tax, cfg, ic] = read_all([Some(&a.taxonomy), a.config.as_deref(), a.ic.as_deref()])?;
    let (cfg, _) = load_config(cfg.as_deref())?;
    let t = parse_taxonomy_text(tax.as_deref().unwrap_or_default())?;
    let ic: Option<IcTable> = ic
        .map(|s| s.parse())
        .transpose()
        .map_err(data("invalid-ic"))?;
    let s = word_similarity(&t, a.measure, &a.word1, &a.word2, a.pos, &cfg, ic.as_ref())
        .map_err(measure_error)?;
    writeln!(
        out,
        "{}\t{}\t{}",
        format_sig(s.value, a.output.precision as usize),
        sense_label(&t, &a.word1, a.pos, s.sense_pair.0.as_str()),
        sense_label(&t, &a.word2, a.pos, s.sense_pair.1.as_str()),
    )
    .map_err(io_fail)
}

fn cmd_ic_build(a: &IcArgs, out: &mut dyn Write) -> CmdResult {
    if !(a.smoothing >= 0.0 && a.smoothing.is_finite()) {
        return Err(Failure::Usage("--smoothing must be non-negative".into()));
    }
    let [tax, freq] = read_all([Some(&a.taxonomy), a.freq.as_deref()])?;
    let t = parse_taxonomy_text(tax.as_deref().unwrap_or_default())?;
    let table = match freq {
        Some(text) => {
            let freq: FrequencyTable = text.parse().map_err(data("invalid-frequencies"))?;
            let credit = if a.full_credit {
                SenseCredit::Full
            } else {
                SenseCredit::Split
            };
            build_corpus_ic(&t, &freq, a.smoothing, credit).map_err(data("invalid-frequencies"))?
        }
        None => build_intrinsic_ic(&t).map_err(data("invalid-taxonomy"))?,
    };
    let text = table.to_tsv(&t);
    match &a.output {
        Some(path) => std::fs::write(path, text).map_err(io_fail),
        None => out.write_all(text.as_bytes()).map_err(io_fail),
    }
}

fn cmd_retrofit(a: &RetrofitArgs, out: &mut dyn Write) -> CmdResult {
    if a.synonyms.is_none() && a.antonyms.is_none() {
        return Err(Failure::Usage("give --synonyms, --antonyms or both".into()));
    }
    let [vectors, syn, ant, cfg] = read_all([
        Some(&a.vectors),
        a.synonyms.as_deref(),
        a.antonyms.as_deref(),
        a.config.as_deref(),
    ])?;
    let (_, mut cfg) = load_config(cfg.as_deref())?;
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    let space: VectorSpace = vectors
        .unwrap_or_default()
        .parse()
        .map_err(data("invalid-vectors"))?;
    let constraints = ConstraintSet::from_tsv(&syn.unwrap_or_default(), &ant.unwrap_or_default())
        .map_err(data("invalid-constraints"))?;
    let report = counterfit(&space, &constraints, &cfg).map_err(data("retrofit-failed"))?;
    let text = report.final_space.to_text();
    match &a.output {
        Some(path) => {
            std::fs::write(path, text).map_err(io_fail)?;
            let d = a.format.precision as usize;
            let line = |label: String, l: &Losses| {
                format!(
                    "{label}\t{}\t{}\t{}\t{}\n",
                    format_sig(l.syn, d),
                    format_sig(l.ant, d),
                    format_sig(l.preserve, d),
                    format_sig(l.total, d)
                )
            };
            let mut table = format!(
                "epoch\tsyn\tant\tpreserve\ttotal\n{}",
                line("0".into(), &report.initial)
            );
            for (e, l) in report.loss_per_epoch.iter().enumerate() {
                table.push_str(&line((e + 1).to_string(), l));
            }
            table.push_str(&format!("#dropped_pairs\t{}\n", report.dropped_pairs));
            out.write_all(table.as_bytes()).map_err(io_fail)
        }
        None => out.write_all(text.as_bytes()).map_err(io_fail),
    }
}

enum Backend {
    Taxonomic {
        t: Taxonomy,
        measure: Measure,
        cfg: MeasureConfig,
        ic: Option<IcTable>,
    },
    Cosine(VectorSpace),
    Sense(Taxonomy, VectorSpace),
}

impl Backend {
    fn judge(&self, a: &str, b: &str, pos: Option<Pos>) -> Judgement {
        match self {
            Backend::Taxonomic {
                t,
                measure,
                cfg,
                ic,
            } => match word_similarity(t, *measure, a, b, pos, cfg, ic.as_ref()) {
                Ok(s) => Judgement::Score(s.value),
                Err(MeasureError::UnknownWord { .. }) => Judgement::OutOfVocabulary,
                Err(_) => Judgement::NoComparison,
            },
            Backend::Cosine(vs) => match word_cosine(vs, a, b) {
                Ok(c) => Judgement::Score(c),
                Err(EmbeddingError::OutOfVocabulary(_)) => Judgement::OutOfVocabulary,
                Err(_) => Judgement::NoComparison,
            },
            Backend::Sense(t, vs) => match sense_max_similarity(vs, t, a, b, pos) {
                Ok(c) => Judgement::Score(c),
                Err(EmbeddingError::NoSenseEmbedding(_)) => Judgement::OutOfVocabulary,
                Err(_) => Judgement::NoComparison,
            },
        }
    }
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(
        || p.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let measure: Option<Measure> = match a.backend.as_str() {
        "cosine" | "sense" => None,
        tag => Some(
            tag.parse()
                .map_err(|_| Failure::Usage(format!("unknown backend `{tag}`")))?,
        ),
    };
    let needs_tax = a.backend != "cosine";
    let needs_vec = measure.is_none();
    if needs_tax && a.taxonomy.is_none() {
        return Err(Failure::Usage(format!(
            "backend `{}` requires --taxonomy",
            a.backend
        )));
    }
    if needs_vec && a.vectors.is_none() {
        return Err(Failure::Usage(format!(
            "backend `{}` requires --vectors",
            a.backend
        )));
    }
    if measure.is_some_and(|m| m.needs_ic()) && a.ic.is_none() {
        return Err(Failure::Usage(format!(
            "backend `{}` requires --ic",
            a.backend
        )));
    }
    if a.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let buckets = match &a.buckets {
        None => None,
        Some(name) => {
            if BucketSpec::named(name, a.pos).is_none() {
                return Err(Failure::Usage(format!("unknown bucket preset `{name}`")));
            }
            if name == "frequency" && a.freq.is_none() {
                return Err(Failure::Usage("--buckets frequency requires --freq".into()));
            }
            if name == "polysemy" && a.taxonomy.is_none() {
                return Err(Failure::Usage(
                    "--buckets polysemy requires --taxonomy".into(),
                ));
            }
            Some(name.as_str())
        }
    };

    let [tax, ic, vectors, cfg, freq] = read_all([
        a.taxonomy.as_deref(),
        a.ic.as_deref(),
        a.vectors.as_deref(),
        a.config.as_deref(),
        a.freq.as_deref(),
    ])?;
    let datasets: Vec<(PathBuf, DatasetPos)> = a
        .datasets
        .iter()
        .map(|p| (p.clone(), a.pos))
        .chain(
            a.verb_datasets
                .iter()
                .map(|p| (p.clone(), DatasetPos::Verb)),
        )
        .collect();
    let mut texts = Vec::with_capacity(datasets.len());
    for (p, _) in &datasets {
        let [text] = read_all([Some(p.as_path())])?;
        texts.push(text.unwrap_or_default());
    }

    let (mcfg, _) = load_config(cfg.as_deref())?;
    let t = tax.as_deref().map(parse_taxonomy_text).transpose()?;
    let vs: Option<VectorSpace> = vectors
        .map(|v| v.parse())
        .transpose()
        .map_err(data("invalid-vectors"))?;
    let ic: Option<IcTable> = ic
        .map(|s| s.parse())
        .transpose()
        .map_err(data("invalid-ic"))?;
    let freq: Option<FrequencyTable> = freq
        .map(|s| s.parse())
        .transpose()
        .map_err(data("invalid-frequencies"))?;

    let bucket_tax = if buckets == Some("polysemy") {
        t.clone()
    } else {
        None
    };
    let backend = match (measure, t, vs) {
        (Some(measure), Some(t), _) => Backend::Taxonomic {
            t,
            measure,
            cfg: mcfg,
            ic,
        },
        (None, _, Some(vs)) if a.backend == "cosine" => Backend::Cosine(vs),
        (None, Some(t), Some(vs)) => Backend::Sense(t, vs),
        _ => unreachable!("inputs checked above"),
    };

    let mut report = EvalReport::default();
    let mut rhos: HashMap<bool, Vec<f64>> = HashMap::new();
    for ((path, pos), text) in datasets.iter().zip(&texts) {
        let ds = EvalDataset::parse(file_stem(path), *pos, text, a.rescale)
            .map_err(data("invalid-dataset"))?;
        let p = pos.pos();
        let ev = evaluate(|x, y| backend.judge(x, y, p), &ds, a.policy, a.jobs)
            .map_err(data("too-few-scored"))?;
        if let Some(rho) = ev.summary.rho {
            rhos.entry(*pos == DatasetPos::Verb).or_default().push(rho);
        }
        report.rows.push(ev.summary.clone());
        if let Some(name) = buckets {
            let spec = BucketSpec::named(name, *pos).expect("preset checked above");
            let b = bucketize(&ds, &spec, freq.as_ref(), bucket_tax.as_ref())
                .map_err(data("invalid-dataset"))?;
            for bucket in &b.buckets {
                report
                    .rows
                    .push(ev.subset(format!("{}/{}", ds.name, bucket.label), &bucket.pairs));
            }
            *report.excluded.get_or_insert(0) += b.excluded;
        }
    }
    let digits = a.output.precision as usize;
    let mut text = report.render(a.format, digits);
    if !a.verb_datasets.is_empty() && a.pos == DatasetPos::Noun {
        let ratio = match (rhos.get(&false), rhos.get(&true)) {
            (Some(n), Some(v)) => mcr(n, v)
                .map(|m| format_sig(m, digits))
                .unwrap_or_else(|_| "NA".into()),
            _ => "NA".into(),
        };
        text.push_str(&match a.format {
            ReportFormat::Tsv => format!("#mcr\t{ratio}\n"),
            ReportFormat::Text => format!("mcr: {ratio}\n"),
        });
    }
    out.write_all(text.as_bytes()).map_err(io_fail)
}

fn cmd_upper_bound(a: &UpperBoundArgs, out: &mut dyn Write) -> CmdResult {
    let [ta, tb] = read_all([Some(&a.ratings_a), Some(&a.ratings_b)])?;
    let bad = data("invalid-dataset");
    let da = EvalDataset::parse("a", DatasetPos::Mixed, &ta.unwrap_or_default(), a.rescale)
        .map_err(&bad)?;
    let db = EvalDataset::parse("b", DatasetPos::Mixed, &tb.unwrap_or_default(), a.rescale)
        .map_err(&bad)?;
    let key = |x: &str, y: &str| {
        if x <= y {
            (x.to_string(), y.to_string())
        } else {
            (y.to_string(), x.to_string())
        }
    };
    let lookup: HashMap<(String, String), f64> = db
        .pairs
        .iter()
        .map(|p| (key(&p.word1, &p.word2), p.gold))
        .collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for p in &da.pairs {
        if let Some(g) = lookup.get(&key(&p.word1, &p.word2)) {
            xs.push(p.gold);
            ys.push(*g);
        }
    }
    let (r, rho) = upper_bound(&xs, &ys).map_err(data("correlation-failed"))?;
    let d = a.output.precision as usize;
    writeln!(
        out,
        "pairs\t{}\nr\t{}\nrho\t{}",
        xs.len(),
        format_sig(r, d),
        format_sig(rho, d)
    )
    .map_err(io_fail)
}

/// Runs the tool with `args` (including the program name) and returns the
/// exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                1
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let result = match &cli.command {
        Command::TaxoValidate { taxonomy } => cmd_taxo_validate(taxonomy, out),
        Command::Sim(a) => cmd_sim(a, out),
        Command::IcBuild(a) => cmd_ic_build(a, out),
        Command::Retrofit(a) => cmd_retrofit(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::UpperBound(a) => cmd_upper_bound(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: usage: {message}");
            1
        }
        Err(Failure::Data(token, message)) => {
            let _ = writeln!(err, "error: {token}: {message}");
            2
        }
    }
}
