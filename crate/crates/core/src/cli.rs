//! The `pivotmt` command-line front end.
//!
//! One binary with a subcommand per pipeline step. Every subcommand accepts
//! `--config FILE`, a `key=value` file whose keys are the subcommand's long
//! flag names; flags given on the command line override it. Failures print
//! `error class=<class>: <message>` on stderr and exit with status 1
//! (2 for usage errors).

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::cascade::{self, CascadePipeline, DecodeSettings, TrainConfig, TrainEvent, TranslationSystem, VocabSpec};
use crate::error::{Error, Result};
use crate::io_util;
use crate::metrics::{bleu, DEFAULT_MAX_N};
use crate::subword::{SubwordVocab, VocabMode, DEFAULT_TARGET_SIZE};
use crate::text::{
    corpus_stats, detokenize, length_filter, render_stats_table, CorpusRules, Lang, ParallelCorpus, Sentence, StatsRow,
};
use crate::transformer::{checkpoint, AdamHyper, ModelConfig};

#[derive(Debug, Parser)]
#[command(name = "pivotmt", version, about = "Pivot-cascade machine translation toolkit")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, apply splitting rules and length-filter a parallel corpus.
    Preprocess(PreprocessArgs),
    /// Print segment, word and vocabulary counts per corpus.
    Stats(StatsArgs),
    /// Learn BPE vocabularies.
    LearnVocab(LearnVocabArgs),
    /// Train one translation system.
    Train(TrainArgs),
    /// Translate a file with one system.
    Translate(TranslateArgs),
    /// Translate a file through a two-stage pivot cascade.
    Cascade(CascadeArgs),
    /// Corpus BLEU of a hypothesis file against a reference file.
    Bleu(BleuArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key=value settings file; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long, value_name = "FILE")]
    pub src: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub tgt: PathBuf,
    #[arg(long)]
    pub src_lang: Lang,
    #[arg(long)]
    pub tgt_lang: Lang,
    /// Splitting rules file (keys src.contractions, src.enclitics, tgt.contractions, tgt.enclitics).
    #[arg(long, value_name = "FILE")]
    pub rules: Option<PathBuf>,
}

impl PairArgs {
    fn read(&self) -> Result<ParallelCorpus> {
        ParallelCorpus::read(
            &self.src,
            &self.tgt,
            self.src_lang.clone(),
            self.tgt_lang.clone(),
            self.rules()?,
        )
    }

    fn rules(&self) -> Result<CorpusRules> {
        match &self.rules {
            Some(p) => CorpusRules::load(p),
            None => Ok(CorpusRules::default()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_name = "FILE")]
    pub out_src: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_tgt: PathBuf,
    /// Minimum words per side.
    #[arg(long, default_value_t = 1)]
    pub min_len: usize,
    /// Maximum words per side.
    #[arg(long, default_value_t = 50)]
    pub max_len_filter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    /// NAME=SRC_FILE,TGT_FILE; repeat for several corpora.
    #[arg(long = "corpus", value_name = "NAME=SRC,TGT", required = true)]
    pub corpora: Vec<String>,
    #[arg(long)]
    pub src_lang: Lang,
    #[arg(long)]
    pub tgt_lang: Lang,
    #[arg(long, value_name = "FILE")]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LearnVocabArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, default_value_t = VocabMode::Separate)]
    pub vocab_mode: VocabMode,
    #[arg(long, default_value_t = DEFAULT_TARGET_SIZE)]
    pub vocab_size: usize,
    /// Receives src.vocab and tgt.vocab, or shared.vocab.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pair: PairArgs,
    /// Output system directory.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = VocabMode::Separate)]
    pub vocab_mode: VocabMode,
    #[arg(long, default_value_t = DEFAULT_TARGET_SIZE)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 64)]
    pub d_model: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long, default_value_t = 128)]
    pub d_ff: usize,
    #[arg(long, default_value_t = 64)]
    pub max_seq_len: usize,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub warmup: usize,
    #[arg(long, default_value_t = 0.0)]
    pub validation_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub eval_every: usize,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Write `checkpoints/step-N.ckpt` every N steps (0: never).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// Print a loss line every N steps.
    #[arg(long, default_value_t = 50)]
    pub log_every: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// Beam width; 1 is greedy search.
    #[arg(long, default_value_t = 4)]
    pub beam: usize,
    /// Maximum generated tokens per segment.
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    /// Length-normalisation exponent.
    #[arg(long, default_value_t = 0.6)]
    pub alpha: f64,
}

impl DecodeArgs {
    fn settings(&self) -> Result<DecodeSettings> {
        if self.beam == 0 {
            return Err(Error::Config("--beam must be at least 1".into()));
        }
        Ok(DecodeSettings {
            beam_size: self.beam,
            max_len: self.max_len,
            length_norm_alpha: self.alpha,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct TranslateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "DIR")]
    pub system: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pipeline manifest; alternatively give --stage1 and --stage2.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["stage1", "stage2"])]
    pub pipeline: Option<PathBuf>,
    #[arg(long, value_name = "DIR", requires = "stage2")]
    pub stage1: Option<PathBuf>,
    #[arg(long, value_name = "DIR", requires = "stage1")]
    pub stage2: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Also write the intermediate pivot text.
    #[arg(long, value_name = "FILE")]
    pub pivot_out: Option<PathBuf>,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BleuArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub hyp: PathBuf,
    #[arg(long = "ref", value_name = "FILE")]
    pub reference: PathBuf,
    /// Case-sensitive scoring; pass `--case-sensitive false` to fold case.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub case_sensitive: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Also write the key=value report here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

/// Parses `args` (program name first), merges any `--config` file and runs
/// the subcommand. Returns the process exit status.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => return report_error(&e, err),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error class=usage: {first}");
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Preprocess(a) => cmd_preprocess(a, err),
        Command::Stats(a) => cmd_stats(a, out),
        Command::LearnVocab(a) => cmd_learn_vocab(a, err),
        Command::Train(a) => cmd_train(a, err),
        Command::Translate(a) => cmd_translate(a),
        Command::Cascade(a) => cmd_cascade(a),
        Command::Bleu(a) => cmd_bleu(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report_error(&e, err),
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    let message = e.to_string().replace('\n', " ");
    let _ = writeln!(err, "error class={}: {message}", e.class());
    1
}

/// Inserts the settings of a `--config` file as flags right after the
/// subcommand name, so that later command-line flags override them.
fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="))
    else {
        return Ok(args);
    };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => match args.get(pos + 1) {
            Some(p) => PathBuf::from(p),
            None => return Ok(args),
        },
    };
    let Some(sub_name) = args.get(1).map(|s| s.to_string_lossy().into_owned()) else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    // every long flag takes a value, so `--key value` is always valid
    let known: BTreeSet<&str> = sub.get_arguments().filter_map(|a| a.get_long()).collect();
    let map = io_util::parse_key_values(&io_util::read_to_string(&path)?, &path)?;
    let mut injected = Vec::new();
    for (key, value) in map {
        let flag = key.replace('_', "-");
        if flag == "config" || !known.contains(flag.as_str()) {
            return Err(Error::Config(format!(
                "{}: unknown setting {key:?} for {sub_name}",
                path.display()
            )));
        }
        injected.push(OsString::from(format!("--{flag}")));
        injected.push(OsString::from(value));
    }
    args.splice(2..2, injected);
    Ok(args)
}

pub fn cmd_preprocess(a: &PreprocessArgs, log: &mut dyn Write) -> Result<()> {
    let corpus = a.pair.read()?;
    let kept = length_filter(&corpus, a.min_len, a.max_len_filter)?;
    kept.write(&a.out_src, &a.out_tgt)?;
    let _ = writeln!(
        log,
        "kept {} of {} pairs with {}..={} words per side",
        kept.len(),
        corpus.len(),
        a.min_len,
        a.max_len_filter
    );
    Ok(())
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let rules = match &a.rules {
        Some(p) => CorpusRules::load(p)?,
        None => CorpusRules::default(),
    };
    let mut named = Vec::new();
    for spec in &a.corpora {
        let parsed = spec
            .split_once('=')
            .and_then(|(name, files)| files.split_once(',').map(|(s, t)| (name, s, t)));
        let Some((name, src, tgt)) = parsed else {
            return Err(Error::Config(format!("--corpus expects NAME=SRC,TGT, got {spec:?}")));
        };
        let corpus = ParallelCorpus::read(src, tgt, a.src_lang.clone(), a.tgt_lang.clone(), rules)?;
        named.push((name.to_owned(), corpus_stats(&corpus)));
    }
    let rows: Vec<StatsRow<'_>> = named
        .iter()
        .map(|(name, stats)| StatsRow {
            corpus_name: name,
            src_lang: &a.src_lang,
            tgt_lang: &a.tgt_lang,
            stats: *stats,
        })
        .collect();
    out.write_all(render_stats_table(&rows).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_vocabs(dir: &Path, vocabs: &[SubwordVocab]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names: &[&str] = if vocabs.len() == 1 {
        &["shared.vocab"]
    } else {
        &["src.vocab", "tgt.vocab"]
    };
    let mut paths = Vec::new();
    for (v, n) in vocabs.iter().zip(names) {
        let p = dir.join(n);
        v.save(&p)?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn cmd_learn_vocab(a: &LearnVocabArgs, log: &mut dyn Write) -> Result<()> {
    let corpus = a.pair.read()?;
    let src: Vec<&Sentence> = corpus.sources().collect();
    let tgt: Vec<&Sentence> = corpus.targets().collect();
    let vocabs = SubwordVocab::learn(&[src, tgt], a.vocab_size, a.vocab_mode)?;
    for (p, v) in write_vocabs(&a.out_dir, &vocabs)?.iter().zip(&vocabs) {
        let _ = writeln!(log, "{}: {} symbols, {} merges", p.display(), v.len(), v.merges().len());
    }
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, log: &mut dyn Write) -> Result<()> {
    let corpus = a.pair.read()?;
    let rules = a.pair.rules()?;
    let model = ModelConfig {
        num_layers: a.layers,
        d_model: a.d_model,
        num_heads: a.heads,
        d_ff: a.d_ff,
        max_seq_len: a.max_seq_len,
        dropout_rate: a.dropout,
        src_vocab_size: 1,
        tgt_vocab_size: 1,
    };
    model.validate()?;
    let train = TrainConfig {
        steps: a.steps,
        batch_size: a.batch_size,
        adam: AdamHyper {
            lr: a.lr,
            ..AdamHyper::default()
        },
        warmup_steps: a.warmup,
        seed: a.common.seed,
        validation_fraction: a.validation_fraction,
        eval_every: a.eval_every,
        patience: a.patience,
        snapshot_every: a.checkpoint_every,
    };
    let vocab = VocabSpec {
        mode: a.vocab_mode,
        target_size: a.vocab_size,
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut loss_log = String::new();
    let mut snapshot_error = None;
    let ckpt_dir = a.out_dir.join("checkpoints");
    let (system, report) = cascade::train_system(&corpus, vocab, &model, &train, rules.src, |event| match event {
        TrainEvent::Step {
            step,
            loss,
            lr,
            elapsed_secs,
        } => {
            loss_log.push_str(&format!("step={step} loss={loss:.6} lr={lr:e}\n"));
            if a.log_every > 0 && step % a.log_every == 0 {
                let _ = writeln!(log, "step {step} loss {loss:.4} lr {lr:.2e} ({elapsed_secs:.1}s)");
            }
        }
        TrainEvent::Validation { step, loss } => {
            loss_log.push_str(&format!("step={step} valid_loss={loss:.6}\n"));
            let _ = writeln!(log, "step {step} validation loss {loss:.4}");
        }
        TrainEvent::Snapshot { step, config, params } => {
            if a.checkpoint_every > 0 && step % a.checkpoint_every == 0 && snapshot_error.is_none() {
                let r = std::fs::create_dir_all(&ckpt_dir)
                    .map_err(|e| Error::io(&ckpt_dir, e))
                    .and_then(|()| checkpoint::save(ckpt_dir.join(format!("step-{step}.ckpt")), config, params));
                snapshot_error = r.err();
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    io_util::write_atomic(a.out_dir.join("train.log"), loss_log.as_bytes())?;
    system.save(&a.out_dir)?;
    let _ = writeln!(
        log,
        "trained {} steps{}; skipped {} overlong pairs; final loss {}",
        report.steps_run,
        if report.stopped_early { " (early stop)" } else { "" },
        report.skipped_pairs,
        report.final_loss.map_or("n/a".to_owned(), |l| format!("{l:.4}"))
    );
    Ok(())
}

pub fn cmd_translate(a: &TranslateArgs) -> Result<()> {
    let system = TranslationSystem::load(&a.system)?;
    let settings = a.decode.settings()?;
    let mut lines = Vec::new();
    for line in io_util::read_lines(&a.input)? {
        lines.push(detokenize(&system.translate(&line, &settings)?));
    }
    io_util::write_lines(&a.output, &lines)
}

pub fn cmd_cascade(a: &CascadeArgs) -> Result<()> {
    let settings = a.decode.settings()?;
    let pipeline = match (&a.pipeline, &a.stage1, &a.stage2) {
        (Some(m), _, _) => {
            let mut p = CascadePipeline::load(m)?;
            p.decode = settings;
            p
        }
        (None, Some(s1), Some(s2)) => CascadePipeline::new(
            TranslationSystem::load(s1).map_err(|e| e.in_stage("stage 1"))?,
            TranslationSystem::load(s2).map_err(|e| e.in_stage("stage 2"))?,
            settings,
        )?,
        _ => return Err(Error::Config("give --pipeline or both --stage1 and --stage2".into())),
    };
    let mut pivots = Vec::new();
    let mut outputs = Vec::new();
    for line in io_util::read_lines(&a.input)? {
        let out = pipeline.translate(&line)?;
        pivots.push(out.pivot);
        outputs.push(out.output);
    }
    if let Some(p) = &a.pivot_out {
        io_util::write_lines(p, &pivots)?;
    }
    io_util::write_lines(&a.output, &outputs)
}

pub fn cmd_bleu(a: &BleuArgs, out: &mut dyn Write) -> Result<()> {
    let fold = |s: String| if a.case_sensitive { s } else { s.to_lowercase() };
    // Files are scored as given: whitespace-separated tokens.
    let lang = Lang::new("xx")?;
    let read = |p: &Path| -> Result<Vec<Sentence>> {
        Ok(io_util::read_lines(p)?
            .into_iter()
            .map(|l| Sentence::from_tokenized(&fold(l), lang.clone()))
            .collect())
    };
    let report = bleu(&read(&a.hyp)?, &read(&a.reference)?, a.max_n)?;
    let body = format!(
        "{report}\ncase_sensitive={}\n{}",
        a.case_sensitive,
        report.to_key_values()
    );
    if let Some(p) = &a.report {
        io_util::write_atomic(p, body.as_bytes())?;
    }
    out.write_all(body.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}
