//! Pivot cascade: two independently trained systems, source→pivot and
//! pivot→target, chained at inference time.
//!
//! The pivot travels between the stages as text: stage 1's output ids are
//! decoded with its target vocabulary, detokenized, re-tokenized with
//! stage 2's source rules and encoded with stage 2's own source
//! vocabulary. Stage 1 hands over exactly one hypothesis.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io_util;
use crate::metrics::{bleu, BleuReport, DEFAULT_MAX_N};
use crate::subword::{SubwordVocab, VocabMode};
use crate::text::{detokenize, tokenize, CorpusRules, Lang, ParallelCorpus, RuleSet, Sentence};
use crate::transformer::{
    batch_loss, beam_decode, checkpoint, greedy_decode, train_step, AdamHyper, AdamState, Batch, Mode, ModelConfig,
    Parameters,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VocabSpec {
    pub mode: VocabMode,
    pub target_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Optimiser steps; 0 returns the freshly initialised model.
    pub steps: usize,
    pub batch_size: usize,
    pub adam: AdamHyper,
    /// Linear learning-rate warm-up length in steps.
    pub warmup_steps: usize,
    pub seed: u64,
    /// Fraction of pairs held out to watch the validation loss.
    pub validation_fraction: f64,
    /// Validation interval in steps (0 disables validation).
    pub eval_every: usize,
    /// Stop after this many validations without improvement.
    pub patience: Option<usize>,
    /// Emit a parameter snapshot every this many steps (0: final only).
    pub snapshot_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 1000,
            batch_size: 32,
            adam: AdamHyper::default(),
            warmup_steps: 100,
            seed: 1,
            validation_fraction: 0.0,
            eval_every: 0,
            patience: None,
            snapshot_every: 0,
        }
    }
}

impl TrainConfig {
    fn lr_at(&self, step: usize) -> f64 {
        if self.warmup_steps == 0 {
            self.adam.lr
        } else {
            self.adam.lr * ((step + 1) as f64 / self.warmup_steps as f64).min(1.0)
        }
    }
}

/// Progress notifications emitted while training.
pub enum TrainEvent<'a> {
    Step {
        step: usize,
        loss: f64,
        lr: f64,
        elapsed_secs: f64,
    },
    Validation {
        step: usize,
        loss: f64,
    },
    /// Parameters after `step` completed steps.
    Snapshot {
        step: usize,
        config: &'a ModelConfig,
        params: &'a Parameters,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeSettings {
    /// 1 selects greedy search.
    pub beam_size: usize,
    pub max_len: usize,
    pub length_norm_alpha: f64,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        DecodeSettings {
            beam_size: 4,
            max_len: 64,
            length_norm_alpha: 0.6,
        }
    }
}

/// A trained model bundled with its vocabularies, languages and the rules
/// used to tokenize its input.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSystem {
    pub params: Parameters,
    pub config: ModelConfig,
    pub src_vocab: SubwordVocab,
    pub tgt_vocab: SubwordVocab,
    pub src_lang: Lang,
    pub tgt_lang: Lang,
    pub preprocessing: RuleSet,
}

impl TranslationSystem {
    pub fn new(
        params: Parameters,
        config: ModelConfig,
        src_vocab: SubwordVocab,
        tgt_vocab: SubwordVocab,
        src_lang: Lang,
        tgt_lang: Lang,
        preprocessing: RuleSet,
    ) -> Result<Self> {
        if src_lang == tgt_lang {
            return Err(Error::Config(format!("source and target language are both {src_lang}")));
        }
        if src_vocab.len() != config.src_vocab_size || tgt_vocab.len() != config.tgt_vocab_size {
            return Err(Error::Config(format!(
                "vocabulary sizes {}/{} do not match model {}/{}",
                src_vocab.len(),
                tgt_vocab.len(),
                config.src_vocab_size,
                config.tgt_vocab_size
            )));
        }
        params.check_against(&config)?;
        Ok(TranslationSystem {
            params,
            config,
            src_vocab,
            tgt_vocab,
            src_lang,
            tgt_lang,
            preprocessing,
        })
    }

    pub fn is_shared_vocab(&self) -> bool {
        self.src_vocab.mode() == VocabMode::Shared && self.src_vocab == self.tgt_vocab
    }

    /// Translates an already tokenized sentence.
    pub fn translate_sentence(&self, sentence: &Sentence, settings: &DecodeSettings) -> Result<Sentence> {
        let mut src = self.src_vocab.encode(sentence, true).0;
        if src.len() > self.config.max_seq_len {
            // keep the closing EOS
            src.truncate(self.config.max_seq_len - 1);
            src.push(crate::subword::EOS);
        }
        let ids = if settings.beam_size <= 1 {
            greedy_decode(&src, &self.params, &self.config, settings.max_len)?
        } else {
            beam_decode(
                &src,
                &self.params,
                &self.config,
                settings.beam_size,
                settings.max_len,
                settings.length_norm_alpha,
            )?
        };
        self.tgt_vocab.decode(ids.as_slice(), &self.tgt_lang)
    }

    /// Tokenizes raw text with this system's rules and translates it.
    pub fn translate(&self, raw: &str, settings: &DecodeSettings) -> Result<Sentence> {
        let sentence = tokenize(raw, &self.src_lang, self.preprocessing);
        self.translate_sentence(&sentence, settings)
    }

    fn manifest_entries(&self, dir: &Path) -> Result<BTreeMap<&'static str, String>> {
        let name = |p: &str| p.to_owned();
        checkpoint::save(dir.join("model.ckpt"), &self.config, &self.params)?;
        let (src_vocab, tgt_vocab) = if self.is_shared_vocab() {
            self.src_vocab.save(dir.join("shared.vocab"))?;
            (name("shared.vocab"), name("shared.vocab"))
        } else {
            self.src_vocab.save(dir.join("src.vocab"))?;
            self.tgt_vocab.save(dir.join("tgt.vocab"))?;
            (name("src.vocab"), name("tgt.vocab"))
        };
        CorpusRules {
            src: self.preprocessing,
            tgt: RuleSet::NONE,
        }
        .save(dir.join("rules.txt"))?;
        Ok(BTreeMap::from([
            ("checkpoint", name("model.ckpt")),
            ("src_vocab", src_vocab),
            ("tgt_vocab", tgt_vocab),
            ("rules", name("rules.txt")),
            ("src_lang", self.src_lang.to_string()),
            ("tgt_lang", self.tgt_lang.to_string()),
        ]))
    }

    /// Writes the checkpoint, vocabularies, rules and a `system.txt`
    /// manifest into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let entries = self.manifest_entries(dir)?;
        let mut text = format!("format={SYSTEM_FORMAT}\nversion=1\n");
        for (k, v) in entries {
            text.push_str(&format!("{k}={v}\n"));
        }
        io_util::write_atomic(dir.join("system.txt"), text.as_bytes())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest = dir.join("system.txt");
        let mut map = io_util::parse_key_values(&io_util::read_to_string(&manifest)?, &manifest)?;
        check_format(&mut map, SYSTEM_FORMAT, &manifest)?;
        let system = load_stage(&mut map, "", dir, &manifest)?;
        io_util::reject_unknown(&map, &manifest)?;
        Ok(system)
    }
}

const SYSTEM_FORMAT: &str = "pivotmt-system";
const PIPELINE_FORMAT: &str = "pivotmt-pipeline";

fn check_format(map: &mut BTreeMap<String, String>, format: &str, origin: &Path) -> Result<()> {
    let found: String = io_util::take(map, "format", origin)?;
    let version: u32 = io_util::take(map, "version", origin)?;
    if found != format || version != 1 {
        return Err(Error::format(
            origin,
            format!("expected {format} version 1, found {found} version {version}"),
        ));
    }
    Ok(())
}

fn load_stage(
    map: &mut BTreeMap<String, String>,
    prefix: &str,
    base: &Path,
    origin: &Path,
) -> Result<TranslationSystem> {
    let mut path = |key: &str| -> Result<PathBuf> {
        let rel: String = io_util::take(map, &format!("{prefix}{key}"), origin)?;
        Ok(base.join(rel))
    };
    let (config, params) = checkpoint::load(path("checkpoint")?)?;
    let src_vocab = SubwordVocab::load(path("src_vocab")?)?;
    let tgt_vocab = SubwordVocab::load(path("tgt_vocab")?)?;
    let rules = CorpusRules::load(path("rules")?)?;
    let src_lang: Lang = io_util::take(map, &format!("{prefix}src_lang"), origin)?;
    let tgt_lang: Lang = io_util::take(map, &format!("{prefix}tgt_lang"), origin)?;
    TranslationSystem::new(params, config, src_vocab, tgt_vocab, src_lang, tgt_lang, rules.src)
}

/// Summary of a finished training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub steps_run: usize,
    pub final_loss: Option<f64>,
    pub best_validation_loss: Option<f64>,
    pub skipped_pairs: usize,
    pub stopped_early: bool,
}

/// Learns vocabularies from `corpus`, then trains a fresh model on it.
///
/// `model` supplies the architecture; its vocabulary sizes are replaced
/// by those of the learned vocabularies. Pairs whose encoded length
/// exceeds `max_seq_len` are skipped. `on_event` sees every step, every
/// validation and a final snapshot.
pub fn train_system(
    corpus: &ParallelCorpus,
    vocab_spec: VocabSpec,
    model: &ModelConfig,
    train: &TrainConfig,
    preprocessing: RuleSet,
    mut on_event: impl FnMut(TrainEvent<'_>),
) -> Result<(TranslationSystem, TrainReport)> {
    if corpus.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    if train.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if !(0.0..1.0).contains(&train.validation_fraction) {
        return Err(Error::Config("validation fraction must lie in [0, 1)".into()));
    }
    let src: Vec<&Sentence> = corpus.sources().collect();
    let tgt: Vec<&Sentence> = corpus.targets().collect();
    let vocabs = SubwordVocab::learn(&[src, tgt], vocab_spec.target_size, vocab_spec.mode)
        .map_err(|e| Error::Training(format!("vocabulary learning failed: {e}")))?;
    let (src_vocab, tgt_vocab) = match vocabs.as_slice() {
        [shared] => (shared.clone(), shared.clone()),
        [s, t] => (s.clone(), t.clone()),
        _ => unreachable!("one vocabulary per side or one shared"),
    };
    let config = ModelConfig {
        src_vocab_size: src_vocab.len(),
        tgt_vocab_size: tgt_vocab.len(),
        ..model.clone()
    };
    config.validate()?;

    let mut encoded = Vec::with_capacity(corpus.len());
    let mut skipped = 0;
    for (s, t) in corpus.pairs() {
        let s = src_vocab.encode(s, true).0;
        let t = tgt_vocab.encode(t, true).0;
        if s.len() > config.max_seq_len || t.len() - 1 > config.max_seq_len {
            skipped += 1;
        } else {
            encoded.push((s, t));
        }
    }
    if encoded.is_empty() {
        return Err(Error::Training("every pair exceeds max_seq_len".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut params = Parameters::init(&config, train.seed)?;
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(train.seed.wrapping_add(1));
    encoded.shuffle(&mut rng);
    let n_valid = if train.eval_every > 0 {
        ((encoded.len() as f64 * train.validation_fraction) as usize).min(encoded.len() - 1)
    } else {
        0
    };
    let valid_set = encoded.split_off(encoded.len() - n_valid);
    let valid_batch = if valid_set.is_empty() {
        None
    } else {
        let pairs: Vec<(&[u32], &[u32])> = valid_set.iter().map(|(s, t)| (s.as_slice(), t.as_slice())).collect();
        Some(Batch::from_pairs(&pairs)?)
    };

    let mut state = AdamState::new(&params);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut cursor = order.len();
    let start = Instant::now();
    let mut report = TrainReport {
        steps_run: 0,
        final_loss: None,
        best_validation_loss: None,
        skipped_pairs: skipped,
        stopped_early: false,
    };
    let mut stale = 0;
    for step in 0..train.steps {
        if cursor >= order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let end = (cursor + train.batch_size).min(order.len());
        let pairs: Vec<(&[u32], &[u32])> = order[cursor..end]
            .iter()
            .map(|&i| (encoded[i].0.as_slice(), encoded[i].1.as_slice()))
            .collect();
        cursor = end;
        let batch = Batch::from_pairs(&pairs)?;
        let lr = train.lr_at(step);
        let hyper = AdamHyper { lr, ..train.adam };
        let mode = if config.dropout_rate > 0.0 {
            Mode::Train(&mut dropout_rng)
        } else {
            Mode::Eval
        };
        let loss = train_step(&batch, &mut params, &mut state, hyper, &config, mode)?;
        report.steps_run = step + 1;
        report.final_loss = Some(loss);
        on_event(TrainEvent::Step {
            step: step + 1,
            loss,
            lr,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });

        if train.snapshot_every > 0 && (step + 1) % train.snapshot_every == 0 && step + 1 < train.steps {
            on_event(TrainEvent::Snapshot {
                step: step + 1,
                config: &config,
                params: &params,
            });
        }
        if let Some(vb) = &valid_batch {
            if (step + 1) % train.eval_every == 0 {
                let vloss = batch_loss(vb, &params, &config)?;
                on_event(TrainEvent::Validation {
                    step: step + 1,
                    loss: vloss,
                });
                if report.best_validation_loss.is_none_or(|b| vloss < b) {
                    report.best_validation_loss = Some(vloss);
                    stale = 0;
                } else {
                    stale += 1;
                    if train.patience.is_some_and(|p| stale >= p) {
                        report.stopped_early = true;
                        break;
                    }
                }
            }
        }
    }
    on_event(TrainEvent::Snapshot {
        step: report.steps_run,
        config: &config,
        params: &params,
    });
    let system = TranslationSystem::new(
        params,
        config,
        src_vocab,
        tgt_vocab,
        corpus.src_lang.clone(),
        corpus.tgt_lang.clone(),
        preprocessing,
    )?;
    Ok((system, report))
}

/// Stage 1 (source→pivot) and stage 2 (pivot→target) with shared decode
/// settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadePipeline {
    stage1: TranslationSystem,
    stage2: TranslationSystem,
    pub decode: DecodeSettings,
}

/// Final output of a cascade run plus the intermediate pivot text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeOutput {
    pub pivot: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeEvaluation {
    pub cascade: BleuReport,
    /// Stage 1 output against pivot references.
    pub stage1: Option<BleuReport>,
    /// Stage 2 run on the pivot references, against target references.
    pub stage2: Option<BleuReport>,
    pub pivots: Vec<String>,
    pub outputs: Vec<String>,
}

impl CascadePipeline {
    pub fn new(stage1: TranslationSystem, stage2: TranslationSystem, decode: DecodeSettings) -> Result<Self> {
        if stage1.tgt_lang != stage2.src_lang {
            return Err(Error::Config(format!(
                "stage 1 produces {} but stage 2 expects {}",
                stage1.tgt_lang, stage2.src_lang
            )));
        }
        if decode.beam_size == 0 {
            return Err(Error::Config("beam size must be at least 1".into()));
        }
        Ok(CascadePipeline { stage1, stage2, decode })
    }

    pub fn stage1(&self) -> &TranslationSystem {
        &self.stage1
    }

    pub fn stage2(&self) -> &TranslationSystem {
        &self.stage2
    }

    pub fn pivot_lang(&self) -> &Lang {
        &self.stage1.tgt_lang
    }

    /// Runs stage 2 alone on pivot text.
    pub fn translate_pivot(&self, pivot: &str) -> Result<String> {
        let out = self
            .stage2
            .translate(pivot, &self.decode)
            .map_err(|e| e.in_stage("stage 2 (pivot→target)"))?;
        Ok(detokenize(&out))
    }

    pub fn translate(&self, raw_src: &str) -> Result<CascadeOutput> {
        let pivot = self
            .stage1
            .translate(raw_src, &self.decode)
            .map_err(|e| e.in_stage("stage 1 (source→pivot)"))?;
        let pivot = detokenize(&pivot);
        let output = self.translate_pivot(&pivot)?;
        Ok(CascadeOutput { pivot, output })
    }

    /// Translates every source segment and scores the outputs against the
    /// gold targets. When pivot references are given, each stage is also
    /// scored on its own.
    pub fn evaluate(&self, test: &ParallelCorpus, pivot_refs: Option<&[Sentence]>) -> Result<CascadeEvaluation> {
        if test.is_empty() {
            return Err(Error::Input("empty test corpus".into()));
        }
        if let Some(p) = pivot_refs {
            if p.len() != test.len() {
                return Err(Error::Input(format!(
                    "{} pivot references for {} segments",
                    p.len(),
                    test.len()
                )));
            }
        }
        let mut pivots = Vec::with_capacity(test.len());
        let mut outputs = Vec::with_capacity(test.len());
        for src in test.sources() {
            let out = self.translate(&detokenize(src))?;
            pivots.push(out.pivot);
            outputs.push(out.output);
        }
        let as_sentences = |texts: &[String], lang: &Lang| -> Vec<Sentence> {
            texts
                .iter()
                .map(|t| Sentence::from_tokenized(t, lang.clone()))
                .collect()
        };
        let gold: Vec<Sentence> = test.targets().cloned().collect();
        let cascade = bleu(&as_sentences(&outputs, &test.tgt_lang), &gold, DEFAULT_MAX_N)?;
        let (stage1, stage2) = match pivot_refs {
            None => (None, None),
            Some(refs) => {
                let s1 = bleu(&as_sentences(&pivots, self.pivot_lang()), refs, DEFAULT_MAX_N)?;
                let direct = refs
                    .iter()
                    .map(|p| self.translate_pivot(&detokenize(p)))
                    .collect::<Result<Vec<_>>>()?;
                let s2 = bleu(&as_sentences(&direct, &test.tgt_lang), &gold, DEFAULT_MAX_N)?;
                (Some(s1), Some(s2))
            }
        };
        Ok(CascadeEvaluation {
            cascade,
            stage1,
            stage2,
            pivots,
            outputs,
        })
    }

    /// Reads a `pivotmt-pipeline` manifest. Relative paths resolve against
    /// the manifest's directory.
    pub fn load(manifest: impl AsRef<Path>) -> Result<Self> {
        let manifest = manifest.as_ref();
        let base = manifest.parent().unwrap_or(Path::new("."));
        let mut map = io_util::parse_key_values(&io_util::read_to_string(manifest)?, manifest)?;
        check_format(&mut map, PIPELINE_FORMAT, manifest)?;
        let stage1 = load_stage(&mut map, "stage1.", base, manifest).map_err(|e| e.in_stage("stage 1"))?;
        let stage2 = load_stage(&mut map, "stage2.", base, manifest).map_err(|e| e.in_stage("stage 2"))?;
        let decode = DecodeSettings {
            beam_size: io_util::take(&mut map, "beam_size", manifest)?,
            max_len: io_util::take(&mut map, "max_len", manifest)?,
            length_norm_alpha: io_util::take(&mut map, "length_norm_alpha", manifest)?,
        };
        io_util::reject_unknown(&map, manifest)?;
        Self::new(stage1, stage2, decode)
    }

    /// Writes both systems under `dir/stage1` and `dir/stage2` and a
    /// manifest `dir/pipeline.txt` pointing at them.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let mut text = format!("format={PIPELINE_FORMAT}\nversion=1\n");
        for (name, system) in [("stage1", &self.stage1), ("stage2", &self.stage2)] {
            let sub = dir.join(name);
            std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            for (k, v) in system.manifest_entries(&sub)? {
                let value = if k.ends_with("lang") { v } else { format!("{name}/{v}") };
                text.push_str(&format!("{name}.{k}={value}\n"));
            }
        }
        text.push_str(&format!(
            "beam_size={}\nmax_len={}\nlength_norm_alpha={:?}\n",
            self.decode.beam_size, self.decode.max_len, self.decode.length_norm_alpha
        ));
        let path = dir.join("pipeline.txt");
        io_util::write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Free-function form of [`CascadePipeline::translate`].
pub fn cascade_translate(raw_src: &str, pipeline: &CascadePipeline) -> Result<CascadeOutput> {
    pipeline.translate(raw_src)
}

/// Free-function form of [`CascadePipeline::evaluate`].
pub fn evaluate_cascade(
    test: &ParallelCorpus,
    pipeline: &CascadePipeline,
    pivot_refs: Option<&[Sentence]>,
) -> Result<CascadeEvaluation> {
    pipeline.evaluate(test, pivot_refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &str) -> Lang {
        Lang::new(s).unwrap()
    }

    fn tiny_model() -> ModelConfig {
        ModelConfig {
            num_layers: 1,
            d_model: 8,
            num_heads: 2,
            d_ff: 8,
            max_seq_len: 12,
            dropout_rate: 0.0,
            src_vocab_size: 0,
            tgt_vocab_size: 0,
        }
    }

    fn corpus(src: &str, tgt: &str, lines: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(lines.iter().map(|(s, t)| {
            (
                Sentence::from_tokenized(s, lang(src)),
                Sentence::from_tokenized(t, lang(tgt)),
            )
        }))
        .unwrap()
    }

    fn untrained(src: &str, tgt: &str) -> TranslationSystem {
        let c = corpus(src, tgt, &[("a b", "c d"), ("b a", "d c")]);
        let train = TrainConfig {
            steps: 0,
            ..TrainConfig::default()
        };
        let spec = VocabSpec {
            mode: VocabMode::Separate,
            target_size: 16,
        };
        train_system(&c, spec, &tiny_model(), &train, RuleSet::NONE, |_| {})
            .unwrap()
            .0
    }

    #[test]
    fn zero_steps_returns_initial_params() {
        let system = untrained("en", "es");
        let expected = Parameters::init(&system.config, TrainConfig::default().seed).unwrap();
        assert_eq!(system.params, expected);
        assert!(system.translate("a b", &DecodeSettings::default()).is_ok());
    }

    #[test]
    fn empty_corpus_is_a_training_error() {
        let c = ParallelCorpus::new(lang("en"), lang("es"));
        let spec = VocabSpec {
            mode: VocabMode::Shared,
            target_size: 16,
        };
        let r = train_system(&c, spec, &tiny_model(), &TrainConfig::default(), RuleSet::NONE, |_| {});
        assert!(matches!(r, Err(Error::Training(_))));
    }

    #[test]
    fn pipeline_rejects_mismatched_pivot() {
        let s1 = untrained("en", "es");
        let s2 = untrained("ca", "fr");
        assert!(matches!(
            CascadePipeline::new(s1.clone(), s2, DecodeSettings::default()),
            Err(Error::Config(_))
        ));
        let s2 = untrained("es", "ca");
        assert!(CascadePipeline::new(s1, s2, DecodeSettings::default()).is_ok());
    }

    #[test]
    fn stage_two_depends_only_on_pivot_text() {
        let p = CascadePipeline::new(untrained("en", "es"), untrained("es", "ca"), DecodeSettings::default()).unwrap();
        let out = p.translate("a b a").unwrap();
        assert_eq!(p.translate_pivot(&out.pivot).unwrap(), out.output);
        assert_eq!(p.translate("a b a").unwrap(), out);
    }

    #[test]
    fn pipeline_manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = CascadePipeline::new(untrained("en", "es"), untrained("es", "ca"), DecodeSettings::default()).unwrap();
        let manifest = p.save(dir.path()).unwrap();
        let loaded = CascadePipeline::load(&manifest).unwrap();
        assert_eq!(loaded, p);
        let system = TranslationSystem::load({
            p.stage1().save(dir.path().join("single")).unwrap();
            dir.path().join("single")
        })
        .unwrap();
        assert_eq!(&system, p.stage1());
    }

    #[test]
    fn unknown_manifest_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = CascadePipeline::new(untrained("en", "es"), untrained("es", "ca"), DecodeSettings::default()).unwrap();
        let manifest = p.save(dir.path()).unwrap();
        let mut text = std::fs::read_to_string(&manifest).unwrap();
        text.push_str("surprise=1\n");
        std::fs::write(&manifest, text).unwrap();
        assert!(matches!(CascadePipeline::load(&manifest), Err(Error::Format { .. })));
    }
}
