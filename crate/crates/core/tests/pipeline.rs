use pivotmt::cascade::train_system;
use pivotmt::metrics::bleu;
use pivotmt::text::detokenize;
use pivotmt::transformer::AdamHyper;
use pivotmt::{
    CascadePipeline, DecodeSettings, Lang, ModelConfig, ParallelCorpus, RuleSet, Sentence, TrainConfig,
    TranslationSystem, VocabMode, VocabSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn words(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            (0..rng.random_range(2..=6))
                .map(|_| char::from(b'a' + rng.random_range(0..8u8)).to_string())
                .collect()
        })
        .collect()
}

fn corpus(rows: &[Vec<String>], src: &str, tgt: &str, f: impl Fn(&[String]) -> String) -> ParallelCorpus {
    let (ls, lt) = (Lang::new(src).unwrap(), Lang::new(tgt).unwrap());
    ParallelCorpus::from_pairs(rows.iter().map(|w| {
        (
            Sentence::from_tokenized(&w.join(" "), ls.clone()),
            Sentence::from_tokenized(&f(w), lt.clone()),
        )
    }))
    .unwrap()
}

fn model() -> ModelConfig {
    ModelConfig {
        num_layers: 2,
        d_model: 32,
        num_heads: 4,
        d_ff: 64,
        max_seq_len: 12,
        dropout_rate: 0.0,
        src_vocab_size: 1,
        tgt_vocab_size: 1,
    }
}

fn train(c: &ParallelCorpus, mode: VocabMode, steps: usize) -> TranslationSystem {
    let config = TrainConfig {
        steps,
        batch_size: 32,
        adam: AdamHyper {
            lr: 3e-3,
            ..AdamHyper::default()
        },
        warmup_steps: 100,
        seed: 3,
        ..TrainConfig::default()
    };
    let spec = VocabSpec { mode, target_size: 48 };
    train_system(c, spec, &model(), &config, RuleSet::NONE, |_| {})
        .unwrap()
        .0
}

fn upper(w: &[String]) -> String {
    w.join(" ").to_uppercase()
}

fn reversed(w: &[String]) -> String {
    let mut w = w.to_vec();
    w.reverse();
    w.join(" ")
}

#[test]
fn copy_task_with_shared_vocab() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let train_rows = words(&mut rng, 1000);
    let test_rows: Vec<_> = words(&mut rng, 300)
        .into_iter()
        .filter(|w| !train_rows.contains(w))
        .take(100)
        .collect();
    let system = train(
        &corpus(&train_rows, "xx", "yy", |w| w.join(" ")),
        VocabMode::Shared,
        500,
    );
    assert!(system.is_shared_vocab());
    let test = corpus(&test_rows, "xx", "yy", |w| w.join(" "));
    let settings = DecodeSettings {
        beam_size: 1,
        max_len: 12,
        length_norm_alpha: 0.6,
    };
    let hyps: Vec<Sentence> = test
        .sources()
        .map(|s| system.translate_sentence(s, &settings).unwrap())
        .collect();
    let refs: Vec<Sentence> = test.targets().cloned().collect();
    let report = bleu(&hyps, &refs, 4).unwrap();
    assert!(report.bleu >= 95.0, "{report}");
}

#[test]
fn uppercase_then_reverse_cascade() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows1 = words(&mut rng, 1500);
    let rows2 = words(&mut rng, 1500);
    let stage1 = train(&corpus(&rows1, "lower", "upper", upper), VocabMode::Separate, 600);
    let upper_rows: Vec<Vec<String>> = rows2
        .iter()
        .map(|w| w.iter().map(|x| x.to_uppercase()).collect())
        .collect();
    let stage2 = train(&corpus(&upper_rows, "upper", "revup", reversed), VocabMode::Shared, 800);
    let pipeline = CascadePipeline::new(stage1, stage2, DecodeSettings::default()).unwrap();

    let out = pipeline.translate("a b c").unwrap();
    assert_eq!(out.pivot, "A B C");
    assert_eq!(out.output, "C B A");

    let test_rows = words(&mut rng, 80);
    let test = corpus(&test_rows, "lower", "revup", |w| reversed(w).to_uppercase());
    let pivots: Vec<Sentence> = test_rows
        .iter()
        .map(|w| Sentence::from_tokenized(&upper(w), Lang::new("upper").unwrap()))
        .collect();
    let eval = pipeline.evaluate(&test, Some(&pivots)).unwrap();
    let (s1, s2) = (eval.stage1.unwrap().bleu, eval.stage2.unwrap().bleu);
    assert!(eval.cascade.bleu >= 90.0, "{}", eval.cascade);
    assert!(
        eval.cascade.bleu <= s1.min(s2) + 5.0,
        "cascade {} stages {s1} {s2}",
        eval.cascade.bleu
    );
    assert_eq!(eval.outputs.len(), 80);
    let src = detokenize(&test.pairs()[0].0);
    assert_eq!(eval.pivots[0], pipeline.translate(&src).unwrap().pivot);
}
