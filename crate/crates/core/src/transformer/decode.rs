//! Greedy and beam search.
//!
//! Search runs over any [`StepScorer`], so it can be checked against
//! hand-built toy models as well as the Transformer. PAD and BOS are never
//! generated. A hypothesis ends at EOS or, failing that, after `max_len`
//! tokens.

use std::cmp::Ordering;

use super::config::ModelConfig;
use super::model::{encode_source, next_token_log_probs, EncodedSource};
use super::params::Parameters;
use crate::error::{Error, Result};
use crate::subword::{IdSequence, BOS, EOS, PAD};

/// Next-token log-probabilities given the tokens generated so far.
pub trait StepScorer {
    fn log_probs(&self, prefix: &[u32]) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Generated tokens, EOS excluded.
    pub ids: Vec<u32>,
    /// Sum of token log-probabilities, EOS included when `finished`.
    pub log_prob: f64,
    /// Whether the hypothesis ended with EOS.
    pub finished: bool,
}

impl Hypothesis {
    /// Number of scored tokens.
    pub fn length(&self) -> usize {
        self.ids.len() + usize::from(self.finished)
    }

    /// Length-normalised score `log_prob / length^alpha`.
    pub fn score(&self, alpha: f64) -> f64 {
        self.log_prob / (self.length().max(1) as f64).powf(alpha)
    }
}

fn generable(token: usize, lp: f64) -> bool {
    token != PAD as usize && token != BOS as usize && lp > f64::NEG_INFINITY
}

pub fn greedy_search(scorer: &impl StepScorer, max_len: usize) -> Hypothesis {
    let mut hyp = Hypothesis {
        ids: Vec::new(),
        log_prob: 0.0,
        finished: false,
    };
    for _ in 0..max_len {
        let lp = scorer.log_probs(&hyp.ids);
        let mut best: Option<(usize, f64)> = None;
        for (tok, &l) in lp.iter().enumerate() {
            if generable(tok, l) && best.is_none_or(|(_, b)| l > b) {
                best = Some((tok, l));
            }
        }
        let Some((tok, l)) = best else { break };
        hyp.log_prob += l;
        if tok == EOS as usize {
            hyp.finished = true;
            break;
        }
        hyp.ids.push(tok as u32);
    }
    hyp
}

fn better(a: &Hypothesis, b: &Hypothesis, alpha: f64) -> bool {
    match a.score(alpha).total_cmp(&b.score(alpha)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (&a.ids, a.finished) < (&b.ids, b.finished),
    }
}

/// Beam search with length-normalised final selection. Each step keeps the
/// `beam_size` best expansions by cumulative log-probability (ties to the
/// lexicographically smaller sequence). Hypotheses reaching EOS retire;
/// survivors at `max_len` retire unfinished. The greedy hypothesis is
/// always a candidate, so the result never scores below greedy search.
pub fn beam_search(scorer: &impl StepScorer, beam_size: usize, max_len: usize, alpha: f64) -> Result<Hypothesis> {
    if beam_size == 0 {
        return Err(Error::Config("beam size must be at least 1".into()));
    }
    let mut finished = vec![greedy_search(scorer, max_len)];
    let mut alive: Vec<(f64, Vec<u32>)> = vec![(0.0, Vec::new())];
    for step in 0..max_len {
        let mut candidates: Vec<(f64, Vec<u32>)> = Vec::new();
        for (base, ids) in &alive {
            let lp = scorer.log_probs(ids);
            for (tok, &l) in lp.iter().enumerate() {
                if generable(tok, l) {
                    let mut next = ids.clone();
                    next.push(tok as u32);
                    candidates.push((base + l, next));
                }
            }
        }
        candidates.sort_by(|(la, a), (lb, b)| lb.total_cmp(la).then_with(|| a.cmp(b)));
        candidates.truncate(beam_size);
        alive.clear();
        for (log_prob, mut ids) in candidates {
            if ids.last() == Some(&EOS) {
                ids.pop();
                finished.push(Hypothesis {
                    ids,
                    log_prob,
                    finished: true,
                });
            } else if step + 1 == max_len {
                finished.push(Hypothesis {
                    ids,
                    log_prob,
                    finished: false,
                });
            } else {
                alive.push((log_prob, ids));
            }
        }
        if alive.is_empty() {
            break;
        }
    }
    let mut best = finished.swap_remove(0);
    for h in finished {
        if better(&h, &best, alpha) {
            best = h;
        }
    }
    Ok(best)
}

/// Scores next tokens with a Transformer over a fixed, pre-encoded source.
pub struct TransformerScorer<'a> {
    enc: EncodedSource,
    params: &'a Parameters,
    config: &'a ModelConfig,
}

impl<'a> TransformerScorer<'a> {
    pub fn new(src_ids: &[u32], params: &'a Parameters, config: &'a ModelConfig) -> Result<Self> {
        Ok(TransformerScorer {
            enc: encode_source(src_ids, params, config)?,
            params,
            config,
        })
    }

    /// Longest generation the positional range allows.
    pub fn max_len_cap(&self) -> usize {
        self.config.max_seq_len
    }
}

impl StepScorer for TransformerScorer<'_> {
    fn log_probs(&self, prefix: &[u32]) -> Vec<f64> {
        let mut input = Vec::with_capacity(prefix.len() + 1);
        input.push(BOS);
        input.extend_from_slice(prefix);
        next_token_log_probs(&self.enc, &input, self.params, self.config)
    }
}

pub fn greedy_decode(src_ids: &[u32], params: &Parameters, config: &ModelConfig, max_len: usize) -> Result<IdSequence> {
    let scorer = TransformerScorer::new(src_ids, params, config)?;
    let max_len = max_len.min(scorer.max_len_cap());
    Ok(IdSequence(greedy_search(&scorer, max_len).ids))
}

pub fn beam_decode(
    src_ids: &[u32],
    params: &Parameters,
    config: &ModelConfig,
    beam_size: usize,
    max_len: usize,
    length_norm_alpha: f64,
) -> Result<IdSequence> {
    let scorer = TransformerScorer::new(src_ids, params, config)?;
    let max_len = max_len.min(scorer.max_len_cap());
    Ok(IdSequence(
        beam_search(&scorer, beam_size, max_len, length_norm_alpha)?.ids,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Vocabulary {PAD, BOS, EOS, x=3, y=4}; the distribution depends on
    /// the prefix through a fixed table.
    struct TableModel;

    impl StepScorer for TableModel {
        fn log_probs(&self, prefix: &[u32]) -> Vec<f64> {
            let (eos, x, y) = match prefix {
                [] => (0.05, 0.55, 0.40),
                [3] => (0.10, 0.45, 0.45),
                [4] => (0.02, 0.03, 0.95),
                [3, 3] | [3, 4] => (0.40, 0.30, 0.30),
                [4, 4] => (0.97, 0.02, 0.01),
                [4, 3] => (0.50, 0.25, 0.25),
                _ => (0.90, 0.05, 0.05),
            };
            vec![
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
                f64::ln(eos),
                f64::ln(x),
                f64::ln(y),
            ]
        }
    }

    fn enumerate_all(scorer: &impl StepScorer, max_len: usize) -> Vec<Hypothesis> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::<u32>::new(), 0.0)];
        while let Some((ids, lp)) = stack.pop() {
            if ids.len() == max_len {
                out.push(Hypothesis {
                    ids,
                    log_prob: lp,
                    finished: false,
                });
                continue;
            }
            let probs = scorer.log_probs(&ids);
            out.push(Hypothesis {
                ids: ids.clone(),
                log_prob: lp + probs[EOS as usize],
                finished: true,
            });
            for tok in [3u32, 4] {
                let mut next = ids.clone();
                next.push(tok);
                stack.push((next, lp + probs[tok as usize]));
            }
        }
        out
    }

    #[test]
    fn beam_finds_exhaustive_argmax() {
        let all = enumerate_all(&TableModel, 3);
        let best = all.iter().max_by(|a, b| a.log_prob.total_cmp(&b.log_prob)).unwrap();
        assert_eq!(best.ids, [4, 4]);
        let beam = beam_search(&TableModel, 4, 3, 0.0).unwrap();
        assert_eq!(beam.ids, best.ids);
        assert!(beam.finished);
        assert!((beam.log_prob - best.log_prob).abs() < 1e-12);
        // greedy follows x first and misses it
        let greedy = greedy_search(&TableModel, 3);
        assert_eq!(greedy.ids[0], 3);
        assert!(greedy.log_prob < best.log_prob);
    }

    #[test]
    fn beam_one_is_greedy() {
        for max_len in 0..5 {
            assert_eq!(
                beam_search(&TableModel, 1, max_len, 0.6).unwrap(),
                greedy_search(&TableModel, max_len)
            );
        }
    }

    #[test]
    fn max_len_bounds_output() {
        assert!(greedy_search(&TableModel, 1).ids.len() <= 1);
        assert!(greedy_search(&TableModel, 0).ids.is_empty());
        assert!(beam_search(&TableModel, 3, 1, 1.0).unwrap().ids.len() <= 1);
        assert!(beam_search(&TableModel, 0, 3, 1.0).is_err());
    }

    #[test]
    fn never_scores_below_greedy() {
        for beam in 1..6 {
            for alpha in [0.0, 0.6, 1.0, 2.0] {
                let b = beam_search(&TableModel, beam, 4, alpha).unwrap();
                assert!(b.score(alpha) >= greedy_search(&TableModel, 4).score(alpha));
            }
        }
    }
}
