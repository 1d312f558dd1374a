//! Case-sensitive corpus BLEU over pre-tokenized text.
//!
//! Clipped n-gram matches and totals are accumulated over the whole
//! corpus, single reference per segment, no smoothing: any zero precision
//! makes the score 0. The brevity penalty is `exp(1 - r/c)` when the
//! hypothesis length `c` is below the reference length `r`, 1 otherwise,
//! and 0 for an empty hypothesis side. Segments shorter than `n` contribute
//! nothing to the order-`n` totals, so a corpus made only of short
//! segments scores 0 even against itself.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::text::Sentence;

pub const DEFAULT_MAX_N: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// Score on the 0..=100 scale.
    pub bleu: f64,
    /// Modified precisions p1..p_max_n, each in [0, 1].
    pub precisions: Vec<f64>,
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuReport {
    /// `key=value` lines for scripts.
    pub fn to_key_values(&self) -> String {
        let mut out = format!("bleu={:.6}\n", self.bleu);
        for (i, p) in self.precisions.iter().enumerate() {
            out.push_str(&format!("p{}={:.6}\n", i + 1, p));
        }
        for (i, (m, t)) in self.matches.iter().zip(&self.totals).enumerate() {
            out.push_str(&format!("matches{}={m}\ntotal{}={t}\n", i + 1, i + 1));
        }
        out.push_str(&format!(
            "bp={:.6}\nhyp_len={}\nref_len={}\n",
            self.brevity_penalty, self.hyp_len, self.ref_len
        ));
        out
    }
}

/// `BLEU = 27.04, p1/p2/p3/p4 = 63.0/35.1/19.8/11.2, BP = 0.985, hyp_len = 120, ref_len = 122`
impl fmt::Display for BleuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (1..=self.precisions.len()).map(|n| format!("p{n}")).collect();
        let values: Vec<String> = self.precisions.iter().map(|p| format!("{:.1}", 100.0 * p)).collect();
        write!(
            f,
            "BLEU = {:.2}, {} = {}, BP = {:.3}, hyp_len = {}, ref_len = {}",
            self.bleu,
            labels.join("/"),
            values.join("/"),
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

/// Counts every contiguous window of `n` tokens.
pub fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if n == 0 {
        return counts;
    }
    for window in tokens.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}

pub fn bleu(hypotheses: &[Sentence], references: &[Sentence], max_n: usize) -> Result<BleuReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::Input(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if hypotheses.is_empty() {
        return Err(Error::Input("empty hypothesis set".into()));
    }
    if max_n < 1 {
        return Err(Error::Config("max_n must be at least 1".into()));
    }

    let mut matches = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let mut hyp_len = 0;
    let mut ref_len = 0;
    for (hyp, reference) in hypotheses.iter().zip(references) {
        let h: Vec<&str> = hyp.surfaces().collect();
        let r: Vec<&str> = reference.surfaces().collect();
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let hyp_counts = ngram_counts(&h, n);
            let ref_counts = ngram_counts(&r, n);
            for (gram, &count) in &hyp_counts {
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += count.min(clip);
            }
            totals[n - 1] += h.len().saturating_sub(n - 1);
        }
    }

    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 })
        .collect();
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let bleu = if precisions.contains(&0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };
    Ok(BleuReport {
        bleu,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Lang;

    fn s(text: &str) -> Sentence {
        Sentence::from_tokenized(text, Lang::new("xx").unwrap())
    }

    #[test]
    fn ngram_windows() {
        let t = ["a", "b", "a"];
        let uni = ngram_counts(&t, 1);
        assert_eq!(uni[&["a"][..]], 2);
        assert_eq!(uni[&["b"][..]], 1);
        let bi = ngram_counts(&t, 2);
        assert_eq!(bi.len(), 2);
        assert_eq!(bi[&["a", "b"][..]], 1);
        assert_eq!(bi[&["b", "a"][..]], 1);
        assert!(ngram_counts(&t, 4).is_empty());
    }

    #[test]
    fn identical_corpus_scores_100() {
        let x = [s("the cat sat on the mat"), s("a b c d e")];
        let r = bleu(&x, &x, 4).unwrap();
        assert!((r.bleu - 100.0).abs() < 1e-12);
        assert_eq!(r.brevity_penalty, 1.0);
        assert!(r.precisions.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn no_shared_unigram_scores_zero() {
        let r = bleu(&[s("x y z w")], &[s("a b c d")], 4).unwrap();
        assert_eq!(r.bleu, 0.0);
        assert_eq!(r.precisions[0], 0.0);
    }

    #[test]
    fn repeated_word_is_clipped() {
        let r = bleu(&[s("the the the the")], &[s("the cat")], 4).unwrap();
        assert_eq!(r.matches[0], 1);
        assert_eq!(r.totals[0], 4);
        assert_eq!(r.precisions[0], 0.25);
        assert_eq!(r.brevity_penalty, 1.0);
        assert_eq!(r.bleu, 0.0);
    }

    #[test]
    fn case_matters() {
        let lower = bleu(&[s("a b c d")], &[s("a b c d")], 4).unwrap();
        let upper = bleu(&[s("A b c d")], &[s("a b c d")], 4).unwrap();
        assert!(upper.matches[0] < lower.matches[0]);
    }

    #[test]
    fn short_segments_zero_high_orders() {
        let x = [s("a b")];
        let r = bleu(&x, &x, 4).unwrap();
        assert_eq!(r.totals[2], 0);
        assert_eq!(r.bleu, 0.0);
        assert!((bleu(&x, &x, 2).unwrap().bleu - 100.0).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(bleu(&[], &[], 4), Err(Error::Input(_))));
        assert!(matches!(bleu(&[s("a")], &[], 4), Err(Error::Input(_))));
        assert!(bleu(&[s("a")], &[s("a")], 0).is_err());
    }

    #[test]
    fn empty_hypotheses_have_zero_penalty() {
        let r = bleu(&[s("")], &[s("a b")], 4).unwrap();
        assert_eq!(r.brevity_penalty, 0.0);
        assert_eq!(r.bleu, 0.0);
    }

    #[test]
    fn report_lines() {
        let x = [s("a b c d")];
        let r = bleu(&x, &x, 4).unwrap();
        assert_eq!(
            r.to_string(),
            "BLEU = 100.00, p1/p2/p3/p4 = 100.0/100.0/100.0/100.0, BP = 1.000, hyp_len = 4, ref_len = 4"
        );
        assert!(r.to_key_values().starts_with("bleu=100.000000\np1=1.000000\n"));
    }
}
