//! Byte-pair-encoding subword vocabularies.
//!
//! Words start out as character symbols, the last one flagged as
//! word-final. Learning repeatedly merges the most frequent adjacent pair
//! (ties go to the lexicographically smallest pair) until the vocabulary
//! reaches its target size or no pair occurs at least twice. Encoding
//! replays the merges in learned order inside each word.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io_util;
use crate::text::{Lang, Sentence, Token};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
pub const SPECIALS: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];
const NUM_SPECIALS: u32 = SPECIALS.len() as u32;

/// Text emitted by [`SubwordVocab::decode`] in place of an unknown symbol.
pub const UNK_PLACEHOLDER: &str = "<unk>";

/// Default vocabulary size for desk-scale corpora.
pub const DEFAULT_TARGET_SIZE: usize = 512;

const FILE_MAGIC: &str = "#pivotmt-vocab";
const FILE_VERSION: &str = "v1";

/// A subword unit. `end_of_word` marks the last unit of a word; the bare
/// marker (empty text, word-final) closes a word whose last character was
/// unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub text: String,
    pub end_of_word: bool,
}

impl Symbol {
    fn new(text: impl Into<String>, end_of_word: bool) -> Self {
        Symbol {
            text: text.into(),
            end_of_word,
        }
    }

    fn end_marker() -> Self {
        Symbol::new("", true)
    }

    fn merge(left: &Symbol, right: &Symbol) -> Symbol {
        Symbol::new(format!("{}{}", left.text, right.text), right.end_of_word)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)?;
        if self.end_of_word {
            f.write_str("</w>")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    /// One vocabulary per language.
    Separate,
    /// A single vocabulary learned from both languages pooled together.
    Shared,
}

impl FromStr for VocabMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separate" => Ok(VocabMode::Separate),
            "shared" => Ok(VocabMode::Shared),
            other => Err(Error::Config(format!("unknown vocabulary mode {other:?}"))),
        }
    }
}

impl fmt::Display for VocabMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VocabMode::Separate => "separate",
            VocabMode::Shared => "shared",
        })
    }
}

/// A sequence of vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IdSequence(pub Vec<u32>);

impl IdSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordVocab {
    mode: VocabMode,
    target_size: usize,
    merges: Vec<(Symbol, Symbol)>,
    /// Non-special symbols; symbol `i` has id `i + NUM_SPECIALS`.
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, u32>,
    ranks: HashMap<(Symbol, Symbol), usize>,
}

fn word_symbols(word: &str) -> Vec<Symbol> {
    let chars: Vec<char> = word.chars().collect();
    let last = chars.len().saturating_sub(1);
    chars
        .iter()
        .enumerate()
        .map(|(i, c)| Symbol::new(c.to_string(), i == last))
        .collect()
}

fn merge_in_place(word: &mut Vec<Symbol>, left: &Symbol, right: &Symbol) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i + 1 < word.len() {
        if &word[i] == left && &word[i + 1] == right {
            word[i] = Symbol::merge(left, right);
            word.remove(i + 1);
            changed = true;
        }
        i += 1;
    }
    changed
}

impl SubwordVocab {
    fn from_parts(
        mode: VocabMode,
        target_size: usize,
        merges: Vec<(Symbol, Symbol)>,
        symbols: Vec<Symbol>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i as u32 + NUM_SPECIALS).is_some() {
                return Err(Error::Learning(format!("duplicate symbol {s}")));
            }
        }
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(rank, pair)| (pair.clone(), rank))
            .collect();
        Ok(SubwordVocab {
            mode,
            target_size,
            merges,
            symbols,
            index,
            ranks,
        })
    }

    /// Learns vocabularies from one sentence stream per language.
    ///
    /// `Shared` pools every stream and returns a single vocabulary;
    /// `Separate` returns one vocabulary per stream, in order.
    pub fn learn(corpora: &[Vec<&Sentence>], target_size: usize, mode: VocabMode) -> Result<Vec<SubwordVocab>> {
        match mode {
            VocabMode::Shared => {
                let pooled: Vec<&Sentence> = corpora.iter().flatten().copied().collect();
                Ok(vec![Self::learn_one(&pooled, target_size, mode)?])
            }
            VocabMode::Separate => corpora
                .iter()
                .map(|stream| Self::learn_one(stream, target_size, mode))
                .collect(),
        }
    }

    /// Learns a single vocabulary from the given sentences.
    pub fn learn_one(sentences: &[&Sentence], target_size: usize, mode: VocabMode) -> Result<SubwordVocab> {
        let mut word_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for sentence in sentences {
            for token in &sentence.tokens {
                *word_counts.entry(token.as_str()).or_default() += 1;
            }
        }
        if word_counts.is_empty() {
            return Err(Error::Learning("no non-empty sentence to learn from".into()));
        }

        let alphabet: BTreeSet<char> = word_counts.keys().flat_map(|w| w.chars()).collect();
        let mut symbols: Vec<Symbol> = Vec::with_capacity(target_size);
        symbols.push(Symbol::end_marker());
        for &c in &alphabet {
            symbols.push(Symbol::new(c.to_string(), false));
            symbols.push(Symbol::new(c.to_string(), true));
        }
        let base = symbols.len() + SPECIALS.len();
        if target_size <= base {
            return Err(Error::Config(format!(
                "target size {target_size} must exceed the {base} base symbols (alphabet, marker and specials)"
            )));
        }

        let mut present: BTreeSet<Symbol> = symbols.iter().cloned().collect();
        let mut words: Vec<(Vec<Symbol>, usize)> = word_counts.iter().map(|(w, &n)| (word_symbols(w), n)).collect();
        let mut merges = Vec::new();

        while present.len() + SPECIALS.len() < target_size {
            let mut pair_counts: HashMap<(&Symbol, &Symbol), usize> = HashMap::new();
            for (syms, n) in &words {
                for w in syms.windows(2) {
                    *pair_counts.entry((&w[0], &w[1])).or_default() += n;
                }
            }
            let best = pair_counts
                .into_iter()
                .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)));
            let Some(((left, right), count)) = best else { break };
            if count < 2 {
                break;
            }
            let (left, right) = (left.clone(), right.clone());
            for (syms, _) in words.iter_mut() {
                merge_in_place(syms, &left, &right);
            }
            let merged = Symbol::merge(&left, &right);
            if present.insert(merged.clone()) {
                symbols.push(merged);
            }
            merges.push((left, right));
        }

        Self::from_parts(mode, target_size, merges, symbols)
    }

    pub fn mode(&self) -> VocabMode {
        self.mode
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn merges(&self) -> &[(Symbol, Symbol)] {
        &self.merges
    }

    /// Total number of ids, specials included.
    pub fn len(&self) -> usize {
        self.symbols.len() + SPECIALS.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id_of(&self, symbol: &Symbol) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    /// Display form of an id: the special's name or the symbol with a
    /// trailing `</w>` when word-final.
    pub fn token_text(&self, id: u32) -> Option<String> {
        if id < NUM_SPECIALS {
            return Some(SPECIALS[id as usize].to_owned());
        }
        self.symbols.get((id - NUM_SPECIALS) as usize).map(Symbol::to_string)
    }

    fn segment_word(&self, word: &str) -> Vec<Symbol> {
        let mut syms = word_symbols(word);
        loop {
            let best = syms
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())))
                .min()
                .copied();
            let Some(rank) = best else { break };
            let (left, right) = &self.merges[rank];
            merge_in_place(&mut syms, left, right);
        }
        syms
    }

    /// Maps a sentence to ids. Characters outside the learned alphabet
    /// become [`UNK`]; an unknown word-final character is followed by the
    /// bare end-of-word marker so word boundaries survive.
    pub fn encode(&self, sentence: &Sentence, frame: bool) -> IdSequence {
        let mut ids = Vec::new();
        if frame {
            ids.push(BOS);
        }
        let marker = self.index[&Symbol::end_marker()];
        for token in &sentence.tokens {
            for sym in self.segment_word(token.as_str()) {
                match self.index.get(&sym) {
                    Some(&id) => ids.push(id),
                    None => {
                        ids.push(UNK);
                        if sym.end_of_word {
                            ids.push(marker);
                        }
                    }
                }
            }
        }
        if frame {
            ids.push(EOS);
        }
        IdSequence(ids)
    }

    /// Inverse of [`encode`](Self::encode): drops PAD/BOS/EOS, glues
    /// symbols together and ends a word at every word-final symbol.
    pub fn decode(&self, ids: &[u32], lang: &Lang) -> Result<Sentence> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        for &id in ids {
            match id {
                PAD | BOS | EOS => {}
                UNK => current.push_str(UNK_PLACEHOLDER),
                _ => {
                    let sym = self.symbols.get((id - NUM_SPECIALS) as usize).ok_or_else(|| {
                        Error::Decoding(format!("id {id} out of range for vocabulary of {}", self.len()))
                    })?;
                    current.push_str(&sym.text);
                    if sym.end_of_word && !current.is_empty() {
                        tokens.push(Token::new(std::mem::take(&mut current))?);
                    }
                }
            }
        }
        if !current.is_empty() {
            tokens.push(Token::new(current)?);
        }
        Ok(Sentence::new(tokens, lang.clone()))
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{FILE_MAGIC}\t{FILE_VERSION}\tmode={}\ttarget_size={}\tspecials={}\n",
            self.mode,
            self.target_size,
            SPECIALS.join(",")
        );
        out.push_str(&format!("merges\t{}\n", self.merges.len()));
        for (l, r) in &self.merges {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                l.text, l.end_of_word as u8, r.text, r.end_of_word as u8
            ));
        }
        out.push_str(&format!("symbols\t{}\n", self.len()));
        for (i, name) in SPECIALS.iter().enumerate() {
            out.push_str(&format!("{i}\t{name}\tspecial\n"));
        }
        for (i, s) in self.symbols.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                i as u32 + NUM_SPECIALS,
                s.text,
                s.end_of_word as u8
            ));
        }
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let bad = |msg: String| Error::format(origin, msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty vocabulary file".into()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 5 || fields[0] != FILE_MAGIC || fields[1] != FILE_VERSION {
            return Err(bad(format!("unrecognised header {header:?}")));
        }
        let field = |i: usize, key: &str| {
            fields[i]
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| bad(format!("expected {key}= in header")))
        };
        let mode: VocabMode = field(2, "mode")?.parse()?;
        let target_size: usize = field(3, "target_size")?
            .parse()
            .map_err(|_| bad("invalid target_size".into()))?;
        if field(4, "specials")? != SPECIALS.join(",") {
            return Err(bad("unsupported special tokens".into()));
        }

        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(format!("invalid end-of-word flag {s:?}"))),
        };
        let mut section = |name: &str| -> Result<usize> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {name} section")))?;
            line.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix('\t'))
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| bad(format!("bad {name} section header {line:?}")))
        };
        let n_merges = section("merges")?;
        let mut merges = Vec::with_capacity(n_merges);
        for _ in 0..n_merges {
            let line = lines.next().ok_or_else(|| bad("truncated merge list".into()))?;
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(bad(format!("bad merge line {line:?}")));
            }
            merges.push((Symbol::new(f[0], flag(f[1])?), Symbol::new(f[2], flag(f[3])?)));
        }
        let line = lines.next().ok_or_else(|| bad("missing symbols section".into()))?;
        let n_symbols: usize = line
            .strip_prefix("symbols\t")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad(format!("bad symbols section header {line:?}")))?;
        let mut symbols = Vec::new();
        for id in 0..n_symbols {
            let line = lines.next().ok_or_else(|| bad("truncated symbol table".into()))?;
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 || f[0] != id.to_string() {
                return Err(bad(format!("bad symbol line {line:?}")));
            }
            if let Some(&special) = SPECIALS.get(id) {
                if f[1] != special || f[2] != "special" {
                    return Err(bad(format!("bad special line {line:?}")));
                }
            } else {
                symbols.push(Symbol::new(f[1], flag(f[2])?));
            }
        }
        if lines.next().is_some() {
            return Err(bad("trailing data after symbol table".into()));
        }
        let vocab = Self::from_parts(mode, target_size, merges, symbols).map_err(|e| bad(e.to_string()))?;
        for (l, r) in &vocab.merges {
            if vocab.id_of(&Symbol::merge(l, r)).is_none() {
                return Err(bad(format!(
                    "merge output {} missing from symbol table",
                    Symbol::merge(l, r)
                )));
            }
        }
        if vocab.id_of(&Symbol::end_marker()).is_none() {
            return Err(bad("end-of-word marker missing from symbol table".into()));
        }
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&io_util::read_to_string(path)?, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        io_util::write_atomic(path, self.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lang() -> Lang {
        Lang::new("xx").unwrap()
    }

    fn sents(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| Sentence::from_tokenized(l, lang())).collect()
    }

    fn learn(lines: &[&str], size: usize) -> SubwordVocab {
        let s = sents(lines);
        SubwordVocab::learn_one(&s.iter().collect::<Vec<_>>(), size, VocabMode::Shared).unwrap()
    }

    /// Most frequent adjacent pair by direct enumeration over every token
    /// occurrence, smallest pair winning ties.
    fn brute_force_first_pair(lines: &[&str]) -> (Symbol, Symbol) {
        let mut best: Option<((Symbol, Symbol), usize)> = None;
        let mut all_pairs = Vec::new();
        for line in lines {
            for word in line.split_whitespace() {
                let s = word_symbols(word);
                for i in 0..s.len().saturating_sub(1) {
                    all_pairs.push((s[i].clone(), s[i + 1].clone()));
                }
            }
        }
        for p in &all_pairs {
            let n = all_pairs.iter().filter(|q| *q == p).count();
            let better = match &best {
                None => true,
                Some((bp, bn)) => n > *bn || (n == *bn && p < bp),
            };
            if better {
                best = Some((p.clone(), n));
            }
        }
        best.unwrap().0
    }

    #[test]
    fn first_merge_is_most_frequent_pair() {
        let lines = vec!["aaab"; 10];
        let vocab = learn(&lines, 64);
        let expected = brute_force_first_pair(&lines);
        assert_eq!(expected, (Symbol::new("a", false), Symbol::new("a", false)));
        assert_eq!(vocab.merges()[0], expected);

        let mixed = ["low lower lowest", "newer wider", "new low"];
        assert_eq!(learn(&mixed, 64).merges()[0], brute_force_first_pair(&mixed));
    }

    #[test]
    fn single_character_corpus_has_no_merges() {
        let vocab = learn(&["a"], 16);
        assert!(vocab.merges().is_empty());
        let texts: Vec<String> = (0..vocab.len() as u32).map(|i| vocab.token_text(i).unwrap()).collect();
        assert_eq!(texts, ["<pad>", "<s>", "</s>", "<unk>", "</w>", "a", "a</w>"]);
    }

    #[test]
    fn shared_over_identical_sides_extends_separate() {
        let side = sents(&["the cat sat", "the cat ran", "a hat"]);
        let refs: Vec<&Sentence> = side.iter().collect();
        let shared = SubwordVocab::learn(&[refs.clone(), refs.clone()], 40, VocabMode::Shared).unwrap();
        let separate = SubwordVocab::learn(&[refs.clone(), refs], 40, VocabMode::Separate).unwrap();
        assert_eq!(shared.len(), 1);
        assert_eq!(separate.len(), 2);
        // pooling doubles every count: same order, but the frequency-2 stop
        // lets pairs seen once per side through
        assert!(shared[0].merges().starts_with(separate[0].merges()));
        assert!(shared[0].merges().len() > separate[0].merges().len());
        assert_eq!(separate[0].merges(), separate[1].merges());
    }

    #[test]
    fn learning_errors() {
        let empty = sents(&[""]);
        assert!(matches!(
            SubwordVocab::learn_one(&empty.iter().collect::<Vec<_>>(), 64, VocabMode::Shared),
            Err(Error::Learning(_))
        ));
        let s = sents(&["abc"]);
        // 4 specials + marker + 3 chars × 2 variants = 11
        assert!(matches!(
            SubwordVocab::learn_one(&s.iter().collect::<Vec<_>>(), 11, VocabMode::Shared),
            Err(Error::Config(_))
        ));
        assert!(SubwordVocab::learn_one(&s.iter().collect::<Vec<_>>(), 12, VocabMode::Shared).is_ok());
    }

    #[test]
    fn fully_merged_word_is_one_id() {
        // "abc" ×3 yields exactly the chain (a,b) (ab,c</w>) and nothing else
        let vocab = learn(&["abc abc abc"], 64);
        assert_eq!(
            vocab.merges(),
            [
                (Symbol::new("a", false), Symbol::new("b", false)),
                (Symbol::new("ab", false), Symbol::new("c", true)),
            ]
        );
        let ids = vocab.encode(&Sentence::from_tokenized("abc", lang()), false);
        assert_eq!(ids.len(), 1);
        assert_eq!(vocab.token_text(ids.0[0]).unwrap(), "abc</w>");
        // a word never seen whole is split by the same merges
        let ids = vocab.encode(&Sentence::from_tokenized("cab", lang()), false);
        let texts: Vec<String> = ids.0.iter().map(|&i| vocab.token_text(i).unwrap()).collect();
        assert_eq!(texts, ["c", "a", "b</w>"]);
    }

    #[test]
    fn framing_and_unknowns() {
        let vocab = learn(&["ab ba"], 32);
        let empty = Sentence::new(Vec::new(), lang());
        assert_eq!(vocab.encode(&empty, true).0, [BOS, EOS]);
        assert!(vocab.decode(&[BOS, EOS], &lang()).unwrap().tokens.is_empty());

        let s = Sentence::from_tokenized("aza zb", lang());
        let ids = vocab.encode(&s, false);
        assert_eq!(ids.0[1], UNK);
        let back = vocab.decode(&ids.0, &lang()).unwrap();
        assert_eq!(back.surfaces().collect::<Vec<_>>(), ["a<unk>a", "<unk>b"]);
        let s = Sentence::from_tokenized("az b", lang());
        let back = vocab.decode(&vocab.encode(&s, true).0, &lang()).unwrap();
        assert_eq!(back.surfaces().collect::<Vec<_>>(), ["a<unk>", "b"]);
    }

    #[test]
    fn out_of_range_id_is_an_error() {
        let vocab = learn(&["ab"], 32);
        assert!(matches!(
            vocab.decode(&[vocab.len() as u32], &lang()),
            Err(Error::Decoding(_))
        ));
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let vocab = learn(&["the cat sat on the mat", "la diversitat de crustacis"], 60);
        let text = vocab.render();
        let parsed = SubwordVocab::parse(&text, Path::new("v")).unwrap();
        assert_eq!(parsed, vocab);
        assert_eq!(parsed.render(), text);
        assert!(SubwordVocab::parse(&text.replace("mode=shared", "mode=odd"), Path::new("v")).is_err());
        assert!(SubwordVocab::parse(&format!("{text}extra\n"), Path::new("v")).is_err());
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-e]{1,6}( [a-e]{1,6}){0,5}", 1..20)
    }

    proptest! {
        #[test]
        fn round_trip_over_alphabet(corpus in corpus_strategy(), probe in "[a-e]{1,8}( [a-e]{1,8}){0,6}", size in 12usize..80) {
            let lines: Vec<&str> = corpus.iter().map(String::as_str).collect();
            let s = sents(&lines);
            let refs: Vec<&Sentence> = s.iter().collect();
            let alphabet: BTreeSet<char> = corpus.iter().flat_map(|l| l.chars()).filter(|c| !c.is_whitespace()).collect();
            let probe: String = probe.chars().filter(|c| c.is_whitespace() || alphabet.contains(c)).collect();
            let base = 4 + 1 + 2 * alphabet.len();
            prop_assume!(size > base);
            let vocab = SubwordVocab::learn_one(&refs, size, VocabMode::Shared).unwrap();
            prop_assert!(vocab.len() <= size);
            let sentence = Sentence::from_tokenized(&probe, lang());
            let ids = vocab.encode(&sentence, true);
            prop_assert!(ids.0.iter().all(|&i| (i as usize) < vocab.len()));
            prop_assert!(!ids.0.contains(&UNK));
            prop_assert_eq!(vocab.decode(&ids.0, &lang()).unwrap(), sentence);
        }

        #[test]
        fn encoding_shrinks_as_vocab_grows(corpus in corpus_strategy(), probe_idx in 0usize..20, extra in 1usize..40) {
            let lines: Vec<&str> = corpus.iter().map(String::as_str).collect();
            let s = sents(&lines);
            let refs: Vec<&Sentence> = s.iter().collect();
            let small = SubwordVocab::learn_one(&refs, 16, VocabMode::Shared).unwrap();
            let large = SubwordVocab::learn_one(&refs, 16 + extra, VocabMode::Shared).unwrap();
            prop_assert!(large.merges().starts_with(small.merges()));
            let probe = &s[probe_idx % s.len()];
            prop_assert!(large.encode(probe, false).len() <= small.encode(probe, false).len());
        }
    }
}
