//! Rule-based preprocessing: tokenization, Spanish contraction and enclitic
//! splitting, sentence-length filtering and corpus statistics.
//!
//! The splitting rules are a small explicit table rather than a full
//! morphological analyser:
//!
//! * contractions: `del` → `de el`, `al` → `a el`;
//! * enclitics: a trailing run of pronouns from [`ENCLITIC_PRONOUNS`] is
//!   detached when what remains ends in a gerund (`-ndo`) or an infinitive
//!   (`-ar`, `-er`, `-ir`) once written accents are removed, e.g.
//!   `preguntándose` → `preguntando se`.
//!
//! Splitting only ever fires on sentences tagged `es`, and only for the
//! rules switched on in the [`RuleSet`] given for that corpus side. Case is
//! never changed.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};
use crate::io_util;

/// Pronouns that may attach to the end of a Spanish verb form.
pub const ENCLITIC_PRONOUNS: [&str; 11] = ["se", "me", "te", "le", "les", "lo", "la", "los", "las", "nos", "os"];

/// A language tag such as `en`, `es` or `ca`. Any non-empty tag without
/// whitespace or `=` is accepted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lang(String);

impl Lang {
    pub fn new(tag: impl Into<String>) -> Result<Self> {
        let tag = tag.into();
        if tag.is_empty() || tag.chars().any(|c| c.is_whitespace() || c == '=') {
            return Err(Error::Config(format!("invalid language tag {tag:?}")));
        }
        Ok(Lang(tag))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_spanish(&self) -> bool {
        self.0 == "es"
    }
}

impl FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lang::new(s)
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A single non-empty token without whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::Input(format!("invalid token {surface:?}")));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub lang: Lang,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, lang: Lang) -> Self {
        Sentence { tokens, lang }
    }

    /// Builds a sentence from already tokenized, space separated text.
    pub fn from_tokenized(text: &str, lang: Lang) -> Self {
        let tokens = text.split_whitespace().map(|t| Token(t.to_owned())).collect();
        Sentence { tokens, lang }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(Token::as_str)
    }
}

/// Which splitting rules are active on one corpus side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RuleSet {
    pub contractions: bool,
    pub enclitics: bool,
}

impl RuleSet {
    pub const NONE: RuleSet = RuleSet {
        contractions: false,
        enclitics: false,
    };

    pub const SPLIT: RuleSet = RuleSet {
        contractions: true,
        enclitics: true,
    };
}

/// Rule sets for both sides of a parallel corpus, stored on disk as
/// `key=value` lines:
///
/// ```text
/// src.contractions=on
/// src.enclitics=on
/// tgt.contractions=off
/// tgt.enclitics=off
/// ```
///
/// Missing keys default to off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusRules {
    pub src: RuleSet,
    pub tgt: RuleSet,
}

impl CorpusRules {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let map = io_util::parse_key_values(text, origin)?;
        let mut rules = CorpusRules::default();
        for (key, value) in &map {
            let flag = io_util::parse_bool(value)
                .ok_or_else(|| Error::format(origin, format!("invalid flag {value:?} for {key:?}")))?;
            let slot = match key.as_str() {
                "src.contractions" => &mut rules.src.contractions,
                "src.enclitics" => &mut rules.src.enclitics,
                "tgt.contractions" => &mut rules.tgt.contractions,
                "tgt.enclitics" => &mut rules.tgt.enclitics,
                _ => return Err(Error::format(origin, format!("unknown rule key {key:?}"))),
            };
            *slot = flag;
        }
        Ok(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&io_util::read_to_string(path)?, path)
    }

    pub fn render(&self) -> String {
        let onoff = |b: bool| if b { "on" } else { "off" };
        format!(
            "src.contractions={}\nsrc.enclitics={}\ntgt.contractions={}\ntgt.enclitics={}\n",
            onoff(self.src.contractions),
            onoff(self.src.enclitics),
            onoff(self.tgt.contractions),
            onoff(self.tgt.enclitics),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        io_util::write_atomic(path, self.render().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub src_lang: Lang,
    pub tgt_lang: Lang,
    pairs: Vec<(Sentence, Sentence)>,
}

impl ParallelCorpus {
    pub fn new(src_lang: Lang, tgt_lang: Lang) -> Self {
        ParallelCorpus {
            src_lang,
            tgt_lang,
            pairs: Vec::new(),
        }
    }

    /// Appends an aligned pair; the language tags must match the corpus.
    pub fn push(&mut self, src: Sentence, tgt: Sentence) -> Result<()> {
        if src.lang != self.src_lang || tgt.lang != self.tgt_lang {
            return Err(Error::Input(format!(
                "pair tagged {}-{} does not belong in a {}-{} corpus",
                src.lang, tgt.lang, self.src_lang, self.tgt_lang
            )));
        }
        self.pairs.push((src, tgt));
        Ok(())
    }

    pub fn pairs(&self) -> &[(Sentence, Sentence)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(s, _)| s)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(_, t)| t)
    }

    /// Concatenates two corpora of the same language pair.
    pub fn concat(mut self, other: ParallelCorpus) -> Result<Self> {
        for (s, t) in other.pairs {
            self.push(s, t)?;
        }
        Ok(self)
    }

    /// Reads two line-aligned UTF-8 files, tokenizing each side with its
    /// own rule set.
    pub fn read(
        src_path: impl AsRef<Path>,
        tgt_path: impl AsRef<Path>,
        src_lang: Lang,
        tgt_lang: Lang,
        rules: CorpusRules,
    ) -> Result<Self> {
        let src_lines = io_util::read_lines(src_path.as_ref())?;
        let tgt_lines = io_util::read_lines(tgt_path.as_ref())?;
        if src_lines.len() != tgt_lines.len() {
            return Err(Error::Input(format!(
                "parallel files differ in length: {} has {} lines, {} has {}",
                src_path.as_ref().display(),
                src_lines.len(),
                tgt_path.as_ref().display(),
                tgt_lines.len()
            )));
        }
        let mut corpus = ParallelCorpus::new(src_lang.clone(), tgt_lang.clone());
        for (s, t) in src_lines.iter().zip(&tgt_lines) {
            corpus
                .pairs
                .push((tokenize(s, &src_lang, rules.src), tokenize(t, &tgt_lang, rules.tgt)));
        }
        Ok(corpus)
    }

    /// Writes both sides as space-joined tokens, one segment per line.
    pub fn write(&self, src_path: impl AsRef<Path>, tgt_path: impl AsRef<Path>) -> Result<()> {
        let src: Vec<String> = self.sources().map(detokenize).collect();
        let tgt: Vec<String> = self.targets().map(detokenize).collect();
        io_util::write_lines(src_path, &src)?;
        io_util::write_lines(tgt_path, &tgt)
    }
}

impl ParallelCorpus {
    /// Builds a corpus from pairs, taking the languages from the first one.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Sentence, Sentence)>) -> Result<Self> {
        let mut iter = pairs.into_iter().peekable();
        let Some((s, t)) = iter.peek() else {
            return Err(Error::Input("cannot infer languages of an empty corpus".into()));
        };
        let mut corpus = ParallelCorpus::new(s.lang.clone(), t.lang.clone());
        for (s, t) in iter {
            corpus.push(s, t)?;
        }
        Ok(corpus)
    }
}

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

fn is_word_internal(prev: Option<char>, c: char, next: Option<char>) -> bool {
    match (prev, next) {
        (Some(p), Some(n)) => match c {
            '-' | '\u{2010}' => p.is_alphanumeric() && n.is_alphanumeric(),
            '.' | ',' => p.is_ascii_digit() && n.is_ascii_digit(),
            _ => false,
        },
        _ => false,
    }
}

fn detach_punctuation(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        if is_punctuation(c) && !is_word_internal(prev, c, next) {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            out.push(c.to_string());
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
}

fn split_contraction(word: &str) -> Option<[String; 2]> {
    let (first, article) = match word {
        "del" => ("de", "el"),
        "Del" => ("De", "el"),
        "DEL" => ("DE", "EL"),
        "al" => ("a", "el"),
        "Al" => ("A", "el"),
        "AL" => ("A", "EL"),
        _ => return None,
    };
    Some([first.to_owned(), article.to_owned()])
}

fn strip_acute(c: char) -> char {
    match c {
        'á' => 'a',
        'é' => 'e',
        'í' => 'i',
        'ó' => 'o',
        'ú' => 'u',
        'Á' => 'A',
        'É' => 'E',
        'Í' => 'I',
        'Ó' => 'O',
        'Ú' => 'U',
        other => other,
    }
}

fn fold(c: char) -> char {
    strip_acute(c).to_lowercase().next().unwrap_or(c)
}

fn is_verb_stem(folded: &[char]) -> bool {
    let ends = |suffix: &str| {
        let s: Vec<char> = suffix.chars().collect();
        folded.len() > s.len() && folded.ends_with(&s)
    };
    ends("ndo") || ends("ar") || ends("er") || ends("ir")
}

/// Finds the decomposition `stem + pronouns` with the most pronouns whose
/// stem is a gerund or infinitive. Returns the stem length in chars and
/// the pronoun boundaries.
fn enclitic_split(chars: &[char], folded: &[char]) -> Option<(usize, Vec<usize>)> {
    fn search(folded: &[char], end: usize, acc: &mut Vec<usize>) -> Option<(usize, Vec<usize>)> {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for pronoun in ENCLITIC_PRONOUNS {
            let p: Vec<char> = pronoun.chars().collect();
            if end <= p.len() || !folded[..end].ends_with(&p) {
                continue;
            }
            let start = end - p.len();
            acc.push(start);
            let candidate = if is_verb_stem(&folded[..start]) {
                Some((start, acc.clone()))
            } else {
                None
            };
            let deeper = search(folded, start, acc);
            acc.pop();
            for found in [candidate, deeper].into_iter().flatten() {
                let better = match &best {
                    None => true,
                    Some((_, b)) => found.1.len() > b.len(),
                };
                if better {
                    best = Some(found);
                }
            }
        }
        best
    }
    debug_assert_eq!(chars.len(), folded.len());
    search(folded, folded.len(), &mut Vec::new())
}

fn split_enclitics(word: &str) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    if !chars.iter().all(|c| c.is_alphabetic()) {
        return None;
    }
    let folded: Vec<char> = chars.iter().map(|&c| fold(c)).collect();
    let (stem_len, mut bounds) = enclitic_split(&chars, &folded)?;
    bounds.reverse();
    let mut parts = Vec::with_capacity(bounds.len() + 1);
    parts.push(chars[..stem_len].iter().map(|&c| strip_acute(c)).collect());
    let mut ends: Vec<usize> = bounds.iter().skip(1).copied().collect();
    ends.push(chars.len());
    for (&start, &end) in bounds.iter().zip(&ends) {
        parts.push(chars[start..end].iter().collect());
    }
    Some(parts)
}

fn apply_rules(word: String, rules: RuleSet, out: &mut Vec<Token>) {
    if rules.contractions {
        if let Some(parts) = split_contraction(&word) {
            out.extend(parts.into_iter().map(Token));
            return;
        }
    }
    if rules.enclitics {
        if let Some(parts) = split_enclitics(&word) {
            out.extend(parts.into_iter().map(Token));
            return;
        }
    }
    out.push(Token(word));
}

/// Splits raw text into tokens: whitespace first, then every Unicode
/// punctuation mark becomes its own token (hyphens between letters and
/// decimal separators between digits stay inside the word). On `es` text
/// the active splitting rules are then applied to each word.
pub fn tokenize(raw: &str, lang: &Lang, rules: RuleSet) -> Sentence {
    let mut pieces = Vec::new();
    for chunk in raw.split_whitespace() {
        detach_punctuation(chunk, &mut pieces);
    }
    let rules = if lang.is_spanish() { rules } else { RuleSet::NONE };
    let mut tokens = Vec::with_capacity(pieces.len());
    for piece in pieces {
        apply_rules(piece, rules, &mut tokens);
    }
    Sentence::new(tokens, lang.clone())
}

/// Joins tokens with single spaces. Splits made by the rules are not
/// undone.
pub fn detokenize(sentence: &Sentence) -> String {
    let mut out = String::new();
    for (i, token) in sentence.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(token.as_str());
    }
    out
}

/// Keeps the pairs whose two sides both have a token count within
/// `[min_len, max_len]`, in their original order.
pub fn length_filter(corpus: &ParallelCorpus, min_len: usize, max_len: usize) -> Result<ParallelCorpus> {
    if min_len < 1 || max_len < min_len {
        return Err(Error::Config(format!("invalid length bounds [{min_len}, {max_len}]")));
    }
    let keep = |s: &Sentence| (min_len..=max_len).contains(&s.word_count());
    Ok(ParallelCorpus {
        src_lang: corpus.src_lang.clone(),
        tgt_lang: corpus.tgt_lang.clone(),
        pairs: corpus
            .pairs
            .iter()
            .filter(|(s, t)| keep(s) && keep(t))
            .cloned()
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub segments: usize,
    pub words_src: usize,
    pub words_tgt: usize,
    pub vocab_src: usize,
    pub vocab_tgt: usize,
}

pub fn corpus_stats(corpus: &ParallelCorpus) -> CorpusStats {
    let mut vocab_src = HashSet::new();
    let mut vocab_tgt = HashSet::new();
    let mut stats = CorpusStats {
        segments: corpus.len(),
        ..CorpusStats::default()
    };
    for (s, t) in corpus.pairs() {
        stats.words_src += s.word_count();
        stats.words_tgt += t.word_count();
        vocab_src.extend(s.surfaces());
        vocab_tgt.extend(t.surfaces());
    }
    stats.vocab_src = vocab_src.len();
    stats.vocab_tgt = vocab_tgt.len();
    stats
}

/// One block of a corpus-size table: a corpus name plus its statistics.
#[derive(Debug, Clone)]
pub struct StatsRow<'a> {
    pub corpus_name: &'a str,
    pub src_lang: &'a Lang,
    pub tgt_lang: &'a Lang,
    pub stats: CorpusStats,
}

/// Renders corpus statistics with the columns
/// `Language Pair | Corpus | Language | Segments | Words | Vocab`, two
/// lines per corpus (one per language); the segment count appears on the
/// first line of each block only.
pub fn render_stats_table(rows: &[StatsRow<'_>]) -> String {
    let header = ["Language Pair", "Corpus", "Language", "Segments", "Words", "Vocab"];
    let mut lines: Vec<[String; 6]> = vec![header.map(str::to_owned)];
    for row in rows {
        let pair = format!("{}-{}", row.src_lang, row.tgt_lang);
        lines.push([
            pair,
            row.corpus_name.to_owned(),
            row.src_lang.to_string(),
            row.stats.segments.to_string(),
            row.stats.words_src.to_string(),
            row.stats.vocab_src.to_string(),
        ]);
        lines.push([
            String::new(),
            String::new(),
            row.tgt_lang.to_string(),
            String::new(),
            row.stats.words_tgt.to_string(),
            row.stats.vocab_tgt.to_string(),
        ]);
    }
    let mut widths = [0usize; 6];
    for line in &lines {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                if i < 3 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}
