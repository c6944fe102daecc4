//! Text ingestion: vocabularies, tokenization, and vocabulary reduction.
//!
//! A corpus file is UTF-8 text, one sentence per line, tokens separated by
//! whitespace. Tokenization appends one end-of-sentence marker per line and
//! maps out-of-vocabulary tokens to the unknown marker; nothing is dropped,
//! so the token count of a sentence is stable under vocabulary changes.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::{Error, Result};

/// Dense token identifier; ids index directly into model count tables.
pub type TokenId = u32;

/// Id of the unknown-token marker. Always present, always 0.
pub const UNK_ID: TokenId = 0;
/// Id of the end-of-sentence marker. Always present, always 1.
pub const EOS_ID: TokenId = 1;
/// Number of reserved entries at the front of every vocabulary.
pub const RESERVED_TOKENS: usize = 2;

pub const UNK_TOKEN: &str = "<unk>";
pub const EOS_TOKEN: &str = "</s>";

/// Bijection between token strings and dense ids `0..size`.
///
/// Entries 0 and 1 are the reserved `<unk>` and `</s>` markers. Vocabularies
/// built by [`build_vocabulary`] order the remaining entries by descending
/// corpus frequency (ties broken by first appearance), which is what lets
/// [`reduce_vocabulary`] express "keep the most frequent k" as a plain id
/// prefix. Immutable once built; share freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    fn with_reserved() -> Self {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        vocab.push_unchecked(UNK_TOKEN.to_string());
        vocab.push_unchecked(EOS_TOKEN.to_string());
        vocab
    }

    fn push_unchecked(&mut self, token: String) -> TokenId {
        let id = self.tokens.len() as TokenId;
        self.index.insert(token.clone(), id);
        self.tokens.push(token);
        id
    }

    fn push(&mut self, token: String) -> Result<TokenId> {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::format(
                "vocabulary",
                format!("token {token:?} is empty or contains whitespace"),
            ));
        }
        if self.index.contains_key(&token) {
            return Err(Error::format(
                "vocabulary",
                format!("duplicate token {token:?}"),
            ));
        }
        Ok(self.push_unchecked(token))
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    /// Id for a token string, if present.
    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Id for a token string, falling back to the unknown id.
    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(UNK_ID)
    }

    /// Token string for an id. Panics if `id >= size`.
    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (i as TokenId, t.as_str()))
    }

    /// Writes the vocabulary file format: one token per line, line number = id.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for token in &self.tokens {
            writeln!(w, "{token}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(crate::fsio::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Assembles a vocabulary from an explicit token list (reserved entries
    /// first), validating uniqueness.
    pub(crate) fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED_TOKENS || tokens[0] != UNK_TOKEN || tokens[1] != EOS_TOKEN {
            return Err(Error::format(
                "vocabulary",
                "token list must start with the reserved tokens",
            ));
        }
        let mut vocab = Vocabulary::with_reserved();
        for token in tokens.into_iter().skip(RESERVED_TOKENS) {
            vocab.push(token)?;
        }
        Ok(vocab)
    }

    /// Reads the vocabulary file format, validating the reserved entries.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let token = line.trim_end_matches(['\r', '\n']);
            match lineno {
                0 if token != UNK_TOKEN => {
                    return Err(Error::format(
                        "vocabulary",
                        format!("line 0 must be {UNK_TOKEN}, got {token:?}"),
                    ))
                }
                1 if token != EOS_TOKEN => {
                    return Err(Error::format(
                        "vocabulary",
                        format!("line 1 must be {EOS_TOKEN}, got {token:?}"),
                    ))
                }
                _ => {}
            }
            if lineno < RESERVED_TOKENS {
                vocab.push_unchecked(token.to_string());
            } else {
                vocab.push(token.to_string())?;
            }
        }
        if vocab.size() < RESERVED_TOKENS {
            return Err(Error::format(
                "vocabulary",
                "file must contain at least the two reserved tokens",
            ));
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(crate::fsio::open(path)?))
    }
}

/// A corpus tokenized against a fixed vocabulary.
///
/// Every sentence is non-empty and ends with [`EOS_ID`]; `token_count` is the
/// sum of sentence lengths including those markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedCorpus {
    sentences: Vec<Vec<TokenId>>,
    vocab_size: usize,
    token_count: usize,
}

impl TokenizedCorpus {
    /// Assembles a corpus from raw id sequences, enforcing the invariants.
    /// Sentences must be non-empty, eos-terminated, and within `vocab_size`.
    pub fn from_sentences(sentences: Vec<Vec<TokenId>>, vocab_size: usize) -> Result<Self> {
        let mut token_count = 0usize;
        for sentence in &sentences {
            match sentence.last() {
                None => return Err(Error::EmptySentence),
                Some(&last) if last != EOS_ID => {
                    return Err(Error::format(
                        "corpus",
                        "every sentence must end with the end-of-sentence id",
                    ))
                }
                _ => {}
            }
            for &id in sentence {
                if (id as usize) >= vocab_size {
                    return Err(Error::TokenOutOfRange {
                        token: id,
                        vocab_size,
                    });
                }
            }
            token_count += sentence.len();
        }
        Ok(TokenizedCorpus {
            sentences,
            vocab_size,
            token_count,
        })
    }

    pub fn sentences(&self) -> &[Vec<TokenId>] {
        &self.sentences
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Total token count, end-of-sentence markers included.
    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Applies a total id remap (old id -> new id), e.g. the table produced
    /// by [`reduce_vocabulary`]. Sentence shapes and the token count are
    /// unchanged; only ids move.
    pub fn remap(&self, remap: &[TokenId], new_vocab_size: usize) -> Result<TokenizedCorpus> {
        if remap.len() != self.vocab_size {
            return Err(Error::parameter(
                "remap",
                format!(
                    "remap table covers {} ids but corpus vocabulary has {}",
                    remap.len(),
                    self.vocab_size
                ),
            ));
        }
        let sentences = self
            .sentences
            .iter()
            .map(|s| s.iter().map(|&id| remap[id as usize]).collect())
            .collect();
        TokenizedCorpus::from_sentences(sentences, new_vocab_size)
    }
}

/// Builds a vocabulary from corpus lines: reserved tokens plus every corpus
/// token with frequency >= `min_count`, most frequent first, truncated to
/// `max_size` total entries when given. Ties break by first appearance, so
/// identical inputs always produce byte-identical vocabularies.
pub fn build_vocabulary<I, S>(
    lines: I,
    min_count: usize,
    max_size: Option<usize>,
) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if min_count < 1 {
        return Err(Error::parameter("min_count", "must be at least 1"));
    }
    if let Some(m) = max_size {
        if m < RESERVED_TOKENS {
            return Err(Error::parameter(
                "max_size",
                format!("must be at least {RESERVED_TOKENS} (the reserved tokens)"),
            ));
        }
    }

    struct Entry {
        count: usize,
        first_seen: usize,
    }
    let mut counts: HashMap<String, Entry> = HashMap::new();
    let mut total_tokens = 0usize;
    let mut next_rank = 0usize;
    for line in lines {
        for token in line.as_ref().split_whitespace() {
            total_tokens += 1;
            if token == UNK_TOKEN || token == EOS_TOKEN {
                // Reserved names occurring in running text map to the
                // reserved ids at tokenization time; they never get a
                // second vocabulary slot.
                continue;
            }
            match counts.get_mut(token) {
                Some(e) => e.count += 1,
                None => {
                    counts.insert(
                        token.to_string(),
                        Entry {
                            count: 1,
                            first_seen: next_rank,
                        },
                    );
                    next_rank += 1;
                }
            }
        }
    }
    if total_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }

    let mut entries: Vec<(String, Entry)> = counts
        .into_iter()
        .filter(|(_, e)| e.count >= min_count)
        .collect();
    entries.sort_by(|(_, a), (_, b)| b.count.cmp(&a.count).then(a.first_seen.cmp(&b.first_seen)));
    if let Some(m) = max_size {
        entries.truncate(m - RESERVED_TOKENS);
    }

    let mut vocab = Vocabulary::with_reserved();
    for (token, _) in entries {
        vocab.push(token)?;
    }
    Ok(vocab)
}

/// Tokenizes corpus lines against a vocabulary. Out-of-vocabulary tokens map
/// to [`UNK_ID`], every line gains a trailing [`EOS_ID`], blank lines are
/// skipped.
pub fn tokenize<I, S>(lines: I, vocab: &Vocabulary) -> TokenizedCorpus
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut sentences = Vec::new();
    let mut token_count = 0usize;
    for line in lines {
        let mut ids: Vec<TokenId> = line
            .as_ref()
            .split_whitespace()
            .map(|t| vocab.id_or_unk(t))
            .collect();
        if ids.is_empty() {
            continue;
        }
        ids.push(EOS_ID);
        token_count += ids.len();
        sentences.push(ids);
    }
    TokenizedCorpus {
        sentences,
        vocab_size: vocab.size(),
        token_count,
    }
}

/// Inverse of [`tokenize`] for in-vocabulary text: renders each sentence as a
/// space-joined line, dropping the trailing end-of-sentence marker.
pub fn detokenize(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Vec<String> {
    corpus
        .sentences()
        .iter()
        .map(|s| {
            let words: Vec<&str> = s[..s.len() - 1].iter().map(|&id| vocab.token(id)).collect();
            words.join(" ")
        })
        .collect()
}

/// Shrinks a frequency-ordered vocabulary to its `keep_k` most frequent
/// entries (reserved tokens always kept) and returns the total remap table:
/// kept ids map to themselves, discarded ids map to [`UNK_ID`].
pub fn reduce_vocabulary(vocab: &Vocabulary, keep_k: usize) -> Result<(Vocabulary, Vec<TokenId>)> {
    if keep_k < RESERVED_TOKENS {
        return Err(Error::InvalidKeepSize(format!(
            "keep_k = {keep_k} is below the {RESERVED_TOKENS} reserved tokens"
        )));
    }
    if keep_k > vocab.size() {
        return Err(Error::InvalidKeepSize(format!(
            "keep_k = {} exceeds vocabulary size {}",
            keep_k,
            vocab.size()
        )));
    }
    let mut reduced = Vocabulary {
        tokens: Vec::new(),
        index: HashMap::new(),
    };
    for id in 0..keep_k {
        reduced.push_unchecked(vocab.token(id as TokenId).to_string());
    }
    let remap = (0..vocab.size())
        .map(|id| if id < keep_k { id as TokenId } else { UNK_ID })
        .collect();
    Ok((reduced, remap))
}

/// Fixed-universe token id set with O(1) membership, used when probability
/// mass over a whole group of tokens is needed at once.
#[derive(Debug, Clone)]
pub struct TokenSet {
    bits: Vec<bool>,
    len: usize,
}

impl TokenSet {
    pub fn new(universe: usize) -> Self {
        TokenSet {
            bits: vec![false; universe],
            len: 0,
        }
    }

    pub fn from_ids<I: IntoIterator<Item = TokenId>>(universe: usize, ids: I) -> Self {
        let mut set = TokenSet::new(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn insert(&mut self, id: TokenId) {
        let slot = &mut self.bits[id as usize];
        if !*slot {
            *slot = true;
            self.len += 1;
        }
    }

    pub fn contains(&self, id: TokenId) -> bool {
        self.bits.get(id as usize).copied().unwrap_or(false)
    }

    /// Number of member ids.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as TokenId)
    }
}
