//! Deterministic offline provider implementing all three provider traits.
//!
//! Every output is a pure function of the mock seed and the request:
//! - chat: recognizes the paraphrase, generation and translation prompts and
//!   answers with seeded synonym substitution, clause reordering and
//!   discourse markers drawn from the built-in synonym table;
//! - translation: a per-language token mapping (reversed word plus a
//!   language tag) whose inverse into English loses the mapping for a
//!   seeded 10% of tokens, which then come back as synonyms;
//! - embeddings: hashed bag-of-words vectors, order-insensitive by
//!   construction.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::languages::language_code;
use super::synonyms::{has_synonym, synonyms};
use super::{
    ChatProvider, ChatRequest, ChatResponse, EmbeddingProvider, EmbeddingResult, ProviderError,
    TranslationProvider, TranslationRequest, TRANSLATION_PROMPT,
};
use crate::augment::prompts;
use crate::quality::{is_punctuation, tokenize};
use crate::seed::rng_for;

pub const MOCK_MODEL: &str = "mock";
pub const DEFAULT_DIMENSION: usize = 64;
pub const DEFAULT_DROP_RATE: f64 = 0.1;

const MARKERS: &[&str] = &[
    "Honestly,", "Well,", "To be fair,", "I mean,", "Frankly,", "Truly,", "Seriously,", "Basically,",
];
const FILLERS: &[&str] = &["really", "just", "so", "quite", "totally", "kind of"];
const EMBEDDING_SALT: u64 = 0x5eed_e3b0_c442_98fc;

const GENERATION_TEMPLATES: &[&str] = &[
    "I feel so much {e} right now.",
    "Honestly, the {e} hit me out of nowhere today.",
    "Nothing prepares you for this kind of {e}.",
    "Can't shake this {e}, no matter what I do.",
    "That moment was pure {e} for me.",
    "My friends keep asking why I'm full of {e}.",
    "Some days {e} is all I can think about.",
    "Wow, talk about {e}!",
    "There is a special kind of {e} in moments like these.",
    "I did not expect to feel {e} at the party.",
    "Reading that comment filled me with {e}.",
    "You know that feeling of {e} when everyone is watching?",
    "It's weird how {e} sneaks up on you.",
    "Pure {e}, that's the only way to describe it.",
    "If you ever felt {e}, you know exactly what I mean.",
    "Still dealing with the {e} from last week.",
];

#[derive(Debug, Clone)]
pub struct MockProvider {
    seed: u64,
    dimension: usize,
    drop_rate: f64,
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            dimension: DEFAULT_DIMENSION,
            drop_rate: DEFAULT_DROP_RATE,
        }
    }

    pub fn with_dimension(mut self, dimension: usize) -> Self {
        self.dimension = dimension.max(2);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn respond(&self, req: &ChatRequest, choice: usize, earlier: &[String]) -> String {
        let seed_tag = req.seed.map(|s| s.to_string()).unwrap_or_default();
        let choice_tag = choice.to_string();
        let mut rng = rng_for(
            self.seed,
            &["chat", &seed_tag, &req.model, &req.system_message, &req.user_prompt, &choice_tag],
        );
        let prompt = req.user_prompt.as_str();
        let (first, rest) = prompt.split_once('\n').unwrap_or((prompt, ""));

        if let Some((src, dst)) = parse_translation_header(first) {
            return self.translate_text(rest, src, dst);
        }
        if first == prompts::PARAPHRASE_SINGLE {
            return paraphrase_distinct(rest, &mut rng, earlier);
        }
        if let Some(n) = parse_batch_header(first) {
            let mut lines: Vec<String> = Vec::with_capacity(n);
            for _ in 0..n {
                let avoid: Vec<String> = earlier.iter().chain(&lines).cloned().collect();
                lines.push(paraphrase_distinct(rest, &mut rng, &avoid));
            }
            return lines.join("\n");
        }
        if let Some((n, emotion)) = parse_generation_header(first) {
            let examples: Vec<String> = rest
                .strip_prefix(prompts::EXAMPLES_HEADER)
                .map(|ex| ex.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
                .unwrap_or_default();
            return generate_lines(n, &emotion, &examples, &mut rng).join("\n");
        }
        let target = prompt.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or(prompt);
        paraphrase_distinct(target.trim(), &mut rng, earlier)
    }

    /// Mock translation of `text` from `src` to `dst`.
    pub fn translate_text(&self, text: &str, src: &str, dst: &str) -> String {
        let words: Vec<String> = text.split_whitespace().map(String::from).collect();
        let english: Vec<String> = if src == "en" {
            words
        } else {
            words.iter().map(|w| map_word(w, |core| decode_core(core, src))).collect()
        };
        if dst != "en" {
            return english
                .iter()
                .map(|w| map_word(w, |core| Some(encode_core(core, dst))))
                .collect::<Vec<_>>()
                .join(" ");
        }
        if src == "en" {
            return english.join(" ");
        }
        let mut rng = rng_for(self.seed, &["translate", src, dst, text]);
        let mut out = english.clone();
        for w in out.iter_mut() {
            if rng.gen_bool(self.drop_rate) {
                if let Some(s) = substitute(w, &mut rng) {
                    *w = s;
                }
            }
        }
        ensure_partial_change(&english, &mut out, &mut rng);
        out.join(" ")
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut rng = rng_for(EMBEDDING_SALT, &["token", token]);
        (0..self.dimension).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn embed_one(&self, text: &str, with_tokens: bool) -> EmbeddingResult {
        let mut tokens = tokenize(text);
        if tokens.is_empty() {
            tokens.push(text.trim().to_lowercase());
        }
        let token_vectors: Vec<(String, Vec<f64>)> =
            tokens.iter().map(|t| (t.clone(), self.token_vector(t))).collect();
        // Sum in sorted token order so the sentence vector ignores word order.
        let mut order: Vec<usize> = (0..tokens.len()).collect();
        order.sort_by(|&a, &b| tokens[a].cmp(&tokens[b]));
        let mut sentence = vec![0.0; self.dimension];
        for i in order {
            for (s, v) in sentence.iter_mut().zip(&token_vectors[i].1) {
                *s += v;
            }
        }
        let n = tokens.len() as f64;
        sentence.iter_mut().for_each(|s| *s /= n);
        EmbeddingResult {
            sentence_vector: sentence,
            token_vectors: with_tokens.then_some(token_vectors),
        }
    }
}

impl ChatProvider for MockProvider {
    fn chat_complete(&self, request: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        request.validate()?;
        let mut choices: Vec<String> = Vec::with_capacity(request.n_choices);
        for i in 0..request.n_choices {
            let reply = self.respond(request, i, &choices);
            choices.push(reply);
        }
        Ok(ChatResponse {
            choices,
            model: request.model.clone(),
        })
    }

    fn endpoint(&self) -> String {
        format!("mock:seed={}", self.seed)
    }
}

impl TranslationProvider for MockProvider {
    fn translate(&self, request: &TranslationRequest) -> Result<String, ProviderError> {
        request.validate()?;
        Ok(self.translate_text(&request.text, &request.source_lang, &request.target_lang))
    }

    fn endpoint(&self) -> String {
        format!("mock:seed={}", self.seed)
    }
}

impl EmbeddingProvider for MockProvider {
    fn embed(&self, texts: &[String], with_tokens: bool) -> Result<Vec<EmbeddingResult>, ProviderError> {
        if texts.is_empty() {
            return Err(ProviderError::Precondition("no texts to embed".into()));
        }
        Ok(texts.iter().map(|t| self.embed_one(t, with_tokens)).collect())
    }

    fn endpoint(&self) -> String {
        format!("mock:seed={}", self.seed)
    }
}

fn parse_translation_header(line: &str) -> Option<(&'static str, &'static str)> {
    let prefix = TRANSLATION_PROMPT.split("{src}").next()?;
    let rest = line.strip_prefix(prefix)?;
    let (src, rest) = rest.split_once(" to ")?;
    let dst = rest.split_once('.')?.0;
    Some((language_code(src)?, language_code(dst)?))
}

fn parse_batch_header(line: &str) -> Option<usize> {
    let template = prompts::PARAPHRASE_BATCH;
    let (pre, post) = template.split_once("{n}")?;
    line.strip_prefix(pre)?.strip_suffix(post)?.parse().ok()
}

fn parse_generation_header(line: &str) -> Option<(usize, String)> {
    let rest = line.strip_prefix("Generate ")?;
    let (n, rest) = rest.split_once(' ')?;
    let n: usize = n.parse().ok()?;
    let tail = prompts::GENERATION.strip_prefix("Generate N ")?;
    let emotion = rest.strip_prefix(tail)?.trim();
    Some((n, emotion.to_string()))
}

/// Splits a whitespace token into leading punctuation, core and trailing
/// punctuation.
fn split_affixes(word: &str) -> (&str, &str, &str) {
    let start = word.find(|c| !is_punctuation(c)).unwrap_or(word.len());
    let end = word.rfind(|c| !is_punctuation(c)).map_or(start, |i| i + word[i..].chars().next().map_or(1, char::len_utf8));
    let end = end.max(start);
    (&word[..start], &word[start..end], &word[end..])
}

fn map_word(word: &str, f: impl Fn(&str) -> Option<String>) -> String {
    let (lead, core, trail) = split_affixes(word);
    if core.is_empty() {
        return word.to_string();
    }
    match f(core) {
        Some(mapped) => format!("{lead}{mapped}{trail}"),
        None => word.to_string(),
    }
}

fn encode_core(core: &str, lang: &str) -> String {
    format!("{}_{lang}", core.chars().rev().collect::<String>())
}

fn decode_core(core: &str, lang: &str) -> Option<String> {
    core.strip_suffix(&format!("_{lang}")).map(|s| s.chars().rev().collect())
}

fn match_case(original: &str, replacement: &str) -> String {
    let mut chars = original.chars();
    match chars.next() {
        Some(c) if c.is_uppercase() => {
            if original.chars().count() > 1 && original.chars().all(|c| !c.is_lowercase()) {
                replacement.to_uppercase()
            } else {
                capitalize(replacement)
            }
        }
        _ => replacement.to_string(),
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn decapitalize(s: &str) -> String {
    let first_word = s.split_whitespace().next().unwrap_or("");
    let (_, core, _) = split_affixes(first_word);
    if core == "I" || core.starts_with("I'") || core.starts_with("I’") {
        return s.to_string();
    }
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Replaces the word's core with a random synonym, keeping case and
/// punctuation. `None` when the word has no synonym.
fn substitute(word: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let (lead, core, trail) = split_affixes(word);
    let lower = core.to_lowercase();
    let options: Vec<&str> = synonyms(&lower)?.collect();
    let pick = options.choose(rng)?;
    Some(format!("{lead}{}{trail}", match_case(core, pick)))
}

fn paraphrase_once(text: &str, rng: &mut ChaCha8Rng) -> String {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| {
            if rng.gen_bool(0.5) {
                substitute(w, rng).unwrap_or_else(|| w.to_string())
            } else {
                w.to_string()
            }
        })
        .collect();
    let mut s = words.join(" ");
    if let Some(pos) = s.find(", ") {
        if rng.gen_bool(0.5) {
            let first = &s[..pos];
            let second = &s[pos + 2..];
            let end_at = second.trim_end_matches(is_punctuation).len();
            let (body, end) = second.split_at(end_at);
            if !body.is_empty() {
                s = format!("{}, {}{}", capitalize(body), decapitalize(first), end);
            }
        }
    }
    if rng.gen_bool(0.3) {
        let m = MARKERS.choose(rng).expect("markers non-empty");
        s = format!("{m} {}", decapitalize(&s));
    }
    s
}

/// A paraphrase differing from `text` and from every string in `avoid`.
fn paraphrase_distinct(text: &str, rng: &mut ChaCha8Rng, avoid: &[String]) -> String {
    let text = text.trim();
    for _ in 0..8 {
        let cand = paraphrase_once(text, rng);
        if cand != text && !avoid.contains(&cand) {
            return cand;
        }
    }
    for m in MARKERS {
        let cand = format!("{m} {}", decapitalize(text));
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    format!("{text} (take {})", avoid.len() + 1)
}

fn generate_lines(n: usize, emotion: &str, examples: &[String], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut order: Vec<usize> = (0..GENERATION_TEMPLATES.len()).collect();
    order.shuffle(rng);
    let mut lines: Vec<String> = Vec::with_capacity(n);
    for i in 0..n {
        let base = if !examples.is_empty() && rng.gen_bool(0.5) {
            examples.choose(rng).expect("examples non-empty").clone()
        } else {
            GENERATION_TEMPLATES[order[i % order.len()]].replace("{e}", emotion)
        };
        let line = if rng.gen_bool(0.5) || lines.contains(&base) {
            paraphrase_distinct(&base, rng, &lines)
        } else {
            base
        };
        lines.push(line);
    }
    lines
}

fn token_set(words: &[String]) -> BTreeSet<String> {
    tokenize(&words.join(" ")).into_iter().collect()
}

/// Makes `out` differ from `orig` in its token set while keeping at least
/// one shared token.
fn ensure_partial_change(orig: &[String], out: &mut [String], rng: &mut ChaCha8Rng) {
    let orig_set = token_set(orig);
    if orig_set.is_empty() {
        return;
    }
    if token_set(out) == orig_set {
        let mut idx: Vec<usize> = (0..out.len()).collect();
        idx.shuffle(rng);
        if let Some(&i) = idx.iter().find(|&&i| {
            let (_, core, _) = split_affixes(&out[i]);
            has_synonym(&core.to_lowercase())
        }) {
            if let Some(s) = substitute(&orig[i], rng) {
                out[i] = s;
            }
        }
    }
    if token_set(out) == orig_set {
        if let Some(filler) = FILLERS.iter().find(|f| !orig_set.contains(**f)) {
            let last = out.len() - 1;
            out[last] = format!("{filler} {}", out[last]);
        }
    }
    if orig_set.len() >= 2 {
        let mut i = 0;
        while i < out.len() && token_set(out).is_disjoint(&orig_set) {
            out[i] = orig[i].clone();
            i += 1;
        }
    }
}
