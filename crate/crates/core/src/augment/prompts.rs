//! Prompt templates sent to chat providers.

/// Single-paraphrase prompt; the source sentence follows on the next line.
pub const PARAPHRASE_SINGLE: &str = "Paraphrase the following sentence. Output only the paraphrase.";

/// Batch paraphrase prompt; `{n}` is the number of paraphrases requested.
pub const PARAPHRASE_BATCH: &str =
    "Provide {n} distinct paraphrases of the following sentence, one per line, no numbering.";

/// Zero/few-shot generation prompt. `N` is replaced by the number of
/// sentences and the emotion is appended after the colon.
pub const GENERATION: &str =
    "Generate N different sentences in various forms that express a strong emotional sentiment for the following emotion:";

pub const GENERATION_SYSTEM: &str = "You are a helpful assistant. Output sentences separated by newline in reply to <prompt>. Sentences should vary in type, slang, length, structure, tone and style, sentences such as comments, responses, opinions, and facts. It’s not necessary to often use the emotion’s name in every sentence. Do not number output or use bullet point for the output.";

pub const EXAMPLES_HEADER: &str = "Examples:";

pub fn paraphrase_single(text: &str) -> String {
    format!("{PARAPHRASE_SINGLE}\n{text}")
}

pub fn paraphrase_batch(n: usize, text: &str) -> String {
    format!("{}\n{text}", PARAPHRASE_BATCH.replace("{n}", &n.to_string()))
}

pub fn generation(n: usize, emotion: &str, examples: &[String]) -> String {
    let mut prompt = format!(
        "{} {emotion}",
        GENERATION.replacen("Generate N ", &format!("Generate {n} "), 1)
    );
    if !examples.is_empty() {
        prompt.push('\n');
        prompt.push_str(EXAMPLES_HEADER);
        prompt.push('\n');
        prompt.push_str(&examples.join("\n"));
    }
    prompt
}

/// Splits a model reply into candidate sentences: one per line, list
/// markers (`-`, `*`, `•`, `3.`, `3)`) stripped, lines under two
/// characters dropped.
pub fn parse_lines(reply: &str) -> Vec<String> {
    reply
        .lines()
        .map(|l| strip_marker(l.trim()).trim().to_string())
        .filter(|l| l.chars().count() >= 2)
        .collect()
}

fn strip_marker(line: &str) -> &str {
    if let Some(rest) = line.strip_prefix(['-', '*', '•']) {
        return rest;
    }
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(r) = rest.strip_prefix(['.', ')']) {
            return r;
        }
    }
    line
}
