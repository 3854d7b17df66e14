//! Built-in synonym table used by the offline mock (200 headwords).

/// Groups of interchangeable words. Each word occurs in exactly one group.
const GROUPS: &[&[&str]] = &[
    &["happy", "glad", "joyful"],
    &["sad", "unhappy", "down"],
    &["angry", "mad", "furious"],
    &["big", "large", "huge"],
    &["small", "little", "tiny"],
    &["good", "nice", "fine"],
    &["bad", "awful", "terrible"],
    &["great", "excellent", "wonderful"],
    &["fast", "quick", "rapid"],
    &["say", "tell"],
    &["think", "believe"],
    &["want", "wish"],
    &["need", "require"],
    &["help", "assist"],
    &["look", "watch"],
    &["see", "notice"],
    &["talk", "speak"],
    &["smart", "clever", "bright"],
    &["stupid", "dumb", "silly"],
    &["funny", "hilarious"],
    &["scared", "afraid", "frightened"],
    &["nervous", "anxious", "tense"],
    &["proud", "pleased"],
    &["relieved", "reassured"],
    &["embarrassed", "ashamed", "mortified"],
    &["grief", "sorrow"],
    &["fear", "dread"],
    &["love", "adore"],
    &["hate", "despise"],
    &["friend", "buddy", "pal"],
    &["house", "home"],
    &["job", "work"],
    &["money", "cash"],
    &["people", "folks"],
    &["really", "truly"],
    &["very", "extremely"],
    &["maybe", "perhaps"],
    &["often", "frequently"],
    &["always", "constantly"],
    &["quickly", "swiftly"],
    &["easy", "simple"],
    &["hard", "difficult", "tough"],
    &["strange", "weird", "odd"],
    &["beautiful", "pretty", "lovely"],
    &["ugly", "hideous"],
    &["new", "fresh"],
    &["important", "crucial", "vital"],
    &["tired", "exhausted", "weary"],
    &["quiet", "silent"],
    &["problem", "issue", "trouble"],
    &["idea", "thought"],
    &["mistake", "error"],
    &["chance", "opportunity"],
    &["story", "tale"],
    &["answer", "reply", "response"],
    &["question", "query"],
    &["choose", "pick", "select"],
    &["try", "attempt"],
    &["show", "display"],
    &["understand", "grasp"],
    &["hope", "expect"],
    &["feel", "sense"],
    &["enjoy", "like"],
    &["cry", "weep", "sob"],
    &["laugh", "chuckle", "giggle"],
    &["shout", "yell", "scream"],
    &["destroy", "ruin", "wreck"],
    &["awesome", "amazing", "incredible"],
    &["upset", "distressed"],
    &["lonely", "alone", "isolated"],
    &["excited", "thrilled"],
    &["grateful", "thankful"],
    &["worried", "concerned"],
    &["annoyed", "irritated", "bothered"],
    &["confused", "puzzled", "baffled"],
    &["surprised", "astonished", "shocked"],
    &["calm", "relaxed"],
    &["shy", "timid"],
    &["honest", "sincere"],
    &["kind", "gentle"],
    &["gift", "present"],
    &["movie", "film"],
    &["boss", "manager"],
    &["sure", "certain"],
];

pub(crate) fn synonyms(word: &str) -> Option<impl Iterator<Item = &'static str> + '_> {
    GROUPS
        .iter()
        .find(|g| g.contains(&word))
        .map(move |g| g.iter().copied().filter(move |w| *w != word))
}

pub(crate) fn has_synonym(word: &str) -> bool {
    synonyms(word).is_some()
}

#[cfg(test)]
pub(crate) fn headword_count() -> usize {
    GROUPS.iter().map(|g| g.len()).sum()
}
