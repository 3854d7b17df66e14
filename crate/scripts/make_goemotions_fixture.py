"""Writes the small GoEmotions-format fixture used by the CLI tests."""

import random
import sys
from pathlib import Path

LABELS = [
    "admiration", "amusement", "anger", "annoyance", "approval", "caring",
    "confusion", "curiosity", "desire", "disappointment", "disapproval",
    "disgust", "embarrassment", "excitement", "fear", "gratitude", "grief",
    "joy", "love", "nervousness", "optimism", "pride", "realization",
    "relief", "remorse", "sadness", "surprise", "neutral",
]
RARE = {"grief": 7, "pride": 10, "relief": 14, "nervousness": 15, "embarrassment": 29}
ROWS = 500

PHRASES = {
    "admiration": ["that is an impressive piece of work", "you handled that brilliantly"],
    "amusement": ["lol this made my day", "I laughed way too hard at this"],
    "anger": ["this makes me furious", "I am so angry about this"],
    "annoyance": ["ugh this is so annoying", "stop doing that already"],
    "approval": ["yes I agree with this", "this is a good call"],
    "caring": ["hope you are doing okay", "take care of yourself"],
    "confusion": ["wait what does that mean", "I do not get it at all"],
    "curiosity": ["how did you do that", "I wonder what happens next"],
    "desire": ["I really want one of those", "wish I could go there"],
    "disappointment": ["that was a letdown", "expected so much more"],
    "disapproval": ["that is not okay", "I do not support this"],
    "disgust": ["that is gross", "this is revolting"],
    "embarrassment": ["I wanted the floor to swallow me", "so awkward I turned red"],
    "excitement": ["cannot wait for this", "this is so exciting"],
    "fear": ["this is terrifying", "I am scared of what comes next"],
    "gratitude": ["thank you so much", "really appreciate the help"],
    "grief": ["still mourning my grandfather", "the funeral was yesterday"],
    "joy": ["this makes me so happy", "what a wonderful day"],
    "love": ["I love this so much", "my heart is full for you"],
    "nervousness": ["my hands are shaking before the interview", "so anxious about tomorrow"],
    "optimism": ["things will get better", "I have a good feeling about this"],
    "pride": ["so proud of my sister", "I finally did it myself"],
    "realization": ["oh now I see it", "just realized what happened"],
    "relief": ["phew that was close", "so relieved it is over"],
    "remorse": ["I am sorry for what I said", "I regret doing that"],
    "sadness": ["this makes me sad", "feeling down today"],
    "surprise": ["wow did not see that coming", "no way that happened"],
    "neutral": ["posted this yesterday", "the game starts at eight"],
}


def main(out: Path) -> None:
    rng = random.Random(20240517)
    counts = {}
    for label in LABELS:
        counts[label] = RARE.get(label, 60 if label == "neutral" else rng.randint(30, 42))
    slots = [label for label in LABELS for _ in range(counts[label])]
    rng.shuffle(slots)
    rows = [set() for _ in range(ROWS)]
    # One label per row first, then the rest spread without repeats.
    for i in range(ROWS):
        rows[i].add(slots[i])
    for label in slots[ROWS:]:
        while True:
            row = rows[rng.randrange(ROWS)]
            if label not in row and len(row) < 3:
                row.add(label)
                break
    index = {label: i for i, label in enumerate(LABELS)}
    lines = []
    for i, labels in enumerate(rows):
        ordered = sorted(labels, key=index.get)
        text = ", ".join(rng.choice(PHRASES[l]) for l in ordered)
        text = text[0].upper() + text[1:] + rng.choice([".", "!", "", "..."])
        ids = ",".join(str(index[l]) for l in ordered)
        lines.append(f"{text}\t{ids}\tef{i:05x}\n")
    out.mkdir(parents=True, exist_ok=True)
    (out / "train.tsv").write_text("".join(lines), encoding="utf-8")
    (out / "emotions.txt").write_text("\n".join(LABELS) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
