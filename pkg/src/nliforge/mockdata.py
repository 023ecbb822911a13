"""Deterministic fallback generators for the mock backend.

These produce plausible-shaped completions (not plausible prose) so the
whole pipeline can run at desk scale with no model behind it. Each
generator is a pure function of (prompt, rng); the mock backend seeds the
RNG from (backend seed, request seed, prompt).
"""

from __future__ import annotations

import random
from typing import Callable, Mapping

from .corpus import LABEL_ORDER, Label, LengthCategory
from .parsing import field_cue

_WORDS = (
    "the a this that new old good small large quiet busy bright early late "
    "local famous simple curious narrow broad gentle rapid steady clear "
    "house river market street garden window letter road bridge engine "
    "record signal corner morning evening harbor valley meadow"
).split()

_NOVEL_DOMAINS = (
    "travel forums",
    "us travel forums",
    "cooking blogs",
    "podcast transcripts",
    "car forums",
    "local news",
    "diy tutorials",
    "job postings",
    "museum guides",
    "weather reports",
)

#: Mean words per generated premise, by length category.
MEAN_WORDS: Mapping[LengthCategory, int] = {
    LengthCategory.SHORT: 21,
    LengthCategory.PARAGRAPH: 60,
}

#: Label mix used by the default hypothesis generator.
DEFAULT_LABEL_WEIGHTS: Mapping[Label, float] = {
    Label.ENTAILMENT: 0.354,
    Label.CONTRADICTION: 0.311,
    Label.NEUTRAL: 0.335,
}


def _sentence(rng: random.Random, n_words: int) -> str:
    words = [rng.choice(_WORDS) for _ in range(max(1, n_words))]
    return " ".join(words).capitalize() + "."


def _tail_field(prompt: str, name: str) -> str | None:
    """Value of the last ``name: {value}`` field in the prompt, if any."""
    cue = field_cue(name)
    at = prompt.rfind(cue)
    if at < 0:
        return None
    close = prompt.find("}", at + len(cue))
    if close < 0:
        return None
    return prompt[at + len(cue) : close]


def premise_generator(
    mean_words: Mapping[LengthCategory, int] = MEAN_WORDS,
) -> Callable[[str, random.Random], str]:
    """Completions for premise prompts ending in ``text: {``.

    The word count is drawn around the mean for the length category named in
    the prompt; the completion closes its brace and starts a junk next field
    to exercise truncation.
    """

    def generate(prompt: str, rng: random.Random) -> str:
        raw_length = _tail_field(prompt, "length")
        try:
            length = LengthCategory.parse(raw_length) if raw_length else LengthCategory.SHORT
        except ValueError:
            length = LengthCategory.SHORT
        mean = mean_words[length]
        n_words = max(3, round(rng.gauss(mean, mean * 0.2)))
        return _sentence(rng, n_words) + "} domain: {"

    return generate


def discovery_generator(
    domains: tuple[str, ...] = _NOVEL_DOMAINS,
    seed_domains: tuple[str, ...] = (),
) -> Callable[[str, random.Random], str]:
    """Full (domain, length, text) completions for the discovery prompt.

    Draws from ``domains`` plus ``seed_domains`` so tallies see both novel
    and already-known names.
    """
    pool = tuple(domains) + tuple(seed_domains)

    def generate(prompt: str, rng: random.Random) -> str:
        domain = rng.choice(pool)
        length = rng.choice((LengthCategory.SHORT, LengthCategory.PARAGRAPH))
        text = _sentence(rng, max(3, round(rng.gauss(MEAN_WORDS[length], 5))))
        return f"domain: {{{domain}}}\nlength: {{{length.value}}}\ntext: {{{text}}}"

    return generate


def labeler_generator(
    label_weights: Mapping[Label, float] = DEFAULT_LABEL_WEIGHTS,
    malformed_rate: float = 0.0,
    unknown_label_rate: float = 0.0,
) -> Callable[[str, random.Random], str]:
    """Completions for labeler prompts ending in ``hypothesis: {``.

    A ``malformed_rate`` fraction of completions never closes the hypothesis
    brace; an ``unknown_label_rate`` fraction closes it but emits a label
    outside the three canonical ones. Both are decided by the (seeded) RNG,
    so a given (prompt, seed) pair always misbehaves the same way.
    """
    labels = [label for label in LABEL_ORDER]
    weights = [label_weights[label] for label in labels]

    def generate(prompt: str, rng: random.Random) -> str:
        roll = rng.random()
        hypothesis = _sentence(rng, rng.randint(6, 14))
        if roll < malformed_rate:
            return f"{hypothesis[:-1]}"  # never closes the brace
        if roll < malformed_rate + unknown_label_rate:
            return f"{hypothesis}}}\nlabel: {{maybe}}"
        label = rng.choices(labels, weights=weights, k=1)[0]
        return f"{hypothesis}}}\nlabel: {{{label.value}}}"

    return generate
