"""Socratic gate and reference provocation generator.

The gate makes "questions only, no declarative answers" checkable with
four lexical/structural rules. Declarative sentences may restate the
learner's own words but may not introduce new facts; a small fixed
reporting lexicon ("you described ...", "you previously observed ...")
carries the restating frame itself. Generation is template-based and
deterministic; any external generator must pass the same gate.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .embedding import STOPWORDS, tokenize
from .model import DataCard

# Meta-discourse words allowed in declarative sentences: they frame a
# restatement of the learner and assert nothing about the world.
REPORTING_WORDS = frozenset(
    ["described", "observed", "previously", "noted", "said", "mentioned", "earlier"]
)

# Fraction of sentences that must be interrogative (rule R2).
QUESTION_RATIO = 0.5

SINGLE_TEMPLATE = (
    "You described {phrase}. What evidence from what you can observe supports "
    "that interpretation — and what would count against it?"
)
LINKED_TEMPLATE = (
    "You previously observed {prior_phrase}. How does {current_phrase} achieve "
    "a similar effect?"
)

RULE_CODES = ("R1", "R2", "R3", "R4")


class GateError(RuntimeError):
    """Raised when generation cannot produce gate-passing text."""


@dataclass
class RuleResult:
    code: str
    passed: bool
    detail: str


@dataclass
class GateVerdict:
    passed: bool
    rule_results: list[RuleResult] = field(default_factory=list)

    def failed_codes(self) -> list[str]:
        return [r.code for r in self.rule_results if not r.passed]


@dataclass
class Provocation:
    text: str
    trigger_card: str
    linked_card: str | None
    gate: GateVerdict


def split_sentences(text: str) -> list[tuple[str, str]]:
    """Split on . ! ? into (body, terminator) pairs, dropping empty bodies.

    A trailing fragment without a terminator is kept with terminator ''.
    """
    out = []
    buf: list[str] = []
    for ch in text:
        if ch in ".!?":
            body = "".join(buf).strip()
            if body:
                out.append((body, ch))
            buf.clear()
        else:
            buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        out.append((tail, ""))
    return out


def gate(text: str, session_vocab: set[str]) -> GateVerdict:
    """Check text against the four provocation rules.

    R1: the final sentence is a question. R2: at least half of all
    sentences are questions. R3: at least one content token echoes the
    learner's vocabulary. R4: declarative sentences contain only learner
    vocabulary, stopwords, and the reporting lexicon.
    """
    sentences = split_sentences(text)
    results = []

    if not sentences:
        for code, what in zip(RULE_CODES, ("no sentences", "no sentences",
                                           "no tokens", "no sentences")):
            results.append(RuleResult(code, False, what))
        return GateVerdict(passed=False, rule_results=results)

    r1 = sentences[-1][1] == "?"
    results.append(
        RuleResult("R1", r1, "final sentence is a question" if r1
                   else f"final sentence ends with {sentences[-1][1] or 'no terminator'!r}")
    )

    n_questions = sum(1 for _, term in sentences if term == "?")
    r2 = n_questions >= QUESTION_RATIO * len(sentences)
    results.append(
        RuleResult("R2", r2, f"{n_questions}/{len(sentences)} sentences are questions")
    )

    echoed = [t for t in tokenize(text) if t in session_vocab]
    r3 = bool(echoed)
    results.append(
        RuleResult("R3", r3, f"echoes learner terms {sorted(set(echoed))}" if r3
                   else "no content token from the learner's vocabulary")
    )

    allowed = session_vocab | REPORTING_WORDS
    foreign: list[str] = []
    for body, term in sentences:
        if term == "?":
            continue
        for tok in tokenize(body):
            if tok not in allowed:
                foreign.append(tok)
    r4 = not foreign
    results.append(
        RuleResult("R4", r4, "declarative sentences restate the learner" if r4
                   else f"declarative sentence introduces {sorted(set(foreign))}")
    )

    return GateVerdict(passed=all(r.passed for r in results), rule_results=results)


def top_content_tokens(text: str, n: int = 2) -> list[str]:
    """The n highest term-frequency content tokens; ties by first occurrence."""
    tokens = tokenize(text)
    counts = Counter(tokens)
    first_seen: dict[str, int] = {}
    for i, tok in enumerate(tokens):
        first_seen.setdefault(tok, i)
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return ranked[:n]


def _phrase(tokens: list[str]) -> str:
    quoted = [f"'{t}'" for t in tokens]
    return " and ".join(quoted)


def session_vocab(cards: list[DataCard]) -> set[str]:
    """Token set of the learner's own voice notes (captures and responses)."""
    vocab: set[str] = set()
    for card in cards:
        if card.kind in ("capture", "response"):
            vocab.update(tokenize(card.voice_text))
    return vocab


def generate_single(card: DataCard) -> Provocation:
    """Deterministic provocation echoing the card's two strongest terms."""
    if card.kind != "capture":
        raise ValueError(f"provocations trigger on capture cards, got {card.kind!r}")
    tokens = top_content_tokens(card.voice_text)
    if not tokens:
        raise GateError(f"card {card.id} has no content vocabulary to echo")
    text = SINGLE_TEMPLATE.format(phrase=_phrase(tokens))
    verdict = gate(text, set(tokenize(card.voice_text)))
    if not verdict.passed:
        raise GateError(
            f"generated text failed the gate ({verdict.failed_codes()}); refusing to emit"
        )
    return Provocation(text=text, trigger_card=card.id, linked_card=None, gate=verdict)


def generate_linked(card: DataCard, prior: DataCard) -> Provocation:
    """Cross-capture provocation connecting a new card to an older one."""
    if card.id == prior.id:
        raise ValueError("cannot link a card to itself")
    if prior.when > card.when:
        raise ValueError("linked provocations run newer -> older")
    prior_tokens = top_content_tokens(prior.voice_text)
    current_tokens = top_content_tokens(card.voice_text)
    if not prior_tokens or not current_tokens:
        raise GateError("both cards need content vocabulary to build a linked provocation")
    text = LINKED_TEMPLATE.format(
        prior_phrase=_phrase(prior_tokens), current_phrase=_phrase(current_tokens)
    )
    vocab = set(tokenize(card.voice_text)) | set(tokenize(prior.voice_text))
    verdict = gate(text, vocab)
    if not verdict.passed:
        raise GateError(
            f"generated text failed the gate ({verdict.failed_codes()}); refusing to emit"
        )
    return Provocation(
        text=text, trigger_card=card.id, linked_card=prior.id, gate=verdict
    )
