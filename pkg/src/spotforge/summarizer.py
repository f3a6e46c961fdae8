"""Whole-ad summaries with a retried 50-word limit.

The limit is enforced by retrying, not post-editing: responses over 50
words trigger another attempt, and if the budget runs out the shortest
response is kept with ``over_limit`` set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .backends import TextBackend
from .records import AdRecord

if TYPE_CHECKING:
    from .describer import FrameDescription

logger = logging.getLogger(__name__)

SUMMARY_WORD_LIMIT = 50

SUMMARY_PROMPT_HEADER = (
    "Provide a 50 word summary of a political television ad for the academic "
    "community. Your summary should not exceed 50 words. For context, this ad "
    "was for the {context}. The transcript of the entire ad is:\n"
    "{transcript}\n"
    "The ad video depicts a set of scenes that can be described as follows:"
)

ADVOCACY_CONTEXT = "{year} presidential campaign of {party} candidate {candidate}"
ATTACK_CONTEXT = "{year} presidential election. This ad is anti-{candidate} and pro-{party}"


def word_count(text: str) -> int:
    """Whitespace tokenization: maximal nonwhitespace runs, so hyphenated
    compounds and punctuation-attached words count once."""
    return len(text.split())


def build_summary_prompt(
    rec: AdRecord, transcript: str, descriptions: Sequence["FrameDescription"]
) -> str:
    """Summary prompt: metadata context, transcript, then one description
    per line in timestamp order."""
    template = ATTACK_CONTEXT if rec.attack_ad else ADVOCACY_CONTEXT
    context = template.format(
        year=rec.election_year, party=rec.party.value, candidate=rec.candidate
    )
    header = SUMMARY_PROMPT_HEADER.format(context=context, transcript=transcript)
    lines = [d.text for d in descriptions]
    if not lines:
        return header
    return header + "\n" + "\n".join(lines)


@dataclass(frozen=True)
class SummaryResult:
    text: str
    word_count: int
    attempts: int
    over_limit: bool

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "word_count": self.word_count,
            "attempts": self.attempts,
            "over_limit": self.over_limit,
        }


def summarize(
    rec: AdRecord,
    transcript: str,
    descriptions: Sequence["FrameDescription"],
    backend: TextBackend,
    max_retries: int = 2,
) -> SummaryResult:
    """Query the backend until a summary fits in 50 words.

    Up to 1 + max_retries calls; if none fit, the shortest nonempty response
    is returned with over_limit=True.
    """
    if max_retries < 0:
        raise ValueError(f"max_retries must be nonnegative, got {max_retries}")
    prompt = build_summary_prompt(rec, transcript, descriptions)
    best: str | None = None
    attempts = 0
    for _ in range(1 + max_retries):
        attempts += 1
        response = backend.complete(prompt)
        count = word_count(response)
        if response.strip() and count <= SUMMARY_WORD_LIMIT:
            return SummaryResult(
                text=response, word_count=count, attempts=attempts, over_limit=False
            )
        if response.strip() and (best is None or count < word_count(best)):
            best = response
        if count > SUMMARY_WORD_LIMIT:
            logger.debug(
                "ad %s: attempt %d returned %d words, retrying", rec.id, attempts, count
            )
    text = best if best is not None else ""
    count = word_count(text)
    return SummaryResult(
        text=text,
        word_count=count,
        attempts=attempts,
        over_limit=count > SUMMARY_WORD_LIMIT,
    )


__all__ = [
    "ADVOCACY_CONTEXT",
    "ATTACK_CONTEXT",
    "SUMMARY_PROMPT_HEADER",
    "SUMMARY_WORD_LIMIT",
    "SummaryResult",
    "build_summary_prompt",
    "summarize",
    "word_count",
]
