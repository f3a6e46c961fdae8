"""Validation metrics: word alignment and WER, trim-error classification,
recovered fraction with the interval-squeeze transform, ICC(2,1), paired t,
and the Wilcoxon signed-rank test.

These reproduce the toolkit's quality-evaluation machinery; downstream
regression fitting is out of scope and consumes the emitted CSV tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats as sps

from .trimmer import TrimWindow

TRIM_ERROR_THRESHOLD_S = 3.0

# Outer-punctuation strip set for WER tokens; intra-word apostrophes and
# hyphens survive because only the ends are stripped.
_PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~“”‘’‛„‟—–…´"


class EmptyReference(Exception):
    """WER/recovered-fraction need a nonempty reference transcript."""


class NoValidPairs(Exception):
    """Every supplied transcript pair had an empty reference."""


class DegenerateVariance(Exception):
    """ICC is 0/0 when every rating is identical."""


class ZeroVariance(Exception):
    """Paired t-test is undefined when all differences are equal."""


class AllZeroDifferences(Exception):
    """Wilcoxon signed-rank needs at least one nonzero difference."""


def tokenize(text: str) -> list[str]:
    """Lowercased whitespace tokens with outer punctuation stripped.

    Tokens that are pure punctuation vanish; "part-time" and "don't" stay
    single tokens.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class AlignmentCounts:
    s: int  # substitutions
    d: int  # deletions (reference words the hypothesis missed)
    i: int  # insertions (superfluous hypothesis words)
    n: int  # reference word count

    def __post_init__(self):
        if min(self.s, self.d, self.i, self.n) < 0:
            raise ValueError("alignment counts must be nonnegative")
        if self.s + self.d > self.n:
            raise ValueError("s + d cannot exceed the reference length")

    @property
    def errors(self) -> int:
        return self.s + self.d + self.i


def align_tokens(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentCounts:
    """Minimal-cost word alignment with unit costs.

    Among cost-equal alignments, substitutions are preferred over
    delete+insert pairs, which pins down (s, d, i) deterministically:
    minimizing (total, d+i) lexicographically fixes s = total - (d+i) and,
    since d - i = len(ref) - len(hyp) + (i - i) is length-determined,
    the full triple.
    """
    nref, nhyp = len(ref), len(hyp)
    # Encode (total_ops, d+i) as total*K + (d+i) with K large enough that
    # comparing encodings compares the pairs lexicographically.
    K = nref + nhyp + 1
    sub_cost = K        # +1 op, +0 to d+i
    indel_cost = K + 1  # +1 op, +1 to d+i

    prev = [j * indel_cost for j in range(nhyp + 1)]
    for i in range(1, nref + 1):
        cur = [i * indel_cost] + [0] * nhyp
        ref_word = ref[i - 1]
        for j in range(1, nhyp + 1):
            if ref_word == hyp[j - 1]:
                best = prev[j - 1]
            else:
                best = prev[j - 1] + sub_cost
            down = prev[j] + indel_cost
            if down < best:
                best = down
            right = cur[j - 1] + indel_cost
            if right < best:
                best = right
            cur[j] = best
        prev = cur

    encoded = prev[nhyp]
    total, dpi = divmod(encoded, K)
    d = (dpi + nref - nhyp) // 2
    return AlignmentCounts(s=total - dpi, d=d, i=dpi - d, n=nref)


def align_words(ref: str, hyp: str) -> AlignmentCounts:
    return align_tokens(tokenize(ref), tokenize(hyp))


def wer(counts: AlignmentCounts) -> float:
    if counts.n == 0:
        raise EmptyReference("WER undefined for an empty reference")
    return counts.errors / counts.n


def mean_and_pooled_wer(pairs: Sequence[tuple[str, str]]) -> dict:
    """Per-transcript mean WER and the overall (concatenated) WER.

    Pairs with an empty reference are excluded from the mean and counted;
    the pooled value divides summed errors by summed reference lengths.
    """
    per_pair: list[float] = []
    total_errors = 0
    total_n = 0
    excluded = 0
    for ref, hyp in pairs:
        counts = align_words(ref, hyp)
        if counts.n == 0:
            excluded += 1
            continue
        per_pair.append(wer(counts))
        total_errors += counts.errors
        total_n += counts.n
    if not per_pair:
        raise NoValidPairs("no transcript pair has a nonempty reference")
    return {
        "mean_wer": sum(per_pair) / len(per_pair),
        "pooled_wer": total_errors / total_n,
        "n_pairs": len(per_pair),
        "n_excluded": excluded,
    }


def recovered_fraction(counts: AlignmentCounts) -> float:
    """Share of reference words neither substituted nor deleted."""
    if counts.n == 0:
        raise EmptyReference("recovered fraction undefined for an empty reference")
    return (counts.n - counts.s - counts.d) / counts.n


def squeeze(r: float, n_sample: int) -> float:
    """Map [0,1] responses into the open interval for logit-link modeling:
    (r*(N-1) + 0.5) / N."""
    if n_sample < 1:
        raise ValueError(f"sample size must be >= 1, got {n_sample}")
    if not 0 <= r <= 1:
        raise ValueError(f"response {r} outside [0, 1]")
    return (r * (n_sample - 1) + 0.5) / n_sample


@dataclass(frozen=True)
class TrimErrors:
    """Signed automated-minus-human trim errors with 3-second flags.

    Overtrim means ad content was lost (auto starts late or ends early);
    undertrim means extra non-ad footage survived.
    """

    start_err_s: float
    end_err_s: float
    overtrim_start: bool
    undertrim_start: bool
    overtrim_end: bool
    undertrim_end: bool
    abs_error_sum_s: float


def trim_errors(human: TrimWindow, auto: TrimWindow) -> TrimErrors:
    start_err = auto.s - human.s
    end_err = auto.s_prime - human.s_prime
    t = TRIM_ERROR_THRESHOLD_S
    return TrimErrors(
        start_err_s=start_err,
        end_err_s=end_err,
        overtrim_start=start_err > t,
        undertrim_start=start_err < -t,
        overtrim_end=end_err < -t,
        undertrim_end=end_err > t,
        abs_error_sum_s=abs(start_err) + abs(end_err),
    )


def icc_2_1(ratings: Sequence[Sequence[float]]) -> float:
    """ICC(2,1): two-way random effects, absolute agreement, single rater.

    ``ratings`` is an n_subjects x k_raters complete matrix.
    """
    matrix = np.asarray(ratings, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("ratings must be a 2-D matrix")
    n, k = matrix.shape
    if n < 2 or k < 2:
        raise ValueError(f"need >= 2 subjects and >= 2 raters, got {n}x{k}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("ratings must be finite (complete matrix required)")
    if np.ptp(matrix) == 0:
        raise DegenerateVariance("all ratings identical; ICC is 0/0")

    grand = matrix.mean()
    row_means = matrix.mean(axis=1)
    col_means = matrix.mean(axis=0)
    ss_rows = k * float(((row_means - grand) ** 2).sum())
    ss_cols = n * float(((col_means - grand) ** 2).sum())
    ss_total = float(((matrix - grand) ** 2).sum())
    ss_error = ss_total - ss_rows - ss_cols

    ms_r = ss_rows / (n - 1)
    ms_c = ss_cols / (k - 1)
    ms_e = ss_error / ((n - 1) * (k - 1))

    denom = ms_r + (k - 1) * ms_e + (k / n) * (ms_c - ms_e)
    if denom == 0:
        raise DegenerateVariance("ICC denominator is zero")
    return (ms_r - ms_e) / denom


class PairedTResult(NamedTuple):
    t: float
    df: int
    p_two_sided: float
    ci95_of_diff: tuple[float, float]


def paired_t(x: Sequence[float], y: Sequence[float]) -> PairedTResult:
    """Two-sided paired t-test on d = x - y with a 95% CI for the mean diff."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("x and y must be equal-length 1-D sequences")
    n = len(xa)
    if n < 2:
        raise ValueError(f"need >= 2 pairs, got {n}")
    d = xa - ya
    sd = float(d.std(ddof=1))
    if sd == 0:
        raise ZeroVariance("all paired differences are equal")
    mean = float(d.mean())
    se = sd / math.sqrt(n)
    t_stat = mean / se
    df = n - 1
    p = 2 * float(sps.t.sf(abs(t_stat), df))
    crit = float(sps.t.ppf(0.975, df))
    return PairedTResult(
        t=t_stat, df=df, p_two_sided=p, ci95_of_diff=(mean - crit * se, mean + crit * se)
    )


class WilcoxonResult(NamedTuple):
    v: float
    p_two_sided: float
    n_used: int
    method: str  # exact | normal


WILCOXON_EXACT_MAX_N = 25


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda idx: values[idx])
    ranks = [0.0] * len(values)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and values[order[end + 1]] == values[order[pos]]:
            end += 1
        mid = (pos + end) / 2.0 + 1.0
        for idx in order[pos : end + 1]:
            ranks[idx] = mid
        pos = end + 1
    return ranks


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> WilcoxonResult:
    """Paired Wilcoxon signed-rank test (two-sided).

    Zero differences are dropped; ties get mid-ranks.  V is the positive-rank
    sum.  p is exact (sign-flip distribution) up to n=25, then a normal
    approximation with continuity and tie corrections.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("x and y must be equal-length 1-D sequences")
    d = [float(v) for v in (xa - ya) if v != 0]
    if not d:
        raise AllZeroDifferences("every paired difference is zero")
    n = len(d)
    abs_d = [abs(v) for v in d]
    ranks = _midranks(abs_d)
    v_stat = sum(r for r, diff in zip(ranks, d) if diff > 0)

    if n <= WILCOXON_EXACT_MAX_N:
        p = _wilcoxon_exact_p(ranks, v_stat)
        return WilcoxonResult(v=v_stat, p_two_sided=p, n_used=n, method="exact")

    total = n * (n + 1) / 2.0  # sum of all ranks
    mu = total / 2.0  # null mean of the positive-rank sum: n(n+1)/4
    tie_term = 0.0
    for _, count in _tie_groups(abs_d):
        tie_term += count**3 - count
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    sigma = math.sqrt(sigma2)
    delta = v_stat - mu
    # Continuity correction shrinks |delta| by 0.5.
    z = (delta - math.copysign(0.5, delta)) / sigma if delta != 0 else 0.0
    p = min(1.0, 2 * float(sps.norm.sf(abs(z))))
    return WilcoxonResult(v=v_stat, p_two_sided=p, n_used=n, method="normal")


def _tie_groups(values: Sequence[float]) -> list[tuple[float, int]]:
    groups: dict[float, int] = {}
    for v in values:
        groups[v] = groups.get(v, 0) + 1
    return sorted(groups.items())


def _wilcoxon_exact_p(ranks: Sequence[float], v_stat: float) -> float:
    """Exact two-sided p over the 2^n sign-flip distribution.

    Mid-ranks are multiples of 0.5, so doubling makes everything integer;
    the null distribution of V is symmetric about W/2 and the two-sided p is
    the probability of a deviation at least as large as observed.
    """
    doubled = [int(round(2 * r)) for r in ranks]
    w2 = sum(doubled)
    # counts[v] = number of sign patterns whose doubled positive-rank sum is v
    counts = [0] * (w2 + 1)
    counts[0] = 1
    for r2 in doubled:
        for v in range(w2 - r2, -1, -1):
            if counts[v]:
                counts[v + r2] += counts[v]
    dev_obs = abs(int(round(4 * v_stat)) - w2)
    tail = sum(c for v, c in enumerate(counts) if abs(2 * v - w2) >= dev_obs)
    return tail / (1 << len(ranks))


class AnalysisRow(NamedTuple):
    ad_id: str
    party: str
    election_year: int
    response: float


ANALYSIS_HEADER = ["ad_id", "party", "election_year", "response"]


def write_analysis_table(path: Path, rows: Sequence[AnalysisRow]) -> Path:
    """Regression-ready CSV, deterministically ordered by ad id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANALYSIS_HEADER)
        for row in sorted(rows, key=lambda r: r.ad_id):
            writer.writerow([row.ad_id, row.party, row.election_year, repr(row.response)])
    return path


__all__ = [
    "ANALYSIS_HEADER",
    "AlignmentCounts",
    "AllZeroDifferences",
    "AnalysisRow",
    "DegenerateVariance",
    "EmptyReference",
    "NoValidPairs",
    "PairedTResult",
    "TRIM_ERROR_THRESHOLD_S",
    "TrimErrors",
    "WILCOXON_EXACT_MAX_N",
    "WilcoxonResult",
    "ZeroVariance",
    "align_tokens",
    "align_words",
    "icc_2_1",
    "mean_and_pooled_wer",
    "paired_t",
    "recovered_fraction",
    "squeeze",
    "tokenize",
    "trim_errors",
    "wer",
    "wilcoxon_signed_rank",
    "write_analysis_table",
]
