"""spotforge: batch toolkit for campaign-ad video corpora.

Trims pre/post-roll, transcribes, extracts storyboard keyframes, captions
frames, and produces 50-word summaries through pluggable model backends;
ships the validation metrics (WER, trim-error classification, ICC, paired
tests) and an exact-then-fuzzy transcript search service.
"""

__version__ = "0.1.0"
