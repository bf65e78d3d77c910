"""Tokenization, the in-memory inverted index, and BM25 scoring.

One index implementation backs both the leaf full-text store (string doc ids
over title+body) and the mid-layer union index ((source, identifier) ids over
title+description). Ranking constants are fixed so results are reproducible.
"""

from __future__ import annotations

import math
from typing import Callable, Hashable, Iterable

K1 = 1.2
B = 0.75


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric codepoint. No stemming,
    no stopwords, duplicates kept."""
    tokens = []
    current = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


class InvertedIndex:
    """term -> {doc id -> term frequency}, plus per-doc lengths."""

    def __init__(self):
        self.postings: dict[str, dict[Hashable, int]] = {}
        self.doc_lengths: dict[Hashable, int] = {}
        self.total_length = 0

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def add(self, doc_id: Hashable, tokens: Iterable[str]) -> None:
        if doc_id in self.doc_lengths:
            raise ValueError(f"doc {doc_id!r} already indexed; remove it first")
        counts: dict[str, int] = {}
        length = 0
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
            length += 1
        for term, tf in counts.items():
            self.postings.setdefault(term, {})[doc_id] = tf
        self.doc_lengths[doc_id] = length
        self.total_length += length

    def remove(self, doc_id: Hashable, tokens: Iterable[str]) -> None:
        """Drop a doc; tokens must be the same stream it was added with."""
        for term in set(tokens):
            plist = self.postings.get(term)
            if plist is not None:
                plist.pop(doc_id, None)
                if not plist:
                    del self.postings[term]
        length = self.doc_lengths.pop(doc_id, 0)
        self.total_length -= length

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))

    def bm25(self, query_tokens: list[str]) -> dict[Hashable, float]:
        """Score every doc containing at least one query token. Each query
        token occurrence contributes, so repeated terms count repeatedly."""
        scores: dict[Hashable, float] = {}
        if self.doc_count == 0:
            return scores
        avg_len = self.total_length / self.doc_count
        for token in query_tokens:
            plist = self.postings.get(token)
            if not plist:
                continue
            idf = self.idf(token)
            for doc_id, tf in plist.items():
                length = self.doc_lengths[doc_id]
                denom = tf + K1 * (1.0 - B + B * length / avg_len)
                scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (K1 + 1.0) / denom
        return scores

    def term_document_frequencies(self) -> dict[str, int]:
        return {term: len(plist) for term, plist in self.postings.items()}


def rank_top_k(
    scores: dict[Hashable, float],
    k: int,
    tie_key: Callable[[Hashable], tuple],
) -> list[tuple[Hashable, float]]:
    """Top k by score descending, ties broken by tie_key ascending."""
    ordered = sorted(scores.items(), key=lambda item: (-item[1], tie_key(item[0])))
    return ordered[:k]


def top_terms(frequencies: dict[str, int], limit: int = 1000) -> dict[str, int]:
    """Keep the `limit` highest-frequency terms, ties by term text ascending.
    Insertion order of the result follows that ranking."""
    ranked = sorted(frequencies.items(), key=lambda item: (-item[1], item[0]))
    return dict(ranked[:limit])
