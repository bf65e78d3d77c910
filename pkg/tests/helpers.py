"""Shared fixture builders and independent oracles.

The oracle functions here deliberately avoid the package's index/search code:
they recompute everything with direct loops so tests compare two separate
routes to the same numbers.
"""

from __future__ import annotations

import math
import random

from dris import Document

ORACLE_K1 = 1.2
ORACLE_B = 0.75

FIXTURE_VOCAB = [
    "grid", "search", "metadata", "harvest", "domain", "index", "query", "page",
    "system", "union", "broker", "node", "record", "token", "child", "layer",
    "cover", "traffic", "fresh", "merge", "rank", "score", "batch", "cursor",
]

FIXTURE_QUERIES = [
    "grid search",
    "harvest metadata cursor",
    "zebra",
    "union union broker",
    "score",
]


def make_fixture_docs(count: int = 20) -> list[Document]:
    """Deterministic synthetic corpus; doc03 carries the unique term 'zebra'."""
    rng = random.Random(7)
    docs = []
    for i in range(count):
        n = 6 + (i * 7) % 30
        words = [FIXTURE_VOCAB[rng.randrange(len(FIXTURE_VOCAB))] for _ in range(n)]
        if i == 3:
            words.append("zebra")
        docs.append(
            Document(
                identifier=f"doc{i:02d}",
                kind="webpage",
                title=" ".join(words[:2]),
                body=" ".join(words),
            )
        )
    return docs


def oracle_tokenize(text: str) -> list[str]:
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def brute_force_bm25(docs: list[Document], query: str) -> dict[str, float]:
    """Per-(doc, query) recomputation with direct loops; no index structure."""
    token_lists = [oracle_tokenize(d.title + " " + d.body) for d in docs]
    n_docs = len(docs)
    avg_len = sum(len(ts) for ts in token_lists) / n_docs
    scores: dict[str, float] = {}
    for doc, tokens in zip(docs, token_lists):
        total = 0.0
        for q in oracle_tokenize(query):
            tf = sum(1 for w in tokens if w == q)
            if tf == 0:
                continue
            df = sum(1 for other in token_lists if q in other)
            idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
            total += idf * tf * (ORACLE_K1 + 1.0) / (
                tf + ORACLE_K1 * (1.0 - ORACLE_B + ORACLE_B * len(tokens) / avg_len)
            )
        if total > 0.0:
            scores[doc.identifier] = total
    return scores


def brute_force_df(docs: list[Document]) -> dict[str, int]:
    """Document frequencies over title+body by direct recount."""
    counts: dict[str, int] = {}
    for doc in docs:
        for term in set(oracle_tokenize(doc.title + " " + doc.body)):
            counts[term] = counts.get(term, 0) + 1
    return counts
