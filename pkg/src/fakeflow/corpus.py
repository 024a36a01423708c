"""Corpus handling: tokenization, segmentation, vocabulary, dataset
ingestion, and construction of a domain-labeled news corpus from source
lists.

All operations are deterministic functions of their inputs and an explicit
seed, so any pipeline built from them is reproducible.
"""

from __future__ import annotations

import csv
import json
import logging
import string
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    EmptyDocument,
    ParseError,
    StratificationError,
    UsageError,
)

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = ""

LABELS = ("real", "fake")

# ASCII punctuation plus the common unicode quotes/dashes seen in news text.
_BOUNDARY_CHARS = string.punctuation + "‘’“”«»–—…¿¡"


@dataclass
class RawArticle:
    id: str
    text: str
    label: str | None = None
    domain: str | None = None
    year: int | None = None
    split_hint: str | None = None


@dataclass
class TokenizedDocument:
    tokens: list[str]

    @property
    def length(self) -> int:
        return len(self.tokens)


@dataclass
class SegmentedDocument:
    """A document as a fixed number of fixed-length segments.

    `segments` holds token strings after segment() and integer ids after
    encode(); padded positions hold "" / PAD_ID and are zero in `mask`.
    `doc_length` is the token count before any truncation.
    """

    n_segments: int
    max_seg_len: int
    segments: list[list]
    mask: np.ndarray
    doc_length: int

    def segment_lengths(self) -> list[int]:
        return [int(row.sum()) for row in self.mask]


@dataclass
class Vocabulary:
    """Token to id map; id 0 is padding, id 1 is the unknown token."""

    token_to_id: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.token_to_id) + 2

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def to_json(self) -> dict:
        return {"tokens": self.token_to_id}

    @classmethod
    def from_json(cls, payload: dict) -> "Vocabulary":
        return cls(token_to_id={str(k): int(v) for k, v in payload["tokens"].items()})


@dataclass(frozen=True)
class SourceListEntry:
    domain: str
    list_name: str
    raw_category: str


@dataclass
class DomainVerdict:
    domain: str
    label: str
    supporting_lists: set = field(default_factory=set)


def tokenize(text: str) -> TokenizedDocument:
    """Lowercase whitespace tokenization with boundary punctuation stripped.

    Tokens that are pure punctuation disappear. Raises EmptyDocument if
    nothing is left.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_BOUNDARY_CHARS)
        if tok:
            tokens.append(tok)
    if not tokens:
        raise EmptyDocument("document has no tokens after tokenization")
    return TokenizedDocument(tokens=tokens)


def segment(doc: TokenizedDocument, n_segments: int, max_seg_len: int) -> SegmentedDocument:
    """Split a document into exactly `n_segments` contiguous chunks.

    The document is truncated to n_segments * max_seg_len tokens, cut into
    chunks of ceil(L'/N) tokens (trailing chunks may be shorter or empty),
    and each chunk is right-padded to max_seg_len.
    """
    if n_segments < 1 or max_seg_len < 1:
        raise UsageError("n_segments and max_seg_len must be >= 1")
    tokens = doc.tokens[: n_segments * max_seg_len]
    chunk = -(-len(tokens) // n_segments) if tokens else 0
    segments = []
    mask = np.zeros((n_segments, max_seg_len), dtype=np.int8)
    for i in range(n_segments):
        part = tokens[i * chunk : (i + 1) * chunk] if chunk else []
        mask[i, : len(part)] = 1
        segments.append(part + [PAD_TOKEN] * (max_seg_len - len(part)))
    return SegmentedDocument(
        n_segments=n_segments,
        max_seg_len=max_seg_len,
        segments=segments,
        mask=mask,
        doc_length=doc.length,
    )


def build_vocabulary(corpus: list[TokenizedDocument], min_count: int = 1) -> Vocabulary:
    """Assign ids to all tokens with frequency >= min_count.

    Ids start at 2 and follow frequency-descending order with lexicographic
    tie-breaking, so the result is deterministic.
    """
    if not corpus:
        raise UsageError("cannot build a vocabulary from an empty corpus")
    counts = Counter()
    for doc in corpus:
        counts.update(doc.tokens)
    kept = sorted(
        (tok for tok, cnt in counts.items() if cnt >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(token_to_id={tok: i + 2 for i, tok in enumerate(kept)})


def encode(seg: SegmentedDocument, vocab: Vocabulary) -> SegmentedDocument:
    """Replace token strings with integer ids; pads become PAD_ID and
    out-of-vocabulary tokens become UNK_ID."""
    encoded = []
    for i, row in enumerate(seg.segments):
        ids = [
            vocab.id_of(tok) if seg.mask[i, j] else PAD_ID
            for j, tok in enumerate(row)
        ]
        encoded.append(ids)
    return SegmentedDocument(
        n_segments=seg.n_segments,
        max_seg_len=seg.max_seg_len,
        segments=encoded,
        mask=seg.mask.copy(),
        doc_length=seg.doc_length,
    )


# ---------------------------------------------------------------------------
# dataset construction

# (list_name, raw_category) -> "real" | "fake" | "drop"
DEFAULT_CATEGORY_MAPPING = {
    ("OS", "reliable"): "real",
    ("OS", "fake"): "fake",
    ("OS", "bias"): "fake",
    ("OS", "hate"): "fake",
    ("OS", "satire"): "fake",
    ("OS", "conspiracy"): "fake",
    ("OS", "*"): "drop",
    ("POLITIFACT", "Some fake stories"): "drop",
    ("POLITIFACT", "*"): "fake",
    ("MBFC", "high"): "real",
    ("MBFC", "low"): "fake",
    ("MBFC", "medium"): "drop",
}


def merge_source_lists(
    entries: list[SourceListEntry],
    mapping: dict | None = None,
) -> tuple[list[DomainVerdict], list[str]]:
    """Project per-list categories to real/fake and keep only domains whose
    mapped labels agree across every list they appear on.

    Returns (verdicts sorted by domain, conflicting domains). A category
    with neither an explicit rule nor a ('LIST', '*') fallback raises
    ConfigError.
    """
    mapping = DEFAULT_CATEGORY_MAPPING if mapping is None else mapping
    by_domain: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for entry in entries:
        rule = mapping.get((entry.list_name, entry.raw_category))
        if rule is None:
            rule = mapping.get((entry.list_name, "*"))
        if rule is None:
            raise ConfigError(
                f"no mapping for category {entry.raw_category!r} on list {entry.list_name!r}"
            )
        if rule == "drop":
            continue
        if rule not in LABELS:
            raise ConfigError(f"mapping for {entry.list_name!r}/{entry.raw_category!r} "
                              f"must be real, fake, or drop; got {rule!r}")
        by_domain[entry.domain].append((entry.list_name, rule))

    verdicts = []
    conflicts = []
    for domain in sorted(by_domain):
        labels = {label for _, label in by_domain[domain]}
        if len(labels) > 1:
            conflicts.append(domain)
            logger.warning("domain %s excluded: conflicting labels %s", domain, sorted(labels))
            continue
        verdicts.append(
            DomainVerdict(
                domain=domain,
                label=labels.pop(),
                supporting_lists={name for name, _ in by_domain[domain]},
            )
        )
    return verdicts, conflicts


def load_source_lists(path) -> list[SourceListEntry]:
    """CSV with header `domain,list,category`; one entry per (domain, list),
    later duplicates rejected."""
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"domain", "list", "category"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: expected CSV header domain,list,category")
        for lineno, row in enumerate(reader, start=2):
            if not row["domain"] or not row["list"]:
                raise ParseError(f"{path}:{lineno}: empty domain or list")
            key = (row["domain"].strip(), row["list"].strip())
            if key in seen:
                raise ParseError(f"{path}:{lineno}: duplicate entry for {key[0]} on {key[1]}")
            seen.add(key)
            entries.append(
                SourceListEntry(
                    domain=key[0],
                    list_name=key[1],
                    raw_category=row["category"].strip(),
                )
            )
    return entries


def load_label_mapping(path) -> dict:
    """Mapping config: JSON object {"LIST": {"category": "real|fake|drop"}}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid mapping JSON: {exc}") from exc
    mapping = {}
    for list_name, categories in payload.items():
        if not isinstance(categories, dict):
            raise ConfigError(f"{path}: mapping for list {list_name!r} must be an object")
        for category, rule in categories.items():
            mapping[(list_name, category)] = rule
    return mapping


def project_and_sample(
    articles: list[RawArticle],
    verdicts: list[DomainVerdict],
    max_per_domain: int = 100,
    min_words: int = 30,
    seed: int = 0,
) -> list[RawArticle]:
    """Label articles from their domain's verdict and subsample.

    Articles shorter than `min_words` tokens are discarded, then at most
    `max_per_domain` articles per domain are kept by seeded uniform
    sampling without replacement. Articles whose domain has no verdict are
    skipped with a warning. Output is sorted by (domain, id).
    """
    verdict_by_domain = {v.domain: v for v in verdicts}
    grouped: dict[str, list[RawArticle]] = defaultdict(list)
    for article in articles:
        verdict = verdict_by_domain.get(article.domain)
        if verdict is None:
            logger.warning("article %s skipped: domain %r has no verdict", article.id, article.domain)
            continue
        try:
            doc = tokenize(article.text)
        except EmptyDocument:
            continue
        if doc.length < min_words:
            continue
        grouped[article.domain].append(article)

    rng = np.random.default_rng(seed)
    sampled = []
    for domain in sorted(grouped):
        pool = sorted(grouped[domain], key=lambda a: a.id)
        if len(pool) > max_per_domain:
            keep = rng.choice(len(pool), size=max_per_domain, replace=False)
            pool = [pool[i] for i in sorted(keep)]
        label = verdict_by_domain[domain].label
        for article in pool:
            sampled.append(
                RawArticle(
                    id=article.id,
                    text=article.text,
                    label=label,
                    domain=article.domain,
                    year=article.year,
                    split_hint=article.split_hint,
                )
            )
    return sampled


def split_train_val(
    corpus: list[RawArticle], val_fraction: float = 0.20, seed: int = 0
) -> tuple[list[RawArticle], list[RawArticle]]:
    """Stratified split with |val| = round(val_fraction * |corpus|).

    Per-class validation counts are allocated by largest remainder so they
    sum to the total. Deterministic given the seed.
    """
    if not corpus:
        raise UsageError("cannot split an empty corpus")
    by_label: dict[str, list[int]] = defaultdict(list)
    for idx, article in enumerate(corpus):
        if article.label is None:
            raise UsageError(f"article {article.id} has no label; split requires labels")
        by_label[article.label].append(idx)
    for label, members in by_label.items():
        if len(members) < 2:
            raise StratificationError(f"class {label!r} has fewer than 2 articles")

    total_val = int(round(val_fraction * len(corpus)))
    exact = {label: val_fraction * len(members) for label, members in by_label.items()}
    counts = {label: int(np.floor(x)) for label, x in exact.items()}
    leftover = total_val - sum(counts.values())
    for label in sorted(exact, key=lambda lb: (-(exact[lb] - np.floor(exact[lb])), lb)):
        if leftover <= 0:
            break
        counts[label] += 1
        leftover -= 1

    rng = np.random.default_rng(seed)
    val_idx = set()
    for label in sorted(by_label):
        members = by_label[label]
        chosen = rng.choice(len(members), size=counts[label], replace=False)
        val_idx.update(members[i] for i in chosen)
    train = [corpus[i] for i in range(len(corpus)) if i not in val_idx]
    val = [corpus[i] for i in range(len(corpus)) if i in val_idx]
    return train, val


def complement_test_with_real(
    train: list[RawArticle],
    n_real: int,
    seed: int = 0,
    remove_from_train: bool = True,
) -> tuple[list[RawArticle], list[RawArticle]]:
    """Move (default) or copy a seeded sample of `n_real` real-labeled
    articles from the training pool into a test complement."""
    real_idx = [i for i, a in enumerate(train) if a.label == "real"]
    if len(real_idx) < n_real:
        raise UsageError(f"asked for {n_real} real articles but only {len(real_idx)} available")
    rng = np.random.default_rng(seed)
    chosen = {real_idx[i] for i in rng.choice(len(real_idx), size=n_real, replace=False)}
    sampled = [train[i] for i in sorted(chosen)]
    if remove_from_train:
        remaining = [a for i, a in enumerate(train) if i not in chosen]
        return remaining, sampled
    return list(train), sampled


def load_corpus(path, fmt: str = "jsonl") -> list[RawArticle]:
    """Read a JSON Lines corpus: one object per article with fields
    {id, text, label?, domain?, year?, split?}."""
    if fmt != "jsonl":
        raise UsageError(f"unknown corpus format {fmt!r}; only 'jsonl' is supported")
    articles = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            for field_name in ("id", "text"):
                if field_name not in record or record[field_name] in (None, ""):
                    raise ParseError(f"{path}:{lineno}: missing field {field_name!r}")
            if not str(record["text"]).strip():
                raise ParseError(f"{path}:{lineno}: field 'text' is blank")
            article_id = str(record["id"])
            if article_id in seen_ids:
                raise ParseError(f"{path}:{lineno}: duplicate article id {article_id!r}")
            seen_ids.add(article_id)
            label = record.get("label")
            if label is not None and label not in LABELS:
                raise ParseError(f"{path}:{lineno}: label must be one of {LABELS}, got {label!r}")
            year = record.get("year")
            if year is not None:
                try:
                    year = int(year)
                except (TypeError, ValueError):
                    raise ParseError(f"{path}:{lineno}: field 'year' is not an integer") from None
            articles.append(
                RawArticle(
                    id=article_id,
                    text=str(record["text"]),
                    label=label,
                    domain=record.get("domain"),
                    year=year,
                    split_hint=record.get("split"),
                )
            )
    return articles


def save_corpus(path, articles: list[RawArticle]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for article in articles:
            record = {"id": article.id, "text": article.text}
            if article.label is not None:
                record["label"] = article.label
            if article.domain is not None:
                record["domain"] = article.domain
            if article.year is not None:
                record["year"] = article.year
            if article.split_hint is not None:
                record["split"] = article.split_hint
            fh.write(json.dumps(record, sort_keys=True) + "\n")
