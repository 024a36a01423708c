"""Training loop with early stopping, random hyperparameter search, and
validation-driven selection of the segment count."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import tensor as tz
from .corpus import RawArticle, TokenizedDocument, Vocabulary, encode, segment, tokenize
from .errors import EmptyDocument, UsageError
from .evaluation import compute_metrics
from .lexicon import LexiconSet, extract_affect
from .model import Example, FakeFlowConfig, FakeFlowModel

logger = logging.getLogger(__name__)

SINGLE_SEGMENT_CAP = 1500  # max_seg_len override for n_segments == 1


@dataclass
class TrainConfig:
    max_epochs: int = 50
    patience: int = 4
    batch_size: int = 32
    learning_rate: float | None = None  # per-optimizer default when None
    seed: int = 0
    monitored_metric: str = "val_macro_f1"  # or "val_loss"

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise UsageError(
                f"patience ({self.patience}) must be smaller than max_epochs ({self.max_epochs})"
            )
        if self.batch_size < 1:
            raise UsageError("batch_size must be >= 1")
        if self.monitored_metric not in ("val_macro_f1", "val_loss"):
            raise UsageError(f"unknown monitored metric {self.monitored_metric!r}")

    @property
    def higher_is_better(self) -> bool:
        return self.monitored_metric == "val_macro_f1"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    val_macro_f1: float


@dataclass
class TrialResult:
    config: FakeFlowConfig
    train_config: TrainConfig
    best_val_metric: float
    best_epoch: int
    epochs_run: int
    history: list[EpochRecord]
    checkpoint: str | None = None
    trial_index: int | None = None

    def history_json(self) -> list[dict]:
        return [vars(r) for r in self.history]


class EarlyStopper:
    """Strict-improvement early stopping with a patience budget.

    update() returns True while training should continue; it returns False
    once `patience` consecutive epochs pass without improvement.
    """

    def __init__(self, patience: int, higher_is_better: bool):
        self.patience = patience
        self.higher_is_better = higher_is_better
        self.best = None
        self.best_epoch = None
        self.stale = 0

    def update(self, epoch: int, value: float) -> bool:
        improved = self.best is None or (
            value > self.best if self.higher_is_better else value < self.best
        )
        if improved:
            self.best = value
            self.best_epoch = epoch
            self.stale = 0
            return True
        self.stale += 1
        return self.stale < self.patience


def train(model: FakeFlowModel, train_set: list[Example], val_set: list[Example],
          cfg: TrainConfig, checkpoint_path=None) -> TrialResult:
    """Minimize cross-entropy with the configured optimizer; monitor the
    validation metric after every epoch; stop early and restore the best
    epoch's parameters. Deterministic given cfg.seed."""
    if not train_set or not val_set:
        raise UsageError("train and validation sets must be non-empty")
    classes = model.config.classes
    class_index = {label: i for i, label in enumerate(classes)}
    for e in train_set + val_set:
        if e.label not in class_index:
            raise UsageError(f"example {e.doc_id} has label {e.label!r}, not in {classes}")

    rng = np.random.default_rng(cfg.seed)
    opt = tz.make_optimizer(model.config.optimizer, cfg.learning_rate)
    trainable = model.trainable_params()
    trainable_ids = {id(p) for p in trainable}
    frozen = [p for p in model.params if id(p) not in trainable_ids]
    gold_train = np.array([class_index[e.label] for e in train_set], dtype=np.int64)
    val_gold_labels = [e.label for e in val_set]

    stopper = EarlyStopper(cfg.patience, cfg.higher_is_better)
    history: list[EpochRecord] = []
    best_state = model.state()
    best_epoch = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = [train_set[i] for i in idx]
            tape = tz.Tape()
            loss, _ = model.batch_loss(tape, batch, gold_train[idx], training=True, rng=rng)
            tz.backward(tape, loss)
            tz.step(opt, trainable)
            for p in frozen:
                p.zero_grad()
            losses.append(float(loss.value))

        val_probs = model.predict_proba(val_set)
        val_pred_labels = [classes[i] for i in val_probs.argmax(axis=1)]
        picked = val_probs[np.arange(len(val_set)),
                           [class_index[lb] for lb in val_gold_labels]]
        val_loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
        report = compute_metrics(val_gold_labels, val_pred_labels)
        record = EpochRecord(
            epoch=epoch,
            train_loss=float(np.mean(losses)),
            val_loss=val_loss,
            val_accuracy=report.accuracy,
            val_macro_f1=report.macro_f1,
        )
        history.append(record)
        monitored = record.val_macro_f1 if cfg.monitored_metric == "val_macro_f1" else val_loss

        keep_going = stopper.update(epoch, monitored)
        if stopper.best_epoch == epoch:
            best_state = model.state()
            best_epoch = epoch
        if not keep_going:
            break

    model.load_state(best_state)
    if checkpoint_path is not None:
        model.save(checkpoint_path)
    return TrialResult(
        config=model.config,
        train_config=cfg,
        best_val_metric=float(stopper.best),
        best_epoch=best_epoch,
        epochs_run=len(history),
        history=history,
        checkpoint=None if checkpoint_path is None else str(checkpoint_path),
    )


# ---------------------------------------------------------------------------
# hyperparameter search


@dataclass
class SearchSpace:
    dropout_low: float = 0.1
    dropout_high: float = 0.6
    dense_dims: tuple = (8, 16, 32, 64, 128)
    activations: tuple = ("selu", "relu", "tanh", "elu")
    filter_width_tuples: tuple = (
        (2, 3, 4), (3, 4, 5), (4, 5, 6), (3, 5), (2, 4), (4,), (5,), (3, 5, 7), (3, 6),
    )
    filter_counts: tuple = (4, 8, 16, 32, 64, 128)
    pool_sizes: tuple = (2, 3)
    gru_units: tuple = (8, 16, 32, 64, 128)
    optimizers: tuple = ("adam", "adadelta", "rmsprop", "sgd")

    def sample(self, rng: np.random.Generator, base: FakeFlowConfig) -> FakeFlowConfig:
        """One independent uniform draw per dimension. The fused dense width
        is derived from the sampled GRU size, never sampled."""

        def pick(seq):
            return seq[int(rng.integers(len(seq)))]

        dropout = float(rng.uniform(self.dropout_low, self.dropout_high))
        dense_dim = int(pick(self.dense_dims))
        gru = int(pick(self.gru_units))
        return replace(
            base,
            dropout_rate=dropout,
            topic_dense_dim=dense_dim,
            final_dense_dim=dense_dim,
            activation=pick(self.activations),
            cnn_filter_widths=tuple(pick(self.filter_width_tuples)),
            cnn_filter_count=int(pick(self.filter_counts)),
            pool_size=int(pick(self.pool_sizes)),
            gru_units=gru,
            fused_dense_dim=2 * gru,
            optimizer=pick(self.optimizers),
        )


@dataclass
class SearchResult:
    best: TrialResult
    trials: list[TrialResult]


def random_search(space: SearchSpace, trials: int, base_config: FakeFlowConfig,
                  train_set: list[Example], val_set: list[Example],
                  train_cfg: TrainConfig, seed: int = 0,
                  build_model=None) -> SearchResult:
    """Seeded random search: sample `trials` configs, train each with early
    stopping, return the trial with the best monitored metric.

    Per-trial seeds are seed + trial_index so trials are independent and
    the whole search replays from one seed.
    """
    if trials < 1:
        raise UsageError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    configs = [space.sample(rng, base_config) for _ in range(trials)]
    results = []
    for t, config in enumerate(configs):
        trial_seed = seed + t
        model = (build_model or FakeFlowModel)(config, seed=trial_seed)
        cfg = replace(train_cfg, seed=trial_seed)
        result = train(model, train_set, val_set, cfg)
        result.trial_index = t
        results.append(result)
        logger.info("trial %d/%d: metric=%.4f epochs=%d", t + 1, trials,
                    result.best_val_metric, result.epochs_run)
    best = results[0]
    for r in results[1:]:  # strict comparison: earliest trial wins ties
        if (r.best_val_metric > best.best_val_metric) if train_cfg.higher_is_better \
                else (r.best_val_metric < best.best_val_metric):
            best = r
    return SearchResult(best=best, trials=results)


# ---------------------------------------------------------------------------
# data preparation and segment-count selection


def prepare_examples(docs: list[tuple[str, TokenizedDocument, str | None]],
                     vocab: Vocabulary, lex: LexiconSet,
                     n_segments: int, max_seg_len: int) -> list[Example]:
    """Segment, featurize, and encode tokenized documents.

    `docs` holds (doc_id, TokenizedDocument, label) triples.
    """
    examples = []
    for doc_id, doc, label in docs:
        seg = segment(doc, n_segments, max_seg_len)
        affect = extract_affect(seg, lex)
        enc = encode(seg, vocab)
        examples.append(
            Example(
                doc_id=doc_id,
                ids=np.array(enc.segments, dtype=np.int64),
                mask=enc.mask.astype(np.int8),
                affect=affect.values,
                label=label,
            )
        )
    return examples


def tokenize_articles(articles: list[RawArticle],
                      min_tokens: int = 1) -> list[tuple[str, TokenizedDocument, str | None]]:
    """Tokenize a corpus, dropping documents that come out empty."""
    docs = []
    for article in articles:
        try:
            doc = tokenize(article.text)
        except EmptyDocument:
            logger.warning("article %s dropped: empty after tokenization", article.id)
            continue
        if doc.length < min_tokens:
            continue
        docs.append((article.id, doc, article.label))
    return docs


@dataclass
class NSweepRow:
    n_segments: int
    max_seg_len: int
    accuracy: float
    macro_f1: float


def select_n_segments(candidates: list[int],
                      train_docs: list[tuple[str, TokenizedDocument, str | None]],
                      val_docs: list[tuple[str, TokenizedDocument, str | None]],
                      vocab: Vocabulary, lex: LexiconSet,
                      base_config: FakeFlowConfig, train_cfg: TrainConfig,
                      ) -> tuple[int, list[NSweepRow]]:
    """Train one model per candidate segment count (same seed and
    hyperparameters) and pick the best validation macro-F1; ties go to the
    smaller count. Single-segment runs widen max_seg_len to 1500 so long
    documents are not cut short."""
    if not candidates:
        raise UsageError("candidates must be non-empty")
    rows = []
    for n in sorted(set(int(c) for c in candidates)):
        max_len = SINGLE_SEGMENT_CAP if n == 1 else base_config.max_seg_len
        config = replace(base_config, n_segments=n, max_seg_len=max_len)
        train_set = prepare_examples(train_docs, vocab, lex, n, max_len)
        val_set = prepare_examples(val_docs, vocab, lex, n, max_len)
        model = FakeFlowModel(config, seed=train_cfg.seed)
        result = train(model, train_set, val_set, train_cfg)
        final = result.history[result.best_epoch - 1]
        rows.append(
            NSweepRow(
                n_segments=n,
                max_seg_len=max_len,
                accuracy=final.val_accuracy,
                macro_f1=final.val_macro_f1,
            )
        )
    best = max(rows, key=lambda r: (r.macro_f1, -r.n_segments))
    return best.n_segments, rows
