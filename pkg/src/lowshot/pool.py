"""Scored evaluation pools and their on-disk formats.

A pool is the unlabeled dataset under evaluation: one score and one predicted
label per item, plus (in oracle mode) a hidden true label used by the
benchmark harness. Scores may live on any finite scale; everything downstream
that cares about score *values* (calibration) first rescales them to [0, 1]
by min-max, so only the ordering matters.

File formats, shared with the labeling service:
  JSON:  {"items": [{"id": str, "score": num, "predicted": 0|1, "label": 0|1?}]}
  CSV:   header id,score,predicted,label (label cells may be empty)
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

#: sentinel for "no oracle label" in the labels array
NO_LABEL = -1


@dataclass
class ScoredPool:
    """Per-item scores and predictions, with optional hidden true labels."""

    item_ids: list[str]
    scores: np.ndarray
    predicted: np.ndarray
    labels: np.ndarray | None = None
    extras: list[dict] | None = None  # opaque per-item passthrough (e.g. asset URLs)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        self.predicted = np.asarray(self.predicted, dtype=np.int64)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
        n = len(self.item_ids)
        if self.scores.shape != (n,) or self.predicted.shape != (n,):
            raise ValidationError("item_ids, scores and predicted must have equal length")
        if self.labels is not None and self.labels.shape != (n,):
            raise ValidationError("labels must align with items")
        if len(set(self.item_ids)) != n:
            raise ValidationError("duplicate item ids")
        if not np.all(np.isfinite(self.scores)):
            raise ValidationError("scores must be finite")
        if not np.all((self.predicted == 0) | (self.predicted == 1)):
            raise ValidationError("predicted labels must be 0 or 1")
        if self.labels is not None:
            ok = (self.labels == 0) | (self.labels == 1) | (self.labels == NO_LABEL)
            if not np.all(ok):
                raise ValidationError("labels must be 0 or 1")
        self._rescaled: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.item_ids)

    @property
    def has_full_labels(self) -> bool:
        return self.labels is not None and bool(np.all(self.labels != NO_LABEL))

    @property
    def oracle_labels(self) -> dict[str, int]:
        """Map item_id -> true label, covering only labeled items."""
        if self.labels is None:
            return {}
        return {
            iid: int(lab)
            for iid, lab in zip(self.item_ids, self.labels)
            if lab != NO_LABEL
        }

    def label_of(self, index: int) -> int:
        if self.labels is None or self.labels[index] == NO_LABEL:
            raise ValidationError(f"item {self.item_ids[index]} has no oracle label")
        return int(self.labels[index])

    def rescaled_scores(self) -> np.ndarray:
        """Scores min-max rescaled to [0, 1]; constant pools map to 0.5."""
        if self._rescaled is None:
            lo, hi = float(self.scores.min()), float(self.scores.max())
            if hi > lo:
                self._rescaled = (self.scores - lo) / (hi - lo)
            else:
                self._rescaled = np.full(self.size, 0.5)
        return self._rescaled

    def without_labels(self) -> "ScoredPool":
        return ScoredPool(
            item_ids=list(self.item_ids),
            scores=self.scores.copy(),
            predicted=self.predicted.copy(),
            labels=None,
            extras=[dict(e) for e in self.extras] if self.extras else None,
            meta=dict(self.meta),
        )

    def to_items(self) -> list[dict]:
        """Item dicts in the shared JSON schema (labels included when known)."""
        items = []
        for i, iid in enumerate(self.item_ids):
            item: dict = {
                "id": iid,
                "score": float(self.scores[i]),
                "predicted": int(self.predicted[i]),
            }
            if self.labels is not None and self.labels[i] != NO_LABEL:
                item["label"] = int(self.labels[i])
            if self.extras and self.extras[i]:
                item.update(self.extras[i])
            items.append(item)
        return items


def pool_from_items(items: list[dict], meta: dict | None = None) -> ScoredPool:
    """Build a pool from item dicts, tolerating extra keys (passed through)."""
    if not items:
        raise ValidationError("pool has no items")
    ids, scores, preds, labels, extras = [], [], [], [], []
    any_label = False
    for raw in items:
        try:
            ids.append(str(raw["id"]))
            scores.append(float(raw["score"]))
            preds.append(int(raw["predicted"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad pool item {raw!r}: {exc}") from None
        lab = raw.get("label", None)
        if lab is None or lab == "":
            labels.append(NO_LABEL)
        else:
            labels.append(int(lab))
            any_label = True
        extras.append({k: v for k, v in raw.items()
                       if k not in ("id", "score", "predicted", "label")})
    return ScoredPool(
        item_ids=ids,
        scores=np.array(scores, dtype=float),
        predicted=np.array(preds, dtype=np.int64),
        labels=np.array(labels, dtype=np.int64) if any_label else None,
        extras=extras if any(extras) else None,
        meta=meta or {},
    )


def load_pool(path: str | Path) -> ScoredPool:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return pool_from_items([dict(r) for r in rows])
    with path.open() as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "items" not in payload:
        raise ValidationError("pool JSON must be an object with an 'items' list")
    return pool_from_items(payload["items"], meta=payload.get("meta"))


def save_pool(pool: ScoredPool, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "score", "predicted", "label"])
            for item in pool.to_items():
                writer.writerow([
                    item["id"],
                    repr(item["score"]),
                    item["predicted"],
                    item.get("label", ""),
                ])
        return
    payload: dict = {"items": pool.to_items()}
    if pool.meta:
        payload["meta"] = pool.meta
    with path.open("w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
