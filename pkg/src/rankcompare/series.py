"""IndicatorSeries: one indicator's values keyed by canonical institution id."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import KindMismatchError
from .ingest import CLASS_A_TO_E, CLASS_LABELS, KINDS, NUMERIC, RANK, Value


@dataclass(frozen=True)
class IndicatorSeries:
    system_id: str
    name: str
    values: Mapping[str, Value] = field(default_factory=dict)
    kind: str = NUMERIC
    higher_is_better: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatchError(f"unknown kind {self.kind!r}")
        values = dict(self.values)
        for key, v in values.items():
            if v is None:
                continue
            if self.kind == CLASS_A_TO_E:
                if v not in CLASS_LABELS:
                    raise KindMismatchError(f"{self.label}: class series holds {v!r} for {key}")
            elif isinstance(v, (str, bool)) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise KindMismatchError(f"{self.label}: non-finite or non-numeric {v!r} for {key}")
        object.__setattr__(self, "values", MappingProxyType(values))

    @property
    def ref(self):
        return (self.system_id, self.name)

    @property
    def label(self) -> str:
        return f"{self.system_id}:{self.name}"

    def present(self) -> dict:
        """Non-missing entries only."""
        return {k: v for k, v in self.values.items() if v is not None}

    def n_missing(self) -> int:
        return sum(1 for v in self.values.values() if v is None)

    def __len__(self):
        return len(self.values)

    def with_values(self, values, kind=None, name=None, higher_is_better=None) -> "IndicatorSeries":
        return IndicatorSeries(
            self.system_id,
            self.name if name is None else name,
            values,
            self.kind if kind is None else kind,
            self.higher_is_better if higher_is_better is None else higher_is_better,
        )


def oriented_values(series: IndicatorSeries) -> dict:
    """Numeric view where larger always means better.

    Classes are quantified (A=5 .. E=1); rank-like or lower-is-better
    indicators are negated.
    """
    out = {}
    for key, v in series.present().items():
        if series.kind == CLASS_A_TO_E:
            x = float(5 - CLASS_LABELS.index(v))
        else:
            x = float(v)
        out[key] = x if series.higher_is_better else -x
    return out


__all__ = ["IndicatorSeries", "oriented_values", "NUMERIC", "RANK", "CLASS_A_TO_E"]
