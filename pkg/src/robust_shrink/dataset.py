"""Batting-average data and the arcsine variance-stabilizing transform.

The canonical data are the 1970 averages of 18 major-league players
(first 45 at-bats vs. the rest of the season).  Averages over the first
45 at-bats are ratios ``hits / 45`` printed to three decimals; the model
pipeline works with the recovered ratio (see :func:`observed_scores`).
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterable, Sequence, Union

import numpy as np

N_AT_BATS = 45
HEADER = ("name", "y45", "remainder_avg", "remainder_ab")

# 1969 league-wide batting average, usable as a fixed prior center.
GLOBAL_AVERAGE_1969 = 0.248


class DataError(ValueError):
    """Raised for malformed or out-of-range player data."""


@dataclass(frozen=True)
class PlayerRecord:
    name: str
    y45: float
    remainder_avg: float
    remainder_ab: int

    def __post_init__(self):
        for field in ("y45", "remainder_avg"):
            v = getattr(self, field)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise DataError(f"{self.name}: {field}={v} outside [0, 1]")
        if self.remainder_ab < 1:
            raise DataError(f"{self.name}: remainder_ab must be >= 1")

    def hits(self, n_at_bats: int = N_AT_BATS) -> int:
        """Hit count implied by the rounded average."""
        return int(round(self.y45 * n_at_bats))

    def exact_y(self, n_at_bats: int = N_AT_BATS) -> float:
        """The unrounded ratio ``hits / n_at_bats``, or ``y45`` itself when it
        is not a 3-decimal rounding of such a ratio."""
        r = self.hits(n_at_bats) / n_at_bats
        return r if abs(r - self.y45) <= 0.0005 + 1e-12 else self.y45


Source = Union[str, os.PathLike, IO[str], IO[bytes], bytes]


def _open_text(source: Source) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def load_players(source: Source) -> list[PlayerRecord]:
    """Parse player records from CSV with header ``name,y45,remainder_avg,remainder_ab``.

    Raises:
        DataError: on a bad header, malformed row (row number reported,
            counting the header as row 1), out-of-range value, or an empty file.
    """
    with _open_text(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("empty file: no header and no records")
        if tuple(h.strip() for h in header) != HEADER:
            raise DataError(f"bad header {header!r}, expected {','.join(HEADER)}")
        records = []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DataError(f"row {rowno}: expected 4 fields, got {len(row)}")
            try:
                rec = PlayerRecord(
                    name=row[0].strip(),
                    y45=float(row[1]),
                    remainder_avg=float(row[2]),
                    remainder_ab=int(row[3]),
                )
            except DataError as exc:
                raise DataError(f"row {rowno}: {exc}") from None
            except ValueError as exc:
                raise DataError(f"row {rowno}: {exc}") from None
            records.append(rec)
    if not records:
        raise DataError("no records")
    return records


def load_canonical() -> list[PlayerRecord]:
    """The bundled 18-player table."""
    text = resources.files("robust_shrink.data").joinpath("players_1970.csv").read_text("utf-8")
    return load_players(io.StringIO(text))


def arcsine_transform(y, n_at_bats: int = N_AT_BATS):
    """``sqrt(n) * arcsin(2y - 1)``; works on scalars and arrays."""
    arr = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise DataError(f"average outside [0, 1]: {y!r}")
    out = math.sqrt(n_at_bats) * np.arcsin(2.0 * arr - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def inverse_transform(x, n_at_bats: int = N_AT_BATS):
    """Map transformed scores back to averages, clamped to [0, 1]."""
    arr = np.asarray(x, dtype=float)
    out = np.clip((np.sin(arr / math.sqrt(n_at_bats)) + 1.0) / 2.0, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def observed_scores(players: Iterable[PlayerRecord], exact: bool = True,
                    n_at_bats: int = N_AT_BATS) -> np.ndarray:
    """Transformed first-45 scores ``X_i``.

    With ``exact`` the printed 3-decimal averages are snapped back to
    ``hits / n_at_bats`` before transforming; this is what reproduces the
    reference fit (M = -3.3166, tau = 3.7853).
    """
    ys = [p.exact_y(n_at_bats) if exact else p.y45 for p in players]
    return np.asarray(arcsine_transform(np.asarray(ys), n_at_bats), dtype=float).reshape(-1)


def remainder(players: Sequence[PlayerRecord]) -> np.ndarray:
    return np.array([p.remainder_avg for p in players])
