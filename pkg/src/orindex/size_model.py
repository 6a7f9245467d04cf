"""Analytic occurrence-table size estimates.

Symbols follow the usual inverted-file notation:

    N     total word occurrences in the collection
    D     number of documents
    N_d   sum over documents of their distinct word counts
    W     number of distinct words
    t, f  tuple overhead and field size of the storage cost model

Only the occurrence table is modelled; document and word tables are
measured directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .storage import CostModel


@dataclass(frozen=True)
class CorpusStats:
    N: int = 0
    D: int = 0
    N_d: int = 0
    W: int = 0

    @property
    def w_avg(self) -> float:
        return self.N_d / self.D if self.D else 0.0

    def violations(self) -> list[str]:
        out = []
        if min(self.N, self.D, self.N_d, self.W) < 0:
            out.append("all counts must be non-negative")
        if not self.D <= self.N_d <= self.D * self.W:
            out.append(f"need D <= N_d <= D*W, got D={self.D} N_d={self.N_d} W={self.W}")
        if self.W > self.N_d:
            out.append(f"need W <= N_d, got W={self.W} N_d={self.N_d}")
        if self.N_d > self.N:
            out.append(f"need N_d <= N, got N_d={self.N_d} N={self.N}")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    def check(self) -> None:
        problems = self.violations()
        if problems:
            raise ValueError("invalid corpus stats: " + "; ".join(problems))


class Smaller(str, Enum):
    ORIF = "ORIF"
    PR = "PR"
    EQUAL = "EQUAL"


@dataclass(frozen=True)
class Comparison:
    smaller: Smaller
    pr_bytes: int
    orif_bytes: int


def estimate_pr(stats: CorpusStats, cost: CostModel = CostModel(),
                with_positions: bool = False) -> int:
    """One (word_id, doc_id, tf) tuple per posting, plus one per position."""
    stats.check()
    per_tuple = 3 * cost.field_bytes + cost.tuple_overhead_bytes
    size = stats.N_d * per_tuple
    if with_positions:
        size += stats.N * per_tuple
    return size


def estimate_orif(stats: CorpusStats, cost: CostModel = CostModel(),
                  with_positions: bool = False, element_bytes: int | None = None) -> int:
    """One tuple per word holding all its (doc_id, tf) pairs.

    ``element_bytes`` defaults to two fields; pass
    ``cost.posting_element_bytes`` to price the point encoding instead.
    """
    stats.check()
    f, t = cost.field_bytes, cost.tuple_overhead_bytes
    element = 2 * f if element_bytes is None else element_bytes
    size = stats.W * (f + t) + stats.N_d * element
    if with_positions:
        size += stats.N * f
    return size


def compare(stats: CorpusStats, cost: CostModel = CostModel()) -> Comparison:
    pr = estimate_pr(stats, cost)
    orif = estimate_orif(stats, cost)
    if orif < pr:
        smaller = Smaller.ORIF
    elif orif == pr:
        smaller = Smaller.EQUAL
    else:
        smaller = Smaller.PR
    return Comparison(smaller, pr, orif)


def _check_lengths(**lengths):
    for name, value in lengths.items():
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")


def estimate_cor(stats: CorpusStats, cost: CostModel, avg_name_len):
    """Word name and df folded into the array-valued occurrence tuple."""
    stats.check()
    _check_lengths(avg_name_len=avg_name_len)
    t, f, h = cost.tuple_overhead_bytes, cost.field_bytes, cost.string_header_bytes
    return stats.W * (t + h + avg_name_len + f) + stats.N_d * 2 * f


def estimate_hor(stats: CorpusStats, cost: CostModel, avg_name_len, avg_docid_len,
                 avg_tf_len):
    """Like COR, with each posting stored as a (doc_id, tf) text pair."""
    stats.check()
    _check_lengths(avg_name_len=avg_name_len, avg_docid_len=avg_docid_len,
                   avg_tf_len=avg_tf_len)
    t, f, h = cost.tuple_overhead_bytes, cost.field_bytes, cost.string_header_bytes
    return (stats.W * (t + h + avg_name_len + f)
            + stats.N_d * (2 * h + avg_docid_len + avg_tf_len))


def ratio_ceiling(cost: CostModel = CostModel()) -> float:
    """Supremum of estimate_pr / estimate_orif over valid stats."""
    return (3 * cost.field_bytes + cost.tuple_overhead_bytes) / (2 * cost.field_bytes)
