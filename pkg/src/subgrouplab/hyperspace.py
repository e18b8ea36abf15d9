"""Hausdorff distance and Vietoris neighborhoods on sampled compact sets."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .groups import CompactGroup, SampleSet

CHUNK = 2048
MAX_ENTRIES = 2_000_000  # distance-matrix entries held at once


@dataclass(frozen=True)
class HausdorffResult:
    estimate: float
    error_bound: float

    def __iter__(self):
        return iter((self.estimate, self.error_bound))

    @property
    def lower(self) -> float:
        return max(0.0, self.estimate - self.error_bound)

    @property
    def upper(self) -> float:
        return self.estimate + self.error_bound


def _check_same_group(A: SampleSet, B: SampleSet) -> CompactGroup:
    if A.group is not B.group and repr(A.group) != repr(B.group):
        raise ValueError("sample sets live in different groups")
    return A.group


def directed_distances(A: SampleSet, B: SampleSet, chunk: int = CHUNK) -> tuple[float, np.ndarray]:
    """(max over A of dist to B, per-point dist from each b to A)."""
    G = _check_same_group(A, B)
    FA, FB = A.features, B.features
    col_min = np.full(len(FB), np.inf)
    row_max = 0.0
    chunk = max(1, min(chunk, MAX_ENTRIES // max(len(FB), 1)))
    for start in range(0, len(FA), chunk):
        D = G.pairwise(FA[start:start + chunk], FB)
        row_max = max(row_max, float(D.min(axis=1).max()))
        np.minimum(col_min, D.min(axis=0), out=col_min)
    return row_max, col_min


def hausdorff_distance(A: SampleSet, B: SampleSet) -> HausdorffResult:
    """Sampled Hausdorff distance with the certified error ``A.mesh + B.mesh``."""
    ab, col_min = directed_distances(A, B)
    ba = float(col_min.max())
    return HausdorffResult(max(ab, ba), A.mesh + B.mesh)


def max_gap(A: SampleSet, B: SampleSet) -> float:
    """max over b in B of the distance to A (one-sided)."""
    return float(directed_distances(A, B)[1].max())


# ---------------------------------------------------------------------------
# Vietoris neighborhoods
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center: Any
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radii must be positive")


@dataclass(frozen=True)
class Region:
    """Finite union of open balls; an empty ball list with ``whole=True`` is the whole group."""

    balls: tuple[Ball, ...] = ()
    whole: bool = False

    @classmethod
    def everything(cls) -> "Region":
        return cls((), True)

    @classmethod
    def ball(cls, center, radius: float) -> "Region":
        return cls((Ball(center, radius),))

    def slack(self, G: CompactGroup, feats: np.ndarray) -> np.ndarray:
        """max_i (r_i - d(x, c_i)) per point; +inf for the whole group."""
        if self.whole:
            return np.full(len(feats), np.inf)
        if not self.balls:
            return np.full(len(feats), -np.inf)
        centers = G.pack([b.center for b in self.balls])
        radii = np.array([b.radius for b in self.balls])
        D = G.pairwise(feats, centers)
        return (radii[None, :] - D).max(axis=1)


@dataclass(frozen=True)
class VietorisNbhd:
    """The basic open set {K : K in U0, K meets each U_i}."""

    U0: Region
    Us: tuple[Region, ...] = ()


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDECIDABLE = "undecidable"

    def __bool__(self) -> bool:
        return self is Verdict.TRUE


@dataclass
class VietorisCertificate:
    verdict: Verdict
    witnesses: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self) -> bool:
        return bool(self.verdict)


def vietoris_contains(K: SampleSet, nbhd: VietorisNbhd) -> VietorisCertificate:
    """Decide K in V(U0; U1..Un) from samples, or report Undecidable.

    U0 holds if every sample lies inside U0 with margin ``mesh + tau``; it
    fails if some sample lies outside U0.  U_i holds if some sample lies
    strictly inside U_i; it fails if every sample keeps distance
    ``mesh + tau`` from U_i.  Anything else is left undecided.
    """
    G = K.group
    tau = G.tau
    feats = K.features
    pts = K.elements
    undecided: list[str] = []

    s0 = nbhd.U0.slack(G, feats)
    out = np.nonzero(s0 <= -tau)[0]
    if len(out):
        return VietorisCertificate(Verdict.FALSE, [pts[int(out[0])]], "sample point outside U0")
    if not (s0 > K.mesh + tau).all():
        undecided.append("U0 boundary within mesh of a sample")

    witnesses = []
    for i, U in enumerate(nbhd.Us, start=1):
        s = U.slack(G, feats)
        inside = np.nonzero(s > tau)[0]
        if len(inside):
            witnesses.append(pts[int(inside[0])])
            continue
        if (s < -(K.mesh + tau)).all():
            return VietorisCertificate(Verdict.FALSE, [], f"no sample near U{i}")
        witnesses.append(None)
        undecided.append(f"U{i} only touched within the mesh")
    if undecided:
        return VietorisCertificate(Verdict.UNDECIDABLE, witnesses, "; ".join(undecided))
    return VietorisCertificate(Verdict.TRUE, witnesses, "")


# ---------------------------------------------------------------------------
# convergence reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    index: int
    n: Any
    estimate: float
    error_bound: float
    violation: bool = False


def converging_sequence_report(Ks: Sequence[SampleSet], K: SampleSet,
                               labels: Sequence[Any] | None = None) -> list[ReportRow]:
    """Hausdorff estimates of each K_i to K; flags increases beyond the error bounds."""
    labels = list(labels) if labels is not None else list(range(len(Ks)))
    rows: list[ReportRow] = []
    prev = None
    for i, (Ki, lab) in enumerate(zip(Ks, labels)):
        est, err = hausdorff_distance(Ki, K)
        bad = prev is not None and est - err > prev.estimate + prev.error_bound
        rows.append(ReportRow(i, lab, est, err, bad))
        prev = rows[-1]
    return rows


def report_csv(rows: Iterable[ReportRow], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "n", "estimate", "error_bound"])
    for r in rows:
        w.writerow([r.index, r.n, repr(r.estimate), repr(r.error_bound)])
    return buf.getvalue()
