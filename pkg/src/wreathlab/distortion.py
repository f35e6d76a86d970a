"""Lipschitz constants, compression moduli and fitted compression exponents."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng
from .embed import all_arcs, arc_interior, cycle_dist
from .metric import cycle_tour


class FitError(ValueError):
    pass


@dataclass
class DistortionReport:
    pair_count: int
    lipschitz: float
    compression: float
    distortion: float
    alpha_hat: float = float("nan")
    bins: int = 0
    residual: float = float("nan")
    samples: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("samples")
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pair", "distance", "embedded"])
        for pid, d, e in self.samples:
            w.writerow([pid, d, repr(float(e))])
        return buf.getvalue()


def _ols(x: np.ndarray, y: np.ndarray):
    xc, yc = x - x.mean(), y - y.mean()
    slope = float((xc * yc).sum() / (xc * xc).sum())
    resid = y - (y.mean() + slope * xc)
    return slope, float(np.sqrt(np.mean(resid ** 2)))


def compression_exponent_fit(samples: Sequence) -> tuple:
    """Slope of the lower envelope of log(embedded) against log(distance).

    Distances below 2 are dropped; the rest are binned by floor(log2 d) and
    each bin contributes its minimum embedded distance (at that sample's d).
    """
    pts = [(float(d), float(e)) for d, e in samples if d >= 2]
    if len(pts) < 8:
        raise FitError(f"need at least 8 samples with distance >= 2, got {len(pts)}")
    best: dict = {}
    for d, e in pts:
        b = int(math.floor(math.log2(d)))
        if b not in best or (e, d) < best[b]:
            best[b] = (e, d)
    if len(best) < 3:
        raise FitError(f"need at least 3 nonempty bins, got {len(best)}")
    env = [best[b] for b in sorted(best)]
    if any(e <= 0 for e, _ in env):
        raise FitError("embedded distance 0 at positive distance")
    x = np.log([d for _, d in env])
    y = np.log([e for e, _ in env])
    slope, res = _ols(x, y)
    return slope, res, len(best)


def _report(samples: list, keep: bool = True) -> DistortionReport:
    ratios = [e / d for _, d, e in samples if d > 0]
    if not ratios:
        raise ValueError("no pairs at positive distance")
    L, c = max(ratios), min(ratios)
    rep = DistortionReport(len(ratios), L, c, L / c if c > 0 else math.inf,
                           samples=samples if keep else [])
    try:
        rep.alpha_hat, rep.residual, rep.bins = compression_exponent_fit(
            [(d, e) for _, d, e in samples])
    except FitError:
        pass
    return rep


def pairwise_report(points: Sequence, dist: Callable, emb: Callable, p: float = 1,
                    max_pairs: int = 100_000, seed: int = 0) -> DistortionReport:
    """Report over all unordered pairs, or a seeded subsample of ``max_pairs`` of them."""
    m = len(points)
    total = m * (m - 1) // 2
    if total == 0:
        raise ValueError("need at least two points")
    if total <= max_pairs:
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    else:
        keys = rng.stream_keys(seed, np.arange(max_pairs))
        w = rng.words32(keys, 0, 2)
        i = (w[:, 0] * np.uint64(m)) >> np.uint64(32)
        j = (w[:, 1] * np.uint64(m - 1)) >> np.uint64(32)
        j = j + (j >= i)
        pairs = list(zip(i.tolist(), j.tolist()))
    vecs = [emb(a) for a in points]
    samples = []
    for i, j in pairs:
        d = dist(points[i], points[j])
        if d == 0:
            continue
        samples.append((f"{i}-{j}", d, (vecs[i] - vecs[j]).norm(p)))
    if not samples:
        raise ValueError("all points are identical")
    return _report(samples)


# ---------------------------------------------------------------- exact small cases


def _rotl(x: np.ndarray, k: int, n: int) -> np.ndarray:
    full = (1 << n) - 1
    k %= n
    return ((x << k) | (x >> (n - k))) & full if k else x


def lamplighter_distances(n: int) -> np.ndarray:
    """rho((x, j), e) for all lamp masks x and cursors j, shape (2^n, n)."""
    out = np.empty((1 << n, n), dtype=np.int64)
    for mask in range(1 << n):
        sites = [s for s in range(n) if mask >> s & 1]
        for j in range(n):
            out[mask, j] = len(sites) + cycle_tour(sites, j, n)
    return out


def _hits_first(n: int) -> tuple:
    """hit[x, (i, k)] = arc i meets x + k, for arcs of length floor(n/3)."""
    m = n // 3
    xs = np.arange(1 << n, dtype=np.int64)
    cols = []
    index = []
    for i in range(n):
        Imask = sum(1 << ((i + t) % n) for t in range(m))
        for k in range(n):
            cols.append((_rotl(xs, k, n) & Imask) != 0)
            index.append((i, k))
    return np.stack(cols, axis=1), index, m


def first_distances(n: int) -> np.ndarray:
    """|f(x, j) - f(e)|_1 for the first embedding, by summing over subsets A in closed form.

    For a fixed arc and k, if the arc meets x + k then half the subsets flip
    sign; otherwise none do.
    """
    H, index, m = _hits_first(n)
    w = np.array([[1 if (t - i) % n < m else n for t in range(n)] for i in range(n)], dtype=np.int64)
    C = np.zeros(n, dtype=np.int64)
    M = np.zeros((len(index), n), dtype=np.int64)
    for r, (i, k) in enumerate(index):
        for j in range(n):
            a, b = w[i, (k + j) % n], w[i, k]
            C[j] += abs(a - b)
            M[r, j] = min(a, b)
    D = (1 << m) * (C[None, :] + H.astype(np.int64) @ M)
    return D / (n * n * 2 ** (n / 3))


def l2_distances(n: int, s: float) -> np.ndarray:
    H, index, m = _hits_first(n)
    N = n * 2 ** (n / 6)
    w = np.empty((n, n))
    for i in range(n):
        arc = [(i + t) % n for t in range(m)]
        for t in range(n):
            dd = min(cycle_dist(t, a, n) for a in arc)
            w[i, t] = (1.0 if t in arc else 0.0) + math.sqrt(n) * dd ** (s - 0.5)
    C = np.zeros(n)
    M = np.zeros((len(index), n))
    for r, (i, k) in enumerate(index):
        for j in range(n):
            a, b = w[i, (k + j) % n], w[i, k]
            C[j] += (a - b) ** 2
            M[r, j] = 2 * a * b
    sq = (1 << m) * (C[None, :] + H.astype(float) @ M)
    return np.sqrt(np.maximum(sq, 0.0)) / N


def second_distances(n: int) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    arcs = all_arcs(n)
    H = np.empty((1 << n, len(arcs)), dtype=np.int64)
    outside = np.empty((len(arcs), n), dtype=np.int64)
    for r, (a, L) in enumerate(arcs):
        Jmask = sum(1 << ((a + t) % n) for t in range(L))
        H[:, r] = (xs & Jmask) != 0
        inner = arc_interior(a, L, n)
        outside[r] = [0 if j in inner else 1 for j in range(n)]
    C = np.abs(outside - outside[:, :1]).sum(axis=0)
    M = 2 * np.minimum(outside, outside[:, :1])
    scalar = np.array([abs(n * (complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n)) - 1))
                       for j in range(n)])
    return scalar[None, :] + (C[None, :] + H @ M) / n


EMBEDDINGS = ("first", "second", "l2")


def exact_distortion_small(n: int, which: str = "first", s: float = 0.75) -> DistortionReport:
    """Exact distortion on all of C2 wr C_n from the pairs (u, e), by group invariance."""
    if not 3 <= n <= 12:
        raise ValueError("exact enumeration supports 3 <= n <= 12")
    if which == "first":
        E = first_distances(n)
    elif which == "second":
        E = second_distances(n)
    elif which == "l2":
        E = l2_distances(n, s)
    else:
        raise ValueError(f"unknown embedding {which!r}")
    R = lamplighter_distances(n)
    samples = [(f"{x}:{j}", int(R[x, j]), float(E[x, j]))
               for x in range(1 << n) for j in range(n) if R[x, j] > 0]
    return _report(samples)
