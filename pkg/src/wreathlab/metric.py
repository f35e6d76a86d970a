"""Word metrics: BFS balls, exact wreath distances, lamp-metric formulas, J(r)."""
from __future__ import annotations

import csv
import io
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import groups as gr
from .groups import GroupSpec, Word, WreathElement
from .notation import format_element


class BallOverflowError(RuntimeError):
    """BFS visited more states than the budget allows."""


class UnsupportedShapeError(ValueError):
    pass


class MetricCheckError(AssertionError):
    pass


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------- BFS


@dataclass
class DistanceTable:
    center: object
    radius: int
    dist: dict

    def __len__(self):
        return len(self.dist)

    def __getitem__(self, a):
        return self.dist[a]

    def __contains__(self, a):
        return a in self.dist

    def sphere(self, k: int) -> list:
        return [a for a, d in self.dist.items() if d == k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["element", "distance"])
        for a, d in self.dist.items():
            w.writerow([format_element(a), d])
        return buf.getvalue()


def bfs_ball(g: GroupSpec, r: int, budget: int = 2_000_000, center=None) -> DistanceTable:
    """Exact ball of radius ``r`` about ``center`` (default identity).

    Iteration order is deterministic: spheres in order, each sphere in the
    order its elements were discovered.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    c = gr.identity(g) if center is None else center
    nbrs = gr.right_neighbours(g)
    dist = {c: 0}
    frontier = [c]
    for k in range(1, r + 1):
        nxt = []
        for a in frontier:
            for b in nbrs(a):
                if b not in dist:
                    dist[b] = k
                    nxt.append(b)
        if len(dist) > budget:
            raise BallOverflowError(f"ball of radius {r} in {g} exceeds {budget} states")
        frontier = nxt
    return DistanceTable(c, r, dist)


def distance(g: GroupSpec, a, b, budget: int = 2_000_000) -> int:
    """d(a, b) = |a^-1 b| by breadth-first search from the identity."""
    target = gr.multiply(gr.inverse(a, g), b, g)
    e = gr.identity(g)
    if target == e:
        return 0
    nbrs = gr.right_neighbours(g)
    seen = {e}
    frontier = [e]
    k = 0
    while frontier:
        k += 1
        nxt = []
        for x in frontier:
            for y in nbrs(x):
                if y == target:
                    return k
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > budget:
            raise BallOverflowError(f"distance search in {g} exceeds {budget} states")
        frontier = nxt
    raise ValueError("target unreachable")


# ---------------------------------------------------------------- closed forms


def word_length(g: GroupSpec, a) -> int:
    """|a| with respect to the canonical generators, by closed form when one is known."""
    k = g.kind
    if k == "cyclic":
        a %= g.n
        return 1 if g.n == 2 and a else min(a, g.n - a)
    if k == "integers":
        return abs(a)
    if k == "lattice":
        return sum(abs(c) for c in a)
    if k == "free":
        return len(a)
    if g.shape.kind in ("integers", "cyclic"):
        return wreath_distance_exact(a, g)
    return wreath_distance_tsp(a, g)


def _lamp_cost(u: WreathElement, g: GroupSpec) -> int:
    if g.kind == "lamp":
        return len(u.lamps)
    return sum(word_length(g.base, v) for _, v in u.lamps)


def line_tour(sites, x: int) -> int:
    """Shortest walk on Z from 0 to ``x`` visiting every site."""
    pts = list(sites) + [0, x]
    lo, hi = min(pts), max(pts)
    return 2 * (hi - lo) - abs(x)


def cycle_tour(sites, x: int, n: int) -> int:
    """Shortest walk on the n-cycle from 0 to ``x`` visiting every site.

    The walk lifts to Z, ending at a lift of ``x`` and sweeping an interval
    [L, R]; such a walk costs 2(R - L) - |lift|.  Every site not already in
    the interval spanned by 0 and the lift is reached either by extending R
    or by extending L, and after sorting, the sites reached by R form a prefix.
    """
    x %= n
    sites = {s % n for s in sites}
    best = None
    for xt in (x - n, x, x + n):
        a, b = min(0, xt), max(0, xt)
        if b - a >= n - 1:
            cost = 2 * (b - a) - abs(xt)
        else:
            reps = sorted(s + n * ((b - s) // n + 1) for s in sites)
            reps = [t for t in reps if b < t < a + n]
            cost = None
            for i in range(len(reps) + 1):
                hi = max(b, reps[i - 1]) if i else b
                lo = min(a, reps[i] - n) if i < len(reps) else a
                c = 2 * (hi - lo) - abs(xt)
                cost = c if cost is None else min(cost, c)
        best = cost if best is None else min(best, cost)
    return best


def cycle_tour_brute(sites, x: int, n: int) -> int:
    """Reference for :func:`cycle_tour`: enumerate all lifted sweep intervals."""
    x %= n
    need = {s % n for s in sites}
    best = None
    for lo in range(-2 * n, 1):
        for hi in range(0, 2 * n + 1):
            covered = {t % n for t in range(lo, hi + 1)}
            if not need <= covered:
                continue
            for xt in range(lo, hi + 1):
                if xt % n == x:
                    c = 2 * (hi - lo) - abs(xt)
                    best = c if best is None else min(best, c)
    return best


def wreath_distance_exact(u: WreathElement, g: GroupSpec) -> int:
    """|u| in G wr Z or G wr C_n: lamp cost plus the shortest covering walk."""
    if not g.is_product:
        raise UnsupportedShapeError(f"{g} is not a wreath product")
    shape = g.shape
    sites = u.support
    if shape.kind == "integers":
        tour = line_tour(sites, u.cursor)
    elif shape.kind == "cyclic":
        tour = cycle_tour(sites, u.cursor, shape.n)
    else:
        raise UnsupportedShapeError(f"no closed form for shape {shape}")
    return _lamp_cost(u, g) + tour


def wreath_distance_tsp(u: WreathElement, g: GroupSpec, max_sites: int = 14) -> int:
    """|u| for any shape with a word-length oracle, by Held-Karp over the support.

    Exponential in the support size; meant for small configurations.
    """
    H = g.shape
    e = gr.identity(H)
    pts = [s for s in u.support if s != e]
    m = len(pts)
    if m > max_sites:
        raise ValueError(f"support of size {m} exceeds max_sites={max_sites}")

    def dh(a, b):
        return word_length(H, gr.multiply(gr.inverse(a, H), b, H))

    x = u.cursor
    if m == 0:
        return _lamp_cost(u, g) + dh(e, x)
    start = [dh(e, p) for p in pts]
    pair = [[dh(p, q) for q in pts] for p in pts]
    end = [dh(p, x) for p in pts]
    full = (1 << m) - 1
    INF = float("inf")
    best = [[INF] * m for _ in range(1 << m)]
    for i in range(m):
        best[1 << i][i] = start[i]
    for mask in range(1, full + 1):
        row = best[mask]
        for i in range(m):
            c = row[i]
            if c == INF:
                continue
            for j in range(m):
                if not mask >> j & 1:
                    nm = mask | 1 << j
                    v = c + pair[i][j]
                    if v < best[nm][j]:
                        best[nm][j] = v
    tour = min(best[full][i] + end[i] for i in range(m))
    return _lamp_cost(u, g) + int(tour)


# ---------------------------------------------------------------- lamp metric formula


def lamp_metric_formula(u: WreathElement, v: WreathElement, g: GroupSpec) -> int:
    """Cursor displacement plus the farthest differing lamp (distance + 1).

    Shape Z uses |i - j| + max{|k| + 1}; shape C_n measures both terms with
    the cycle metric.  The max over an empty set is 0.
    """
    shape = g.shape
    fu, fv = u.lamp_map(), v.lamp_map()
    diff = [k for k in set(fu) | set(fv) if fu.get(k) != fv.get(k)]
    if shape.kind == "integers":
        far = max((abs(k) + 1 for k in diff), default=0)
        return abs(u.cursor - v.cursor) + far
    if shape.kind == "cyclic":
        n = shape.n
        far = max((word_length(shape, k) + 1 for k in diff), default=0)
        return word_length(shape, (u.cursor - v.cursor) % n) + far
    raise UnsupportedShapeError(f"no formula for shape {shape}")


@dataclass
class RatioReport:
    sample_size: int
    min_ratio: float
    max_ratio: float
    records: list = field(default_factory=list)

    @property
    def window(self) -> float:
        return self.max_ratio / self.min_ratio

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pair", "exact", "formula", "ratio"])
        for pid, exact, formula in self.records:
            w.writerow([pid, exact, formula, repr(exact / formula)])
        return buf.getvalue()


def check_metric_equivalence(g: GroupSpec, r: int, budget: int = 2_000_000) -> RatioReport:
    """Compare exact lamp-metric distances on B(e, r) with :func:`lamp_metric_formula`.

    Also enforces that the number of lit lamps never exceeds the distance.
    """
    table = bfs_ball(g, r, budget)
    e = table.center
    recs = []
    lo, hi = math.inf, 0.0
    for u, d in table.dist.items():
        if len(u.lamps) > d:
            raise MetricCheckError(f"{format_element(u)} has {len(u.lamps)} lamps at distance {d}")
        if d == 0:
            continue
        f = lamp_metric_formula(u, e, g)
        recs.append((format_element(u), d, f))
        ratio = d / f
        lo, hi = min(lo, ratio), max(hi, ratio)
    return RatioReport(len(recs), lo, hi, recs)


# ---------------------------------------------------------------- Poincare constants


@dataclass
class PoincareReport:
    radii: list
    J: list
    alpha_hat: float
    residual: float
    iterations: list = field(default_factory=list)


def dirichlet_matrix(g: GroupSpec, r: int, budget: int = 2_000_000):
    """Q = 2(|S| I - A) on B(e, r), where A counts left-multiplication edges s*x inside the ball."""
    table = bfs_ball(g, r, budget)
    index = {a: i for i, a in enumerate(table.dist)}
    gens = gr.generators(g)
    rows, cols = [], []
    for a, i in index.items():
        for s in gens:
            j = index.get(gr._mul(s, a, g))
            if j is not None:
                rows.append(i)
                cols.append(j)
    m = len(index)
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    return 2.0 * (len(gens) * sp.identity(m, format="csr") - A), len(gens)


def smallest_eigenvalue(Q, shift: float, tol: float, max_iter: int = 100_000):
    """Smallest eigenvalue of a PSD matrix by power iteration on shift*I - Q.

    Starts from the normalized all-ones vector.  Stops when the residual
    ||Qv - lam v|| drops below tol * lam.
    """
    m = Q.shape[0]
    v = np.full(m, 1.0 / math.sqrt(m))
    for it in range(1, max_iter + 1):
        Qv = Q @ v
        lam = float(v @ Qv)
        res = np.linalg.norm(Qv - lam * v)
        if res <= tol * lam:
            return lam, it
        w = shift * v - Qv
        v = w / np.linalg.norm(w)
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def poincare_J(g: GroupSpec, radii, tol: float = 1e-9, max_iter: int = 100_000,
               budget: int = 2_000_000) -> PoincareReport:
    """J(r) = lambda_min(Q_r)^(-1/2) for each radius, and the log-log slope of J."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    Js, its = [], []
    for r in radii:
        Q, deg = dirichlet_matrix(g, r, budget)
        lam, it = smallest_eigenvalue(Q, 4.0 * deg, tol, max_iter)
        Js.append(lam ** -0.5)
        its.append(it)
    pos = [(r, j) for r, j in zip(radii, Js) if r > 0]
    if len(pos) >= 2:
        x = np.log([r for r, _ in pos])
        y = np.log([j for _, j in pos])
        slope, icpt = np.polyfit(x, y, 1)
        residual = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        alpha = float(slope)
    else:
        alpha, residual = float("nan"), float("nan")
    return PoincareReport(list(radii), Js, alpha, residual, its)


def J_closed_form_integers(r: int) -> float:
    """J(r) for Z with generators +-1: the Dirichlet path Laplacian on 2r+1 sites."""
    return (4.0 * (1.0 - math.cos(math.pi / (2 * r + 2)))) ** -0.5
