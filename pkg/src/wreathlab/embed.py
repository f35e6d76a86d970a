"""Explicit embeddings of lamplighter-type groups into sequence spaces.

Lamplighter elements over a cycle or the line are passed as
``(x, j)``: a set of lit sites and the cursor position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import groups as gr
from . import rng
from .groups import GroupSpec, Word, WreathElement
from .sparse import SparseVec

MAX_CYCLE = 36


def _check_n(n: int, lo: int = 3):
    if not lo <= n <= MAX_CYCLE:
        raise ValueError(f"n={n} outside supported range [{lo}, {MAX_CYCLE}]")


def arcs(n: int, length: int) -> list:
    """The n arcs of the given length, as tuples of consecutive sites."""
    return [tuple((i + t) % n for t in range(length)) for i in range(n)]


def cycle_dist(a: int, b: int, n: int) -> int:
    d = (a - b) % n
    return min(d, n - d)


# ---------------------------------------------------------------- first cycle embedding


def cycle_first_scale(n: int) -> float:
    return n * n * 2 ** (n / 3)


def embed_cycle_first(x: Iterable[int], j: int, n: int, normalized: bool = True) -> SparseVec:
    """Sign pattern over subsets of short arcs, weighted 1 on the arc and n off it.

    Coordinates are ``("first", I, A, k)`` with I an arc of length floor(n/3),
    A a subset of I (bitmask over I's sites) and k in C_n.  With
    ``normalized=False`` the weights are integers (exact arithmetic) and the
    true vector is this one divided by :func:`cycle_first_scale`.
    """
    _check_n(n)
    m = n // 3
    xs = {s % n for s in x}
    N = cycle_first_scale(n) if normalized else 1
    out = {}
    for i, I in enumerate(arcs(n, m)):
        Iset = set(I)
        for k in range(n):
            shifted = {(s + k) % n for s in xs}
            hit = sum(1 << t for t, site in enumerate(I) if site in shifted)
            w = 1 if (k + j) % n in Iset else n
            for A in range(1 << m):
                sgn = -1 if bin(A & hit).count("1") & 1 else 1
                out[("first", i, A, k)] = sgn * w / N if normalized else sgn * w
    return SparseVec(out, 1)


def embed_cycle_l2(x: Iterable[int], j: int, n: int, s: float) -> SparseVec:
    """Hilbert-space variant: off-arc weight grows like sqrt(n) d(k+j, I)^(s-1/2)."""
    if not 0.5 < s < 1:
        raise ValueError("s must lie in (1/2, 1)")
    _check_n(n)
    m = n // 3
    xs = {t % n for t in x}
    N = n * 2 ** (n / 6)
    out = {}
    for i, I in enumerate(arcs(n, m)):
        Iset = set(I)
        dist = [min(cycle_dist(t, a, n) for a in I) for t in range(n)]
        for k in range(n):
            shifted = {(t + k) % n for t in xs}
            hit = sum(1 << b for b, site in enumerate(I) if site in shifted)
            t = (k + j) % n
            w = ((1.0 if t in Iset else 0.0) + math.sqrt(n) * dist[t] ** (s - 0.5)) / N
            for A in range(1 << m):
                sgn = -1 if bin(A & hit).count("1") & 1 else 1
                out[("l2", i, A, k)] = sgn * w
    return SparseVec(out, 2)


# ---------------------------------------------------------------- second cycle embedding


def all_arcs(n: int) -> list:
    """Proper nonempty arcs: (start, length) for length 1..n-1."""
    return [(a, L) for L in range(1, n) for a in range(n)]


def arc_interior(a: int, L: int, n: int) -> set:
    return {(a + t) % n for t in range(1, L - 1)}


def embed_cycle_second(x: Iterable[int], j: int, n: int) -> SparseVec:
    """Complex block n e^{2 pi i j/n} plus (1/n) v_{J, x cap J} over arcs J whose interior misses j."""
    if n < 3:
        raise ValueError("n must be at least 3")
    xs = {s % n for s in x}
    j %= n
    ang = 2 * math.pi * j / n
    out = {("scalar", 0): n * math.cos(ang), ("scalar", 1): n * math.sin(ang)}
    for a, L in all_arcs(n):
        if j in arc_interior(a, L, n):
            continue
        J = [(a + t) % n for t in range(L)]
        A = tuple(sorted(s for s in J if s in xs))
        out[("arc", a, L, A)] = Fraction(1, n)
    return SparseVec(out, 1)


# ---------------------------------------------------------------- line and plane


def _half_line_terms(x: set, j: int, lo: int, hi: int) -> dict:
    out = {}
    for k in range(lo, hi + 1):
        if k >= j:
            out[("ray+", k, tuple(sorted(s for s in x if s >= k)))] = 1
        if k <= j:
            out[("ray-", k, tuple(sorted(s for s in x if s <= k)))] = 1
    return out


def embed_line_l1(x: Iterable[int], j: int) -> SparseVec:
    """Position block plus the half-line pattern difference from the base point.

    Outside [min(x, 0, j), max(x, 0, j)] both half-line sums use the same
    coordinates, so only that window is evaluated.
    """
    xs = set(x)
    pts = list(xs) + [0, j]
    lo, hi = min(pts) - 1, max(pts) + 1
    diff = SparseVec(_half_line_terms(xs, j, lo, hi)) - SparseVec(_half_line_terms(set(), 0, lo, hi))
    out = {("position",): j}
    out.update(diff.entries)
    return SparseVec(out, 1)


def embed_z2(f: Iterable, x: tuple, alpha: float) -> SparseVec:
    """Plane lamplighter embedding into R^2 + l_2 over (centre, radius, pattern) keys.

    A term (y, r) is nonzero only if r < D/2 with D = |x - y|_inf and the box
    y + [-r, r]^2 meets the support; that forces |y - x|_inf < 2 max_z |z - x|_inf.
    """
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    pts = sorted({tuple(z) for z in f})
    x = tuple(x)
    out = {("scalar", 0): x[0], ("scalar", 1): x[1]}
    if not pts:
        return SparseVec(out, 2)
    P = np.array(pts)
    reach = int(np.max(np.abs(P - np.array(x)).max(axis=1)))
    expo = 1.5 - 2 * alpha
    for dy0 in range(-2 * reach + 1, 2 * reach):
        for dy1 in range(-2 * reach + 1, 2 * reach):
            D = max(abs(dy0), abs(dy1))
            if D == 0:
                continue
            y = (x[0] + dy0, x[1] + dy1)
            cheb = np.abs(P - np.array(y)).max(axis=1)
            order = np.argsort(cheb, kind="stable")
            scale = D ** -expo
            r = int(cheb[order[0]])
            while 2 * r < D:
                inside = tuple(pts[i] for i in order if cheb[i] <= r)
                out[("lattice", y, r, tuple(sorted(inside)))] = (1 - 2 * r / D) * scale
                r += 1
    return SparseVec(out, 2)


# ---------------------------------------------------------------- free group tree


def embed_free_group(w: Word, p: float = 1) -> SparseVec:
    """Indicator of the geodesic edges from e to w in the Cayley tree.

    The edge between a prefix u and its parent is keyed by u.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    return SparseVec({("tree-edge", u): 1 for u in w.prefixes()}, p)


def tree_translate(x: Word, v: SparseVec) -> SparseVec:
    """Left translation by x on oriented tree-edge coordinates.

    The edge {u', u} (u' the parent of u) goes to {x u', x u}; it is keyed by
    whichever endpoint is farther from e, with sign -1 when the orientation
    now points toward e.
    """
    def move(key):
        tag, u = key
        xu = x * u
        xp = x * Word._raw(u.letters[:-1])
        if len(xu) > len(xp):
            return (tag, xu), 1
        return (tag, xp), -1

    return v.relabel(move)


# ---------------------------------------------------------------- exponent algebra


@dataclass(frozen=True)
class CompressionParams:
    a: Fraction
    b: Fraction
    p: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("a", "b", "p"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (0 <= self.a <= 1 and 0 <= self.b <= 1):
            raise ValueError("a and b must lie in [0, 1]")
        if self.p < 1:
            raise ValueError("p must be >= 1")


def compression_composition(params: CompressionParams) -> Fraction:
    """Lower bound on the wreath exponent from base exponent a and lamp-metric exponent b."""
    a, b, p = params.a, params.b, params.p
    lo = min(a, b)
    if lo * p <= 1:
        return lo
    return min(b, a * b * p / (a * p + b * p - 1))


def iterated_alpha(k: int, p=2) -> list:
    """Exponents for Z, Z wr Z, (Z wr Z) wr Z, ... (lamp-metric exponent 1 at each step)."""
    out = [Fraction(1)]
    while len(out) < k:
        out.append(compression_composition(CompressionParams(out[-1], 1, p)))
    return out


# ---------------------------------------------------------------- cube


def cube_to_zwrz(eps) -> WreathElement:
    """Sign vector of length n to lamps n*eps_j at sites n+1..2n, cursor 0."""
    n = len(eps)
    if any(e not in (1, -1) for e in eps):
        raise ValueError("entries must be +1 or -1")
    return WreathElement({n + j: int(e) * n for j, e in enumerate(eps, start=1)}, 0)


# ---------------------------------------------------------------- Monte Carlo lifts


@dataclass
class GaussianLift:
    ratio: float
    stderr: float
    trials: int


def gaussian_lift_check(a, p: float, trials: int, seed: int) -> GaussianLift:
    """(E|sum a_j g_j|^p)^(1/p) / |a|_2 with real standard Gaussians g_j."""
    a = np.asarray(a, dtype=float)
    if p < 1:
        raise ValueError("p must be >= 1")
    nrm = float(np.linalg.norm(a))
    if nrm == 0:
        raise ValueError("a must be nonzero")
    keys = rng.stream_keys(seed, np.arange(trials))
    g = rng.normals(keys, 0, len(a))
    vals = np.abs(g @ a) ** p
    m = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    ratio = m ** (1 / p) / nrm
    return GaussianLift(ratio, ratio / (p * m) * se, trials)


@dataclass
class LiftReport:
    mean_sq: float
    stderr: float
    rho: int
    upper: float
    lower: float


def lift_bernoulli(theta: Callable, u: WreathElement, v: WreathElement, g: GroupSpec,
                   trials: int, seed: int, lipschitz: float = 1.0,
                   compression: float = 1.0, alpha: float = 1.0) -> LiftReport:
    """Monte Carlo E|theta(eps_u) - theta(eps_v)|_2^2 for the random C2 relabelling of lamps.

    ``theta(sites, cursor)`` embeds the C2 lamplighter over the same shape.
    Each base element z gets an independent fair bit eps_z, with eps_e = 0 so
    patterns stay finitely supported.  ``upper`` is lipschitz^2 rho^2 and
    ``lower`` is compression^2 rho^(2 alpha) / 2 for the exact lamp-metric
    distance rho.
    """
    from .metric import wreath_distance_exact

    if not gr.is_finite(g.base):
        raise ValueError("the base group must be finite")
    lam = gr.lamp_metric(g.base, g.shape)
    rho = wreath_distance_exact(gr.multiply(gr.inverse(u, lam), v, lam), lam)
    vals = sorted({val for _, val in u.lamps} | {val for _, val in v.lamps})
    keys = rng.stream_keys(seed, np.arange(trials))
    bits = (rng.words32(keys, 0, len(vals)) & np.uint64(1)).astype(np.int8)
    acc = np.empty(trials)
    cache: dict = {}
    for t in range(trials):
        on = {val for val, b in zip(vals, bits[t]) if b}
        xu = frozenset(s for s, val in u.lamps if val in on)
        xv = frozenset(s for s, val in v.lamps if val in on)
        key = (xu, xv)
        if key not in cache:
            cache[key] = (theta(xu, u.cursor) - theta(xv, v.cursor)).pnorm_pow(2)
        acc[t] = cache[key]
    se = float(acc.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return LiftReport(float(acc.mean()), se, rho, lipschitz ** 2 * rho ** 2,
                      compression ** 2 * rho ** (2 * alpha) / 2)


# ---------------------------------------------------------------- combined embedding


def combine_wreath_embedding(phi_out: SparseVec, psi: Callable, u: WreathElement,
                             p: float, base: GroupSpec | None = None) -> SparseVec:
    """phi(lamp pattern, cursor) + (psi(f(z)) - psi(e)) summed over sites z."""
    if phi_out.p is not None and phi_out.p != p:
        raise ValueError(f"phi block has p={phi_out.p}, expected {p}")
    zero = psi(gr.identity(base)) if base is not None else psi(0)
    lamp_block = {}
    for z, val in u.lamps:
        d = psi(val) - zero
        if d.p is not None and d.p != p:
            raise ValueError(f"psi block has p={d.p}, expected {p}")
        for k, c in d.entries.items():
            lamp_block[("sum", z, k)] = c
    return SparseVec.direct_sum(SparseVec(phi_out.entries), SparseVec(lamp_block), p=p)
