"""Numerical checks of smoothness, martingale, cocycle and cube inequalities."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import groups as gr
from . import rng
from .embed import cube_to_zwrz, embed_free_group, tree_translate
from .groups import Word
from .metric import wreath_distance_exact
from .sparse import SparseVec
from .walks import WalkConfig, walk_distances

EXACT_TOL = 1e-9


@dataclass
class Verdict:
    name: str
    max_violation: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return json.dumps(d, sort_keys=True, default=float)


@dataclass(frozen=True)
class SmoothnessParams:
    """Power type p, ambient l_q norm and the smoothness constant S used."""

    p: float
    q: float
    S: float = float("nan")

    def __post_init__(self):
        if not 1 < self.p <= 2:
            raise ValueError("p must lie in (1, 2]")
        if self.q < self.p:
            raise ValueError("q must be >= p")
        if math.isnan(self.S):
            if self.q == self.p:
                S = 1.0
            elif self.p == 2:
                S = math.sqrt(self.q - 1)
            else:
                raise ValueError("no smoothness constant known for this (p, q); pass S")
            object.__setattr__(self, "S", S)
        if self.S <= 0:
            raise ValueError("S must be positive")

    @property
    def pisier_constant(self) -> float:
        return self.S ** self.p / (2 ** (self.p - 1) - 1)

    @property
    def growth_constant(self) -> float:
        return 2 ** (2 * self.p) * self.S ** self.p / (2 ** (self.p - 1) - 1)


def _qnorm(v: np.ndarray, q: float) -> np.ndarray:
    return (np.abs(v) ** q).sum(axis=-1) ** (1 / q)


def _sample_pairs(dim: int, trials: int, seed: int):
    keys = rng.stream_keys(seed, np.arange(trials))
    z = rng.normals(keys, 0, 2 * dim + 2)
    x, y = z[:, :dim], z[:, dim: 2 * dim]
    # spread the relative size of y over six decades and sparsify half the samples
    scale = 10.0 ** (3 * np.tanh(z[:, -1]))
    y = y * scale[:, None]
    sparse = z[:, -2] > 0
    y[sparse] = np.where(np.abs(y[sparse]) > np.median(np.abs(y[sparse]), axis=1, keepdims=True), y[sparse], 0)
    return x, y


def two_point_smoothness(params: SmoothnessParams, dim: int, trials: int, seed: int) -> Verdict:
    """max of (|x+y|^p + |x-y|^p - 2|x|^p - 2 S^p |y|^p) / (|x|^p + |y|^p) over random pairs."""
    x, y = _sample_pairs(dim, trials, seed)
    p, q, S = params.p, params.q, params.S
    nx, ny = _qnorm(x, q) ** p, _qnorm(y, q) ** p
    lhs = _qnorm(x + y, q) ** p + _qnorm(x - y, q) ** p
    rhs = 2 * nx + 2 * S ** p * ny
    viol = (lhs - rhs) / (nx + ny)
    worst = float(viol.max())
    return Verdict("two-point-smoothness", worst, EXACT_TOL, worst <= EXACT_TOL,
                   {"p": p, "q": q, "S": S, "trials": trials, "dim": dim})


def _martingale_table(keys: np.ndarray, n: int, dim: int) -> np.ndarray:
    """Increment vectors v[k, s] for step k and state s (the previous two signs)."""
    z = rng.normals(keys, 0, n * 4 * dim + n)
    tab = z[:, : n * 4 * dim].reshape(-1, n, 4, dim)
    amp = np.exp(z[:, n * 4 * dim:])[:, :, None, None]
    return tab * amp


def _state(signs: np.ndarray, k: int) -> np.ndarray:
    a = signs[..., k - 1] > 0 if k >= 1 else np.zeros(signs.shape[:-1], bool)
    b = signs[..., k - 2] > 0 if k >= 2 else np.zeros(signs.shape[:-1], bool)
    return a.astype(int) + 2 * b.astype(int)


def martingale_moments(tables: np.ndarray, p: float, q: float) -> tuple:
    """Exact E|M_n - M_0|_q^p and sum_k E|M_(k+1) - M_k|_q^p over all 2^n sign sequences.

    ``tables`` has shape (batch, n, 4, dim): the increment at step k in state s.
    """
    tables = np.asarray(tables, dtype=float)
    B, n, _, dim = tables.shape
    signs = np.array(list(itertools.product((-1, 1), repeat=n)), dtype=float).reshape(-1, n)
    M = np.zeros((B, len(signs), dim))
    inc = np.zeros((B, len(signs)))
    for k in range(n):
        v = tables[:, k][:, _state(signs, k)]
        M += signs[None, :, k, None] * v
        inc += _qnorm(v, q) ** p
    return (_qnorm(M, q) ** p).mean(axis=1), inc.mean(axis=1)


def pisier_martingale_check(params: SmoothnessParams, n: int, dim: int, trials: int, seed: int,
                            mode: str = "auto") -> Verdict:
    """E|M_n - M_0|^p against S^p / (2^(p-1) - 1) * sum_k E|M_(k+1) - M_k|^p.

    Martingales are dyadic: M_k = sum_i eps_i v_i with fair signs eps_i and
    v_i chosen from a random table by the two previous signs.  In ``exact``
    mode (n <= 12) each table's expectations are computed over all 2^n sign
    sequences and the largest ratio is reported.  In ``mc`` mode each trial
    draws its own table and signs; that pooled process is again a
    martingale, and LHS - RHS is tested against 3 standard errors.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "auto":
        mode = "exact" if n <= 12 else "mc"
    p, q, C = params.p, params.q, params.pisier_constant
    keys = rng.stream_keys(seed, np.arange(trials))
    tabs = _martingale_table(keys, n, dim)
    if mode == "exact":
        if n > 12:
            raise ValueError("exact mode supports n <= 12")
        worst = 0.0
        step = max(1, (1 << 22) // ((1 << n) * dim))
        for s0 in range(0, trials, step):
            lhs, inc = martingale_moments(tabs[s0: s0 + step], p, q)
            rhs = C * inc
            ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1), 0.0)
            worst = max(worst, float(ratio.max()))
        viol = worst - 1
        return Verdict("pisier-martingale", viol, EXACT_TOL, viol <= EXACT_TOL,
                       {"mode": mode, "max_ratio": worst, "n": n, "p": p, "q": q})
    bits = rng.words32(keys, 2 * (n * 4 * dim + n) + 2, 2 * (n * 4 * dim + n) + 2 + n) & np.uint64(1)
    signs = np.where(bits == 1, 1.0, -1.0)
    M = np.zeros((trials, dim))
    inc = np.zeros(trials)
    rows = np.arange(trials)
    for k in range(n):
        v = tabs[rows, k, _state(signs, k)]
        M += signs[:, k, None] * v
        inc += _qnorm(v, q) ** p
    D = _qnorm(M, q) ** p - C * inc
    mean = float(D.mean())
    se = float(D.std(ddof=1) / math.sqrt(trials))
    ratio = float((_qnorm(M, q) ** p).mean() / (C * inc.mean()))
    return Verdict("pisier-martingale", mean, 3 * se, mean <= 3 * se,
                   {"mode": mode, "ratio": ratio, "stderr": se, "n": n, "p": p, "q": q})


# ---------------------------------------------------------------- the free-group cocycle


@dataclass
class CocycleSystem:
    """Tree cocycle on F_k: f = geodesic edge indicator, pi = left translation."""

    rank: int = 2
    p: float = 2.0

    @property
    def group(self):
        return gr.free(self.rank)

    def f(self, w: Word) -> SparseVec:
        return embed_free_group(w, self.p)

    def pi(self, x: Word, v: SparseVec) -> SparseVec:
        return tree_translate(x, v)


def _free_steps(rank: int, trials: int, t: int, seed: int) -> list:
    gens = gr.generators(gr.free(rank))
    keys = rng.stream_keys(seed, np.arange(trials))
    c = rng.choices(keys, 0, t, len(gens)) if t else np.zeros((trials, 0), dtype=np.int8)
    return [[gens[i] for i in row] for row in c.tolist()]


def cocycle_identity_check(t: int, trials: int, seed: int, rank: int = 2) -> Verdict:
    """Largest coordinate gap between 2 f(W_t) and the two telescoping sums (integers)."""
    sys_ = CocycleSystem(rank)
    worst = 0
    norm_gap = 0
    for steps in _free_steps(rank, trials, t, seed):
        W = Word()
        rhs = SparseVec()
        for s in steps:
            prev = W
            W = W * s
            rhs = rhs + sys_.pi(prev, sys_.f(s)) - sys_.pi(W, sys_.f(s.inverse()))
        gap = sys_.f(W).scale(2) - rhs
        worst = max(worst, max((abs(v) for _, v in gap), default=0))
        norm_gap = max(norm_gap, abs(sys_.f(W).pnorm_pow(1) - len(W)))
    return Verdict("cocycle-identity", worst, 0, worst == 0 and norm_gap == 0,
                   {"t": t, "trials": trials, "norm_gap": norm_gap})


def free_walk_exact_mean(t: int, rank: int = 2, power: float = 1.0) -> float:
    """E[|W_t|^power] on F_rank by enumerating all (2 rank)^t step sequences."""
    gens = gr.generators(gr.free(rank))
    total = 0.0
    for seq in itertools.product(gens, repeat=t):
        w = Word()
        for s in seq:
            w = w * s
        total += len(w) ** power
    return total / len(gens) ** t


@dataclass
class RatioCurve:
    times: list
    ratio: list
    stderr: list
    verdict: Verdict

    def rows(self):
        return list(zip(self.times, self.ratio, self.stderr))


def _free_lengths(t_grid, trials: int, seed: int, rank: int = 2) -> np.ndarray:
    cfg = WalkConfig(gr.free(rank), max(t_grid), trials, seed, list(t_grid))
    return walk_distances(cfg)


def cocycle_growth_check(params: SmoothnessParams, t_grid, trials: int, seed: int) -> RatioCurve:
    """E|f(W_t)|_q^p / (C_p t E|f(W_1)|_q^p) for the tree cocycle in l_q.

    |f(x)|_q^p = |x|^(p/q) exactly, and |f(W_1)| = 1.
    """
    t_grid = sorted(t_grid)
    D = _free_lengths(t_grid, trials, seed) ** (params.p / params.q)
    C = params.growth_constant
    ratios, ses, worst = [], [], -math.inf
    for i, t in enumerate(t_grid):
        r = D[:, i] / (C * t)
        m, se = float(r.mean()), float(r.std(ddof=1) / math.sqrt(trials))
        ratios.append(m)
        ses.append(se)
        worst = max(worst, m - 1 - 3 * se)
    doubling = [ratios[i + 1] / ratios[i] for i in range(len(t_grid) - 1)
                if t_grid[i + 1] == 2 * t_grid[i] and ratios[i] > 0]
    v = Verdict("cocycle-growth", worst, 0.0, worst <= 0,
                {"C_p": C, "max_ratio": max(ratios), "max_doubling": max(doubling, default=float("nan"))})
    return RatioCurve(t_grid, ratios, ses, v)


def hilbert_doubling_check(t_grid, trials: int, seed: int) -> RatioCurve:
    """E|f(W_2t)|^2 / (2 E|f(W_t)|^2) for the tree cocycle in l_2, i.e. E|W_2t| / (2 E|W_t|)."""
    t_grid = sorted(t for t in t_grid if t >= 1)
    grid = sorted(set(t_grid) | {2 * t for t in t_grid})
    D = _free_lengths(grid, trials, seed)
    col = {t: i for i, t in enumerate(grid)}
    ratios, ses, worst = [], [], -math.inf
    for t in t_grid:
        a, b = D[:, col[2 * t]], D[:, col[t]]
        diff = a - 2 * b
        se_d = float(diff.std(ddof=1) / math.sqrt(trials))
        denom = 2 * float(b.mean())
        ratios.append(float(a.mean()) / denom)
        ses.append(se_d / denom)
        worst = max(worst, float(diff.mean()) - 3 * se_d)
    v = Verdict("hilbert-doubling", worst, 0.0, worst <= 0, {"max_ratio": max(ratios)})
    return RatioCurve(t_grid, ratios, ses, v)


# ---------------------------------------------------------------- cube experiments


@dataclass
class EnfloRow:
    n: int
    p: float
    diagonal: float
    edge_sum: float
    ratio: float
    exact: bool


def enflo_ratio(n_grid, p: float, samples: int = 4096, seed: int = 0) -> list:
    """R(n, p) = E d(f(eps), f(-eps))^p / sum_j E d(f(eps), f(eps^j))^p with exact Z wr Z distances.

    The cube is enumerated for n <= 12 and sampled above.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    g = gr.wreath(gr.integers(), gr.integers())
    rows = []
    for n in n_grid:
        if n <= 12:
            pts = itertools.product((-1, 1), repeat=n)
            exact = True
        else:
            keys = rng.stream_keys(seed, np.arange(samples))
            bits = rng.words32(keys, 0, n) & np.uint64(1)
            pts = (tuple(1 if b else -1 for b in row) for row in bits.tolist())
            exact = False
        diag = 0.0
        edges = [0.0] * n
        count = 0
        for eps in pts:
            u = cube_to_zwrz(eps)
            ui = gr.inverse(u, g)

            def d(v):
                return wreath_distance_exact(gr.multiply(ui, v, g), g)

            diag += d(cube_to_zwrz([-e for e in eps])) ** p
            for j in range(n):
                flip = list(eps)
                flip[j] = -flip[j]
                edges[j] += d(cube_to_zwrz(flip)) ** p
            count += 1
        rows.append(EnfloRow(n, p, diag / count, sum(edges) / count,
                             (diag / count) / (sum(edges) / count), exact))
    return rows


def cube_distance_formulas(n: int) -> tuple:
    """Diagonal 2n^2 + 4n and edge 2n + 2(n + j) distances for the cube image."""
    return 2 * n * n + 4 * n, [2 * n + 2 * (n + j) for j in range(1, n + 1)]


@dataclass
class MarkovResult:
    n: int
    p: float
    times: list
    khat: list
    stderr: list
    sup: float
    edge_mc: float
    edge_mc_se: float
    edge_direct: float
    start_chi2_pvalue: float

    def rows(self):
        return list(zip(self.times, self.khat, self.stderr))


def markov_ratio(n: int, p: float, t_grid, trials: int, seed: int) -> MarkovResult:
    """K(t)^p = E d^p(f(Z_t), f(Z_0)) / (t E d^p(f(Z_1), f(Z_0))) for the lazy walk on the cube.

    Z_0 is uniform; each step draws one of 2n outcomes, the first n meaning
    stay and the rest flipping one coordinate.  With H coordinates differing
    and the highest differing index jmax, the image distance is
    2nH + 2(n + jmax).
    """
    from scipy.stats import chisquare

    if p >= 2 or p < 1:
        raise ValueError("the Markov experiment takes 1 <= p < 2")
    grid = sorted(set(t_grid) | {1})
    keys = rng.stream_keys(seed, np.arange(trials))
    z0 = rng.words32(keys, 0, n) & np.uint64(1)
    T = max(grid)
    c = rng.choices(keys, n, n + T, 2 * n).astype(np.int64)
    flips = np.zeros((trials, n), dtype=bool)
    D = {}
    rows = np.arange(trials)
    idx = np.arange(1, n + 1)
    for t in range(1, T + 1):
        mv = c[:, t - 1]
        hit = mv >= n
        flips[rows[hit], mv[hit] - n] ^= True
        if t in grid:
            H = flips.sum(axis=1)
            jmax = (flips * idx).max(axis=1)
            D[t] = np.where(H > 0, 2 * n * H + 2 * (n + jmax), 0).astype(float) ** p
    base = float(D[1].mean())
    khat, ses = [], []
    for t in grid:
        khat.append(float(D[t].mean()) / (t * base))
        ses.append(float(D[t].std(ddof=1) / math.sqrt(trials)) / (t * base))
    direct = 0.5 * sum((4 * n + 2 * j) ** p for j in range(1, n + 1)) / n
    codes = (z0.astype(np.int64) << np.arange(n)).sum(axis=1)
    counts = np.bincount(codes, minlength=1 << n)
    pval = float(chisquare(counts).pvalue) if trials >= 5 * (1 << n) else float("nan")
    return MarkovResult(n, p, grid, khat, ses, max(khat), base,
                        float(D[1].std(ddof=1) / math.sqrt(trials)), direct, pval)
