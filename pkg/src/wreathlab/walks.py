"""Simple random walks on Cayley graphs: speed, returns, visits, range, lamp statistics.

Step t of trial r uses the t-th 32-bit word of stream (seed, r) to pick a
generator uniformly (multiply-shift), and the walk moves by right
multiplication.  The vectorized kernels and the reference implementation
:func:`simulate_walk` consume identical streams, so they agree trial by
trial.  Trials are processed in blocks, possibly on several threads, and
per-trial results are reassembled in trial order before any reduction.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import groups as gr
from . import rng
from .groups import GroupSpec, WreathElement
from .metric import BallOverflowError, cycle_tour, distance, word_length

CHUNK = 2048
BLOCK_WORDS = 1 << 22


@dataclass
class WalkConfig:
    group: GroupSpec
    horizon: int
    trials: int
    seed: int = 0
    checkpoints: Optional[list] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if self.checkpoints is None:
            cps, t = [], 1
            while t <= self.horizon:
                cps.append(t)
                t *= 2
            self.checkpoints = cps
        self.checkpoints = sorted(set(int(t) for t in self.checkpoints))
        if self.checkpoints and (self.checkpoints[0] < 0 or self.checkpoints[-1] > self.horizon):
            raise ValueError("checkpoints must lie in [0, horizon]")


@dataclass
class WalkTrace:
    times: list
    elements: list


def simulate_walk(cfg: WalkConfig, trial: int) -> WalkTrace:
    """Reference walk for one trial: the element at time 0 and at each checkpoint."""
    g = cfg.group
    gens = gr.generators(g)
    stream = rng.TrialStream(cfg.seed, trial)
    a = gr.identity(g)
    times, els = [0], [a]
    want = set(cfg.checkpoints)
    for t in range(1, cfg.horizon + 1):
        a = gr._mul(a, gens[stream.choice(len(gens))], g)
        if t in want:
            times.append(t)
            els.append(a)
    return WalkTrace(times, els)


def distance_oracle(g: GroupSpec, budget: int = 200_000) -> Callable:
    """|a| by closed form when available, else by BFS; ``None`` when BFS overflows."""
    e = gr.identity(g)

    def d(a):
        try:
            return word_length(g, a)
        except ValueError:
            try:
                return distance(g, e, a, budget)
            except BallOverflowError:
                return None

    return d


# ---------------------------------------------------------------- kernels


class _Kernel:
    """Vectorized walk state for a block of trials."""

    def __init__(self, g: GroupSpec, B: int):
        self.g, self.B = g, B

    def advance(self, c: np.ndarray):
        raise NotImplementedError

    def dist(self) -> np.ndarray:
        raise NotImplementedError

    def at_identity(self) -> np.ndarray:
        raise NotImplementedError


class _Abelian(_Kernel):
    def __init__(self, g, B):
        super().__init__(g, B)
        gens = gr.generators(g)
        if g.kind == "lattice":
            self.steps = np.array(gens, dtype=np.int64)
        else:
            self.steps = np.array(gens, dtype=np.int64)[:, None]
        self.pos = np.zeros((B, self.steps.shape[1]), dtype=np.int64)

    def advance(self, c):
        self.pos += self.steps[c].sum(axis=1)
        if self.g.kind == "cyclic":
            self.pos %= self.g.n

    def dist(self):
        if self.g.kind == "cyclic":
            n = self.g.n
            p = self.pos[:, 0] % n
            return np.minimum(p, n - p) if n > 2 else p
        return np.abs(self.pos).sum(axis=1)

    def at_identity(self):
        return ~self.pos.any(axis=1)


class _Free(_Kernel):
    def __init__(self, g, B):
        super().__init__(g, B)
        self.letters = np.array([w.letters[0] for w in gr.generators(g)], dtype=np.int8)
        self.stack = np.zeros((B, 64), dtype=np.int8)
        self.length = np.zeros(B, dtype=np.int64)
        self.rows = np.arange(B)

    def advance(self, c):
        L = self.letters[c]
        need = int(self.length.max()) + c.shape[1] + 1
        if need > self.stack.shape[1]:
            grown = np.zeros((self.B, max(need, 2 * self.stack.shape[1])), dtype=np.int8)
            grown[:, : self.stack.shape[1]] = self.stack
            self.stack = grown
        rows, st, ln = self.rows, self.stack, self.length
        for t in range(L.shape[1]):
            l = L[:, t]
            top = st[rows, np.maximum(ln - 1, 0)]
            pop = (ln > 0) & (top == -l)
            st[rows, ln] = np.where(pop, st[rows, ln], l)
            ln += np.where(pop, -1, 1)

    def dist(self):
        return self.length.copy()

    def at_identity(self):
        return self.length == 0


def _base_dist(v: np.ndarray, G: GroupSpec) -> np.ndarray:
    if G.kind == "integers":
        return np.abs(v)
    m = G.n
    v = v % m
    return np.minimum(v, m - v) if m > 2 else v


class _LineWreath(_Kernel):
    """G wr Z with G = Z or C_m: dense lamp rows that widen as cursors spread."""

    def __init__(self, g, B):
        super().__init__(g, B)
        gens = gr.generators(g)
        G = g.base
        self.delta = np.array([u.lamps[0][1] if u.lamps else 0 for u in gens], dtype=np.int64)
        if G.kind == "cyclic":
            self.delta = np.where(self.delta > G.n // 2, self.delta - G.n, self.delta)
        self.move = np.array([0 if u.lamps else u.cursor for u in gens], dtype=np.int64)
        self.off = 64
        self.lamps = np.zeros((B, 2 * self.off + 1), dtype=np.int64)
        self.cursor = np.zeros(B, dtype=np.int64)

    def _widen(self, reach: int):
        if reach <= self.off:
            return
        new_off = max(reach, 2 * self.off)
        grown = np.zeros((self.B, 2 * new_off + 1), dtype=np.int64)
        s = new_off - self.off
        grown[:, s: s + self.lamps.shape[1]] = self.lamps
        self.lamps, self.off = grown, new_off

    def advance(self, c):
        pos = self.cursor[:, None] + np.cumsum(self.move[c], axis=1)
        self._widen(int(np.abs(pos).max()))
        d = self.delta[c]
        mask = d != 0
        W = self.lamps.shape[1]
        idx = (np.arange(self.B)[:, None] * W + pos + self.off)[mask]
        inc = np.bincount(idx, weights=d[mask], minlength=self.B * W)
        self.lamps += inc.reshape(self.B, W).astype(np.int64)
        if self.g.base.kind == "cyclic":
            self.lamps %= self.g.base.n
        self.cursor = pos[:, -1].copy()

    def dist(self):
        G = self.g.base
        v = self.lamps
        cost = _base_dist(v, G).sum(axis=1)
        nz = v != 0
        has = nz.any(axis=1)
        W = v.shape[1]
        first = np.argmax(nz, axis=1) - self.off
        last = W - 1 - np.argmax(nz[:, ::-1], axis=1) - self.off
        x = self.cursor
        lo = np.minimum(0, x)
        hi = np.maximum(0, x)
        lo = np.where(has, np.minimum(lo, first), lo)
        hi = np.where(has, np.maximum(hi, last), hi)
        return cost + 2 * (hi - lo) - np.abs(x)

    def at_identity(self):
        return (self.cursor == 0) & ~self.lamps.any(axis=1)


class _CycleWreath(_Kernel):
    """C_m wr C_n."""

    def __init__(self, g, B):
        super().__init__(g, B)
        gens = gr.generators(g)
        self.n, self.m = g.shape.n, g.base.n
        self.delta = np.array([u.lamps[0][1] if u.lamps else 0 for u in gens], dtype=np.int64)
        self.move = np.array([0 if u.lamps else u.cursor for u in gens], dtype=np.int64)
        self.lamps = np.zeros((B, self.n), dtype=np.int64)
        self.cursor = np.zeros(B, dtype=np.int64)

    def advance(self, c):
        pos = (self.cursor[:, None] + np.cumsum(self.move[c], axis=1)) % self.n
        d = self.delta[c]
        mask = d != 0
        idx = (np.arange(self.B)[:, None] * self.n + pos)[mask]
        inc = np.bincount(idx, weights=d[mask], minlength=self.B * self.n)
        self.lamps = (self.lamps + inc.reshape(self.B, self.n).astype(np.int64)) % self.m
        self.cursor = pos[:, -1].copy()

    def dist(self):
        cost = _base_dist(self.lamps, self.g.base).sum(axis=1)
        out = np.empty(self.B, dtype=np.int64)
        for b in range(self.B):
            sites = np.flatnonzero(self.lamps[b]).tolist()
            out[b] = cycle_tour(sites, int(self.cursor[b]), self.n)
        return cost + out

    def at_identity(self):
        return (self.cursor == 0) & ~self.lamps.any(axis=1)


class _Generic(_Kernel):
    """Element-by-element fallback for groups without a vectorized kernel."""

    def __init__(self, g, B):
        super().__init__(g, B)
        self.gens = gr.generators(g)
        self.els = [gr.identity(g)] * B
        self.oracle = distance_oracle(g)
        self.e = gr.identity(g)

    def advance(self, c):
        gens, g = self.gens, self.g
        for b in range(self.B):
            a = self.els[b]
            for s in c[b].tolist():
                a = gr._mul(a, gens[s], g)
            self.els[b] = a

    def dist(self):
        out = np.empty(self.B)
        for b, a in enumerate(self.els):
            d = self.oracle(a)
            out[b] = np.nan if d is None else d
        return out

    def at_identity(self):
        return np.array([a == self.e for a in self.els])


def kernel_for(g: GroupSpec, generic: bool = False):
    if generic:
        return _Generic
    if g.kind in ("cyclic", "integers", "lattice"):
        return _Abelian
    if g.kind == "free":
        return _Free
    if g.kind == "wreath" and g.base.kind in ("integers", "cyclic"):
        if g.shape.kind == "integers":
            return _LineWreath
        if g.shape.kind == "cyclic":
            return _CycleWreath
    return _Generic


def _blocks(trials: int, horizon: int, block: Optional[int]):
    if block is None:
        block = max(1, min(trials, BLOCK_WORDS // max(1, min(horizon, CHUNK))))
    return [(s, min(trials, s + block)) for s in range(0, trials, block)]


def _run_blocks(fn: Callable, trials: int, horizon: int, threads: Optional[int],
                block: Optional[int]) -> list:
    spans = _blocks(trials, horizon, block)
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(spans) == 1:
        return [fn(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda ab: fn(*ab), spans))


def _drive(cfg: WalkConfig, a: int, b: int, stops: list, probe: Callable, generic: bool) -> list:
    """Advance trials a..b-1 through ``stops``, calling ``probe(kernel)`` at each."""
    g = cfg.group
    k = len(gr.generators(g))
    keys = rng.stream_keys(cfg.seed, np.arange(a, b))
    K = kernel_for(g, generic)(g, b - a)
    out = []
    t = 0
    for stop in stops:
        while t < stop:
            u = min(stop, t + CHUNK)
            K.advance(rng.choices(keys, t, u, k))
            t = u
        out.append(probe(K))
    return out


# ---------------------------------------------------------------- speed


def _fit_loglog(t, y, tmin: float):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (t >= tmin) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return float("nan"), float("nan")
    x, z = np.log(t[ok]), np.log(y[ok])
    xc = x - x.mean()
    slope = float((xc * (z - z.mean())).sum() / (xc * xc).sum())
    resid = z - (z.mean() + slope * xc)
    return slope, float(np.sqrt(np.mean(resid ** 2)))


@dataclass
class SpeedEstimate:
    times: list
    mean: list
    stderr: list
    n_trials: int
    beta_hat: float
    residual: float
    truncated: int = 0
    per_trial: Optional[np.ndarray] = field(default=None, repr=False)

    def rows(self):
        return [(t, m, s, self.n_trials) for t, m, s in zip(self.times, self.mean, self.stderr)]


def walk_distances(cfg: WalkConfig, threads: Optional[int] = 1, block: Optional[int] = None,
                   generic: bool = False) -> np.ndarray:
    """Per-trial distances at each checkpoint, shape (trials, checkpoints)."""
    stops = cfg.checkpoints

    def run(a, b):
        cols = _drive(cfg, a, b, stops, lambda K: K.dist().astype(float), generic)
        return np.stack(cols, axis=1) if cols else np.zeros((b - a, 0))

    return np.concatenate(_run_blocks(run, cfg.trials, cfg.horizon, threads, block), axis=0)


def estimate_speed(cfg: WalkConfig, threads: Optional[int] = 1, block: Optional[int] = None,
                   generic: bool = False, tmin: int = 16) -> SpeedEstimate:
    D = walk_distances(cfg, threads, block, generic)
    bad = np.isnan(D)
    n = (~bad).sum(axis=0)
    mean = np.where(n > 0, np.nansum(D, axis=0) / np.maximum(n, 1), np.nan)
    sd = np.array([np.nanstd(D[:, i], ddof=1) if n[i] > 1 else np.nan for i in range(D.shape[1])])
    se = sd / np.sqrt(np.maximum(n, 1))
    beta, res = _fit_loglog(cfg.checkpoints, mean, tmin)
    return SpeedEstimate(list(cfg.checkpoints), mean.tolist(), se.tolist(), cfg.trials,
                         beta, res, int(bad.any(axis=1).sum()), D)


# ---------------------------------------------------------------- returns


def is_bipartite(g: GroupSpec) -> bool:
    """Whether some homomorphism onto Z/2 sends every generator to 1.

    Then every relation has even length and odd-time returns are impossible.
    """
    if g.kind in ("integers", "lattice", "free"):
        return True
    if g.kind == "cyclic":
        return g.n % 2 == 0
    if g.kind == "lamp":
        return g.base.kind == "cyclic" and g.base.n == 2 and is_bipartite(g.shape)
    return is_bipartite(g.base) and is_bipartite(g.shape)


@dataclass
class ReturnCurve:
    times: list
    raw: list
    raw_next: list
    paired: list
    stderr: list
    reliable: list
    n_trials: int
    slope: float = float("nan")
    residual: float = float("nan")
    bipartite: bool = False
    stretched_slope: float = float("nan")

    def rows(self):
        return [(t, p, s, self.n_trials) for t, p, s in zip(self.times, self.paired, self.stderr)]


def estimate_return(cfg: WalkConfig, threads: Optional[int] = 1, block: Optional[int] = None,
                    generic: bool = False, tmin: int = 8, min_hits: int = 10) -> ReturnCurve:
    """Pr[W_t = e] + Pr[W_{t+1} = e] at each checkpoint t.

    Checkpoints whose expected hit count falls below ``min_hits`` are flagged
    unreliable and left out of the slope fit.
    """
    cps = cfg.checkpoints
    stops = sorted(set(cps) | {t + 1 for t in cps})
    hcfg = WalkConfig(cfg.group, max(stops), cfg.trials, cfg.seed, stops)

    def run(a, b):
        cols = _drive(hcfg, a, b, stops, lambda K: K.at_identity().astype(np.int64), generic)
        return np.stack(cols, axis=1)

    hits = np.concatenate(_run_blocks(run, cfg.trials, hcfg.horizon, threads, block), axis=0)
    col = {t: i for i, t in enumerate(stops)}
    raw, nxt, paired, se, rel = [], [], [], [], []
    for t in cps:
        x = hits[:, col[t]] + hits[:, col[t + 1]]
        raw.append(float(hits[:, col[t]].mean()))
        nxt.append(float(hits[:, col[t + 1]].mean()))
        paired.append(float(x.mean()))
        se.append(float(x.std(ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else float("nan"))
        rel.append(bool(x.sum() >= min_hits))
    curve = ReturnCurve(list(cps), raw, nxt, paired, se, rel, cfg.trials,
                        bipartite=is_bipartite(cfg.group))
    good_t = [t for t, r in zip(cps, rel) if r]
    good_p = [p for p, r in zip(paired, rel) if r]
    curve.slope, curve.residual = _fit_loglog(good_t, good_p, tmin)
    if cfg.group.is_product:
        s = [t ** (1 / 3) * math.log(t) ** (2 / 3) for t in good_t if t >= 2]
        lp = [math.log(p) for t, p in zip(good_t, good_p) if t >= 2 and p > 0]
        if len(s) >= 2 and len(s) == len(lp):
            curve.stretched_slope = float(np.polyfit(s, lp, 1)[0])
    return curve


# ---------------------------------------------------------------- visits and range


def psi(kind: str, n: int) -> float:
    """Expected number of returns scale: sqrt(n), 1 + log n, or 1 by growth regime."""
    if kind == "linear":
        return math.sqrt(n)
    if kind == "quadratic":
        return 1 + math.log(n)
    return 1.0


def growth_regime(g: GroupSpec) -> str:
    if g.kind == "integers":
        return "linear"
    if g.kind == "lattice" and g.n == 2:
        return "quadratic"
    if g.kind == "free" or (g.kind == "lattice" and g.n > 2):
        return "transient"
    raise ValueError(f"visit statistics support Z, Z^2 and free groups, not {g}")


@dataclass
class VisitRangeStats:
    times: list
    beta: float
    visits: list
    visits_se: list
    visits_beta: list
    visits_beta_se: list
    range_mean: list
    range_se: list
    psi: list
    n_trials: int

    def rows(self):
        return list(zip(self.times, self.visits, self.visits_se, self.visits_beta,
                        self.visits_beta_se, self.range_mean, self.range_se, self.psi))


_H1 = np.uint64(0x9E3779B97F4A7C15)


def _path_block(cfg: WalkConfig, a: int, b: int) -> tuple:
    """Visit counts and distinct-site counts at each checkpoint for trials a..b-1."""
    g = cfg.group
    k = len(gr.generators(g))
    keys = rng.stream_keys(cfg.seed, np.arange(a, b))
    B = b - a
    T = cfg.horizon
    c = rng.choices(keys, 0, T, k) if T else np.zeros((B, 0), dtype=np.int8)
    if g.kind == "free":
        codes = _free_codes(g, c)
    else:
        steps = np.array(gr.generators(g), dtype=np.int64).reshape(k, -1)
        pos = np.zeros((B, T + 1, steps.shape[1]), dtype=np.int64)
        np.cumsum(steps[c], axis=1, out=pos[:, 1:])
        if steps.shape[1] == 1:
            codes = pos[:, :, 0]
        else:
            span = 2 * T + 1
            codes = pos[:, :, 0] * span + pos[:, :, 1]
    at_e = codes == 0
    visits = np.cumsum(at_e, axis=1)
    V, R = [], []
    for t in cfg.checkpoints:
        V.append(visits[:, t])
        if g.kind == "integers":
            pre = codes[:, : t + 1]
            R.append(pre.max(axis=1) - pre.min(axis=1) + 1)
        else:
            srt = np.sort(codes[:, : t + 1], axis=1)
            R.append(1 + (np.diff(srt, axis=1) != 0).sum(axis=1))
    return np.stack(V, axis=1), np.stack(R, axis=1)


def _free_codes(g: GroupSpec, c: np.ndarray) -> np.ndarray:
    """A 64-bit hash of the current reduced word after every step (0 = identity)."""
    B, T = c.shape
    letters = np.array([w.letters[0] for w in gr.generators(g)], dtype=np.int64)
    stack_h = np.zeros((B, T + 2), dtype=np.uint64)
    stack_l = np.zeros((B, T + 2), dtype=np.int64)
    ln = np.zeros(B, dtype=np.int64)
    rows = np.arange(B)
    out = np.zeros((B, T + 1), dtype=np.uint64)
    for t in range(T):
        l = letters[c[:, t]]
        pop = (ln > 0) & (stack_l[rows, np.maximum(ln, 1)] == -l)
        push = ~pop
        prev = stack_h[rows, ln]
        with np.errstate(over="ignore"):
            h = rng._mix_array(prev * _H1 + (l + 64).astype(np.uint64)) | np.uint64(1)
        nl = ln + 1
        stack_h[rows[push], nl[push]] = h[push]
        stack_l[rows[push], nl[push]] = l[push]
        ln = np.where(pop, ln - 1, nl)
        out[:, t + 1] = stack_h[rows, ln]
    return out


def visits_and_range(cfg: WalkConfig, beta: float = 0.5, threads: Optional[int] = 1,
                     block: Optional[int] = None) -> VisitRangeStats:
    """X_n = #{0 <= k <= n: W_k = e} and |{W_0, ..., W_n}| at each checkpoint n."""
    regime = growth_regime(cfg.group)
    if block is None:
        block = max(1, min(cfg.trials, (1 << 21) // max(1, cfg.horizon + 1)))
    parts = _run_blocks(lambda a, b: _path_block(cfg, a, b), cfg.trials, cfg.horizon, threads, block)
    V = np.concatenate([p[0] for p in parts], axis=0).astype(float)
    R = np.concatenate([p[1] for p in parts], axis=0).astype(float)
    n = cfg.trials
    se = (lambda A: (A.std(axis=0, ddof=1) / math.sqrt(n)).tolist() if n > 1 else [math.nan] * A.shape[1])
    Vb = V ** beta
    return VisitRangeStats(list(cfg.checkpoints), beta, V.mean(axis=0).tolist(), se(V),
                           Vb.mean(axis=0).tolist(), se(Vb), R.mean(axis=0).tolist(), se(R),
                           [psi(regime, t) for t in cfg.checkpoints], n)


# ---------------------------------------------------------------- lamp statistics


@dataclass
class LampStats:
    n: int
    trials: int
    chi2: float
    chi2_pvalue: float
    cursor_mean: float
    cursor_se: float
    direct_mean: float
    direct_se: float
    lamp_mean: float
    lamp_se: float
    resampled_mean: float
    resampled_se: float
    relative_gap: float
    visits_mean: float


def _steps_for(G: GroupSpec) -> np.ndarray:
    return np.array(gr.generators(G), dtype=np.int64)


def wreath_lamp_statistics(G: GroupSpec, H: GroupSpec, n: int, trials: int, seed: int) -> LampStats:
    """Compare the lamp at e_H with a G-walk run for the matching number of steps.

    The walk uses the switch-walk-switch generators g1 h g2: multiply the lamp
    at the current site by g1, move by h, multiply the lamp at the new site by
    g2.  One 32-bit draw selects the triple.  The lamp at e_H receives
    K = 2 T_e - 1 - [W_n = e_H] independent G-steps, T_e counting visits to
    e_H at times 0..n; the comparison walk is W^G_K with K resampled from its
    empirical distribution.  The cursor is also compared with an independent
    H-walk by a two-sample chi-square test.
    """
    from scipy.stats import chi2_contingency

    for grp in (G, H):
        if grp.kind not in ("integers", "cyclic"):
            raise ValueError("G and H must be Z or a cyclic group")
    sg, sh = _steps_for(G), _steps_for(H)
    kg, kh = len(sg), len(sh)
    keys = rng.stream_keys(rng.derive_seed(seed, "lamp-walk"), np.arange(trials))
    wrap = (lambda v: v % H.n) if H.kind == "cyclic" else (lambda v: v)
    if n:
        c = rng.choices(keys, 0, n, kg * kg * kh).astype(np.int64)
        g1, rest = c % kg, c // kg
        h, g2 = rest % kh, rest // kh
        pos = np.zeros((trials, n + 1), dtype=np.int64)
        pos[:, 1:] = wrap(np.cumsum(sh[h], axis=1))
        at0 = pos == 0
        lamp = (sg[g1] * at0[:, :-1]).sum(axis=1) + (sg[g2] * at0[:, 1:]).sum(axis=1)
    else:
        pos = np.zeros((trials, 1), dtype=np.int64)
        at0 = pos == 0
        lamp = np.zeros(trials, dtype=np.int64)
    T_e = at0.sum(axis=1)
    final = pos[:, -1]
    K = 2 * T_e - 1 - (final == 0)
    lamp_d = _base_dist(lamp, G).astype(float)

    rkeys = rng.stream_keys(rng.derive_seed(seed, "lamp-resample"), np.arange(trials))
    pick = ((rng.words32(rkeys, 0, 1)[:, 0] * np.uint64(trials)) >> np.uint64(32)).astype(np.int64)
    Kr = K[pick]
    kmax = int(Kr.max()) if trials else 0
    if kmax:
        gw = sg[rng.choices(rkeys, 2, 2 + kmax, kg).astype(np.int64)]
        gw = np.where(np.arange(kmax)[None, :] < Kr[:, None], gw, 0)
        res_d = _base_dist(gw.sum(axis=1), G).astype(float)
    else:
        res_d = np.zeros(trials)

    dkeys = rng.stream_keys(rng.derive_seed(seed, "lamp-direct"), np.arange(trials))
    direct = wrap(sh[rng.choices(dkeys, 0, n, kh).astype(np.int64)].sum(axis=1)) if n else np.zeros(trials, dtype=np.int64)

    def summ(x):
        x = np.asarray(x, dtype=float)
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0

    a_abs = np.abs(final) if H.kind == "integers" else _base_dist(final, H)
    b_abs = np.abs(direct) if H.kind == "integers" else _base_dist(direct, H)
    cm, cse = summ(a_abs)
    dm, dse = summ(b_abs)
    lm, lse = summ(lamp_d)
    rm, rse = summ(res_d)
    vals = np.union1d(final, direct)
    if len(vals) > 1:
        table = np.array([[np.sum(final == v) for v in vals], [np.sum(direct == v) for v in vals]])
        table = table[:, table.sum(axis=0) > 0]
        chi2, pval, _, _ = chi2_contingency(table)
    else:
        chi2, pval = 0.0, 1.0
    gap = abs(lm - rm) / max(lm, rm) if max(lm, rm) > 0 else 0.0
    return LampStats(n, trials, float(chi2), float(pval), cm, cse, dm, dse, lm, lse, rm, rse,
                     gap, float(T_e.mean()))
