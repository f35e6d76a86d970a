"""Finitely supported vectors over symbolic coordinates.

Coordinates are hashable keys.  Keys whose first entry is ``"scalar"``
belong to a Euclidean block, so a complex number stored as two real
coordinates contributes its modulus.  Direct sums nest summands under
``("sum", i, key)``; each summand keeps its own scalar block.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Callable, Iterable, Optional


class SparseVec:
    __slots__ = ("entries", "p")

    def __init__(self, entries: Optional[dict] = None, p: Optional[float] = None):
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}
        self.p = p

    @classmethod
    def from_pairs(cls, pairs: Iterable, p=None) -> "SparseVec":
        acc: dict = {}
        for k, v in pairs:
            acc[k] = acc.get(k, 0) + v
        return cls(acc, p)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.items())

    def __getitem__(self, k):
        return self.entries.get(k, 0)

    def __eq__(self, other):
        return isinstance(other, SparseVec) and self.entries == other.entries

    def __repr__(self):
        return f"SparseVec({len(self.entries)} entries, p={self.p})"

    def _merged_p(self, other):
        if self.p is not None and other.p is not None and self.p != other.p:
            raise ValueError(f"p mismatch: {self.p} vs {other.p}")
        return self.p if self.p is not None else other.p

    def __add__(self, other: "SparseVec") -> "SparseVec":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SparseVec(out, self._merged_p(other))

    def __neg__(self):
        return SparseVec({k: -v for k, v in self.entries.items()}, self.p)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + (-other)

    def scale(self, c) -> "SparseVec":
        return SparseVec({k: c * v for k, v in self.entries.items()}, self.p)

    def relabel(self, fn: Callable) -> "SparseVec":
        """Apply ``fn(key) -> (new_key, sign)`` to every coordinate."""
        out: dict = {}
        for k, v in self.entries.items():
            k2, sgn = fn(k)
            out[k2] = out.get(k2, 0) + sgn * v
        return SparseVec(out, self.p)

    # ----- norms

    def blocks(self) -> dict:
        """Group coordinates into norm blocks: scalar keys share a block per summand."""
        out: dict = {}
        for k, v in self.entries.items():
            out.setdefault(_block_id(k), []).append(v)
        return out

    def pnorm_pow(self, p: float = 1):
        """Sum over blocks of |block|^p; exact for rational entries when p = 1 and no scalar blocks."""
        total = 0
        for bid, vals in self.blocks().items():
            if bid[0] == "block":
                mag = math.sqrt(sum(float(v) ** 2 for v in vals))
                total += mag ** p
            else:
                (v,) = vals
                total += _abs_pow(v, p)
        return total

    def norm(self, p: Optional[float] = None) -> float:
        p = self.p if p is None else p
        if p is None:
            raise ValueError("norm needs p")
        return float(self.pnorm_pow(p)) ** (1.0 / p)

    # ----- combination and serialization

    @staticmethod
    def direct_sum(*vecs: "SparseVec", p: Optional[float] = None) -> "SparseVec":
        out: dict = {}
        for i, v in enumerate(vecs):
            if p is not None and v.p is not None and v.p != p:
                raise ValueError(f"summand {i} has p={v.p}, expected {p}")
            for k, x in v.entries.items():
                out[("sum", i, k)] = x
        return SparseVec(out, p)

    def to_json(self) -> str:
        return json.dumps({_key_str(k): float(v) for k, v in sorted(self.entries.items(), key=lambda kv: _key_str(kv[0]))})


def _abs_pow(v, p):
    a = abs(v)
    if p == 1 or a == 1:
        return a
    if isinstance(v, (int, Fraction)) and float(p).is_integer():
        return a ** int(p)
    return float(a) ** p


def _block_id(key) -> tuple:
    path = []
    k = key
    while isinstance(k, tuple) and len(k) == 3 and k[0] == "sum":
        path.append(k[1])
        k = k[2]
    if isinstance(k, tuple) and k and k[0] == "scalar":
        return ("block", tuple(path))
    return ("coord", key)


def _key_str(k) -> str:
    if isinstance(k, tuple):
        return "(" + ",".join(_key_str(x) for x in k) + ")"
    if isinstance(k, frozenset):
        return "{" + ",".join(sorted(_key_str(x) for x in k)) + "}"
    return str(k)
