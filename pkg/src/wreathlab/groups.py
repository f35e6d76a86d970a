"""Concrete finitely generated groups and their elements.

Element representations, by group kind:

* ``cyclic(n)``: an ``int`` residue in ``0..n-1``
* ``integers``: an ``int``
* ``lattice(d)``: a ``tuple`` of ``d`` ints
* ``free(k)``: a reduced :class:`Word`
* ``wreath(G, H)`` and ``lamp(G, H)``: a :class:`WreathElement`

All elements are immutable and canonical on construction, so they can be
hashed, compared and used as BFS keys directly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional


class GroupKindError(ValueError):
    """Element does not belong to the group it was used with."""


# ---------------------------------------------------------------- words


@dataclass(frozen=True, order=True)
class Word:
    """Reduced word in a free group; letter ``i`` is generator ``i`` and ``-i`` its inverse."""

    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce(self.letters))

    @classmethod
    def _raw(cls, letters: tuple) -> "Word":
        w = object.__new__(cls)
        object.__setattr__(w, "letters", letters)
        return w

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        a, b = self.letters, other.letters
        i = 0
        m = min(len(a), len(b))
        while i < m and a[-1 - i] == -b[i]:
            i += 1
        return Word._raw(a[: len(a) - i] + b[i:])

    def inverse(self) -> "Word":
        return Word._raw(tuple(-x for x in reversed(self.letters)))

    def prefixes(self) -> Iterator["Word"]:
        """Nonempty prefixes, shortest first."""
        for i in range(1, len(self.letters) + 1):
            yield Word._raw(self.letters[:i])

    def __str__(self):
        return "".join(chr(96 + x) if x > 0 else chr(64 - x) for x in self.letters)


def _reduce(letters: Iterable[int]) -> tuple:
    out: list = []
    for x in letters:
        x = int(x)
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


# ---------------------------------------------------------------- wreath elements


def _is_identity(v) -> bool:
    if isinstance(v, WreathElement):
        return not v.lamps and _is_identity(v.cursor)
    if isinstance(v, Word):
        return not v.letters
    if isinstance(v, tuple):
        return all(c == 0 for c in v)
    return v == 0


@dataclass(frozen=True)
class WreathElement:
    """A pair (lamp configuration, cursor).

    ``lamps`` is stored as a tuple of ``(site, value)`` pairs sorted by site,
    with identity values removed.  A ``dict`` is accepted on construction.
    """

    lamps: tuple = ()
    cursor: object = 0

    def __post_init__(self):
        items = self.lamps.items() if isinstance(self.lamps, dict) else self.lamps
        clean = tuple(sorted((k, v) for k, v in items if not _is_identity(v)))
        keys = [k for k, _ in clean]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate lamp site")
        object.__setattr__(self, "lamps", clean)

    @classmethod
    def _raw(cls, lamps: tuple, cursor) -> "WreathElement":
        u = object.__new__(cls)
        object.__setattr__(u, "lamps", lamps)
        object.__setattr__(u, "cursor", cursor)
        return u

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self.lamps)

    def lamp_map(self) -> dict:
        return dict(self.lamps)


# ---------------------------------------------------------------- group specs


@dataclass(frozen=True)
class GroupSpec:
    """A group with its fixed symmetric generating set."""

    kind: str
    n: int = 0
    base: Optional["GroupSpec"] = None
    shape: Optional["GroupSpec"] = None
    _gens: tuple = field(default=(), compare=False, repr=False)

    KINDS = ("cyclic", "integers", "lattice", "free", "wreath", "lamp")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind in ("cyclic", "lattice", "free") and self.n < 1:
            raise ValueError(f"{self.kind} needs n >= 1")
        if self.kind in ("wreath", "lamp") and (self.base is None or self.shape is None):
            raise ValueError("wreath products need a base and a shape")
        if self.kind == "lamp" and not is_finite(self.base):
            raise ValueError("lamp-metric needs a finite base group")
        object.__setattr__(self, "_gens", tuple(_generators(self)))

    @property
    def is_product(self) -> bool:
        return self.kind in ("wreath", "lamp")

    def __str__(self):
        if self.kind == "cyclic":
            return f"C{self.n}"
        if self.kind == "integers":
            return "Z"
        if self.kind == "lattice":
            return f"Z^{self.n}"
        if self.kind == "free":
            return f"F{self.n}"
        op = "wr" if self.kind == "wreath" else "lamp"
        return f"({self.base} {op} {self.shape})"


def cyclic(n: int) -> GroupSpec:
    return GroupSpec("cyclic", n)


def integers() -> GroupSpec:
    return GroupSpec("integers")


def lattice(d: int) -> GroupSpec:
    return GroupSpec("lattice", d)


def free(k: int) -> GroupSpec:
    if k > 26:
        raise ValueError("at most 26 free generators")
    return GroupSpec("free", k)


def wreath(base: GroupSpec, shape: GroupSpec) -> GroupSpec:
    return GroupSpec("wreath", base=base, shape=shape)


def lamp_metric(base: GroupSpec, shape: GroupSpec) -> GroupSpec:
    """Wreath product whose base generators are all non-identity base elements."""
    if not is_finite(base):
        raise ValueError("lamp-metric needs a finite base group")
    return GroupSpec("lamp", base=base, shape=shape)


def is_finite(g: GroupSpec) -> bool:
    if g.kind == "cyclic":
        return True
    if g.is_product:
        return is_finite(g.base) and is_finite(g.shape)
    return False


def order(g: GroupSpec) -> int:
    if g.kind == "cyclic":
        return g.n
    if g.is_product and is_finite(g):
        return order(g.base) ** order(g.shape) * order(g.shape)
    raise ValueError(f"{g} is infinite")


# ---------------------------------------------------------------- arithmetic


def identity(g: GroupSpec):
    k = g.kind
    if k in ("cyclic", "integers"):
        return 0
    if k == "lattice":
        return (0,) * g.n
    if k == "free":
        return Word._raw(())
    return WreathElement._raw((), identity(g.shape))


def contains(g: GroupSpec, a) -> bool:
    k = g.kind
    if k == "cyclic":
        return isinstance(a, int) and 0 <= a < g.n
    if k == "integers":
        return isinstance(a, int)
    if k == "lattice":
        return isinstance(a, tuple) and len(a) == g.n and all(isinstance(c, int) for c in a)
    if k == "free":
        return isinstance(a, Word) and all(abs(x) <= g.n for x in a.letters)
    if not isinstance(a, WreathElement) or not contains(g.shape, a.cursor):
        return False
    return all(contains(g.shape, s) and contains(g.base, v) for s, v in a.lamps)


def _check(g: GroupSpec, *xs):
    for x in xs:
        if not contains(g, x):
            raise GroupKindError(f"{x!r} is not an element of {g}")


def multiply(a, b, g: GroupSpec):
    _check(g, a, b)
    return _mul(a, b, g)


def _mul(a, b, g: GroupSpec):
    k = g.kind
    if k == "cyclic":
        return (a + b) % g.n
    if k == "integers":
        return a + b
    if k == "lattice":
        return tuple(x + y for x, y in zip(a, b))
    if k == "free":
        return a * b
    H, G = g.shape, g.base
    x = a.cursor
    lamps = dict(a.lamps)
    for s, v in b.lamps:
        z = _mul(x, s, H)
        w = _mul(lamps[z], v, G) if z in lamps else v
        if _is_identity(w):
            lamps.pop(z, None)
        else:
            lamps[z] = w
    return WreathElement._raw(tuple(sorted(lamps.items())), _mul(x, b.cursor, H))


def inverse(a, g: GroupSpec):
    _check(g, a)
    return _inv(a, g)


def _inv(a, g: GroupSpec):
    k = g.kind
    if k == "cyclic":
        return (-a) % g.n
    if k == "integers":
        return -a
    if k == "lattice":
        return tuple(-c for c in a)
    if k == "free":
        return a.inverse()
    xi = _inv(a.cursor, g.shape)
    lamps = sorted((_mul(xi, s, g.shape), _inv(v, g.base)) for s, v in a.lamps)
    return WreathElement._raw(tuple(lamps), xi)


def canonicalize(a, g: Optional[GroupSpec] = None):
    """Normal form of ``a``; reduces residues mod n when the group is given."""
    if isinstance(a, Word):
        return Word(a.letters)
    if isinstance(a, WreathElement):
        if g is None:
            return WreathElement(
                tuple((s, canonicalize(v)) for s, v in dict(a.lamps).items()),
                canonicalize(a.cursor),
            )
        lamps = {}
        for s, v in dict(a.lamps).items():
            lamps[canonicalize(s, g.shape)] = canonicalize(v, g.base)
        return WreathElement(lamps, canonicalize(a.cursor, g.shape))
    if isinstance(a, list):
        return tuple(a)
    if g is not None and g.kind == "cyclic":
        return a % g.n
    return a


def generators(g: GroupSpec) -> list:
    return list(g._gens)


def _generators(g: GroupSpec) -> list:
    k = g.kind
    if k == "cyclic":
        return sorted({1 % g.n, (-1) % g.n} - {0}, key=lambda s: (s != 1 % g.n, s))
    if k == "integers":
        return [1, -1]
    if k == "lattice":
        out = []
        for i in range(g.n):
            for sgn in (1, -1):
                out.append(tuple(sgn if j == i else 0 for j in range(g.n)))
        return out
    if k == "free":
        return [Word._raw((s * i,)) for i in range(1, g.n + 1) for s in (1, -1)]
    base_gens = generators(g.base) if k == "wreath" else [
        e for e in elements(g.base) if not _is_identity(e)
    ]
    e_h = identity(g.shape)
    lamp_gens = [WreathElement._raw(((e_h, s),), e_h) for s in base_gens]
    moves = [WreathElement._raw((), t) for t in generators(g.shape)]
    return lamp_gens + moves


def elements(g: GroupSpec) -> Iterator:
    """All elements of a finite group, in a fixed order."""
    if g.kind == "cyclic":
        yield from range(g.n)
        return
    if not (g.is_product and is_finite(g)):
        raise ValueError(f"{g} is infinite")
    sites = list(elements(g.shape))
    vals = list(elements(g.base))
    for x in sites:
        for combo in itertools.product(vals, repeat=len(sites)):
            lamps = tuple((s, v) for s, v in zip(sites, combo) if not _is_identity(v))
            yield WreathElement._raw(lamps, x)


def power(a, m: int, g: GroupSpec):
    if m < 0:
        a, m = inverse(a, g), -m
    out = identity(g)
    for _ in range(m):
        out = _mul(out, a, g)
    return out


def right_neighbours(g: GroupSpec) -> Callable:
    """Return ``a -> [a*s for s in generators(g)]``, specialised for speed."""
    gens = generators(g)
    if not g.is_product:
        return lambda a: [_mul(a, s, g) for s in gens]
    H, G = g.shape, g.base
    steps = [t.cursor for t in gens if not t.lamps]
    lamp_vals = [t.lamps[0][1] for t in gens if t.lamps]

    def nbrs(a):
        x = a.cursor
        out = []
        lamps = a.lamps
        cur = None
        idx = None
        for i, (s, v) in enumerate(lamps):
            if s == x:
                cur, idx = v, i
                break
        for val in lamp_vals:
            w = _mul(cur, val, G) if cur is not None else val
            if idx is not None:
                if _is_identity(w):
                    new = lamps[:idx] + lamps[idx + 1:]
                else:
                    new = lamps[:idx] + ((x, w),) + lamps[idx + 1:]
            else:
                new = tuple(sorted(lamps + ((x, w),)))
            out.append(WreathElement._raw(new, x))
        for t in steps:
            out.append(WreathElement._raw(lamps, _mul(x, t, H)))
        return out

    return nbrs


# ---------------------------------------------------------------- registry

REGISTRY_HELP = "z, z2, cn:<n>, f2, c2wrz, zwrz, c2wrcn:<n>, zwrz2, iterated:<k>"


def iterated(k: int) -> GroupSpec:
    """Z for k = 1, then repeatedly G -> G wr Z."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = integers()
    for _ in range(k - 1):
        g = wreath(g, integers())
    return g


def group_from_name(name: str) -> GroupSpec:
    head, _, arg = name.partition(":")
    fixed = {
        "z": integers, "z2": lambda: lattice(2), "f2": lambda: free(2),
        "c2wrz": lambda: wreath(cyclic(2), integers()),
        "zwrz": lambda: wreath(integers(), integers()),
        "zwrz2": lambda: wreath(integers(), lattice(2)),
    }
    if head in fixed and not arg:
        return fixed[head]()
    try:
        k = int(arg)
    except ValueError:
        raise ValueError(f"unknown group {name!r}; known: {REGISTRY_HELP}") from None
    if head == "cn" and k >= 1:
        return cyclic(k)
    if head == "c2wrcn" and k >= 1:
        return wreath(cyclic(2), cyclic(k))
    if head == "iterated":
        return iterated(k)
    raise ValueError(f"unknown group {name!r}; known: {REGISTRY_HELP}")
