"""Named test functions and seeded random piecewise-linear profiles.

Named functions (closed forms, so documentation examples can be checked
by hand):

``tent``
    ``1 - |t|`` on ``[-1, 1]``.
``plateau``
    ``1`` on ``[-1, 1]``, linear down to 0 at ``+-2``.
``twobump``
    The tent plus two bumps of height ``c`` centred at ``+-4`` (half width
    1), with ``c`` solved so that at ``x = 0`` and ``beta = 1/2`` the two
    local maxima of ``r -> r^beta avg_{[-r, r]} f`` have equal value: a
    point with two distinct good radii.
``sawtooth``
    Alternating ``+-1`` at the integers ``1..7``, zero at 0 and 8.

Radial versions use the restriction of the even named profile to
``[0, inf)``; random radial profiles live directly on the half line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .geometry import line_average
from .profile import PiecewiseLinearProfile, RadialFunction

NAMES = ("tent", "plateau", "twobump", "sawtooth", "zero")
TIE_BETA = 0.5


def tent() -> PiecewiseLinearProfile:
    return PiecewiseLinearProfile([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])


def plateau() -> PiecewiseLinearProfile:
    return PiecewiseLinearProfile([-2.0, -1.0, 1.0, 2.0], [0.0, 1.0, 1.0, 0.0])


def sawtooth() -> PiecewiseLinearProfile:
    vals = [0.0] + [(-1.0) ** (i + 1) for i in range(7)] + [0.0]
    return PiecewiseLinearProfile(np.arange(9.0), vals)


def _twobump_with(c: float) -> PiecewiseLinearProfile:
    return PiecewiseLinearProfile(
        [-5.0, -4.0, -3.0, -1.0, 0.0, 1.0, 3.0, 4.0, 5.0],
        [0.0, c, 0.0, 0.0, 1.0, 0.0, 0.0, c, 0.0],
    )


def _local_max(p: PiecewiseLinearProfile, lo: float, hi: float, beta: float) -> float:
    res = minimize_scalar(
        lambda r: -(r**beta) * float(line_average(p, 0.0, r)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return -float(res.fun)


@lru_cache(maxsize=None)
def twobump_height(beta: float = TIE_BETA) -> float:
    """Bump height giving a good-radius tie at the origin for ``beta``."""
    small = _local_max(_twobump_with(0.0), 1e-6, 1.0, beta)

    def gap(c):
        return _local_max(_twobump_with(c), 3.0, 5.5, beta) - small

    return float(brentq(gap, 0.05, 3.0, xtol=1e-15, rtol=1e-15))


def twobump() -> PiecewiseLinearProfile:
    return _twobump_with(twobump_height())


def zero() -> PiecewiseLinearProfile:
    return PiecewiseLinearProfile.zero()


_REGISTRY = {"tent": tent, "plateau": plateau, "twobump": twobump, "sawtooth": sawtooth, "zero": zero}


def named_profile(name: str) -> PiecewiseLinearProfile:
    """Line profile of a named function."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(NAMES)}") from None


def named_function(name: str, d: int = 1):
    """Named function on the line (``d == 1``) or its radial version in ``R^d``."""
    p = named_profile(name)
    if d == 1:
        return p
    if name == "zero":
        return RadialFunction(d, PiecewiseLinearProfile([0.0, 1.0], [0.0, 0.0], half_line=True))
    return RadialFunction(d, p.restrict_half_line())


def random_profile(
    rng: np.random.Generator,
    knot_range: tuple = (4, 24),
    support: tuple = (0.0, 10.0),
    value_range: tuple = (-1.0, 1.0),
    half_line: bool = False,
    origin_value: bool = False,
) -> PiecewiseLinearProfile:
    """Random continuous piecewise-linear profile with endpoint values 0.

    With ``half_line`` and ``origin_value`` the first knot is placed at 0
    with a random (nonzero) value, as allowed for radial profiles.
    """
    n = int(rng.integers(knot_range[0], knot_range[1] + 1))
    a, b = support
    while True:
        knots = np.sort(rng.uniform(a, b, n))
        if np.all(np.diff(knots) > 1e-6 * (b - a)):
            break
    values = rng.uniform(value_range[0], value_range[1], n)
    values[-1] = 0.0
    if half_line and origin_value:
        knots[0] = 0.0
        if abs(values[0]) < 0.05:
            values[0] = 0.5
    else:
        values[0] = 0.0
    return PiecewiseLinearProfile(knots, values, half_line=half_line)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    profile: PiecewiseLinearProfile

    def function(self, d: int):
        if d == 1:
            return self.profile.even_extension() if self.profile.half_line else self.profile
        return RadialFunction(d, self.profile)

    def to_dict(self) -> dict:
        out = {"name": self.name}
        out.update(self.profile.to_dict())
        return out


@dataclass(frozen=True)
class Corpus:
    """Named functions plus ``n_random`` seeded random profiles.

    ``radial`` selects half-line profiles (radial functions); otherwise the
    random profiles are functions on the line.
    """

    seed: int = 0
    n_random: int = 20
    radial: bool = False
    include_named: bool = True
    knot_range: tuple = (4, 24)
    entries: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.n_random < 0:
            raise ValueError("n_random must be nonnegative")
        rng = np.random.default_rng(self.seed)
        items = []
        if self.include_named:
            for name in ("tent", "plateau", "twobump", "sawtooth"):
                p = named_profile(name)
                items.append(CorpusEntry(name, p.restrict_half_line() if self.radial else p))
        for i in range(self.n_random):
            origin = self.radial and bool(rng.integers(0, 2))
            p = random_profile(rng, self.knot_range, half_line=self.radial, origin_value=origin)
            items.append(CorpusEntry(f"random-{self.seed}-{i}", p))
        object.__setattr__(self, "entries", tuple(items))

    def __iter__(self) -> Iterator[CorpusEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.entries], indent=1)


def load_corpus(text: str) -> list:
    """Parse a JSON array of named profile records."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("corpus file must hold a JSON array of profile records")
    out = []
    for i, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise ValueError(f"record {i} is not an object")
        out.append(CorpusEntry(str(rec.get("name", f"entry-{i}")), PiecewiseLinearProfile.from_dict(rec)))
    return out


def load_function(spec: Optional[str], path: Optional[str], d: int):
    """Function from a registry name or a profile JSON file."""
    if (spec is None) == (path is None):
        raise ValueError("give exactly one of a function name or a profile file")
    if spec is not None:
        return named_function(spec, d)
    with open(path, encoding="utf-8") as fh:
        p = PiecewiseLinearProfile.from_json(fh.read())
    if d == 1:
        return p.even_extension() if p.half_line else p
    return RadialFunction(d, p)
