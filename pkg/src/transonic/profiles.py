"""Named analytic boundary profiles.

A profile string is a '+'-separated sum of terms ``[amp*]kind[:args]``:

    cos:1            cos(theta)
    0.5*sin:2        0.5 sin(2 theta)
    const:0.3        constant
    zero             0
    pbump:0,0.5      smooth periodic bump exp((cos(t - c) - 1) / w^2)
    bump:0,2         compact bump exp(1 - 1/(1 - ((x - c)/a)^2)), |x - c| < a

Profiles are vectorized callables with a ``support`` attribute (half-width
around the center for compact bumps, ``None`` when not compactly
supported) and the canonical ``spec`` string.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError


def _bump(x, c, a):
    x = np.asarray(x, dtype=float)
    s = (x - c) / a
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - s[m] ** 2))
    return out


class Profile:
    def __init__(self, terms, spec):
        self.terms = terms
        self.spec = spec

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for amp, kind, args in self.terms:
            if kind == "cos":
                out = out + amp * np.cos(args[0] * x)
            elif kind == "sin":
                out = out + amp * np.sin(args[0] * x)
            elif kind == "const":
                out = out + amp * args[0]
            elif kind == "pbump":
                out = out + amp * np.exp((np.cos(x - args[0]) - 1.0) / args[1] ** 2)
            elif kind == "bump":
                out = out + amp * _bump(x, args[0], args[1])
        return out

    @property
    def is_zero(self):
        return all(a == 0 or k == "zero" or (k == "const" and args[0] == 0)
                   for a, k, args in self.terms)

    @property
    def support(self):
        """Half-length interval (lo, hi) outside which the profile vanishes."""
        lo, hi = np.inf, -np.inf
        for amp, kind, args in self.terms:
            if amp == 0 or kind == "zero":
                continue
            if kind != "bump":
                return None
            lo, hi = min(lo, args[0] - args[1]), max(hi, args[0] + args[1])
        return (lo, hi) if lo <= hi else (0.0, 0.0)

    def __repr__(self):
        return f"Profile({self.spec!r})"


_NARGS = {"cos": 1, "sin": 1, "const": 1, "zero": 0, "pbump": 2, "bump": 2}
_DEFAULT_ARGS = {"cos": [1.0], "sin": [1.0]}


def parse_profile(spec):
    """Parse a profile string; raises ConfigError on bad input."""
    if callable(spec) and not isinstance(spec, str):
        return spec
    text = str(spec).strip()
    if not text:
        raise ConfigError("empty profile")
    terms = []
    for raw in text.split("+"):
        t = raw.strip()
        amp = 1.0
        if "*" in t:
            a, t = t.split("*", 1)
            try:
                amp = float(a)
            except ValueError:
                raise ConfigError(f"bad amplitude in profile term {raw!r}") from None
        kind, _, argtxt = t.partition(":")
        kind = kind.strip()
        if kind not in _NARGS:
            raise ConfigError(f"unknown profile kind {kind!r}")
        try:
            args = [float(v) for v in argtxt.split(",")] if argtxt.strip() else list(_DEFAULT_ARGS.get(kind, []))
        except ValueError:
            raise ConfigError(f"bad arguments in profile term {raw!r}") from None
        if len(args) != _NARGS[kind]:
            raise ConfigError(f"profile {kind!r} takes {_NARGS[kind]} argument(s)")
        if kind in ("pbump", "bump") and not args[1] > 0:
            raise ConfigError("bump width must be positive")
        if kind in ("cos", "sin") and float(args[0]) != int(args[0]):
            # periodic data need integer harmonics
            raise ConfigError("harmonic number must be an integer")
        terms.append((amp, kind, args))
    return Profile(terms, text)


ZERO = parse_profile("zero")
