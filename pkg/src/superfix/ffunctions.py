"""Wardowski-class functions and finite-horizon checks of their three conditions.

Every check here is a numerical proxy on a finite grid; a pass means the
condition is *supported at that horizon*, nothing stronger.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class FFunction:
    name: str
    func: Callable[[float], float]
    w3_exponent: float

    def __call__(self, t: float) -> float:
        return eval_f(self, t)


def eval_f(f: FFunction, t: float) -> float:
    if not t > 0:
        raise ValueError(f"F is defined on (0, inf); got t={t!r}")
    return float(f.func(t))


LN = FFunction("ln", math.log, 0.5)
LN_PLUS_ID = FFunction("ln-plus-id", lambda t: math.log(t) + t, 0.5)
# any k in (1/2, 1) witnesses the third condition for -t^(-1/2)
NEG_INV_SQRT = FFunction("neg-inv-sqrt", lambda t: -1.0 / math.sqrt(t), 0.75)

BUILTINS = {f.name: f for f in (LN, LN_PLUS_ID, NEG_INV_SQRT)}


def default_grid(n: int = 64, lo: float = 1e-12, hi: float = 1.0) -> np.ndarray:
    """Increasing geometric grid, the default support for all three checks."""
    return np.geomspace(lo, hi, n)


def check_w1(f: FFunction, grid: Sequence[float]) -> tuple[bool, tuple | None]:
    """Strict increase of ``f`` across consecutive grid entries."""
    g = [float(t) for t in grid]
    if any(b <= a for a, b in zip(g, g[1:])) or g[0] <= 0:
        raise ValueError("grid must be strictly increasing and positive")
    prev = eval_f(f, g[0])
    for a, b in zip(g, g[1:]):
        cur = eval_f(f, b)
        if not cur > prev:
            return False, (a, b)
        prev = cur
    return True, None


def check_w2(
    f: FFunction,
    lam: Sequence[float],
    floor: float,
    lam_tol: float = 1e-6,
    window: int = 4,
) -> bool:
    """Two-sided proxy for ``lam_n -> 0  <=>  F(lam_n) -> -inf``.

    The tail of ``lam`` "vanishes" when its trailing window lies below ``lam_tol``;
    ``F(lam)`` "diverges" when its trailing window lies below ``floor``.  The
    check passes when both statements agree.
    """
    if len(lam) == 0:
        raise ValueError("lam must be nonempty")
    tail = [float(x) for x in lam[-window:]]
    vanishes = max(tail) < lam_tol
    diverges = max(eval_f(f, t) for t in tail) < floor
    return vanishes == diverges


def check_w3(
    f: FFunction,
    grid_near_zero: Sequence[float] | None = None,
    tol: float = 1e-2,
    k: float | None = None,
) -> bool:
    """``|t^k F(t)|`` small at the smallest grid entries and eventually decreasing.

    ``grid_near_zero`` runs toward 0 (largest first); "eventually" means over the
    trailing half of the grid.
    """
    k = f.w3_exponent if k is None else k
    if not 0 < k < 1:
        raise ValueError("W3 exponent must lie in (0, 1)")
    grid = default_grid()[::-1] if grid_near_zero is None else np.asarray(grid_near_zero, dtype=float)
    if np.any(np.diff(grid) >= 0):
        raise ValueError("grid_near_zero must decrease toward 0")
    vals = [abs(t**k * eval_f(f, float(t))) for t in grid]
    tail = vals[len(vals) // 2 :]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    return vals[-1] < tol and decreasing


def scan_w3_exponent(f: FFunction, ks: Sequence[float] | None = None, **kwargs) -> list[float]:
    """Exponents from ``ks`` (default 0.05, 0.10, ..., 0.95) for which W3 passes."""
    ks = [round(0.05 * i, 2) for i in range(1, 20)] if ks is None else ks
    return [k for k in ks if check_w3(f, k=k, **kwargs)]


def check_all(f: FFunction) -> dict:
    """Run the three checks on the default grids."""
    grid = default_grid()
    w1, w1_witness = check_w1(f, grid)
    lam = [2.0**-n for n in range(1, 61)]
    return {
        "name": f.name,
        "k": f.w3_exponent,
        "w1": w1,
        "w1_witness": w1_witness,
        "w2": check_w2(f, lam, floor=-20.0),
        "w3": check_w3(f),
        "w3_supported_k": scan_w3_exponent(f),
    }


# ---------------------------------------------------------------------------
# Expression form: sums of  c*ln(t),  c*t,  c*t^q
# ---------------------------------------------------------------------------

_NUM = r"(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?"
_TERM = re.compile(
    rf"(?P<sign>[+-])(?P<coef>{_NUM})?\*?"
    rf"(?:(?P<ln>ln\(t\))|t\^\(?(?P<q>[-+]?{_NUM})\)?|(?P<t>t))"
)


def parse_expression(text: str, k: float, name: str | None = None) -> FFunction:
    """Parse e.g. ``"2*ln(t) + 0.5*t - t^-0.5"`` into an :class:`FFunction`."""
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty F expression")
    if src[0] not in "+-":
        src = "+" + src
    terms: list[tuple[str, float, float]] = []
    pos = 0
    for m in _TERM.finditer(src):
        if m.start() != pos:
            break
        pos = m.end()
        coef = float(m.group("coef") or 1.0) * (-1.0 if m.group("sign") == "-" else 1.0)
        if m.group("ln"):
            terms.append(("ln", coef, 0.0))
        else:
            terms.append(("pow", coef, 1.0 if m.group("t") else float(m.group("q"))))
    if pos != len(src):
        raise ValueError(f"cannot parse F expression {text!r} near {src[pos:]!r}")

    def func(t: float) -> float:
        total = 0.0
        for kind, c, q in terms:
            total += c * (math.log(t) if kind == "ln" else t**q)
        return total

    return FFunction(name or text, func, k)


def resolve(entry: str | dict) -> FFunction:
    """Built-in name or ``{"expr": ..., "k": ...}`` mapping."""
    if isinstance(entry, str):
        if entry not in BUILTINS:
            raise ValueError(f"unknown F {entry!r}; built-ins are {sorted(BUILTINS)}")
        return BUILTINS[entry]
    return parse_expression(entry["expr"], float(entry["k"]), entry.get("name"))
