"""Terrain-following iterative learning control loop.

The control update is ``kappa_{n+1} = -gamma + kappa_n + altitude(kappa_n)`` on a
uniform grid of horizontal positions.  Three plant models map a control to a
flight angle and an altitude:

* ``linear``   altitude = G * clamp(K * kappa)
* ``integral`` altitude = gamma(xi_0) + speed * cumulative trapezoid of tan(sigma)
* ``ode``      sigma from the third-order airframe ODE, then the integral altitude

Each iteration also records the shifted increment field
``Delta_n = |kappa_n - kappa_{n-1} - a|^p``, the F1/F2 sufficient conditions
for convergence, and the contraction ratio they bound.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .spaces import NumericError

PLANT_MODES = ("linear", "integral", "ode")


@dataclass
class TerrainConfig:
    xi_start: float = 0.0
    xi_end: float = 100.0
    step: float = 0.5
    gamma: dict | list = field(
        default_factory=lambda: {"kind": "sinusoidal", "amplitude": 0.3, "wavelength": 50.0, "offset": 1.0}
    )
    speed: float = 1.0
    gain_K: float = 0.1
    scale_G: float = -5.0
    delta: float = 0.005
    sigma_max: float = 1.2
    p: float = 2.0
    shift_a: float = 1.0
    omega: float = 0.1
    plant_mode: str = "linear"
    # (a1, a2, b0, b1, b2); steady gain b1/a1 when b0 = 0
    ode_coeffs: tuple = (2.0, 3.0, 0.0, 0.2, 0.0)
    max_iterations: int = 200
    tol: float = 1e-6
    blowup: float = 1e6
    diverge_window: int = 5
    kappa0: list | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not self.shift_a > 0:
            raise ValueError("shift_a must be positive")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not 0 < self.sigma_max < math.pi / 2:
            raise ValueError("sigma_max must lie in (0, pi/2)")
        if not (self.xi_end > self.xi_start and self.step > 0):
            raise ValueError("grid must be strictly increasing with positive step")
        if not self.speed > 0:
            raise ValueError("speed must be positive")
        if self.plant_mode not in PLANT_MODES:
            raise ValueError(f"plant_mode must be one of {PLANT_MODES}")
        if len(self.ode_coeffs) != 5:
            raise ValueError("ode_coeffs needs (a1, a2, b0, b1, b2)")
        self.ode_coeffs = tuple(float(c) for c in self.ode_coeffs)

    @property
    def effective_gain(self) -> float:
        return self.scale_G * self.gain_K

    def grid(self) -> np.ndarray:
        n = int(round((self.xi_end - self.xi_start) / self.step)) + 1
        return np.linspace(self.xi_start, self.xi_end, n)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ode_coeffs"] = list(self.ode_coeffs)
        return out


def gamma_samples(cfg: TerrainConfig) -> np.ndarray:
    xi = cfg.grid()
    g = cfg.gamma
    if isinstance(g, (list, tuple, np.ndarray)):
        arr = np.asarray(g, dtype=float)
        if arr.shape != xi.shape:
            raise ValueError(f"gamma has {arr.size} samples, grid has {xi.size}")
        return arr
    kind = g.get("kind")
    if kind == "flat":
        return np.full_like(xi, float(g.get("c", 0.0)))
    if kind == "ramp":
        return float(g.get("intercept", 0.0)) + float(g.get("slope", 0.0)) * (xi - cfg.xi_start)
    if kind == "sinusoidal":
        return float(g.get("offset", 0.0)) + float(g["amplitude"]) * np.sin(2 * np.pi * xi / float(g["wavelength"]))
    raise ValueError(f"unknown gamma generator {kind!r}")


@dataclass
class PlantOutput:
    sigma: np.ndarray
    altitude: np.ndarray
    clamp_count: int


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains NaN or infinity")


def _clamp(cfg: TerrainConfig, sigma: np.ndarray) -> tuple[np.ndarray, int]:
    over = np.abs(sigma) > cfg.sigma_max
    return np.clip(sigma, -cfg.sigma_max, cfg.sigma_max), int(np.count_nonzero(over))


def ode_sigma(cfg: TerrainConfig, kappa: np.ndarray) -> np.ndarray:
    """Flight angle from ``s''' + a2 s'' + a1 s' = b2 k'' + b1 k' - b0 k``.

    Time is ``(xi - xi_0) / speed``; zero initial conditions; classical RK4 with
    the grid step, forcing derivatives by central differences and midpoint
    forcing by linear interpolation.
    """
    a1, a2, b0, b1, b2 = cfg.ode_coeffs
    dt = cfg.step / cfg.speed
    k1 = np.gradient(kappa, dt)
    k2 = np.gradient(k1, dt)
    u = b2 * k2 + b1 * k1 - b0 * kappa

    def rhs(y, f):
        return np.array([y[1], y[2], f - a2 * y[2] - a1 * y[1]])

    y = np.zeros(3)
    out = np.empty_like(kappa)
    out[0] = 0.0
    for i in range(len(kappa) - 1):
        um = 0.5 * (u[i] + u[i + 1])
        s1 = rhs(y, u[i])
        s2 = rhs(y + 0.5 * dt * s1, um)
        s3 = rhs(y + 0.5 * dt * s2, um)
        s4 = rhs(y + dt * s3, u[i + 1])
        y = y + dt / 6 * (s1 + 2 * s2 + 2 * s3 + s4)
        out[i + 1] = y[0]
    return out


def plant_apply(cfg: TerrainConfig, kappa, gamma0: float | None = None) -> PlantOutput:
    kappa = np.asarray(kappa, dtype=float)
    _check_finite("control", kappa)
    if cfg.plant_mode == "ode":
        raw = ode_sigma(cfg, kappa)
    else:
        raw = cfg.gain_K * kappa
    _check_finite("flight angle", raw)
    sigma, clamps = _clamp(cfg, raw)
    if cfg.plant_mode == "linear":
        altitude = cfg.scale_G * sigma
    else:
        base = gamma_samples(cfg)[0] if gamma0 is None else gamma0
        altitude = base + cfg.speed * cumulative_trapezoid(np.tan(sigma), cfg.grid(), initial=0.0)
    _check_finite("altitude", altitude)
    return PlantOutput(sigma, altitude, clamps)


def ilc_step(cfg: TerrainConfig, kappa_n, gamma: np.ndarray | None = None) -> np.ndarray:
    g = gamma_samples(cfg) if gamma is None else gamma
    return -g + np.asarray(kappa_n, dtype=float) + plant_apply(cfg, kappa_n, g[0]).altitude


def delta_field(cfg: TerrainConfig, kappa_n, kappa_prev) -> tuple[np.ndarray, float]:
    """``|kappa_n - kappa_prev - a|^p`` and its grid maximum."""
    f = np.abs(np.asarray(kappa_n) - np.asarray(kappa_prev) - cfg.shift_a) ** cfg.p
    return f, float(np.max(f))


def _exp_term(cfg: TerrainConfig, delta_n, delta_next):
    return np.exp((delta_n - delta_next - cfg.omega) / cfg.p)


def check_f1(cfg: TerrainConfig, delta_max_n: float, delta_max_next: float) -> bool:
    lhs = (cfg.xi_end - cfg.xi_start) * cfg.speed * cfg.delta
    return bool(lhs <= 1 + _exp_term(cfg, delta_max_n, delta_max_next))


@dataclass
class F2Result:
    ok: bool
    worst_index: int | None
    worst_ratio: float | None
    threshold: float
    skipped: int
    pointwise_ok: bool = True


def check_f2(
    cfg: TerrainConfig,
    kappa_n,
    kappa_prev,
    delta_max_n: float,
    delta_max_next: float,
    altitude_n=None,
    altitude_prev=None,
    delta_pointwise: tuple | None = None,
) -> F2Result:
    """Ratio of altitude change to shifted control change against the bound.

    Points with a zero shifted control change are skipped and counted.  When
    ``delta_pointwise`` holds the two Delta fields, the pointwise variant of the
    bound is evaluated as well.
    """
    kn, kp = np.asarray(kappa_n, dtype=float), np.asarray(kappa_prev, dtype=float)
    gn = plant_apply(cfg, kn).altitude if altitude_n is None else np.asarray(altitude_n)
    gp = plant_apply(cfg, kp).altitude if altitude_prev is None else np.asarray(altitude_prev)
    denom = kn - kp - cfg.shift_a
    live = denom != 0
    threshold = float(-1 + _exp_term(cfg, delta_max_n, delta_max_next))
    skipped = int(np.count_nonzero(~live))
    if not np.any(live):
        return F2Result(True, None, None, threshold, skipped)
    ratio = np.full(kn.shape, -np.inf)
    ratio[live] = (gn[live] - gp[live]) / denom[live]
    worst = int(np.argmax(ratio))
    ok = bool(np.all(ratio[live] < threshold))
    pointwise_ok = True
    if delta_pointwise is not None:
        dn, dnext = delta_pointwise
        thr = -1 + _exp_term(cfg, np.asarray(dn), np.asarray(dnext))
        pointwise_ok = bool(np.all(ratio[live] < thr[live]))
    return F2Result(ok, worst, float(ratio[worst]), threshold, skipped, pointwise_ok)


def contraction_ratio(delta_max_n: float, delta_max_next: float, a: float, p: float) -> float:
    """``(D' + a^p)/(D + a^p) * exp(D' - D)``; the proof needs it below ``exp(-omega)``."""
    ap = a**p
    expo = delta_max_next - delta_max_n
    growth = math.exp(expo) if expo < 700 else math.inf
    return (delta_max_next + ap) / (delta_max_n + ap) * growth


@dataclass
class ControlIterate:
    n: int
    kappa: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    altitude: np.ndarray = field(repr=False)
    tracking_error: float
    clamp_count: int
    delta_field: np.ndarray | None = field(default=None, repr=False)
    delta_max: float | None = None
    f1_ok: bool | None = None
    f2_ok: bool | None = None
    f2_pointwise_ok: bool | None = None
    ratio: float | None = None

    def row(self) -> dict:
        return {
            "n": self.n,
            "tracking_error": self.tracking_error,
            "delta_max": self.delta_max,
            "ratio": self.ratio,
            "f1": self.f1_ok,
            "f2": self.f2_ok,
            "clamp_count": self.clamp_count,
        }


@dataclass
class IlcReport:
    iterates: list[ControlIterate]
    converged: bool
    final_error: float
    diverged: bool = False
    diverged_at: int | None = None
    first_f1_violation: int | None = None
    first_f2_violation: int | None = None
    first_ratio_violation: int | None = None
    saturation_index: int | None = None
    final_ratio: float | None = None
    fixed_point_residual: float | None = None
    clamp_events: int = 0

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "diverged": self.diverged,
            "diverged_at": self.diverged_at,
            "iterations": len(self.iterates) - 1,
            "final_error": self.final_error,
            "fixed_point_residual": self.fixed_point_residual,
            "first_f1_violation": self.first_f1_violation,
            "first_f2_violation": self.first_f2_violation,
            "first_ratio_violation": self.first_ratio_violation,
            "saturation_index": self.saturation_index,
            "final_ratio": self.final_ratio,
            "clamp_events": self.clamp_events,
        }


def _first(items, pred):
    return next((it.n for it in items if pred(it)), None)


def saturation_start(ratios: list[tuple[int, float]], bound: float) -> int | None:
    """First index from which every later ratio stays at or above ``bound``."""
    start = None
    for n, r in ratios:
        if r >= bound:
            start = n if start is None else start
        else:
            start = None
    return start


def simulate(cfg: TerrainConfig) -> IlcReport:
    """Iterate the control update from ``kappa0`` (zero by default).

    Stops when the tracking error drops below ``cfg.tol``, when it exceeds
    ``cfg.blowup`` or grows for ``cfg.diverge_window`` consecutive iterations
    (divergence), or after ``cfg.max_iterations`` updates.
    """
    gamma = gamma_samples(cfg)
    xi = cfg.grid()
    kappa = np.zeros_like(xi) if cfg.kappa0 is None else np.asarray(cfg.kappa0, dtype=float)
    if kappa.shape != xi.shape:
        raise ValueError("kappa0 does not match the grid")
    iterates: list[ControlIterate] = []
    prev_kappa = prev_alt = None
    diverged_at = None
    growth = 0
    for n in range(cfg.max_iterations + 1):
        out = plant_apply(cfg, kappa, gamma[0])
        err = float(np.max(np.abs(out.altitude - gamma)))
        kappa_next = -gamma + kappa + out.altitude
        _check_finite("control update", kappa_next)
        it = ControlIterate(n, kappa, out.sigma, out.altitude, err, out.clamp_count)
        if prev_kappa is not None:
            dfield, dmax = delta_field(cfg, kappa, prev_kappa)
            dnext_field, dmax_next = delta_field(cfg, kappa_next, kappa)
            it.delta_field, it.delta_max = dfield, dmax
            it.f1_ok = check_f1(cfg, dmax, dmax_next)
            f2 = check_f2(cfg, kappa, prev_kappa, dmax, dmax_next, out.altitude, prev_alt, (dfield, dnext_field))
            it.f2_ok, it.f2_pointwise_ok = f2.ok, f2.pointwise_ok
            it.ratio = contraction_ratio(dmax, dmax_next, cfg.shift_a, cfg.p)
        iterates.append(it)
        if err < cfg.tol:
            break
        if iterates and len(iterates) > 1:
            growth = growth + 1 if err > iterates[-2].tracking_error else 0
        if err > cfg.blowup or growth >= cfg.diverge_window:
            diverged_at = n
            break
        if n == cfg.max_iterations:
            break
        prev_kappa, prev_alt = kappa, out.altitude
        kappa = kappa_next

    last = iterates[-1]
    bound = math.exp(-cfg.omega)
    report = IlcReport(
        iterates,
        converged=last.tracking_error < cfg.tol,
        final_error=last.tracking_error,
        diverged=diverged_at is not None,
        diverged_at=diverged_at,
        first_f1_violation=_first(iterates, lambda it: it.f1_ok is False),
        first_f2_violation=_first(iterates, lambda it: it.f2_ok is False),
        first_ratio_violation=_first(iterates, lambda it: it.ratio is not None and it.ratio >= bound),
        saturation_index=saturation_start([(it.n, it.ratio) for it in iterates if it.ratio is not None], bound),
        final_ratio=next((it.ratio for it in reversed(iterates) if it.ratio is not None), None),
        fixed_point_residual=float(np.max(np.abs(cfg.effective_gain * last.kappa - gamma))),
        clamp_events=sum(it.clamp_count for it in iterates),
    )
    return report


def per_xi_rows(cfg: TerrainConfig, report: IlcReport, which: int = -1) -> list[dict]:
    """Samples of gamma, kappa_n and altitude_n for external plotting."""
    it = report.iterates[which]
    return [
        {"xi": float(x), "gamma": float(g), "kappa": float(k), "altitude": float(h)}
        for x, g, k, h in zip(cfg.grid(), gamma_samples(cfg), it.kappa, it.altitude)
    ]
