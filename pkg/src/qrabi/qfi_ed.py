"""Ground-state QFI and fidelity from exact eigenvectors.

Coefficient derivatives are taken by gauge-fixed central differences at a
shared cutoff:

    F_Q = 4 [ sum_n (dc_n/d lambda)^2 - (sum_n (dc_n/d lambda) c_n)^2 ].

The subtracted projection vanishes analytically for real gauge-fixed states;
it is still computed and monitored as a built-in sanity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fockspace import default_cutoff, spectrum
from .model import ModelParams, derived_scales


class StencilCrossingError(RuntimeError):
    """Eigenvector overlap across the stencil below 0.5: level crossing inside it."""


class GaugeResidualError(RuntimeError):
    """|<psi'|psi>|^2 exceeded its round-off budget for a real gauge-fixed state."""


LAMBDA_NAMES = ("g2", "g1", "epsilon")


@dataclass
class QfiBreakdown:
    """Total QFI with per-resource components and provenance.

    Units are 1/[lambda]^2 for the dimensionful parameter lambda. For
    method="analytic" the mixed components are exact zeros and
    total = xi + x + rho.
    """

    total: float
    components: dict = field(default_factory=dict)
    method: str = "ED"
    lam: str = "g2"
    step: float | None = None
    lambda_value: float | None = None
    cutoff: int | None = None


def _lambda_value(p: ModelParams, lam: str) -> float:
    if lam not in LAMBDA_NAMES:
        raise ValueError(f"lambda must be one of {LAMBDA_NAMES}, got {lam!r}")
    return getattr(p, lam)


def _with_lambda(p: ModelParams, lam: str, value: float) -> ModelParams:
    return p.replace(**{lam: value})


def default_step(p: ModelParams, lam: str) -> float:
    """1e-5 of the natural coupling scale: gT for g2, gs for g1, omega for epsilon."""
    sc = derived_scales(p)
    if lam == "g2":
        return 1e-5 * sc.gT
    if lam == "g1":
        return 1e-5 * (sc.gs if sc.gs > 0 else sc.gT)
    if lam == "epsilon":
        return 1e-5 * p.omega
    raise ValueError(f"lambda must be one of {LAMBDA_NAMES}, got {lam!r}")


def _domain(p: ModelParams, lam: str) -> tuple[float, float]:
    if lam == "g2":
        return 0.0, p.omega / 4.0  # upper end exclusive (collapse bound)
    return -math.inf, math.inf


def _ground_vec(p: ModelParams, cutoff: int) -> np.ndarray:
    return spectrum(p, cutoff, k=1).vectors[0].interleaved()


def _stencil_center(p: ModelParams, lam: str, step: float, edge: str) -> float:
    lo, hi = _domain(p, lam)
    center = _lambda_value(p, lam)
    below = center - step < lo
    above = math.isfinite(hi) and center + step >= hi
    if not below and not above:
        return center
    if edge == "error":
        raise ValueError(
            f"stencil [{center - step}, {center + step}] for lambda={lam} leaves "
            f"the parameter domain [{lo}, {hi}); use a smaller step or edge='shift'")
    shifted = center
    if below:
        shifted = lo + step
    if math.isfinite(hi):
        shifted = min(shifted, hi * (1.0 - 1e-12) - step)
    if shifted < lo:
        raise ValueError(f"step {step} too large for the {lam} domain [{lo}, {hi})")
    return shifted


def qfi_ed(p: ModelParams, lam: str = "g2", step: float | None = None,
           cutoff: int | None = None, edge: str = "error",
           max_shrink: int = 6) -> QfiBreakdown:
    """Central-difference QFI at lambda = p.<lam>, same cutoff on all three points.

    The eigenvector signs at lambda +- h are aligned to the center point
    (overlap forced positive). An overlap below 0.5 indicates a level crossing
    inside the stencil; the step is then shrunk by 4x up to `max_shrink`
    times before raising StencilCrossingError. The same shrink loop handles a
    too-large |<psi'|psi>|^2 residual, which falls as h^4 on sharp peaks.
    """
    if edge not in ("error", "shift"):
        raise ValueError(f"edge must be 'error' or 'shift', got {edge!r}")
    h = default_step(p, lam) if step is None else float(step)
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")

    failure = None
    for attempt in range(max_shrink + 1):
        center = _stencil_center(p, lam, h, edge)
        p0 = _with_lambda(p, lam, center)
        n = default_cutoff(p0) if cutoff is None else cutoff
        v0 = _ground_vec(p0, n)
        vm = _ground_vec(_with_lambda(p, lam, center - h), n)
        vp = _ground_vec(_with_lambda(p, lam, center + h), n)
        om = float(vm @ v0)
        op = float(vp @ v0)
        if om < 0:
            vm, om = -vm, -om
        if op < 0:
            vp, op = -vp, -op
        if min(om, op) < 0.5:
            failure = StencilCrossingError(
                f"stencil overlap {min(om, op):.3f} < 0.5 at lambda={lam}, "
                f"step {h}: level crossing inside the stencil, use a smaller step")
            h /= 4.0
            continue
        dc = (vp - vm) / (2.0 * h)
        sum_sq = float(dc @ dc)
        proj = float(dc @ v0)
        if sum_sq > 0 and proj ** 2 > 1e-8 * sum_sq:
            failure = GaugeResidualError(
                f"|<psi'|psi>|^2 = {proj ** 2:.3e} exceeds 1e-8 * {sum_sq:.3e} "
                f"at lambda={lam}, step {h}")
            h /= 4.0
            continue
        failure = None
        break
    if failure is not None:
        raise failure

    total = 4.0 * (sum_sq - proj ** 2)
    return QfiBreakdown(total=total, components={}, method="ED", lam=lam,
                        step=h, lambda_value=center, cutoff=n)


def fidelity(p: ModelParams, lam: str, delta: float,
             cutoff: int | None = None) -> float:
    """|<psi(lambda)|psi(lambda + delta)>| at a shared cutoff."""
    value = _lambda_value(p, lam)
    p1 = _with_lambda(p, lam, value + delta)
    n = default_cutoff(p) if cutoff is None else cutoff
    v0 = _ground_vec(p, n)
    v1 = _ground_vec(p1, n)
    return abs(float(v0 @ v1))


@dataclass
class BiasPeak:
    """Envelope maximum of F_Q over a bias grid."""

    eps_star: float
    f_max: float
    eps_grid: np.ndarray
    f_values: np.ndarray
    boundary_warning: bool


def qfi_peak_over_bias(p: ModelParams, eps_grid, lam: str = "g2",
                       step: float | None = None,
                       cutoff: int | None = None) -> BiasPeak:
    """Maximum of F_Q(lam) over the bias grid; flags an argmax on the boundary."""
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size < 2:
        raise ValueError("eps_grid must be a 1-D grid with at least two points")
    values = np.array([
        qfi_ed(p.replace(epsilon=float(e)), lam=lam, step=step, cutoff=cutoff).total
        for e in eps_grid])
    k = int(np.argmax(values))
    return BiasPeak(
        eps_star=float(eps_grid[k]),
        f_max=float(values[k]),
        eps_grid=eps_grid,
        f_values=values,
        boundary_warning=(k == 0 or k == eps_grid.size - 1),
    )
