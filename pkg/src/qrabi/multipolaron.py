"""Finite-Omega variational ground state: polaron + anti-polaron per spin (n_p = 2).

Each spin component carries two Gaussian packets; the twelve ansatz parameters
are the four (xi, center) shape pairs plus four weights. For fixed shapes the
weights solve a 4x4 generalized symmetric eigenproblem, so the optimization
runs over the eight shape parameters only, with the exact Hellmann-Feynman
gradient dE/dtheta = v^T (dH/dtheta - E dS/dtheta) v assembled from the
closed-form Gaussian matrix elements. L-BFGS-B does the descent and a damped
Newton polish on the gradient drives its norm below 1e-9 omega.

The QFI decomposition tracks per-packet parameter derivatives across a
re-optimized g2 stencil and assembles the six components (xi, x, rho and the
three mixed ones) from closed-form cross-overlaps; intra-polaron mixed
integrals vanish identically, so the mixed components are purely inter-packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from . import gaussians
from .gaussians import GaussPair, poly_mul
from .model import ModelParams, derived_scales
from .polaron import GaussianPacket, PolaronAnsatz
from .qfi_ed import QfiBreakdown

GRAD_TOL_FACTOR = 1e-9   # convergence: |grad| < 1e-9 * omega


class VariationalError(RuntimeError):
    """Optimization failed to converge or packets collapsed onto each other."""


class PacketTrackingError(RuntimeError):
    """Packet identities could not be followed across the finite-difference stencil."""


@dataclass(frozen=True)
class MultiAnsatz:
    """Converged n_p = 2 ansatz with its variational energy and gradient norm."""

    ansatz: PolaronAnsatz
    energy: float
    grad_norm: float


@dataclass(frozen=True)
class _SpinPotential:
    varpi: float
    bottom: float
    const: float


def _spin_potentials(p: ModelParams) -> tuple[_SpinPotential, _SpinPotential]:
    sc = derived_scales(p)
    plus = _SpinPotential(sc.varpi_plus, -sc.b_plus,
                          sc.d_plus - p.epsilon - 0.5 * p.omega)
    minus = _SpinPotential(sc.varpi_minus, sc.b_minus,
                           sc.d_minus + p.epsilon - 0.5 * p.omega)
    return plus, minus


# theta layout: [lnxi, m] x 2 packets x 2 spins -> 8 entries,
# spin-plus packets first. Weight index = 2*spin + packet.

def _unpack(theta: np.ndarray) -> list:
    packets = []
    for k in range(4):
        packets.append((math.exp(theta[2 * k]), theta[2 * k + 1]))
    return packets


def _h_poly(pair: GaussPair, pot: _SpinPotential, omega: float) -> np.ndarray:
    lin = pair.x_minus(pot.bottom)
    poly = gaussians.poly_add(0.5 * omega * pair.p2_poly(),
                              0.5 * omega * pot.varpi ** 2 * poly_mul(lin, lin))
    return gaussians.poly_add(poly, np.array([pot.const]))


def _build_matrices(theta: np.ndarray, p: ModelParams):
    """H and S (4x4) over the packet basis in the order (+,1), (+,2), (-,1), (-,2)."""
    packets = _unpack(theta)
    pots = _spin_potentials(p)
    h = np.zeros((4, 4))
    s = np.zeros((4, 4))
    for spin in range(2):
        pot = pots[spin]
        for a in range(2):
            for b in range(a, 2):
                ia, ib = 2 * spin + a, 2 * spin + b
                xa, ma = packets[ia]
                xb, mb = packets[ib]
                pair = GaussPair(xa, ma, xb, mb)
                s[ia, ib] = s[ib, ia] = pair.overlap
                val = pair.moment(_h_poly(pair, pot, p.omega))
                h[ia, ib] = h[ib, ia] = val
    for a in range(2):
        for b in range(2):
            xa, ma = packets[a]
            xb, mb = packets[2 + b]
            t = 0.5 * p.Omega * gaussians.overlap(xa, ma, xb, mb)
            h[a, 2 + b] = h[2 + b, a] = t
    return h, s


def _lowest_pair(h: np.ndarray, s: np.ndarray) -> tuple[float, np.ndarray]:
    if np.linalg.eigvalsh(s).min() < 1e-12:
        raise VariationalError(
            "packet overlap matrix is singular: two packets collapsed onto each other")
    w, v = scipy.linalg.eigh(h, s)
    return float(w[0]), v[:, 0]


def _energy_and_grad(theta: np.ndarray, p: ModelParams):
    packets = _unpack(theta)
    pots = _spin_potentials(p)
    h, s = _build_matrices(theta, p)
    energy, v = _lowest_pair(h, s)

    grad = np.zeros(8)
    for k in range(4):
        spin, a = divmod(k, 2)
        pot = pots[spin]
        xa, ma = packets[k]
        dh = np.zeros((4, 4))
        ds = np.zeros((4, 4))
        for kind in range(2):  # 0: d/dxi, 1: d/dm
            dh[:] = 0.0
            ds[:] = 0.0
            # same-spin rows: bra derivative against every same-spin packet
            for b in range(2):
                ib = 2 * spin + b
                xb, mb = packets[ib]
                pair = GaussPair(xa, ma, xb, mb)
                bra = pair.dxi_poly("a") if kind == 0 else pair.dm_poly("a")
                dsv = pair.moment(bra)
                dhv = pair.moment(poly_mul(bra, _h_poly(pair, pot, p.omega)))
                ia = k
                if ib == ia:
                    dh[ia, ia] = 2.0 * dhv
                    ds[ia, ia] = 2.0 * dsv
                else:
                    dh[ia, ib] = dh[ib, ia] = dhv
                    ds[ia, ib] = ds[ib, ia] = dsv
            # spin-flip block
            for b in range(2):
                ib = 2 * (1 - spin) + b
                xb, mb = packets[ib]
                pair = GaussPair(xa, ma, xb, mb)
                bra = pair.dxi_poly("a") if kind == 0 else pair.dm_poly("a")
                tv = 0.5 * p.Omega * pair.moment(bra)
                dh[k, ib] = dh[ib, k] = tv
            g = float(v @ (dh - energy * ds) @ v)
            if kind == 0:
                g *= xa  # chain rule for ln xi
            grad[2 * k + kind] = g
    return energy, grad, v


def _seed_theta(p: ModelParams) -> np.ndarray:
    """Adiabatic packet per spin plus an anti-polaron at the opposite bottom."""
    sc = derived_scales(p)
    seeds = [
        (sc.varpi_plus, -sc.b_plus), (sc.varpi_minus, sc.b_minus),   # spin +
        (sc.varpi_minus, sc.b_minus), (sc.varpi_plus, -sc.b_plus),   # spin -
    ]
    theta = np.empty(8)
    for spin in range(2):
        main = seeds[2 * spin]
        anti = list(seeds[2 * spin + 1])
        if abs(anti[0] - main[0]) < 1e-3 * main[0] and abs(anti[1] - main[1]) < 1e-3:
            anti[0] *= 1.35
            anti[1] += 0.1
        theta[4 * spin + 0], theta[4 * spin + 1] = math.log(main[0]), main[1]
        theta[4 * spin + 2], theta[4 * spin + 3] = math.log(anti[0]), anti[1]
    return theta


def _newton_polish(theta: np.ndarray, p: ModelParams, target: float,
                   max_iter: int = 30):
    """Levenberg-Marquardt on the shape gradient (exact values, FD Jacobian).

    Flat anti-polaron directions make the Hessian near-singular at small
    Omega; the adaptive damping keeps steps useful there.
    """
    energy, grad, v = _energy_and_grad(theta, p)
    gnorm = float(np.linalg.norm(grad))
    delta = 1e-6
    lam = 1e-8
    jac = None
    for _ in range(max_iter):
        if gnorm <= target:
            break
        if jac is None:
            jac = np.zeros((8, 8))
            for i in range(8):
                tp = theta.copy()
                tp[i] += delta
                _, gp, _ = _energy_and_grad(tp, p)
                tp[i] -= 2.0 * delta
                _, gm, _ = _energy_and_grad(tp, p)
                jac[i] = (gp - gm) / (2.0 * delta)
            jac = 0.5 * (jac + jac.T)
            scale = float(np.linalg.norm(jac, 2))
        accepted = False
        for _damp in range(12):
            a = jac.T @ jac + max(lam * scale, 1e-300) * np.eye(8)
            try:
                step = np.linalg.solve(a, -jac.T @ grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + step
            e_t, g_t, v_t = _energy_and_grad(trial, p)
            g_t_norm = float(np.linalg.norm(g_t))
            if g_t_norm < gnorm:
                theta, energy, grad, v = trial, e_t, g_t, v_t
                gnorm = g_t_norm
                lam = max(lam * 0.25, 1e-12)
                jac = None  # refresh at the new point
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
    return theta, energy, grad, v, gnorm


_LN_XI_BOUNDS = (math.log(1e-3), math.log(1e3))


def _optimize(p: ModelParams, theta0: np.ndarray):
    bounds = [(_LN_XI_BOUNDS if i % 2 == 0 else (None, None)) for i in range(8)]
    res = scipy.optimize.minimize(
        lambda t: _energy_and_grad(t, p)[:2], theta0, jac=True,
        method="L-BFGS-B", bounds=bounds,
        options={"maxiter": 500, "ftol": 1e-16, "gtol": 1e-12, "maxcor": 20})
    # polish below the convergence target with margin for trajectory jitter
    target = 0.3 * GRAD_TOL_FACTOR * p.omega
    theta, energy, grad, v, gnorm = _newton_polish(np.asarray(res.x), p, target)
    return theta, energy, v, gnorm


def _to_ansatz(theta: np.ndarray, v: np.ndarray) -> PolaronAnsatz:
    packets = _unpack(theta)
    plus = tuple(GaussianPacket(packets[a][0], packets[a][1], float(v[a]))
                 for a in range(2))
    minus = tuple(GaussianPacket(packets[2 + a][0], packets[2 + a][1],
                                 float(v[2 + a])) for a in range(2))
    return PolaronAnsatz(packets_plus=plus, packets_minus=minus, n_p=2)


def variational_ground(p: ModelParams, n_p: int = 2) -> MultiAnsatz:
    """Minimize the n_p = 2 variational energy; deterministic given p.

    Initialized from the adiabatic single-packet solution plus an anti-polaron
    seeded at the opposite spin's potential bottom. Converged when the shape
    gradient norm is below 1e-9 omega; one deterministic re-seed is attempted
    before raising VariationalError.
    """
    if n_p != 2:
        raise ValueError(f"only n_p = 2 is supported, got {n_p}")
    theta0 = _seed_theta(p)
    last_exc = None
    for attempt in range(2):
        try:
            theta, energy, v, gnorm = _optimize(p, theta0)
        except VariationalError as exc:
            last_exc = exc
        else:
            if gnorm <= GRAD_TOL_FACTOR * p.omega:
                # canonical global sign: dominant weight positive
                if v[int(np.argmax(np.abs(v)))] < 0:
                    v = -v
                return MultiAnsatz(ansatz=_to_ansatz(theta, v), energy=energy,
                                   grad_norm=gnorm)
            last_exc = VariationalError(
                f"gradient norm {gnorm:.3e} above {GRAD_TOL_FACTOR * p.omega:.3e} "
                f"after optimization at {p}")
        theta0 = _seed_theta(p) + np.tile([0.05, 0.1, -0.05, -0.1], 2)
    raise last_exc


# ---------------------------------------------------------------------------
# QFI decomposition across a re-optimized g2 stencil
# ---------------------------------------------------------------------------

def _cross_overlap(theta1, v1, theta0, v0) -> float:
    """<psi(theta1)|psi(theta0)>: same-spin packet cross-overlaps only."""
    p1 = _unpack(theta1)
    p0 = _unpack(theta0)
    total = 0.0
    for spin in range(2):
        for a in range(2):
            for b in range(2):
                ia, ib = 2 * spin + a, 2 * spin + b
                total += v1[ia] * v0[ib] * gaussians.overlap(
                    p1[ia][0], p1[ia][1], p0[ib][0], p0[ib][1])
    return total


def _tracked(theta1, theta0) -> bool:
    for k in range(4):
        if abs(theta1[2 * k] - theta0[2 * k]) > 0.35:
            return False
        if abs(theta1[2 * k + 1] - theta0[2 * k + 1]) > 0.25 * (1.0 + abs(theta0[2 * k + 1])):
            return False
    return True


def qfi_decompose_multi(p: ModelParams, step: float | None = None,
                        return_split: bool = False):
    """Six-term QFI decomposition for lambda = g2 at finite Omega.

    Parameter derivatives of {xi, center, weight} come from central differences
    of the re-optimized ansatz at g2 +- step (warm-started from the center
    optimum, identity-checked; on a tracking failure the step shrinks by 4x
    twice before PacketTrackingError). Components are assembled from closed-form
    Gaussian cross-overlaps; total = sum of all six.
    """
    sc = derived_scales(p)
    h = 1e-4 * sc.gT if step is None else float(step)
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if p.g2 - h < 0 or p.g2 + h >= sc.gT:
        raise ValueError(f"stencil g2 +- {h} leaves the domain [0, omega/4)")

    center = variational_ground(p)
    theta0 = _ansatz_theta(center.ansatz)
    v0 = _ansatz_weights(center.ansatz)
    packets0 = _unpack(theta0)

    failure = None
    for attempt in range(3):
        sides = []
        failure = None
        for sgn in (-1.0, +1.0):
            q = p.replace(g2=p.g2 + sgn * h)
            theta, energy, v, gnorm = _optimize(q, theta0.copy())
            if gnorm > GRAD_TOL_FACTOR * q.omega or not _tracked(theta, theta0):
                failure = PacketTrackingError(
                    f"packet identities not tracked across the g2 stencil at {p}, "
                    f"step {h}")
                break
            if _cross_overlap(theta, v, theta0, v0) < 0:
                v = -v
            sides.append((theta, v))
        if failure is None:
            (theta_m, v_m), (theta_p, v_p) = sides
            dxi = np.array([(math.exp(theta_p[2 * k]) - math.exp(theta_m[2 * k]))
                            / (2 * h) for k in range(4)])
            dm = np.array([(theta_p[2 * k + 1] - theta_m[2 * k + 1]) / (2 * h)
                           for k in range(4)])
            dc = (v_p - v_m) / (2 * h)
            brackets, residual = _brackets(packets0, v0, dxi, dm, dc)
            norm_sq = (brackets[("xi", "xi")] + brackets[("x", "x")]
                       + brackets[("rho", "rho")]
                       + 2.0 * (brackets[("xi", "x")] + brackets[("xi", "rho")]
                                + brackets[("x", "rho")]))
            if norm_sq > 0 and residual ** 2 > 1e-8 * norm_sq:
                failure = PacketTrackingError(
                    f"<psi'|psi> residual {residual:.3e} too large at {p}, "
                    f"step {h}: stencil asymmetry, retry with a smaller step")
            else:
                break
        h /= 4.0
    if failure is not None:
        raise failure

    components = {
        "xi": 4.0 * brackets[("xi", "xi")],
        "x": 4.0 * brackets[("x", "x")],
        "rho": 4.0 * brackets[("rho", "rho")],
        "xi_x": 8.0 * brackets[("xi", "x")],
        "xi_rho": 8.0 * brackets[("xi", "rho")],
        "x_rho": 8.0 * brackets[("x", "rho")],
    }
    total = sum(components.values())
    breakdown = QfiBreakdown(total=total, components=components,
                             method="multipolaron", lam="g2", step=h,
                             lambda_value=p.g2)
    if not return_split:
        return breakdown
    split = _intra_inter_split(packets0, v0, dxi, dm, dc)
    return breakdown, split


_LABELS = ("xi", "x", "rho")


def _brackets(packets0, v0, dxi, dm, dc):
    """All <u_i|u_j> brackets between the three derivative directions.

    u_xi = sum c dphi/dxi xidot, u_x = sum c dphi/dm mdot, u_rho = sum cdot phi,
    summed over same-spin packet pairs. Also returns the <psi'|psi> residual,
    which vanishes for an exactly normalized stencil.
    """
    brackets = {("xi", "xi"): 0.0, ("x", "x"): 0.0, ("rho", "rho"): 0.0,
                ("xi", "x"): 0.0, ("xi", "rho"): 0.0, ("x", "rho"): 0.0}
    residual = 0.0
    for spin in range(2):
        for a in range(2):
            for b in range(2):
                ia, ib = 2 * spin + a, 2 * spin + b
                xa, ma = packets0[ia]
                xb, mb = packets0[ib]
                i_xx = gaussians.braket_dxi_dxi(xa, ma, xb, mb)
                i_mm = gaussians.braket_dm_dm(xa, ma, xb, mb)
                i_xm = gaussians.braket_dxi_dm(xa, ma, xb, mb)
                i_xp = gaussians.braket_dxi_phi(xa, ma, xb, mb)
                i_mp = gaussians.braket_dm_phi(xa, ma, xb, mb)
                ov = gaussians.overlap(xa, ma, xb, mb)
                wa_xi = v0[ia] * dxi[ia]
                wb_m = v0[ib] * dm[ib]
                brackets[("xi", "xi")] += wa_xi * v0[ib] * dxi[ib] * i_xx
                brackets[("x", "x")] += v0[ia] * dm[ia] * wb_m * i_mm
                brackets[("rho", "rho")] += dc[ia] * dc[ib] * ov
                brackets[("xi", "x")] += wa_xi * wb_m * i_xm
                brackets[("xi", "rho")] += wa_xi * dc[ib] * i_xp
                brackets[("x", "rho")] += v0[ia] * dm[ia] * dc[ib] * i_mp
                residual += (wa_xi * i_xp + v0[ia] * dm[ia] * i_mp) * v0[ib] \
                    + dc[ia] * v0[ib] * ov
    return brackets, residual


def _intra_inter_split(packets0, v0, dxi, dm, dc) -> dict:
    """Intra (a == b) vs inter (a != b) parts of the pure xi/x/rho components."""
    out = {"xi": [0.0, 0.0], "x": [0.0, 0.0], "rho": [0.0, 0.0]}
    for spin in range(2):
        for a in range(2):
            for b in range(2):
                ia, ib = 2 * spin + a, 2 * spin + b
                xa, ma = packets0[ia]
                xb, mb = packets0[ib]
                sel = 0 if a == b else 1
                out["xi"][sel] += 4.0 * v0[ia] * dxi[ia] * v0[ib] * dxi[ib] \
                    * gaussians.braket_dxi_dxi(xa, ma, xb, mb)
                out["x"][sel] += 4.0 * v0[ia] * dm[ia] * v0[ib] * dm[ib] \
                    * gaussians.braket_dm_dm(xa, ma, xb, mb)
                out["rho"][sel] += 4.0 * dc[ia] * dc[ib] \
                    * gaussians.overlap(xa, ma, xb, mb)
    return {k: {"intra": vals[0], "inter": vals[1]} for k, vals in out.items()}


def _ansatz_theta(ansatz: PolaronAnsatz) -> np.ndarray:
    theta = np.empty(8)
    for spin, packets in enumerate((ansatz.packets_plus, ansatz.packets_minus)):
        for a, pk in enumerate(packets):
            theta[4 * spin + 2 * a] = math.log(pk.xi)
            theta[4 * spin + 2 * a + 1] = pk.center
    return theta


def _ansatz_weights(ansatz: PolaronAnsatz) -> np.ndarray:
    return np.array([pk.weight for pk in
                     (*ansatz.packets_plus, *ansatz.packets_minus)])
