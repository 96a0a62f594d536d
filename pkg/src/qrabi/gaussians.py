"""Closed-form integrals for normalized Gaussian wave packets.

A packet with inverse-variance parameter xi > 0 and center m is

    phi(x) = xi^{1/4} exp(-xi (x - m)^2 / 2) / pi^{1/4}.

Every matrix element used by the variational and QFI machinery reduces to
<phi_a| P(x) |phi_b> with P polynomial, which is evaluated exactly from the
Gaussian-product form: phi_a phi_b = O_ab * N(mu, 1/s) density-like factor
with s = xi_a + xi_b and mu = (xi_a m_a + xi_b m_b)/s, so only even central
moments E[(x-mu)^{2k}] = (2k-1)!!/s^k enter.

Parameter derivatives of a packet are again polynomial multiples of it:

    d(phi)/d(xi) = (1/(4 xi) - (x - m)^2 / 2) phi
    d(phi)/d(m)  = xi (x - m) phi
    p^2 phi      = (xi - xi^2 (x - m)^2) phi

so overlaps among derivatives stay inside the same closed form.
"""

from __future__ import annotations

import math

import numpy as np


class GaussPair:
    """Product frame of two packets; evaluates <phi_a| P(u) |phi_b>, u = x - mu."""

    def __init__(self, xi_a: float, m_a: float, xi_b: float, m_b: float):
        if xi_a <= 0 or xi_b <= 0:
            raise ValueError("packet widths xi must be positive")
        self.xi_a, self.m_a = xi_a, m_a
        self.xi_b, self.m_b = xi_b, m_b
        self.s = xi_a + xi_b
        # difference form keeps mu exactly equal to the common center when m_a == m_b
        self.mu = m_b + xi_a * (m_a - m_b) / self.s
        d = m_a - m_b
        self.overlap = (math.sqrt(2.0) * (xi_a * xi_b) ** 0.25 / math.sqrt(self.s)
                        * math.exp(-xi_a * xi_b * d * d / (2.0 * self.s)))

    # -- polynomial building blocks, coefficient arrays in powers of u --

    def x_minus(self, center: float) -> np.ndarray:
        """(x - center) expressed in u."""
        return np.array([self.mu - center, 1.0])

    def dxi_poly(self, side: str) -> np.ndarray:
        """Factor polynomial of d(phi)/d(xi) for the bra ('a') or ket ('b') packet."""
        xi, m = (self.xi_a, self.m_a) if side == "a" else (self.xi_b, self.m_b)
        lin = self.x_minus(m)
        return poly_add(np.array([1.0 / (4.0 * xi)]), -0.5 * poly_mul(lin, lin))

    def dm_poly(self, side: str) -> np.ndarray:
        """Factor polynomial of d(phi)/d(m)."""
        xi, m = (self.xi_a, self.m_a) if side == "a" else (self.xi_b, self.m_b)
        return xi * self.x_minus(m)

    def p2_poly(self) -> np.ndarray:
        """Factor polynomial of p^2 acting on the ket packet."""
        xi, m = self.xi_b, self.m_b
        lin = self.x_minus(m)
        return poly_add(np.array([xi]), -xi * xi * poly_mul(lin, lin))

    def moment(self, coeffs: np.ndarray) -> float:
        """<phi_a| sum_k coeffs[k] u^k |phi_b>; odd moments vanish identically."""
        total = 0.0
        fac = 1.0  # (2k-1)!! / s^k at k = 0
        for k in range(0, len(coeffs), 2):
            total += coeffs[k] * fac
            fac *= (k + 1) / self.s
        return self.overlap * total


def poly_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.convolve(p, q)


def poly_add(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = max(len(p), len(q))
    out = np.zeros(n)
    out[: len(p)] += p
    out[: len(q)] += q
    return out


# ---------------------------------------------------------------------------
# Named matrix elements
# ---------------------------------------------------------------------------

def overlap(xi_a, m_a, xi_b, m_b) -> float:
    return GaussPair(xi_a, m_a, xi_b, m_b).overlap


def p2_element(xi_a, m_a, xi_b, m_b) -> float:
    """<phi_a| p^2 |phi_b>."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(pair.p2_poly())


def x2_element(xi_a, m_a, xi_b, m_b, center: float) -> float:
    """<phi_a| (x - center)^2 |phi_b>."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    lin = pair.x_minus(center)
    return pair.moment(poly_mul(lin, lin))


def braket_dxi_dxi(xi_a, m_a, xi_b, m_b) -> float:
    """<d phi_a/d xi_a | d phi_b/d xi_b>."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(poly_mul(pair.dxi_poly("a"), pair.dxi_poly("b")))


def braket_dm_dm(xi_a, m_a, xi_b, m_b) -> float:
    """<d phi_a/d m_a | d phi_b/d m_b>."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(poly_mul(pair.dm_poly("a"), pair.dm_poly("b")))


def braket_dxi_dm(xi_a, m_a, xi_b, m_b) -> float:
    """<d phi_a/d xi_a | d phi_b/d m_b>; zero for identical packets."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(poly_mul(pair.dxi_poly("a"), pair.dm_poly("b")))


def braket_dxi_phi(xi_a, m_a, xi_b, m_b) -> float:
    """<d phi_a/d xi_a | phi_b>; zero for identical packets (norm preservation)."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(pair.dxi_poly("a"))


def braket_dm_phi(xi_a, m_a, xi_b, m_b) -> float:
    """<d phi_a/d m_a | phi_b>; zero for identical packets."""
    pair = GaussPair(xi_a, m_a, xi_b, m_b)
    return pair.moment(pair.dm_poly("a"))


def packet_values(xi: float, m: float, x: np.ndarray) -> np.ndarray:
    """phi(x) sampled on a grid (for quadrature cross-checks and plotting)."""
    return xi ** 0.25 * np.exp(-0.5 * xi * (x - m) ** 2) / math.pi ** 0.25
