"""DOZZ structure constants and spectral densities built from them.

The three-point constant is

    C(a1, a2, a3) = (pi mu l(g^2/4) (g/2)^{2 - g^2/2})^{(2Q - abar)/g}
                    * Ups'(0) Ups(a1) Ups(a2) Ups(a3)
                    / [Ups(abar/2 - Q) prod_i Ups(abar/2 - a_i)],

abar = a1 + a2 + a3, accumulated in log domain.  Poles sit exactly on the
zero lattice of the denominator Upsilons; arguments closer than
``zero_threshold`` to that lattice raise NearPole.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NearPole
from .params import CftParams
from .special import UpsilonEvaluator, log_l_ratio

__all__ = ["DozzArgs", "DozzEvaluator", "dozz_constant", "rho_density"]


@dataclass(frozen=True)
class DozzArgs:
    alpha1: complex
    alpha2: complex
    alpha3: complex
    params: CftParams


def _lattice_distance(z: complex, gamma: float) -> float:
    """Distance from z to the zero lattice of Upsilon,
    (-g/2 N - 2/g N) union (Q + g/2 N + 2/g N)."""
    Q = gamma / 2.0 + 2.0 / gamma
    best = math.inf
    x = z.real
    for base, sgn in ((0.0, -1.0), (Q, 1.0)):
        # lattice points base + sgn*(a*g/2 + b*2/g), a,b >= 0
        reach = abs(x - base) + abs(z.imag) + gamma  # conservative search radius
        amax = int(reach / (gamma / 2.0)) + 2
        for a in range(amax):
            rem = reach - a * gamma / 2.0
            bmax = int(rem / (2.0 / gamma)) + 2
            for b in range(bmax):
                pt = base + sgn * (a * gamma / 2.0 + b * 2.0 / gamma)
                best = min(best, abs(z - pt))
        if best == 0.0:
            return 0.0
    return best


class DozzEvaluator:
    """Shared per-gamma evaluator: one UpsilonEvaluator amortized across the
    thousands of structure-constant calls a quadrature loop makes."""

    _cache: dict = {}

    def __new__(cls, gamma: float, **kw):
        key = (gamma, tuple(sorted(kw.items())))
        if key not in cls._cache:
            inst = super().__new__(cls)
            inst.ev = UpsilonEvaluator(gamma, **kw)
            inst.gamma = gamma
            inst._log_ups_prime0 = None
            cls._cache[key] = inst
        return cls._cache[key]

    def log_upsilon(self, z: complex) -> complex:
        return self.ev.log_upsilon(z)

    def log_upsilon_prime0(self) -> complex:
        if self._log_ups_prime0 is None:
            self._log_ups_prime0 = self.ev.log_upsilon(self.gamma / 2.0)
        return self._log_ups_prime0


def dozz_constant(
    alpha1: complex,
    alpha2: complex,
    alpha3: complex,
    params: CftParams,
    zero_threshold: float = 1e-6,
) -> complex:
    """C^DOZZ_{gamma,mu}(alpha1, alpha2, alpha3), log-domain throughout."""
    gamma = params.gamma
    dz = DozzEvaluator(gamma)
    abar = alpha1 + alpha2 + alpha3
    denom_args = [
        abar / 2.0 - params.Q,
        abar / 2.0 - alpha1,
        abar / 2.0 - alpha2,
        abar / 2.0 - alpha3,
    ]
    for arg in denom_args:
        if _lattice_distance(complex(arg), gamma) < zero_threshold:
            raise NearPole(
                f"DOZZ denominator argument {arg} within {zero_threshold} of the Upsilon zero lattice"
            )
    base = (
        math.log(math.pi * params.mu)
        + log_l_ratio(gamma**2 / 4.0).real
        + (2.0 - gamma**2 / 2.0) * math.log(gamma / 2.0)
    )
    log_c = (2.0 * params.Q - abar) / gamma * base
    log_c += dz.log_upsilon_prime0()
    for a in (alpha1, alpha2, alpha3):
        log_c += dz.log_upsilon(complex(a))
    for arg in denom_args:
        log_c -= dz.log_upsilon(complex(arg))
    if log_c.real == -math.inf:
        return 0.0 + 0.0j
    if log_c.real == math.inf:
        raise NearPole(f"DOZZ pole hit exactly at ({alpha1}, {alpha2}, {alpha3})")
    return cmath.exp(log_c)


def rho_density(
    case,
    alphas,
    p_vector,
    params: CftParams,
    metric_constants=None,
    zero_threshold: float = 1e-6,
):
    """Spectral density: the product of DOZZ factors of one bootstrap formula.

    case="torus": k-point torus chain, rho = prod_j C(Q+ip_j, alpha_j, Q-ip_{j-1})
    with p_0 = p_k.  case="sphere": rho = C(a1, a2, Q-ip_2) C(a_k, a_{k-1}, Q+ip_{k-2})
    prod_{j=2}^{k-3} C(Q+ip_j, a_{j+1}, Q-ip_{j+1}).  An AdmissibleGraph gives one
    factor per vertex with arguments Q + i sigma p on edge slots (sigma the
    orientation sign) and the marked alphas elsewhere.  ``metric_constants``
    multiply per factor and default to 1.

    Self-conjugate cases (torus one-point, genus-2) are real up to roundoff and
    a float is returned; chains with k >= 2 are complex pointwise, reality
    being restored only after the symmetrized spectral integral, so the
    complex value is returned as is.
    """
    from .graphs import AdmissibleGraph

    Q = params.Q
    factors = []
    if isinstance(case, AdmissibleGraph):
        alpha_of = {(m.vertex, m.slot): a for m, a in zip(case.marked, alphas)}
        slot_map = case.slot_map()
        for vid in case.vertex_ids:
            args = []
            for k, kind, eidx in slot_map[vid]:
                if kind == "edge":
                    sigma = case.orientation_sign(vid, k)
                    args.append(Q + 1j * sigma * p_vector[eidx])
                else:
                    args.append(alpha_of[(vid, k)])
            factors.append(dozz_constant(*args, params, zero_threshold))
    elif case == "torus":
        k = len(alphas)
        for j in range(k):
            factors.append(
                dozz_constant(
                    Q + 1j * p_vector[j], alphas[j], Q - 1j * p_vector[j - 1], params, zero_threshold
                )
            )
    elif case == "sphere":
        k = len(alphas)
        factors.append(dozz_constant(alphas[0], alphas[1], Q - 1j * p_vector[0], params, zero_threshold))
        factors.append(dozz_constant(alphas[k - 1], alphas[k - 2], Q + 1j * p_vector[-1], params, zero_threshold))
        for j in range(len(p_vector) - 1):
            factors.append(
                dozz_constant(
                    Q + 1j * p_vector[j], alphas[j + 2], Q - 1j * p_vector[j + 1], params, zero_threshold
                )
            )
    else:
        raise ValueError(f"unknown rho case {case!r}")

    total = 1.0 + 0.0j
    for f in factors:
        total *= f
    if metric_constants is not None:
        for mconst in metric_constants:
            total *= mconst
    if abs(total.imag) <= 1e-10 * max(abs(total), 1e-300):
        return total.real
    return total
