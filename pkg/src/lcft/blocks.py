"""Conformal-block machinery.

Three ingredients:

* a recursion engine for the normalized three-point correlator of holomorphic
  descendants at three finite insertion points (the "pant frame", fixed
  points zhat = (-1/2, 1/2, i sqrt(3)/2) with all pairwise distances 1);

* radial-frame vertex matrix elements
  ``<h_out, nu_out | V_Delta(1) | h_in, nu_in>`` (normalized so the primary
  element is 1), which furnish the annulus matrices w^A and disk vectors w^D
  entering the torus and sphere block series;

* block-series assembly: torus one-point, cyclic torus chains, sphere chains,
  and general pants-graph contractions with inverse Gram matrices across each
  glued edge.

Both descendant engines are exact symbolic computations: coefficients are
polynomials in the three conformal weights and the central charge, built once
per diagram tuple, cached, and then evaluated at whatever numeric weights the
quadrature loop asks for.  Repeated evaluation is therefore deterministic and
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, DomainError, ValidationError
from .params import CftParams
from .virasoro import (
    YoungDiagram,
    apply_generator_to_word,
    conformal_weight,
    partitions,
    shapovalov,
    shapovalov_inverse,
)

__all__ = [
    "ZHAT",
    "three_point_descendant",
    "BlockCoeffTensor",
    "block_coeff_tensor",
    "BlockSeries",
    "torus_one_point_block",
    "chain_block",
    "graph_block",
]

#: Canonical pant-frame insertion points: unit pairwise distances, P(zhat)=1.
ZHAT = (-0.5 + 0.0j, 0.5 + 0.0j, 0.0 + 1j * math.sqrt(3.0) / 2.0)


# ---------------------------------------------------------------------------
# sparse polynomials in (D1, D2, D3, C)
# ---------------------------------------------------------------------------


class Poly:
    """Sparse polynomial in four commuting variables with float coefficients.

    Inside the pant engine the variables are the three slot weights and the
    central charge; the radial engine reuses the class with the reading
    (h_out, Delta_mid, h_in, c).
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @staticmethod
    def const(v) -> "Poly":
        return Poly({(0, 0, 0, 0): v}) if v else Poly()

    def ring_one(self) -> "Poly":
        return Poly({(0, 0, 0, 0): 1.0})

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Poly.const(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            nv = out.get(k, 0.0) + v
            if nv:
                out[k] = nv
            elif k in out:
                del out[k]
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Poly.const(other)
        return self + (other * -1)

    def __rsub__(self, other):
        return Poly.const(other) + (self * -1)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            if not other:
                return Poly()
            return Poly({k: v * other for k, v in self.terms.items()})
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2], k1[3] + k2[3])
                nv = out.get(k, 0.0) + v1 * v2
                if nv:
                    out[k] = nv
                elif k in out:
                    del out[k]
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly({k: v / scalar for k, v in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.terms == Poly.const(other).terms
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __call__(self, d1, d2, d3, c) -> complex:
        total = 0.0 + 0.0j
        for (i, j, k, l), v in self.terms.items():
            total += v * d1**i * d2**j * d3**k * c**l
        return total

    def __repr__(self):
        return f"Poly({self.terms!r})"


P_ONE = Poly({(0, 0, 0, 0): 1.0})
P_D1 = Poly({(1, 0, 0, 0): 1.0})
P_D2 = Poly({(0, 1, 0, 0): 1.0})
P_D3 = Poly({(0, 0, 1, 0): 1.0})
P_C = Poly({(0, 0, 0, 1): 1.0})
_SLOT_WEIGHT = (P_D1, P_D2, P_D3)

# exponents of the holomorphic half H = z12^E12 z13^E13 z23^E23
_E12 = P_D3 - P_D1 - P_D2
_E13 = P_D2 - P_D1 - P_D3
_E23 = P_D1 - P_D2 - P_D3


# ---------------------------------------------------------------------------
# rational multiples of H: dict[(a, b, d)] -> Poly  (z12^a z13^b z23^d * H)
# ---------------------------------------------------------------------------


def _zf_add(x: dict, y: dict) -> dict:
    out = dict(x)
    for k, p in y.items():
        q = out.get(k)
        np_ = p if q is None else q + p
        if np_:
            out[k] = np_
        elif k in out:
            del out[k]
    return out


def _zf_scale(x: dict, s) -> dict:
    if isinstance(s, (int, float, complex)) and not s:
        return {}
    return {k: p * s for k, p in x.items()}


def _zf_shift(x: dict, da: int, db: int, dd: int, s=1) -> dict:
    return {(k[0] + da, k[1] + db, k[2] + dd): (p * s if s != 1 else p) for k, p in x.items()}


# dz_i of the monomial exponents: coefficient of 1/z12, 1/z13, 1/z23
_DLOGH = {
    1: ((_E12, 1, 0, 0), (_E13, 0, 1, 0)),
    2: ((_E12 * -1, 1, 0, 0), (_E23, 0, 0, 1)),
    3: ((_E13 * -1, 0, 1, 0), (_E23 * -1, 0, 0, 1)),
}
_DMON = {
    1: ((1, (1, 0, 0)), (1, (0, 1, 0))),
    2: ((-1, (1, 0, 0)), (1, (0, 0, 1))),
    3: ((-1, (0, 1, 0)), (-1, (0, 0, 1))),
}


def _zf_dz(x: dict, i: int) -> dict:
    """d/dz_i of (sum z-monomials * Poly) * H, returned in the same form."""
    out: dict = {}
    for (a, b, d), p in x.items():
        exps = (a, b, d)
        for sign, unit in _DMON[i]:
            e = exps[unit.index(1)]
            if e:
                k = (a - unit[0], b - unit[1], d - unit[2])
                out = _zf_add(out, {k: p * (sign * e)})
        for epoly, ua, ub, ud in _DLOGH[i]:
            out = _zf_add(out, {(a - ua, b - ub, d - ud): p * epoly})
    return out


def _binom(n: int, k: int) -> int:
    if k == 0:
        return 1
    if n < k:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=None)
def _bracket(w1: tuple, w2: tuple, w3: tuple) -> tuple:
    """Normalized pant-frame bracket of three descendant slots.

    ``w_i`` are ascending operator words.  Returns the rational multiple of H
    as a tuple of ((a, b, d), Poly) items; the result divided by H is the
    polynomial-coefficient rational function evaluated at the insertion
    points.  Reduction order: slot 3 via operator transport onto slots 1 and
    2, then slot 2 via the differential term on the primary slot 3 plus
    transport onto slot 1, then slot 1 as a pure differential word acting on
    H.  Memoized; weight- and position-independent.
    """
    if w3:
        m, rest3 = w3[0], w3[1:]
        out: dict = {}
        words = (w1, w2)
        for r in (0, 1):  # slots 1 and 2
            lvl_r = sum(words[r])
            zunit = (0, 1, 0) if r == 0 else (0, 0, 1)  # powers of z13 or z23
            for k in range(0, lvl_r + 2):
                cb = _binom(m + k - 2, k)
                if cb == 0:
                    continue
                sgn = -1 if k % 2 == 0 else 1  # (-1)^(k-1)
                gen = apply_generator_to_word(k - 1, words[r], _SLOT_WEIGHT[r], P_C)
                for wr_new, coeff in gen.items():
                    sub = _bracket(wr_new, w2, rest3) if r == 0 else _bracket(w1, wr_new, rest3)
                    term = _zf_scale(dict(sub), coeff * (sgn * cb))
                    e = 1 - m - k
                    out = _zf_add(out, _zf_shift(term, e * zunit[0], e * zunit[1], e * zunit[2]))
        return tuple(out.items())

    if w2:
        m, rest2 = w2[0], w2[1:]
        lower = dict(_bracket(w1, rest2, ()))
        sgn_m = (-1) ** m
        # differential piece on the primary slot 3: (z3-z2) = -z23
        out = _zf_shift(_zf_dz(lower, 3), 0, 0, 1 - m, sgn_m)
        if m > 1:
            out = _zf_add(out, _zf_shift(_zf_scale(lower, P_D3 * ((m - 1) * sgn_m)), 0, 0, -m))
        # operator transport onto slot 1: powers of (z1 - z2) = z12
        lvl1 = sum(w1)
        for k in range(0, lvl1 + 2):
            cb = _binom(m + k - 2, k)
            if cb == 0:
                continue
            sgn = -1 if k % 2 == 0 else 1
            gen = apply_generator_to_word(k - 1, w1, P_D1, P_C)
            for w1_new, coeff in gen.items():
                sub = dict(_bracket(w1_new, rest2, ()))
                term = _zf_scale(sub, coeff * (sgn * cb))
                out = _zf_add(out, _zf_shift(term, 1 - m - k, 0, 0))
        return tuple(out.items())

    if w1:
        m, rest1 = w1[0], w1[1:]
        lower = dict(_bracket(rest1, (), ()))
        sgn_m = (-1) ** m
        # D_m on slots {2,3}: (z2-z1) = -z12, (z3-z1) = -z13
        out = _zf_shift(_zf_dz(lower, 2), 1 - m, 0, 0, sgn_m)
        out = _zf_add(out, _zf_shift(_zf_dz(lower, 3), 0, 1 - m, 0, sgn_m))
        if m > 1:
            out = _zf_add(out, _zf_shift(_zf_scale(lower, P_D2 * ((m - 1) * sgn_m)), -m, 0, 0))
            out = _zf_add(out, _zf_shift(_zf_scale(lower, P_D3 * ((m - 1) * sgn_m)), 0, -m, 0))
        return tuple(out.items())

    return (((0, 0, 0), P_ONE),)


def _eval_bracket(items: tuple, d1, d2, d3, c, zhat) -> complex:
    z1, z2, z3 = (complex(z) for z in zhat)
    z12, z13, z23 = z1 - z2, z1 - z3, z2 - z3
    total = 0.0 + 0.0j
    for (a, b, d), poly in items:
        total += z12**a * z13**b * z23**d * poly(d1, d2, d3, c)
    return total


# ---------------------------------------------------------------------------
# radial-frame matrix elements  <h_out, a| V_Delta(1) |h_in, b>
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _radial_element(a: tuple, b: tuple) -> Poly:
    """Normalized vertex matrix element as a Poly in (h_out, Delta, h_in, c).

    Raising operators peel off the out-state through the commutator
    [L_m, V(z)] = z^m (z d/dz + (m+1) Delta) V(z) at z = 1, using that the
    matrix element between L0-eigenstates of weights (h_out + |a|, h_in + |b|)
    scales as z^(h_out + |a| - h_in - |b| - Delta).
    """
    if a:
        m, rest = a[0], a[1:]
        grading = P_D1 + (sum(rest)) - P_D3 - sum(b) - P_D2
        out = _radial_element(rest, b) * (grading + (m + 1) * P_D2)
        for w2, coeff in apply_generator_to_word(m, b, P_D3, P_C).items():
            out = out + _radial_element(rest, w2) * coeff
        return out
    if b:
        m, rest = b[0], b[1:]
        grading = P_D1 - P_D3 - (sum(b) - m) - P_D2
        return _radial_element((), rest) * (grading + (1 - m) * P_D2) * -1
    return P_ONE


def three_point_descendant(
    delta1: complex,
    delta2: complex,
    delta3: complex,
    nu1: YoungDiagram | tuple = (),
    nu2: YoungDiagram | tuple = (),
    nu3: YoungDiagram | tuple = (),
    c: complex = 26.0,
    zhat: tuple = ZHAT,
    frame: str = "pant",
) -> complex:
    """Normalized holomorphic three-point coefficient with descendant slots.

    frame="pant": the recursion-rule bracket divided by the holomorphic half
    H(z), evaluated at the canonical insertion points ``zhat`` (pairwise
    distances 1).  frame="radial": slots read (out, vertex, in) at positions
    (infinity, 1, 0); slot 2 must then be primary.  The all-empty value is 1
    in either frame.
    """

    def _w(nu):
        return nu.word() if isinstance(nu, YoungDiagram) else tuple(reversed(tuple(nu)))

    w1, w2, w3 = _w(nu1), _w(nu2), _w(nu3)
    if frame == "radial":
        if w2:
            raise ValidationError("radial frame holds the vertex in slot 2 (must be primary)")
        return _radial_element(w1, w3)(complex(delta1), complex(delta2), complex(delta3), complex(c))
    if frame != "pant":
        raise ValidationError(f"unknown frame {frame!r}")
    return _eval_bracket(
        _bracket(w1, w2, w3), complex(delta1), complex(delta2), complex(delta3), complex(c), zhat
    )


# ---------------------------------------------------------------------------
# coefficient tensors
# ---------------------------------------------------------------------------


@dataclass
class BlockCoeffTensor:
    """Descendant coefficient tensor of one building block.

    kind="annulus": blocks[(n_out, n_in)] is the d_{n_out} x d_{n_in} matrix
    of radial elements with the marked weight in the middle.
    kind="disk": blocks[(n,)] is the length-d_n vector (descendants on the
    boundary slot only).  kind="pant": blocks[(n1, n2, n3)] is the rank-3
    pant-frame array.
    """

    kind: str
    weights: tuple
    c: float
    blocks: dict = field(default_factory=dict)

    def level(self, key) -> np.ndarray:
        return self.blocks[key]


def _annulus_matrix(n_out: int, n_in: int, h_out, d_mid, h_in, c) -> np.ndarray:
    rows = [nu.word() for nu in partitions(n_out)]
    cols = [nu.word() for nu in partitions(n_in)]
    out = np.empty((len(rows), len(cols)), dtype=complex)
    for i, wa in enumerate(rows):
        for j, wb in enumerate(cols):
            out[i, j] = _radial_element(wa, wb)(h_out, d_mid, h_in, c)
    return out


def _disk_vector(n: int, h_bdy, d_mid, d_in, c) -> np.ndarray:
    rows = [nu.word() for nu in partitions(n)]
    return np.array([_radial_element(w, ())(h_bdy, d_mid, d_in, c) for w in rows], dtype=complex)


def _pant_array(levels, weights, c, zhat=ZHAT) -> np.ndarray:
    n1, n2, n3 = levels
    b1 = [nu.word() for nu in partitions(n1)]
    b2 = [nu.word() for nu in partitions(n2)]
    b3 = [nu.word() for nu in partitions(n3)]
    d1, d2, d3 = (complex(w) for w in weights)
    out = np.empty((len(b1), len(b2), len(b3)), dtype=complex)
    for i, wa in enumerate(b1):
        for j, wb in enumerate(b2):
            for k, wc in enumerate(b3):
                out[i, j, k] = _eval_bracket(_bracket(wa, wb, wc), d1, d2, d3, complex(c), zhat)
    return out


def block_coeff_tensor(kind: str, weight_args: tuple, levels, c: float) -> BlockCoeffTensor:
    """Build the coefficient tensor of one block kind up to the given levels.

    weight_args: annulus (h_out, Delta_marked, h_in); disk
    (h_boundary, Delta_marked, Delta_marked'); pant (D1, D2, D3).
    levels: annulus (N_out, N_in); disk (N,); pant (N1, N2, N3) -- all level
    combinations up to these bounds are materialized.
    """
    t = BlockCoeffTensor(kind=kind, weights=tuple(weight_args), c=c)
    w = tuple(complex(x) for x in weight_args)
    if kind == "annulus":
        for n_out in range(levels[0] + 1):
            for n_in in range(levels[1] + 1):
                t.blocks[(n_out, n_in)] = _annulus_matrix(n_out, n_in, w[0], w[1], w[2], c)
    elif kind == "disk":
        for n in range(levels[0] + 1):
            t.blocks[(n,)] = _disk_vector(n, w[0], w[1], w[2], c)
    elif kind == "pant":
        for n1 in range(levels[0] + 1):
            for n2 in range(levels[1] + 1):
                for n3 in range(levels[2] + 1):
                    t.blocks[(n1, n2, n3)] = _pant_array((n1, n2, n3), w, c)
    else:
        raise ValidationError(f"unknown tensor kind {kind!r}")
    return t


# ---------------------------------------------------------------------------
# block series
# ---------------------------------------------------------------------------


@dataclass
class BlockSeries:
    """Truncated block expansion: constant * prod |q_i|^{exponents_i} * series.

    ``coeffs`` maps multidegrees to holomorphic series coefficients; the
    modulus-dependent prefactor exponents stay symbolic in |q| so callers can
    form |F|^2 without cancellation.
    """

    exponents: tuple
    coeffs: dict
    N: int
    constant: float = 1.0

    def series_value(self, qs) -> complex:
        qs = tuple(complex(q) for q in qs)
        if len(qs) != len(self.exponents):
            raise DimensionMismatch(f"expected {len(self.exponents)} moduli, got {len(qs)}")
        total = 0.0 + 0.0j
        for degs, co in self.coeffs.items():
            term = co
            for q, n in zip(qs, degs):
                if n:
                    term *= q**n
            total += term
        return total

    def prefactor(self, qs) -> float:
        out = self.constant
        for q, e in zip(qs, self.exponents):
            out *= abs(complex(q)) ** e
        return out

    def value(self, qs) -> complex:
        return self.prefactor(qs) * self.series_value(qs)

    def abs2(self, qs) -> float:
        """|F|^2 at the given moduli."""
        return self.prefactor(qs) ** 2 * abs(self.series_value(qs)) ** 2


def _gram_inverses(h: complex, c: float, N: int, cond_guard: float = 1e10) -> list[np.ndarray]:
    out = []
    for n in range(N + 1):
        if n == 0:
            out.append(np.eye(1, dtype=complex))
        else:
            out.append(shapovalov_inverse(shapovalov(h, c, n), cond_guard).entries)
    return out


def torus_one_point_block(
    alpha1: complex, p: float, q: complex, params: CftParams, N: int = 6
) -> BlockSeries:
    """One-point block on the torus: |q|^{-c_L/24 + Delta_{Q+ip}} sum_n q^n
    Tr(F^{-1}_{Q+ip,n} w^A_n(alpha1, p, p))."""
    if abs(q) >= 1.0:
        raise DomainError(f"|q| must be < 1, got {abs(q)}")
    h = complex(conformal_weight(params.Q + 1j * p, params))
    d_mark = complex(conformal_weight(alpha1, params))
    c = params.c_L
    finv = _gram_inverses(h, c, N)
    coeffs = {}
    for n in range(N + 1):
        W = _annulus_matrix(n, n, h, d_mark, h, c)
        coeffs[(n,)] = complex(np.trace(finv[n] @ W))
    return BlockSeries(exponents=(-c / 24.0 + h.real,), coeffs=coeffs, N=N)


def _compositions(total: int, length: int):
    if length == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, length - 1):
            yield (first,) + rest


def chain_block(
    kind: str,
    alphas,
    p_vector,
    q_vector,
    params: CftParams,
    N: int = 6,
    positions=None,
) -> BlockSeries:
    """Cyclic (torus) or open (sphere) chain of annulus matrices.

    kind="torus_k": k moduli, coefficient at multidegree n is the cyclic trace
    Tr(F^{-1}_{p_k,n_k} W^{(k)}_{n_k n_{k-1}} ... W^{(2)}_{n_2 n_1}
    F^{-1}_{p_1,n_1} W^{(1)}_{n_1 n_k}) with W^{(j)} built from
    (Q+ip_j, alpha_j, Q+ip_{j-1}).

    kind="sphere_k": k-3 moduli; the chain is capped by disk vectors and the
    |z_j|-power prefactors of the marked points; ``positions`` must then be
    the full z list (z_1 = 0, z_k = inf as None).
    """
    c = params.c_L
    Q = params.Q
    if kind == "torus_k":
        k = len(alphas)
        if len(p_vector) != k or len(q_vector) != k:
            raise DimensionMismatch("torus chain needs k alphas, k p's and k q's")
        hs = [complex(conformal_weight(Q + 1j * p, params)) for p in p_vector]
        dm = [complex(conformal_weight(a, params)) for a in alphas]
        finv = [_gram_inverses(h, c, N) for h in hs]
        Ws: dict = {}

        def W(j: int, n_row: int, n_col: int) -> np.ndarray:
            # vertex j: rows at p_j, columns at p_{j-1} (cyclically)
            key = (j, n_row, n_col)
            if key not in Ws:
                Ws[key] = _annulus_matrix(n_row, n_col, hs[j], dm[j], hs[j - 1], c)
            return Ws[key]

        coeffs = {}
        for degs in _compositions_upto(N, k):
            mat = finv[k - 1][degs[k - 1]] @ W(k - 1, degs[k - 1], degs[k - 2]) if k > 1 else None
            if k == 1:
                coeffs[degs] = complex(np.trace(finv[0][degs[0]] @ W(0, degs[0], degs[0])))
                continue
            for j in range(k - 2, 0, -1):
                mat = mat @ finv[j][degs[j]] @ W(j, degs[j], degs[j - 1])
            mat = mat @ finv[0][degs[0]] @ W(0, degs[0], degs[k - 1])
            coeffs[degs] = complex(np.trace(mat))
        exps = tuple(-c / 24.0 + h.real for h in hs)
        return BlockSeries(exponents=exps, coeffs=coeffs, N=N)

    if kind == "sphere_k":
        k = len(alphas)
        if k < 4:
            raise DimensionMismatch("sphere chain needs k >= 4 marked points")
        if len(p_vector) != k - 3 or len(q_vector) != k - 3:
            raise DimensionMismatch("sphere chain needs k-3 p's and q's")
        if positions is None or len(positions) != k:
            raise DimensionMismatch("sphere chain needs the full z list (z_k = None for infinity)")
        hs = [complex(conformal_weight(Q + 1j * p, params)) for p in p_vector]  # p_2..p_{k-2}
        dm = [complex(conformal_weight(a, params)) for a in alphas]
        finv = [_gram_inverses(h, c, N) for h in hs]
        coeffs = {}
        for degs in _compositions_upto(N, k - 3):
            # vec starts from the far disk cap w^D(p_{k-2}, alpha_{k-1}, alpha_k)
            vec = _disk_vector(degs[-1], hs[-1], dm[k - 2], dm[k - 1], c)
            vec = finv[-1][degs[-1]] @ vec
            for idx in range(k - 5, -1, -1):
                # annulus W_{n_idx, n_{idx+1}} with marked weight alpha_{idx+2}
                Wm = _annulus_matrix(degs[idx], degs[idx + 1], hs[idx], dm[idx + 2], hs[idx + 1], c)
                vec = finv[idx][degs[idx]] @ (Wm @ vec)
            cap = _disk_vector(degs[0], hs[0], dm[1], dm[0], c)
            coeffs[degs] = complex(np.dot(cap.conj(), vec))
        constant = 1.0
        for j, z in enumerate(positions):
            if z is None:
                continue
            az = abs(complex(z))
            if az == 0.0:
                continue
            constant *= az ** (-dm[j].real) if az < 1.0 else az ** (dm[j].real)
        constant *= abs(complex(positions[1])) ** (-dm[0].real)
        constant *= abs(complex(positions[k - 2])) ** (dm[k - 1].real)
        exps = tuple(h.real for h in hs)
        return BlockSeries(exponents=exps, coeffs=coeffs, N=N, constant=constant)

    raise ValidationError(f"unknown chain kind {kind!r}")


def _compositions_upto(N: int, length: int):
    for total in range(N + 1):
        yield from _compositions(total, length)


def graph_block(graph, alphas, p_vector, q_vector, params: CftParams, N: int = 4) -> BlockSeries:
    """Conformal block of a validated pants graph.

    One (p, q, level) triple per linking edge; per-vertex coefficient tensors
    (pant / annulus / disk by the number of edge slots) are contracted across
    every edge through the inverse Gram matrix at that edge's weight.  The
    output factorizes as prod_i |q_i|^{-c_L/24 + Delta_{Q+ip_i}} times a
    holomorphic series in the q_i.
    """
    from .graphs import AdmissibleGraph  # local import to avoid a cycle

    if not isinstance(graph, AdmissibleGraph):
        raise ValidationError("graph_block expects an AdmissibleGraph")
    graph.check_structure()
    L = len(graph.edges)
    if len(p_vector) != L or len(q_vector) != L:
        raise DimensionMismatch(f"need one p and one q per edge ({L})")
    c = params.c_L
    Q = params.Q
    hs = [complex(conformal_weight(Q + 1j * p, params)) for p in p_vector]
    finv = [_gram_inverses(h, c, N) for h in hs]
    marked_weight = {
        (m.vertex, m.slot): complex(conformal_weight(a, params))
        for m, a in zip(graph.marked, alphas)
    }

    # per vertex: ordered slot list with (kind, edge index or marked weight)
    vertex_slots = graph.slot_map()

    coeffs = {}
    for degs in _compositions_upto(N, L):
        operands = []
        subscripts = []
        for vid in graph.vertex_ids:
            slots = vertex_slots[vid]
            edge_slots = [(k, eidx) for (k, kind, eidx) in slots if kind == "edge"]
            mark_ws = [marked_weight[(vid, k)] for (k, kind, _e) in slots if kind == "mark"]
            b = len(edge_slots)
            if b == 3:
                ws = tuple(hs[eidx] for (_k, eidx) in edge_slots)
                arr = _pant_array(tuple(degs[eidx] for (_k, eidx) in edge_slots), ws, c)
            elif b == 2:
                (k_a, e_a), (k_b, e_b) = edge_slots
                arr = _annulus_matrix(degs[e_a], degs[e_b], hs[e_a], mark_ws[0], hs[e_b], c)
            elif b == 1:
                (_k, e_a) = edge_slots[0]
                arr = _disk_vector(degs[e_a], hs[e_a], mark_ws[0], mark_ws[1], c)
            else:
                raise ValidationError(f"vertex {vid} has no edge slots")
            operands.append(arr)
            subscripts.append([("v", vid, k) for (k, _eidx) in edge_slots])
        for eidx, edge in enumerate(graph.edges):
            operands.append(finv[eidx][degs[eidx]])
            subscripts.append([("e", eidx, 0), ("e", eidx, 1)])

        # map each tensor axis to an einsum letter; edge ends tie vertex slots
        letter: dict = {}

        def _sym(tag):
            if tag not in letter:
                letter[tag] = chr(ord("a") + len(letter))
            return letter[tag]

        for eidx, edge in enumerate(graph.edges):
            _sym(("pair", eidx, 0))
            _sym(("pair", eidx, 1))
        spec_parts = []
        for ops, subs in zip(operands, subscripts):
            axes = []
            for tag in subs:
                kind_tag, idx, k = tag
                if kind_tag == "v":
                    eidx, end = graph.edge_end_of_slot(idx, k)
                    axes.append(letter[("pair", eidx, end)])
                else:
                    axes.append(letter[("pair", idx, k)])
            spec_parts.append("".join(axes))
        einsum_spec = ",".join(spec_parts) + "->"
        coeffs[degs] = complex(np.einsum(einsum_spec, *operands))
    exps = tuple(-c / 24.0 + h.real for h in hs)
    return BlockSeries(exponents=exps, coeffs=coeffs, N=N)
