"""Partition combinatorics and the Virasoro Verma-module algebra.

Basis convention: the level-n descendant attached to the partition
nu = (nu_1 >= nu_2 >= ... >= nu_k) is

    |D, nu>  =  L_{-nu_k} ... L_{-nu_1} |D>,

i.e. the largest part acts first on the highest-weight state.  Internally a
basis state is keyed by its *operator word*: the ascending tuple
(nu_k, ..., nu_1), read left to right as operators.  The commutation relations

    [L_n, L_m] = (n - m) L_{n+m} + (c/12) (n^3 - n) delta_{n,-m}

together with L_m |D> = 0 (m > 0) and L_0 |D> = D |D> normal-order any word.

The generator action is written ring-agnostically: the weight ``delta`` and
central charge ``c`` may be floats, complex numbers, Fractions, or any objects
supporting +, *, and division by small integers.  The float path is exact for
dyadic-rational weights (only integer multiples and halves ever appear), which
is what makes the bit-for-bit oracle comparison in the test suite meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateWeight, ValidationError
from .params import CftParams

__all__ = [
    "YoungDiagram",
    "VermaVector",
    "GramMatrix",
    "partitions",
    "partition_count",
    "conformal_weight",
    "kac_weight",
    "apply_virasoro",
    "apply_generator_to_word",
    "shapovalov",
    "shapovalov_gram_exact",
    "shapovalov_inverse",
]


@dataclass(frozen=True)
class YoungDiagram:
    """A partition: non-increasing positive parts. The empty diagram is valid."""

    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p <= 0 for p in parts):
            raise ValidationError(f"parts must be positive, got {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValidationError(f"parts must be non-increasing, got {parts}")

    @property
    def level(self) -> int:
        return sum(self.parts)

    @property
    def size(self) -> int:
        return len(self.parts)

    def word(self) -> tuple[int, ...]:
        """Ascending operator word (smallest part leftmost/outermost)."""
        return tuple(reversed(self.parts))


@lru_cache(maxsize=None)
def _partition_tuples(n: int, max_part: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in _partition_tuples(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions(n: int) -> tuple[YoungDiagram, ...]:
    """All partitions of n, largest-part-first (reverse-lexicographic) order."""
    if n < 0:
        raise ValidationError(f"partition level must be >= 0, got {n}")
    return tuple(YoungDiagram(p) for p in _partition_tuples(n, n if n else 1))


def partition_count(n: int) -> int:
    return len(_partition_tuples(n, n if n else 1))


def conformal_weight(alpha: complex, params: CftParams) -> complex:
    """Delta_alpha = (alpha/2)(Q - alpha/2)."""
    return (alpha / 2.0) * (params.Q - alpha / 2.0)


def kac_weight(r: int, s: int, params: CftParams) -> float:
    """Degenerate weight alpha_{r,s} = Q - r gamma/2 - s 2/gamma (r, s >= 1)."""
    if r < 1 or s < 1:
        raise ValidationError(f"Kac labels must satisfy r, s >= 1, got ({r}, {s})")
    return params.Q - r * params.gamma / 2.0 - s * 2.0 / params.gamma


# ---------------------------------------------------------------------------
# generator action on canonical words
# ---------------------------------------------------------------------------


def _accumulate(target: dict, word: tuple[int, ...], coeff) -> None:
    if word in target:
        target[word] = target[word] + coeff
    else:
        target[word] = coeff


def apply_generator_to_word(n: int, word: tuple[int, ...], delta, c) -> dict:
    """L_n applied to the canonical word (ascending tuple); returns
    {word: coefficient} in canonical form.  Ring-agnostic in (delta, c)."""
    if n == 0:
        return {word: delta + sum(word)}
    if n < 0:
        m = -n
        if not word or m <= word[0]:
            return {(m,) + word: _ring_one(delta)}
        m1, rest = word[0], word[1:]
        out: dict = {}
        # L_{-m} L_{-m1} = L_{-m1} L_{-m} + (m1 - m) L_{-(m+m1)}
        for w2, co in apply_generator_to_word(n, rest, delta, c).items():
            for w3, co3 in apply_generator_to_word(-m1, w2, delta, c).items():
                _accumulate(out, w3, co * co3)
        for w2, co in apply_generator_to_word(-(m + m1), rest, delta, c).items():
            _accumulate(out, w2, co * (m1 - m))
        return out
    # n > 0
    if not word:
        return {}
    m1, rest = word[0], word[1:]
    out = {}
    # L_n L_{-m1} = L_{-m1} L_n + (n + m1) L_{n - m1} + delta_{n,m1} (c/12)(n^3 - n)
    for w2, co in apply_generator_to_word(n, rest, delta, c).items():
        for w3, co3 in apply_generator_to_word(-m1, w2, delta, c).items():
            _accumulate(out, w3, co * co3)
    for w2, co in apply_generator_to_word(n - m1, rest, delta, c).items():
        _accumulate(out, w2, co * (n + m1))
    if n == m1 and n > 1:
        central = (c * ((n**3 - n) // 6)) / 2
        _accumulate(out, rest, central)
    return out


def _ring_one(delta):
    """Multiplicative identity of the coefficient ring of ``delta``."""
    one = getattr(delta, "ring_one", None)
    if one is not None:
        return one()
    return type(delta)(1) if not isinstance(delta, (int, float, complex)) else 1


@dataclass
class VermaVector:
    """Graded linear combination of canonical descendants of one primary."""

    grade: int
    coeffs: dict  # partition tuple (non-increasing) -> coefficient

    @classmethod
    def basis(cls, nu: YoungDiagram | tuple[int, ...]):
        parts = nu.parts if isinstance(nu, YoungDiagram) else tuple(nu)
        return cls(grade=sum(parts), coeffs={parts: 1.0})

    def is_zero(self) -> bool:
        return not self.coeffs or all(co == 0 for co in self.coeffs.values())


def apply_virasoro(n: int, v: VermaVector, delta, c) -> VermaVector:
    """L_n . v, normal-ordered; grading drops by n (empty result if annihilated)."""
    out: dict = {}
    for parts, co in v.coeffs.items():
        word = tuple(reversed(parts))
        for w2, co2 in apply_generator_to_word(n, word, delta, c).items():
            key = tuple(reversed(w2))
            if key in out:
                out[key] = out[key] + co * co2
            else:
                out[key] = co * co2
    out = {k: v2 for k, v2 in out.items() if v2 != 0}
    return VermaVector(grade=v.grade - n, coeffs=out)


# ---------------------------------------------------------------------------
# Shapovalov form
# ---------------------------------------------------------------------------


@dataclass
class GramMatrix:
    """Shapovalov form on level-n descendants, indexed by partitions()."""

    level: int
    delta: complex
    c: complex
    entries: np.ndarray
    basis: tuple[YoungDiagram, ...]
    residual: float | None = None  # max |F F^-1 - I| when this is an inverse
    method: str | None = None


def _pairing(word_bra: tuple[int, ...], word_ket: tuple[int, ...], delta, c):
    """< L_{-bra} D , L_{-ket} D >  with adjoint L_n^dag = L_{-n}."""
    state = {word_ket: _ring_one(delta)}
    for m in word_bra:  # rightmost raising operator of the bra acts first
        nxt: dict = {}
        for w, co in state.items():
            for w2, co2 in apply_generator_to_word(m, w, delta, c).items():
                _accumulate(nxt, w2, co * co2)
        state = nxt
        if not state:
            return 0
    return state.get((), 0)


def shapovalov(delta, c, n: int) -> GramMatrix:
    """Gram matrix F(nu, nu') at level n, exactly symmetric by construction."""
    if n < 0:
        raise ValidationError(f"level must be >= 0, got {n}")
    basis = partitions(n)
    d = len(basis)
    F = np.zeros((d, d), dtype=complex)
    words = [nu.word() for nu in basis]
    for i in range(d):
        for j in range(i, d):
            val = complex(_pairing(words[i], words[j], delta, c))
            F[i, j] = val
            F[j, i] = val
    return GramMatrix(level=n, delta=delta, c=c, entries=F, basis=basis)


def shapovalov_gram_exact(delta, c, n: int) -> list[list]:
    """Same Gram matrix with coefficients kept in the ring of (delta, c)
    (e.g. Fraction); used for exact-arithmetic work and oracles."""
    basis = partitions(n)
    words = [nu.word() for nu in basis]
    return [[_pairing(wi, wj, delta, c) for wj in words] for wi in words]


def shapovalov_inverse(F: GramMatrix, cond_guard: float = 1e10) -> GramMatrix:
    """F^{-1} with a residual report.

    On the spectrum line (weight Q + ip, p real nonzero) the matrix is real
    symmetric positive definite and a Cholesky factorization is used; generic
    complex weights fall back to an LU solve.  A condition estimate beyond
    ``cond_guard`` raises DegenerateWeight (weight too close to a Kac zero).
    """
    A = F.entries
    if A.shape == (0, 0):
        return GramMatrix(F.level, F.delta, F.c, A.copy(), F.basis, residual=0.0, method="empty")
    # scale-invariant condition estimate: symmetric diagonal equilibration
    # separates genuine Kac-zero proximity from the harmless entry-scale
    # spread that high levels and large weights produce
    diag = np.abs(np.diagonal(A))
    if np.any(diag == 0.0):
        raise DegenerateWeight(
            f"Gram matrix at level {F.level}, Delta = {F.delta} has a vanishing diagonal norm"
        )
    d = 1.0 / np.sqrt(diag)
    cond = float(np.linalg.cond(A * d[:, None] * d[None, :]))
    if not np.isfinite(cond) or cond > cond_guard:
        raise DegenerateWeight(
            f"Gram matrix at level {F.level}, Delta = {F.delta} has equilibrated condition "
            f"{cond:.3e} > guard {cond_guard:.1e} (weight near a Kac zero?)"
        )
    method = "lu"
    inv = None
    if np.allclose(A.imag, 0.0, atol=0.0):
        R = A.real
        try:
            cf = np.linalg.cholesky(R)
            ident = np.eye(len(R))
            y = np.linalg.solve(cf, ident)
            inv = np.linalg.solve(cf.T, y).astype(complex)
            method = "cholesky"
        except np.linalg.LinAlgError:
            inv = None
    if inv is None:
        inv = np.linalg.solve(A, np.eye(len(A), dtype=complex))
    residual = float(np.max(np.abs(A @ inv - np.eye(len(A)))))
    return GramMatrix(F.level, F.delta, F.c, inv, F.basis, residual=residual, method=method)
