"""The Svetlichny-type family S_n and its probability form Sigma_n.

A conditional distribution ``p(b|x)`` for n parties is a dense array of
shape ``(2**n, 2**n)`` indexed by packed context and packed outcome string
(party 1 = most significant bit).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .scenario import Event, Scenario, bits_to_int, int_to_bits

NORMALIZATION_TOL = 1e-12


class CorrelatorTerm(NamedTuple):
    settings: tuple[int, ...]
    sign: int


def build_sn(n: int) -> list[CorrelatorTerm]:
    """Expand S_n by the recursion ``S_n = <S_{n-1} x_1> + <bar S_{n-1} x_0>``.

    The bar flips every setting of every term; the new party is appended last.
    """
    if n < 2:
        raise ValueError(f"S_n needs n >= 2, got {n}")
    terms = [CorrelatorTerm((0, 0), 1), CorrelatorTerm((0, 1), 1),
             CorrelatorTerm((1, 0), 1), CorrelatorTerm((1, 1), -1)]
    for _ in range(n - 2):
        head = [CorrelatorTerm(t.settings + (1,), t.sign) for t in terms]
        barred = [CorrelatorTerm(tuple(1 - x for x in t.settings) + (0,), t.sign)
                  for t in terms]
        terms = head + barred
    return terms


def closed_form_sign(settings: Sequence[int]) -> int:
    """Sign read off the Sigma_n summation ranges, valid for n >= 3 only."""
    if len(settings) < 3:
        raise ValueError("the x1 = x2 = x3 rule needs at least three parties")
    x1, x2, x3 = settings[:3]
    return -1 if x1 == x2 == x3 else 1


@dataclass(frozen=True)
class SigmaExpression:
    n: int
    terms: tuple[CorrelatorTerm, ...]
    support: frozenset[Event]

    @cached_property
    def signs(self) -> np.ndarray:
        """Sign of each packed context."""
        out = np.zeros(2 ** self.n, dtype=np.int64)
        for t in self.terms:
            out[bits_to_int(t.settings)] = t.sign
        return out

    @cached_property
    def parity_class(self) -> np.ndarray:
        """Outcome parity that puts an event of each context into the support."""
        return (self.signs < 0).astype(np.int64)

    @cached_property
    def support_mask(self) -> np.ndarray:
        return support_mask(self.n, self.parity_class)

    def support_events(self) -> list[Event]:
        return sorted(self.support, key=lambda e: e.token())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"context": list(t.settings), "sign": t.sign} for t in self.terms],
            "support": [e.token() for e in self.support_events()],
        }


def outcome_parity(n: int) -> np.ndarray:
    b = np.arange(2 ** n)
    return np.array([bin(v).count("1") & 1 for v in b], dtype=np.int64)


def support_mask(n: int, parity_class: np.ndarray) -> np.ndarray:
    return outcome_parity(n)[None, :] == np.asarray(parity_class)[:, None]


@lru_cache(maxsize=None)
def build_sigma(n: int) -> SigmaExpression:
    terms = build_sn(n)
    scenario = Scenario(n)
    support = []
    for t in terms:
        want = 0 if t.sign > 0 else 1
        for b in range(2 ** n):
            bits = int_to_bits(b, n)
            if sum(bits) % 2 == want:
                support.append(Event.product(scenario, bits, t.settings))
    return SigmaExpression(n, tuple(terms), frozenset(support))


def check_distribution(p, n: int, tol: float = NORMALIZATION_TOL) -> np.ndarray:
    """Validate a dense ``p(b|x)`` table and return it as a float array."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2 ** n, 2 ** n):
        raise ValueError(f"expected shape {(2 ** n, 2 ** n)}, got {p.shape}")
    if np.any(p < -tol):
        raise ValueError("negative probabilities")
    err = np.max(np.abs(p.sum(axis=1) - 1.0))
    if err > tol:
        raise ValueError(f"context not normalized (max deviation {err:.3g})")
    return p


def n_of(p) -> int:
    size = np.shape(p)[0]
    n = size.bit_length() - 1
    if size != 2 ** n:
        raise ValueError("distribution size is not a power of two")
    return n


def sigma_value(expr: SigmaExpression, p) -> float:
    p = check_distribution(p, expr.n)
    return float(p[expr.support_mask].sum())


def s_value(terms: Sequence[CorrelatorTerm], p) -> float:
    n = len(terms[0].settings)
    p = check_distribution(p, n)
    even = outcome_parity(n) == 0
    total = 0.0
    for t in terms:
        p_even = p[bits_to_int(t.settings), even].sum()
        total += t.sign * (2.0 * p_even - 1.0)
    return float(total)


def evaluate(expr, p) -> float:
    """Sigma_n for a :class:`SigmaExpression`, S_n for a list of terms."""
    if isinstance(expr, SigmaExpression):
        return sigma_value(expr, p)
    return s_value(list(expr), p)


def uniform_distribution(n: int) -> np.ndarray:
    return np.full((2 ** n, 2 ** n), 2.0 ** -n)


def deterministic_distribution(outcomes: Sequence[int]) -> np.ndarray:
    """``p(b|x) = [b == outcomes[x]]`` for packed outcome per packed context."""
    m = len(outcomes)
    p = np.zeros((m, m))
    p[np.arange(m), np.asarray(outcomes)] = 1.0
    return p


def random_distribution(n: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.random((2 ** n, 2 ** n))
    return p / p.sum(axis=1, keepdims=True)
