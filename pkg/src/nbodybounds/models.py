"""Local, hybrid (bipartite-block), nonsignaling and quantum values of Sigma_n."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .scenario import bits_to_int, int_to_bits
from .sigma import build_sigma, check_distribution, sigma_value

MAX_LOCAL_N = 8
MAX_HYBRID_N = 8
MAX_GHZ_N = 12
MAX_OPTIMIZE_N = 10

# deterministic single-party responses b(x) = slope * x ^ offset
LOCAL_FUNCTIONS = ("zero", "one", "copy", "flip")
_LOCAL_TABLE = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=np.int8)


def _context_bits(n: int) -> np.ndarray:
    return np.array([int_to_bits(x, n) for x in range(2 ** n)], dtype=np.int64)


# -- local ---------------------------------------------------------------------

@dataclass
class LocalResult:
    sigma: int
    s_value: float
    strategy: tuple[str, ...]


def local_bound(n: int) -> LocalResult:
    """Maximum of Sigma_n over all 4^n products of deterministic local responses."""
    if not 2 <= n <= MAX_LOCAL_N:
        raise ValueError(f"exhaustive local enumeration supports 2 <= n <= {MAX_LOCAL_N}")
    parity_class = build_sigma(n).parity_class
    xb = _context_bits(n)
    codes = np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64)
    parity = np.zeros((len(codes), 2 ** n), dtype=np.int8)
    for i in range(n):
        parity ^= _LOCAL_TABLE[codes[:, i][:, None], xb[:, i][None, :]]
    scores = (parity == parity_class[None, :]).sum(axis=1)
    best = int(np.argmax(scores))
    value = int(scores[best])
    return LocalResult(value, 2.0 * (value - 2 ** (n - 1)),
                       tuple(LOCAL_FUNCTIONS[c] for c in codes[best]))


def local_distribution(strategy: tuple[str, ...]) -> np.ndarray:
    n = len(strategy)
    codes = [LOCAL_FUNCTIONS.index(s) for s in strategy]
    p = np.zeros((2 ** n, 2 ** n))
    for x in range(2 ** n):
        bits = int_to_bits(x, n)
        b = [int(_LOCAL_TABLE[c, xi]) for c, xi in zip(codes, bits)]
        p[x, bits_to_int(b)] = 1.0
    return p


# -- hybrid --------------------------------------------------------------------

@dataclass
class HybridStrategy:
    """Deterministic block strategy: each block answers its own joint setting."""

    n: int
    block: tuple[int, ...]  # 1-based parties of K
    strategy_block: dict[tuple[int, ...], tuple[int, ...]]
    strategy_rest: dict[tuple[int, ...], tuple[int, ...]]

    @property
    def rest(self) -> tuple[int, ...]:
        return tuple(p for p in range(1, self.n + 1) if p not in self.block)

    def distribution(self) -> np.ndarray:
        n = self.n
        p = np.zeros((2 ** n, 2 ** n))
        for x in range(2 ** n):
            bits = int_to_bits(x, n)
            out = [0] * n
            xk = tuple(bits[q - 1] for q in self.block)
            xr = tuple(bits[q - 1] for q in self.rest)
            for q, b in zip(self.block, self.strategy_block[xk]):
                out[q - 1] = b
            for q, b in zip(self.rest, self.strategy_rest[xr]):
                out[q - 1] = b
            p[x, bits_to_int(out)] = 1.0
        return p


@dataclass
class HybridResult:
    value: int
    witness: HybridStrategy


def bipartitions(n: int) -> list[tuple[int, ...]]:
    """Blocks K with |K| <= n/2, one per complementary pair."""
    out = []
    for k in range(1, n // 2 + 1):
        for block in itertools.combinations(range(1, n + 1), k):
            if 2 * k == n and 1 not in block:
                continue
            out.append(block)
    return out


def _class_matrix(n: int, block: tuple[int, ...]) -> np.ndarray:
    """Parity class indexed by (block setting, rest setting)."""
    parity_class = build_sigma(n).parity_class
    rest = [p for p in range(1, n + 1) if p not in block]
    k = len(block)
    C = np.zeros((2 ** k, 2 ** (n - k)), dtype=np.int64)
    for x in range(2 ** n):
        bits = int_to_bits(x, n)
        xk = bits_to_int([bits[q - 1] for q in block])
        xr = bits_to_int([bits[q - 1] for q in rest])
        C[xk, xr] = parity_class[x]
    return C


def _pad(parity: int, size: int) -> tuple[int, ...]:
    return (parity,) + (0,) * (size - 1)


def hybrid_bound(n: int) -> HybridResult:
    """Exact maximum of Sigma_n over block-local hybrid strategies.

    Only the parity of a block's joint outcome enters Sigma_n, so the smaller
    block ranges over all parity functions of its settings and the larger one
    best-responds setting by setting. Mixtures cannot do better (linearity).
    """
    if not 2 <= n <= MAX_HYBRID_N:
        raise ValueError(f"hybrid bound supports 2 <= n <= {MAX_HYBRID_N}")
    best_value, best = -1, None
    for block in bipartitions(n):
        k = len(block)
        C = _class_matrix(n, block)
        F = np.array(list(itertools.product((0, 1), repeat=2 ** k)), dtype=np.int64)
        agree0 = F @ C + (1 - F) @ (1 - C)  # agreements if the rest answers parity 0
        per_rest = np.maximum(agree0, 2 ** k - agree0)
        totals = per_rest.sum(axis=1)
        f = int(np.argmax(totals))
        if int(totals[f]) > best_value:
            best_value = int(totals[f])
            g = (agree0[f] < 2 ** k - agree0[f]).astype(int)
            rest_size = n - k
            best = HybridStrategy(
                n, block,
                {int_to_bits(xk, k): _pad(int(F[f, xk]), k) for xk in range(2 ** k)},
                {int_to_bits(xr, rest_size): _pad(int(g[xr]), rest_size)
                 for xr in range(2 ** rest_size)},
            )
    return HybridResult(best_value, best)


def hybrid_bound_enumerate(n: int) -> int:
    """Brute force over every joint-outcome map of both blocks (small n only)."""
    if n > 4:
        raise ValueError("full double enumeration is limited to n <= 4")
    sigma = build_sigma(n)
    best = 0
    for block in bipartitions(n):
        k = len(block)
        rest_size = n - k
        if (2 ** k) ** (2 ** k) * (2 ** rest_size) ** (2 ** rest_size) > 2 ** 20:
            raise ValueError(f"block split {k}+{rest_size} too large to enumerate")
        ks = [int_to_bits(v, k) for v in range(2 ** k)]
        rs = [int_to_bits(v, rest_size) for v in range(2 ** rest_size)]
        k_outs = [int_to_bits(v, k) for v in range(2 ** k)]
        r_outs = [int_to_bits(v, rest_size) for v in range(2 ** rest_size)]
        for fk in itertools.product(k_outs, repeat=len(ks)):
            for fr in itertools.product(r_outs, repeat=len(rs)):
                strat = HybridStrategy(n, block, dict(zip(ks, fk)), dict(zip(rs, fr)))
                best = max(best, round(sigma_value(sigma, strat.distribution())))
    return best


# -- nonsignaling -----------------------------------------------------------------

@dataclass
class NsBox:
    n: int
    p: np.ndarray


def ns_box(n: int) -> NsBox:
    """Uniform over the support parity class of each context; the PR box at n = 2."""
    sigma = build_sigma(n)
    return NsBox(n, np.where(sigma.support_mask, 2.0 ** (1 - n), 0.0))


def check_nonsignaling(p, tol: float = 1e-12) -> bool:
    """Every proper-subset marginal is independent of the other parties' settings."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0].bit_length() - 1
    check_distribution(p, n, tol)
    t = p.reshape((2,) * (2 * n))  # axes x_1..x_n, b_1..b_n
    for size in range(1, n):
        for keep in itertools.combinations(range(n), size):
            drop = [i for i in range(n) if i not in keep]
            marg = t.sum(axis=tuple(n + i for i in drop))
            spread = marg.max(axis=tuple(drop)) - marg.min(axis=tuple(drop))
            if spread.max() > tol:
                return False
    return True


# -- quantum -----------------------------------------------------------------------

def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return psi


def _equatorial(theta: np.ndarray) -> np.ndarray:
    """Batch of ``cos t X + sin t Y`` matrices, shape (..., 2, 2)."""
    out = np.zeros(np.shape(theta) + (2, 2), dtype=complex)
    out[..., 0, 1] = np.exp(-1j * theta)
    out[..., 1, 0] = np.exp(1j * theta)
    return out


def ghz_correlators(angles) -> np.ndarray:
    """<GHZ| (x)_i (cos t_i X + sin t_i Y) |GHZ> for each row of ``angles``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    batch, n = angles.shape
    if n > MAX_GHZ_N:
        raise ValueError(f"statevector limited to n <= {MAX_GHZ_N}")
    psi = ghz_state(n).reshape((2,) * n)
    phi = np.broadcast_to(psi, (batch,) + psi.shape).copy()
    ops = _equatorial(angles)
    for i in range(n):
        phi = np.moveaxis(np.einsum("bij,bj...->bi...", ops[:, i], np.moveaxis(phi, i + 1, 1)),
                          1, i + 1)
    vals = np.einsum("j,bj->b", psi.reshape(-1).conj(), phi.reshape(batch, -1))
    return vals.real


def ghz_correlator(n: int, angles) -> float:
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n,):
        raise ValueError(f"need one angle per party, got shape {angles.shape}")
    return float(ghz_correlators(angles[None, :])[0])


def _context_angles(theta: np.ndarray) -> np.ndarray:
    """theta[i, x] per party/setting -> angle rows for all packed contexts."""
    n = theta.shape[0]
    xb = _context_bits(n)
    return theta[np.arange(n)[None, :], xb]


def sn_value(theta, signs: np.ndarray | None = None) -> float:
    """S_n of GHZ with equatorial observables at angles ``theta[i, x]``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if signs is None:
        signs = build_sigma(n).signs
    return float(signs @ ghz_correlators(_context_angles(theta)))


def ghz_distribution(theta) -> np.ndarray:
    """Full p(b|x) of the GHZ state measured along the given equatorial angles."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    psi = ghz_state(n).reshape((2,) * n)
    p = np.empty((2 ** n, 2 ** n))
    for x, row in enumerate(_context_angles(theta)):
        phi = psi
        for i, t in enumerate(row):
            # rows: conjugated eigenvectors for outcome b=0 (+1) and b=1 (-1)
            basis = np.array([[1, np.exp(-1j * t)], [1, -np.exp(-1j * t)]]) / math.sqrt(2)
            phi = np.moveaxis(np.tensordot(basis, phi, axes=([1], [i])), 0, i)
        p[x] = np.abs(phi.reshape(-1)) ** 2
    return p


@dataclass
class QuantumAngles:
    theta: np.ndarray  # shape (n, 2), theta[i, x]

    def __post_init__(self):
        self.theta = np.mod(np.asarray(self.theta, dtype=float), 2 * math.pi)

    @property
    def n(self) -> int:
        return self.theta.shape[0]


GRID_STEP = math.pi / 8


def _coordinate_ascent(theta: np.ndarray, signs: np.ndarray, tol: float,
                       max_sweeps: int) -> tuple[np.ndarray, float]:
    grid = np.arange(16) * GRID_STEP
    value = sn_value(theta, signs)
    for _ in range(max_sweeps):
        start = value
        for i, x in itertools.product(range(theta.shape[0]), (0, 1)):
            trial = theta.copy()

            def f(t):
                trial[i, x] = t
                return sn_value(trial, signs)

            coarse = [f(t) for t in grid]
            g = grid[int(np.argmax(coarse))]
            res = minimize_scalar(lambda t: -f(t), bounds=(g - GRID_STEP, g + GRID_STEP),
                                  method="bounded", options={"xatol": 1e-12})
            cand = [(max(coarse), g), (-res.fun, res.x), (value, theta[i, x])]
            best_v, best_t = max(cand, key=lambda c: c[0])
            theta[i, x] = best_t
            value = best_v
        if value - start <= tol:
            break
    return theta, value


def optimize_sn_angles(n: int, starts: int = 8, seed: int = 0, tol: float = 1e-8,
                       max_sweeps: int = 200) -> tuple[QuantumAngles, float]:
    """Maximise S_n over equatorial GHZ measurements.

    Starts are points of the pi/8 grid (the all-zero point plus seeded random
    ones); each is refined by coordinate ascent, each coordinate getting a grid
    scan followed by a bounded scalar search around the best grid point.
    """
    if not 2 <= n <= MAX_OPTIMIZE_N:
        raise ValueError(f"optimiser supports 2 <= n <= {MAX_OPTIMIZE_N}")
    signs = build_sigma(n).signs
    rng = np.random.default_rng(seed)
    inits = [np.zeros((n, 2))]
    inits += [rng.integers(0, 16, size=(n, 2)) * GRID_STEP for _ in range(starts - 1)]
    best_v, best_t = -math.inf, None
    for init in inits:
        theta, value = _coordinate_ascent(init.astype(float), signs, tol, max_sweeps)
        if value > best_v + 1e-15:
            best_v, best_t = value, theta
    return QuantumAngles(best_t), best_v


def sigma_from_s(s: float, n: int) -> float:
    return s / 2 + 2 ** (n - 1)
