"""Doubled-experiment bookkeeping: the 4^n sets of pairwise exclusive events.

Product events of the doubled scenario are stored packed, one row
``(xS, bS, xV, bV)`` per event, see :mod:`nbodybounds.scenario`.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import scenario as sc
from .scenario import Derived, Event, Scenario
from .sigma import SigmaExpression, build_sigma, check_distribution, sigma_value

MAX_UNFORCED_N = 5

# Seed rows for n = 2: four displayed events per row, (b1,b2,b1',b2'|x1,x2,x1',x2'), and
# the ancillary event exclusive to the whole row.
SEED_ROWS = (
    (("0,0,0,0|0,0,0,0", "0,1,0,1|0,0,0,0", "0,0,1,1|1,0,1,0", "0,1,1,0|1,0,1,0"), "1,0|A00,A11"),
    (("0,0,1,1|0,0,0,0", "0,1,1,0|0,0,0,0", "0,0,0,0|1,0,1,0", "0,1,0,1|1,0,1,0"), "0,1|A00,A11"),
    (("0,0,1,1|0,0,0,1", "0,1,1,0|0,0,0,1", "0,0,1,0|1,0,1,1", "0,1,1,1|1,0,1,1"), "0,0|A00,A11"),
    (("0,0,0,0|0,0,0,1", "0,1,0,1|0,0,0,1", "0,0,0,1|1,0,1,1", "0,1,0,0|1,0,1,1"), "1,1|A00,A11"),
    (("0,0,1,0|0,0,1,1", "0,1,1,1|0,0,1,1", "0,0,1,1|1,0,0,1", "0,1,1,0|1,0,0,1"), "0,0|A01,A10"),
    (("0,0,0,1|0,0,1,1", "0,1,0,0|0,0,1,1", "0,0,0,0|1,0,0,1", "0,1,0,1|1,0,0,1"), "1,1|A01,A10"),
    (("0,0,0,0|0,0,1,0", "0,1,0,1|0,0,1,0", "0,0,1,1|1,0,0,0", "0,1,1,0|1,0,0,0"), "1,0|A01,A10"),
    (("0,0,1,1|0,0,1,0", "0,1,1,0|0,0,1,0", "0,0,0,0|1,0,0,0", "0,1,0,1|1,0,0,0"), "0,1|A01,A10"),
)


@dataclass(eq=False)
class ExclusiveSet:
    n: int
    rows: np.ndarray  # (2 * 4**(n-1), 4) packed product events
    ancillary: Event

    @property
    def product_events(self) -> list[Event]:
        scen = Scenario(self.n, doubled=True)
        return [sc.unpack_event(r, scen) for r in self.rows]

    def events(self) -> list[Event]:
        return self.product_events + [self.ancillary]


@dataclass(eq=False)
class SetFamily:
    n: int
    sets: list[ExclusiveSet]

    def all_rows(self) -> np.ndarray:
        return np.concatenate([s.rows for s in self.sets])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "sets": [
                {"product": [e.token() for e in s.product_events],
                 "ancillary": s.ancillary.token()}
                for s in self.sets
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SetFamily":
        n = int(data["n"])
        scen = Scenario(n, doubled=True)
        sets = []
        for entry in data["sets"]:
            rows = [sc.pack_event(sc.parse_event(t, scen)) for t in entry["product"]]
            anc = sc.parse_event(entry["ancillary"], scen)
            sets.append(ExclusiveSet(n, np.array(rows, dtype=np.int64).reshape(-1, 4), anc))
        return cls(n, sets)


@dataclass
class FamilyVerdict:
    n: int
    checks: dict[str, bool]
    counts: dict
    failures: list[str] = field(default_factory=list)
    derived_bound: float | None = None

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"n": self.n, "checks": dict(self.checks), "counts": dict(self.counts),
                "failures": list(self.failures), "derived_bound": self.derived_bound}


# -- construction -------------------------------------------------------------

def _global_flip(row: tuple[int, ...], n: int) -> tuple[int, ...]:
    full = (1 << n) - 1
    xs, bs, xv, bv = row
    return (xs, bs ^ full, xv, bv ^ full)


def _swap_cities(row) -> tuple[int, ...]:
    xs, bs, xv, bv = (int(v) for v in row)
    return (xv, bv, xs, bs)


def _remap_ancillary(anc: Event, fn, n: int | None = None) -> Event:
    scen = anc.scenario if n is None else Scenario(n, doubled=True)
    return Event.ancillary(scen, {fn(m.i, m.j): c for m, c in anc.assignments})


def swap_ancillary(anc: Event) -> Event:
    """City swap of an ancillary event: ``A_ij -> A_ji`` with outcomes kept."""
    return _remap_ancillary(anc, lambda i, j: (j, i))


def _relabel_stockholm(row) -> tuple[int, ...]:
    # x2 -> x2 ^ 1 and b1 -> b1 ^ x1 on the Stockholm side; support-preserving
    xs, bs, xv, bv = (int(v) for v in row)
    return (xs ^ 1, bs ^ (xs & 2), xv, bv)


def _relabel_ancillary(anc: Event) -> Event:
    return Event.ancillary(anc.scenario, {(m.i, m.j): c ^ m.i for m, c in anc.assignments})


def seed_sets() -> list[ExclusiveSet]:
    """The eight displayed rows, each completed by the global outcome flip."""
    scen = Scenario(2, doubled=True)
    out = []
    for shown, anc_token in SEED_ROWS:
        rows = [sc.pack_event(sc.parse_event(t, scen)) for t in shown]
        rows += [_global_flip(r, 2) for r in rows]
        out.append(ExclusiveSet(2, np.array(rows, dtype=np.int64), sc.parse_event(anc_token, scen)))
    return out


def base_family_n2(completion: str = "relabel") -> SetFamily:
    """The 16 sets for n = 2: the eight seed rows plus eight more.

    The displayed rows only use Stockholm contexts (0,0) and (1,0).
    ``completion="city_swap"`` adds their city-swapped copies; those sets are
    valid exclusive sets, but they double-cover Stockholm/Vienna contexts in
    {(0,0),(1,0)}^2 and leave {(0,1),(1,1)}^2 uncovered, so the family is not
    disjoint. ``completion="relabel"`` (default) instead maps each row through
    the Stockholm-side symmetry ``x2 -> x2 ^ 1, b1 -> b1 ^ x1`` of Sigma_2,
    which covers the missing contexts exactly once; the ancillary outcome of
    ``A_1j`` flips along with ``b1``.
    """
    rows = seed_sets()
    if completion == "city_swap":
        extra = [ExclusiveSet(2, np.array([_swap_cities(r) for r in s.rows], dtype=np.int64),
                              swap_ancillary(s.ancillary)) for s in rows]
    elif completion == "relabel":
        extra = [ExclusiveSet(2, np.array([_relabel_stockholm(r) for r in s.rows], dtype=np.int64),
                              _relabel_ancillary(s.ancillary)) for s in rows]
    else:
        raise ValueError(f"unknown completion {completion!r}")
    return SetFamily(2, rows + extra)


NEW_SETTINGS = ((0, 0), (0, 1), (1, 0), (1, 1))
NEW_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def lift(family: SetFamily, mode: str = "compensated", check: bool = True) -> SetFamily:
    """Sets for n + 1 parties: each parent set spawns four sets, 4x as large.

    Every parent event is extended by a new party with settings ``(s, s')``
    and all four outcome pairs ``(beta, beta')``.

    ``mode="literal"`` appends the new components and nothing else. That keeps
    pairwise exclusivity and disjointness, but half of the extended events mix
    an in-support Stockholm part with an out-of-support Vienna part.

    ``mode="compensated"`` (default) follows the S_n recursion instead: a city
    whose new setting is 0 gets all its old settings flipped (the barred copy of
    S_{n-1}), and ``beta`` is XOR-ed into the last old party's outcome so the
    outcome parity, hence support membership, is unchanged. The same setting
    flip is applied to the ancillary event (``A_ij -> A_{i^1, j}`` for
    Stockholm). Party 1 outcomes never change, so the ancillary stays exclusive.
    """
    if mode not in ("compensated", "literal"):
        raise ValueError(f"unknown lift mode {mode!r}")
    n = family.n
    if check:
        verdict = verify_family(family, build_sigma(n))
        if not verdict.ok:
            raise ValueError(f"cannot lift a family failing {verdict.failures}")
    full = (1 << n) - 1
    beta = np.array([b for b, _ in NEW_OUTCOMES], dtype=np.int64)
    beta_v = np.array([b for _, b in NEW_OUTCOMES], dtype=np.int64)
    sets = []
    for parent in family.sets:
        xs, bs, xv, bv = (parent.rows[:, k][:, None] for k in range(4))
        for s, sv in NEW_SETTINGS:
            if mode == "literal":
                nxs, nxv = xs, xv
                nbs, nbv = bs + 0 * beta, bv + 0 * beta_v
                anc = _remap_ancillary(parent.ancillary, lambda i, j: (i, j), n + 1)
            else:
                nxs = xs if s else xs ^ full
                nxv = xv if sv else xv ^ full
                nbs, nbv = bs ^ beta, bv ^ beta_v
                anc = _remap_ancillary(parent.ancillary,
                                       lambda i, j: (i ^ (1 - s), j ^ (1 - sv)), n + 1)
            rows = np.stack([
                np.broadcast_to((nxs << 1) | s, nbs.shape),
                (nbs << 1) | beta,
                np.broadcast_to((nxv << 1) | sv, nbv.shape),
                (nbv << 1) | beta_v,
            ], axis=-1).reshape(-1, 4)
            sets.append(ExclusiveSet(n + 1, rows, anc))
    return SetFamily(n + 1, sets)


def family_memory_estimate(n: int) -> int:
    """Rough bytes needed to hold and check the family for n parties."""
    events = 4 ** n * 2 * 4 ** (n - 1)
    per_set = (2 * 4 ** (n - 1)) ** 2
    return events * 4 * 8 + 16 ** n * 8 + per_set * 16


def build_family(n: int, force: bool = False, mode: str = "compensated") -> SetFamily:
    if n < 2:
        raise ValueError(f"families need n >= 2, got {n}")
    if n > MAX_UNFORCED_N and not force:
        raise MemoryError(
            f"n={n} needs about {family_memory_estimate(n) / 2**20:.0f} MiB (force=True overrides)")
    fam = base_family_n2()
    while fam.n < n:
        # the final level is verified by the caller
        fam = lift(fam, mode=mode, check=mode == "compensated")
    return fam


def compatible_ancillaries(s: ExclusiveSet) -> list[Event]:
    """All ancillary events exclusive to every product event of ``s``."""
    scen = Scenario(s.n, doubled=True)
    out = []
    for pair in ((0, 0), (1, 1)), ((0, 1), (1, 0)):
        for c, d in itertools.product((0, 1), repeat=2):
            anc = Event.ancillary(scen, {pair[0]: c, pair[1]: d})
            if sc.ancillary_exclusive_mask(anc, s.rows, s.n).all():
                out.append(anc)
    return out


# -- verification -------------------------------------------------------------

def pack_keys(rows: np.ndarray, n: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    return (((rows[:, 0] << n | rows[:, 1]) << n | rows[:, 2]) << n) | rows[:, 3]


def coverage_target(sigma: SigmaExpression) -> np.ndarray:
    """Indicator over packed doubled events: both parts in, or both out."""
    inside = sigma.support_mask.reshape(-1)
    return (inside[:, None] == inside[None, :]).reshape(-1)


def _ancillary_mass(family: SetFamily) -> tuple[float | None, dict]:
    mult = Counter(s.ancillary for s in family.sets)
    per_pair = {}
    mass = 0.0
    balanced = True
    for pair in ((0, 0), (1, 1)), ((0, 1), (1, 0)):
        label = "+".join(Derived(*p).label for p in pair)
        counts = []
        for c, d in itertools.product((0, 1), repeat=2):
            anc = Event.ancillary(Scenario(family.n, doubled=True), {pair[0]: c, pair[1]: d})
            counts.append(mult.get(anc, 0))
        per_pair[label] = counts
        if len(set(counts)) != 1:
            balanced = False
        mass += counts[0]
    return (mass if balanced else None), per_pair


def _set_pairwise_exclusive(s: ExclusiveSet) -> bool:
    m = sc.product_exclusivity_matrix(s.rows, s.n)
    np.fill_diagonal(m, True)
    return bool(m.all() and sc.ancillary_exclusive_mask(s.ancillary, s.rows, s.n).all())


def verify_family(family: SetFamily, sigma: SigmaExpression, jobs: int = 1) -> FamilyVerdict:
    """Check every structural claim needed to sum the E inequalities."""
    n = family.n
    if sigma.n != n:
        raise ValueError("sigma expression and family disagree on n")
    size = 2 * 4 ** (n - 1)
    failures = []

    set_count = len(family.sets) == 4 ** n
    if not set_count:
        failures.append(f"set_count: {len(family.sets)} != {4 ** n}")

    sizes = Counter(len(s.rows) for s in family.sets)
    set_sizes = set(sizes) == {size}
    if not set_sizes:
        failures.append(f"set_sizes: {dict(sizes)} (want {size})")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            set_ok = list(pool.map(_set_pairwise_exclusive, family.sets))
    else:
        set_ok = [_set_pairwise_exclusive(s) for s in family.sets]
    pairwise = all(set_ok)
    if not pairwise:
        failures.append(f"pairwise_exclusive: set {set_ok.index(False)}")

    rows = family.all_rows() if family.sets else np.zeros((0, 4), dtype=np.int64)
    keys = pack_keys(rows, n)
    counts = np.bincount(keys, minlength=16 ** n)
    disjoint = bool(counts.max(initial=0) <= 1)
    if not disjoint:
        failures.append(f"disjoint: {int((counts > 1).sum())} events repeated")

    target = coverage_target(sigma)
    coverage = bool(np.array_equal(counts, target.astype(counts.dtype)))
    if not coverage:
        missing = int((target & (counts == 0)).sum())
        stray = int((~target & (counts > 0)).sum())
        failures.append(f"coverage: {missing} target events missing, {stray} outside target")

    mass, per_pair = _ancillary_mass(family)
    ancillary_mass = mass is not None and mass == 4 ** (n - 1)
    if not ancillary_mass:
        failures.append(f"ancillary_mass: {mass} with multiplicities {per_pair}")

    verdict = FamilyVerdict(
        n=n,
        checks={"set_count": set_count, "set_sizes": set_sizes,
                "pairwise_exclusive": pairwise, "disjoint": disjoint,
                "coverage": coverage, "ancillary_mass": ancillary_mass},
        counts={"sets": len(family.sets), "set_size": size,
                "product_events": int(len(rows)),
                "distinct_product_events": int((counts > 0).sum()),
                "expected_product_events": 16 ** n // 2,
                "ancillary_mass": mass, "ancillary_multiplicities": per_pair},
        failures=failures,
    )
    if verdict.ok:
        verdict.derived_bound = derive_bound(n)
    return verdict


def derive_bound(n: int) -> float:
    """Larger root of ``s^2 + (2^n - s)^2 + 4^(n-1) = 4^n``."""
    if n < 2:
        raise ValueError(f"bound needs n >= 2, got {n}")
    # 2 s^2 - 2^(n+1) s + 4^(n-1) = 0
    a, b, c = 2.0, -(2.0 ** (n + 1)), 4.0 ** (n - 1)
    disc = b * b - 4 * a * c
    q = -0.5 * (b - math.sqrt(disc))
    return max(q / a, c / q)


# -- probability side ----------------------------------------------------------

@dataclass
class ProductCheck:
    sigma_s: float
    sigma_v: float
    in_in: float
    out_out: float
    in_in_expected: float
    out_out_expected: float
    ok: bool


def product_distribution(p_s, p_v, sigma: SigmaExpression | None = None,
                         tol: float = 1e-10) -> tuple[np.ndarray, ProductCheck]:
    """Joint table ``P[xS, bS, xV, bV] = pS[xS, bS] * pV[xV, bV]`` and its mass split."""
    n = int(np.shape(p_s)[0]).bit_length() - 1
    p_s = check_distribution(p_s, n)
    p_v = check_distribution(p_v, n)
    sigma = sigma or build_sigma(n)
    joint = p_s[:, :, None, None] * p_v[None, None, :, :]
    inside = sigma.support_mask
    in_in = float(joint[inside][:, inside].sum())
    out_out = float(joint[~inside][:, ~inside].sum())
    s_s, s_v = sigma_value(sigma, p_s), sigma_value(sigma, p_v)
    full = 2.0 ** n
    exp_in, exp_out = s_s * s_v, (full - s_s) * (full - s_v)
    ok = abs(in_in - exp_in) <= tol and abs(out_out - exp_out) <= tol
    return joint, ProductCheck(s_s, s_v, in_in, out_out, exp_in, exp_out, ok)


def set_masses(family: SetFamily, joint: np.ndarray, ancillary_probs: dict) -> np.ndarray:
    """Probability summed over each set (product events plus its ancillary)."""
    flat = np.asarray(joint).reshape(-1)
    out = np.empty(len(family.sets))
    for k, s in enumerate(family.sets):
        out[k] = flat[pack_keys(s.rows, family.n)].sum() + ancillary_probs.get(s.ancillary, 0.0)
    return out
