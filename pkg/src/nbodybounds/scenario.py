"""Events, measurements and the exclusivity predicate.

Two scenarios are supported: a single n-party experiment (city ``S`` only)
and a doubled one where two independent copies run in Stockholm (``S``) and
Vienna (``V``). The doubled scenario additionally knows the derived
dichotomic measurements ``A_ij`` acting on the first party of both cities.

Bit strings are packed into integers with party 1 as the most significant
bit, so ``int`` order coincides with lexicographic tuple order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

CITIES = ("S", "V")
ALLOWED_PAIRS = (frozenset({(0, 0), (1, 1)}), frozenset({(0, 1), (1, 0)}))


class Native(NamedTuple):
    """Local measurement ``setting`` of ``party`` (1-based) in ``city``."""

    city: str
    party: int
    setting: int


class Derived(NamedTuple):
    """``A_ij``: parity of party 1's outcomes in S (setting i) and V (setting j)."""

    i: int
    j: int

    @property
    def label(self) -> str:
        return f"A{self.i}{self.j}"


MeasurementId = Union[Native, Derived]


def _measurement_key(m: MeasurementId) -> tuple:
    if isinstance(m, Native):
        return (0, CITIES.index(m.city), m.party, m.setting)
    return (1, m.i, m.j)


@dataclass(frozen=True)
class Scenario:
    n: int
    doubled: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"scenario needs n >= 2 parties, got {self.n!r}")

    @property
    def cities(self) -> tuple[str, ...]:
        return CITIES if self.doubled else CITIES[:1]

    def _check_measurement(self, m: MeasurementId) -> None:
        if isinstance(m, Native):
            if m.city not in self.cities:
                raise ValueError(f"city {m.city!r} not part of {self}")
            if not 1 <= m.party <= self.n:
                raise ValueError(f"party {m.party} outside 1..{self.n}")
            if m.setting not in (0, 1):
                raise ValueError(f"setting must be 0 or 1, got {m.setting!r}")
        elif isinstance(m, Derived):
            if not self.doubled:
                raise ValueError("derived measurements exist only in doubled scenarios")
            if m.i not in (0, 1) or m.j not in (0, 1):
                raise ValueError(f"bad derived measurement {m!r}")
        else:
            raise TypeError(f"not a measurement: {m!r}")


@dataclass(frozen=True)
class Event:
    """Outcome assignment over compatible measurements.

    ``assignments`` is kept sorted, so two events built from the same map in
    any order compare and hash equal.
    """

    scenario: Scenario
    assignments: tuple[tuple[MeasurementId, int], ...]

    def __init__(self, scenario: Scenario, assignments: Mapping | Iterable):
        items = assignments.items() if isinstance(assignments, Mapping) else assignments
        pairs = []
        for m, b in items:
            if b not in (0, 1):
                raise ValueError(f"outcome must be 0 or 1, got {b!r}")
            scenario._check_measurement(m)
            pairs.append((m, int(b)))
        pairs.sort(key=lambda mb: _measurement_key(mb[0]))
        keys = [m for m, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ValueError("measurement assigned twice")
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "assignments", tuple(pairs))
        self._validate()

    def _validate(self) -> None:
        native = [m for m, _ in self.assignments if isinstance(m, Native)]
        derived = [m for m, _ in self.assignments if isinstance(m, Derived)]
        if derived:
            if native or len(derived) != 2:
                raise ValueError("ancillary events carry exactly two derived assignments")
            if frozenset((m.i, m.j) for m in derived) not in ALLOWED_PAIRS:
                raise ValueError("only {A00, A11} or {A01, A10} are jointly measurable")
            return
        slots = [(m.city, m.party) for m in native]
        if len(set(slots)) != len(slots):
            raise ValueError("two settings for the same (city, party)")
        cities = {c for c, _ in slots}
        expected = {(c, p) for c in cities for p in range(1, self.scenario.n + 1)}
        if not native or set(slots) != expected:
            raise ValueError("product events assign every party of each spanned city")

    # -- constructors -------------------------------------------------------

    @classmethod
    def product(cls, scenario: Scenario, outcomes: Sequence[int],
                settings: Sequence[int]) -> "Event":
        """City-ordered outcomes/settings: all S parties, then all V parties."""
        n = scenario.n
        if len(outcomes) != len(settings) or len(outcomes) not in (n, 2 * n):
            raise ValueError("outcomes/settings must cover n or 2n parties")
        if len(outcomes) == 2 * n and not scenario.doubled:
            raise ValueError("2n components need a doubled scenario")
        amap = {}
        for k, (b, x) in enumerate(zip(outcomes, settings)):
            amap[Native(CITIES[k // n], k % n + 1, int(x))] = b
        return cls(scenario, amap)

    @classmethod
    def ancillary(cls, scenario: Scenario, values: Mapping[tuple[int, int], int]) -> "Event":
        """``values`` maps ``(i, j)`` of ``A_ij`` to its outcome."""
        return cls(scenario, {Derived(i, j): c for (i, j), c in values.items()})

    # -- queries ------------------------------------------------------------

    @property
    def is_ancillary(self) -> bool:
        return isinstance(self.assignments[0][0], Derived)

    @property
    def is_product(self) -> bool:
        return not self.is_ancillary

    def as_dict(self) -> dict:
        return dict(self.assignments)

    def city_part(self, city: str) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """``(outcomes, settings)`` for one city, or None if the city is absent."""
        part = [(m.party, b, m.setting) for m, b in self.assignments
                if isinstance(m, Native) and m.city == city]
        if not part:
            return None
        part.sort()
        return tuple(b for _, b, _ in part), tuple(x for _, _, x in part)

    def token(self) -> str:
        if self.is_ancillary:
            outs = ",".join(str(b) for _, b in self.assignments)
            labels = ",".join(m.label for m, _ in self.assignments)
            return f"{outs}|{labels}"
        bs, xs = [], []
        for city in CITIES:
            part = self.city_part(city)
            if part:
                bs.extend(part[0])
                xs.extend(part[1])
        return ",".join(map(str, bs)) + "|" + ",".join(map(str, xs))

    def __str__(self) -> str:
        return f"({self.token()})"

    def __repr__(self) -> str:
        kind = "doubled" if self.scenario.doubled else "single"
        return f"Event({self.token()!r}, n={self.scenario.n}, {kind})"


def parse_event(token: str, scenario: Scenario) -> Event:
    """Inverse of :meth:`Event.token`; surrounding parentheses are optional."""
    token = token.strip().strip("()")
    try:
        left, right = token.split("|")
    except ValueError:
        raise ValueError(f"malformed event token {token!r}") from None
    outs = [int(v) for v in left.split(",")]
    labels = [v.strip() for v in right.split(",")]
    if all(lab.startswith("A") for lab in labels):
        values = {}
        for lab, c in zip(labels, outs, strict=True):
            if len(lab) != 3:
                raise ValueError(f"bad derived label {lab!r}")
            values[(int(lab[1]), int(lab[2]))] = c
        return Event.ancillary(scenario, values)
    return Event.product(scenario, outs, [int(v) for v in labels])


# -- exclusivity ------------------------------------------------------------

def determined_outcome(e: Event, m: Derived) -> int | None:
    """Outcome ``A_ij`` would give on product event ``e``, if ``e`` fixes it."""
    if not e.scenario.doubled:
        raise ValueError("derived measurements need a doubled scenario")
    if e.is_ancillary:
        raise ValueError("determined_outcome is defined for product events only")
    amap = e.as_dict()
    b = amap.get(Native("S", 1, m.i))
    bp = amap.get(Native("V", 1, m.j))
    if b is None or bp is None:
        return None
    return b ^ bp


def exclusive(e1: Event, e2: Event) -> bool:
    if e1.scenario != e2.scenario:
        raise ValueError("events belong to different scenarios")
    if e1.is_product and e2.is_product:
        a2 = e2.as_dict()
        return any(m in a2 and a2[m] != b for m, b in e1.assignments)
    if e1.is_ancillary and e2.is_ancillary:
        a2 = e2.as_dict()
        return any(m in a2 and a2[m] != c for m, c in e1.assignments)
    anc, prod = (e1, e2) if e1.is_ancillary else (e2, e1)
    for m, c in anc.assignments:
        d = determined_outcome(prod, m)
        if d is not None and d != c:
            return True
    return False


def all_product_events(scenario: Scenario) -> list[Event]:
    """Every single-city product event, ordered by (settings, outcomes)."""
    if scenario.doubled:
        raise ValueError("enumeration is only provided for single-city scenarios")
    n = scenario.n
    out = []
    for x in range(2 ** n):
        for b in range(2 ** n):
            out.append(Event.product(scenario, int_to_bits(b, n), int_to_bits(x, n)))
    return out


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def int_to_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> (n - 1 - k)) & 1 for k in range(n))


# Vectorised kernels over packed product events. A doubled product event is a
# row (xS, bS, xV, bV); a single-city one is a row (x, b).

def product_exclusivity_matrix(rows: np.ndarray, n: int) -> np.ndarray:
    """Boolean matrix of rule R1 for packed product events.

    Two events clash when some party uses the same setting in both and reports
    different outcomes, i.e. ``~(x1 ^ x2) & (b1 ^ b2)`` is non-zero in some city.
    """
    rows = np.asarray(rows, dtype=np.int64)
    full = (1 << n) - 1
    out = np.zeros((len(rows), len(rows)), dtype=bool)
    for c in range(rows.shape[1] // 2):
        x = rows[:, 2 * c]
        b = rows[:, 2 * c + 1]
        same = ~(x[:, None] ^ x[None, :]) & full
        out |= (same & (b[:, None] ^ b[None, :])) != 0
    return out


def ancillary_exclusive_mask(anc: Event, rows: np.ndarray, n: int) -> np.ndarray:
    """Rule R2 between one ancillary event and packed doubled product events."""
    rows = np.asarray(rows, dtype=np.int64)
    top = n - 1
    s1, b1 = (rows[:, 0] >> top) & 1, (rows[:, 1] >> top) & 1
    v1, bv1 = (rows[:, 2] >> top) & 1, (rows[:, 3] >> top) & 1
    out = np.zeros(len(rows), dtype=bool)
    for m, c in anc.assignments:
        out |= (s1 == m.i) & (v1 == m.j) & ((b1 ^ bv1) != c)
    return out


def pack_event(e: Event) -> tuple[int, ...]:
    """Packed row of a product event (see :func:`product_exclusivity_matrix`)."""
    if not e.is_product:
        raise ValueError("only product events pack into rows")
    row = []
    for city in e.scenario.cities:
        part = e.city_part(city)
        if part is None:
            raise ValueError("packed rows need every city of the scenario")
        row += [bits_to_int(part[1]), bits_to_int(part[0])]
    return tuple(row)


def unpack_event(row: Sequence[int], scenario: Scenario) -> Event:
    n = scenario.n
    outs, sets = [], []
    for c in range(len(row) // 2):
        sets += int_to_bits(int(row[2 * c]), n)
        outs += int_to_bits(int(row[2 * c + 1]), n)
    return Event.product(scenario, outs, sets)
