"""Bounds reports: computed values next to their closed forms."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import doubling, graph, models, theta
from .sigma import build_sigma, sigma_value

SKIPPABLE = ("local", "hybrid", "quantum", "theta", "ns", "verify")
MAX_THETA_N = 4  # 2^(2n-1) vertices; n = 5 exceeds the solver's size limit


def closed_forms(n: int) -> dict[str, float]:
    return {
        "hybrid_sigma": 3 * 2 ** (n - 2),
        "quantum_s": math.sqrt(2) * 2 ** (n - 1),
        "quantum_sigma": (2 + math.sqrt(2)) * 2 ** (n - 2),
        "ns_sigma": 2 ** n,
    }


def tolerances(n: int) -> dict[str, float]:
    return {
        "local": 0.0,
        "hybrid": 0.0,
        "quantum_s": 1e-6,
        "quantum_sigma": 1e-4,
        "theta": 1e-5 if n == 2 else 1e-3,
        "derived_bound": 1e-9,
        "ns": 0.0,
    }


@dataclass
class Row:
    quantity: str
    computed: float | None
    closed_form: float
    tolerance: float
    note: str = ""

    @property
    def match(self) -> bool | None:
        if self.computed is None:
            return None
        return abs(self.computed - self.closed_form) <= self.tolerance

    def to_json(self) -> dict:
        return {"quantity": self.quantity, "computed": self.computed,
                "closed_form": self.closed_form, "tolerance": self.tolerance,
                "match": self.match, "note": self.note}


@dataclass
class BoundsReport:
    n: int
    local: int | None = None
    hybrid: int | None = None
    quantum_found: float | None = None
    quantum_sigma: float | None = None
    theta_bound: float | None = None
    ns_value: float | None = None
    rows: list[Row] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.rows if r.match is not None)

    @property
    def complete(self) -> bool:
        return all(r.computed is not None for r in self.rows)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "local": self.local,
            "hybrid": self.hybrid,
            "quantum_found": self.quantum_found,
            "quantum_sigma": self.quantum_sigma,
            "theta_bound": self.theta_bound,
            "ns_value": self.ns_value,
            "closed_forms": closed_forms(self.n),
            "tolerances": tolerances(self.n),
            "rows": [r.to_json() for r in self.rows],
            "skipped": list(self.skipped),
            "all_match": self.all_match,
            "complete": self.complete,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "quantity", "computed", "closed_form", "tolerance", "match", "note"])
        for r in self.rows:
            w.writerow([self.n, r.quantity, fmt(r.computed), fmt(r.closed_form),
                        fmt(r.tolerance), r.match, r.note])
        return buf.getvalue()


def fmt(v):
    if isinstance(v, float):
        return float(f"{v:.9g}")
    return v


def round_floats(obj):
    """Recursively round floats to 9 significant digits for stable output."""
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def compute_bounds(n: int, skip=(), seed: int = 0, theta_tol: float = 1e-8) -> BoundsReport:
    skip = set(skip)
    unknown = skip - set(SKIPPABLE)
    if unknown:
        raise ValueError(f"cannot skip {sorted(unknown)}; choose from {SKIPPABLE}")
    cf, tol = closed_forms(n), tolerances(n)
    rep = BoundsReport(n, skipped=sorted(skip))

    if "local" not in skip:
        note = ""
        if n <= models.MAX_LOCAL_N:
            rep.local = models.local_bound(n).sigma
        else:
            note = "n too large for exhaustive enumeration"
        rep.rows.append(Row("local_sigma", rep.local, cf["hybrid_sigma"], tol["local"], note))
    if "hybrid" not in skip:
        note = ""
        if n <= models.MAX_HYBRID_N:
            rep.hybrid = models.hybrid_bound(n).value
        else:
            note = "n out of range"
        rep.rows.append(Row("hybrid_sigma", rep.hybrid, cf["hybrid_sigma"], tol["hybrid"], note))
    if "quantum" not in skip:
        note = ""
        if n <= models.MAX_OPTIMIZE_N:
            _, s = models.optimize_sn_angles(n, seed=seed)
            rep.quantum_found = s
            rep.quantum_sigma = models.sigma_from_s(s, n)
        else:
            note = "n out of range"
        rep.rows.append(Row("quantum_s", rep.quantum_found, cf["quantum_s"], tol["quantum_s"], note))
        rep.rows.append(Row("quantum_sigma", rep.quantum_sigma, cf["quantum_sigma"],
                            tol["quantum_sigma"], note))
    if "theta" not in skip:
        note = ""
        if n <= MAX_THETA_N:
            g = graph.build_graph(build_sigma(n).support)
            rep.theta_bound = theta.lovasz_theta(g, theta_tol).value
        else:
            note = f"{2 ** (2 * n - 1)} vertices exceed the solver limit"
        rep.rows.append(Row("theta", rep.theta_bound, cf["quantum_sigma"], tol["theta"], note))
    if "ns" not in skip:
        box = models.ns_box(n)
        ok = models.check_nonsignaling(box.p)
        rep.ns_value = sigma_value(build_sigma(n), box.p)
        rep.rows.append(Row("ns_sigma", rep.ns_value, cf["ns_sigma"], tol["ns"],
                            "" if ok else "box fails the nonsignaling check"))
    return rep


def full_report(n: int, skip=(), force: bool = False, jobs: int = 1, seed: int = 0,
                theta_tol: float = 1e-8) -> dict:
    """Bounds, theta identity and family verification in one document."""
    skip = set(skip)
    rep = compute_bounds(n, skip - {"verify"}, seed=seed, theta_tol=theta_tol)
    doc = rep.to_json()
    complete = rep.complete
    all_match = rep.all_match

    if "theta" not in skip and n <= 3:
        g = graph.build_graph(build_sigma(n).support)
        vt = graph.is_vertex_transitive(g)
        doc["vertex_transitive"] = vt
        if vt:
            ident = theta.product_identity_check(g, tol=1e-3, solver_tol=theta_tol)
            doc["product_identity"] = ident.to_json()
            all_match &= ident.ok
        else:
            all_match = False

    if "verify" not in skip:
        try:
            fam = doubling.build_family(n, force=force)
            verdict = doubling.verify_family(fam, build_sigma(n), jobs=jobs)
            doc["verification"] = verdict.to_json()
            row = Row("derived_bound", verdict.derived_bound, closed_forms(n)["quantum_sigma"],
                      tolerances(n)["derived_bound"])
            doc["rows"].append(row.to_json())
            all_match &= verdict.ok and bool(row.match)
        except MemoryError as exc:
            doc["verification"] = {"refused": str(exc)}
            complete = False

    doc["complete"] = complete
    doc["all_match"] = all_match
    return doc
