"""Problem files: a finite class with its distribution class, or a Euclidean stream setup.

Rationals are written as ``"p/q"`` strings. ``dumps`` emits the canonical form
(sorted keys, reduced rationals), so load followed by dump is idempotent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import Distribution, DistributionClass, HypothesisClass, InstanceSpace, to_fraction
from .errors import InputError

__all__ = ["Problem", "load_problem", "parse_problem", "dumps", "rational"]


def rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer, or a decimal string exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise InputError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"rationals must be strings like '1/4', got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc


@dataclass(frozen=True)
class Problem:
    n: int | None
    F: HypothesisClass | None
    U: DistributionClass | None
    order: InstanceSpace | None
    euclidean: dict | None = None

    @property
    def finite(self) -> bool:
        return self.F is not None


def _distribution(values, n: int) -> Distribution:
    if not isinstance(values, list) or len(values) != n:
        raise InputError(f"distribution must be a list of {n} rationals")
    return Distribution(tuple(rational(v) for v in values))


def _distribution_class(obj, n: int) -> DistributionClass:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("distribution_class must be an object with a 'kind'")
    cap = int(obj.get("mixture_cap", 3))
    kind = obj["kind"]
    if kind == "list":
        members = obj.get("members")
        if not members:
            raise InputError("list distribution class needs 'members'")
        return DistributionClass.explicit([_distribution(m, n) for m in members], mixture_cap=cap)
    if kind == "smoothed":
        return DistributionClass.smoothed(_distribution(obj.get("base"), n), rational(obj.get("cap")), mixture_cap=cap)
    if kind == "dirac_all":
        return DistributionClass.dirac_all(n, mixture_cap=cap)
    raise InputError(f"unknown distribution class kind {kind!r}")


def parse_problem(obj: dict) -> Problem:
    if not isinstance(obj, dict):
        raise InputError("problem file must hold a JSON object")
    euclid = obj.get("euclidean")
    if euclid is not None:
        if not isinstance(euclid, dict) or int(euclid.get("d", 0)) < 1:
            raise InputError("euclidean section needs a positive 'd'")
        euclid = {"d": int(euclid["d"]), "stream_spec": str(euclid.get("stream_spec", "gauss"))}
    if "functions" not in obj:
        if euclid is None:
            raise InputError("problem needs 'functions' or a 'euclidean' section")
        return Problem(None, None, None, None, euclid)
    try:
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("problem needs an integer 'n'") from exc
    rows = obj["functions"]
    if not isinstance(rows, list) or not rows:
        raise InputError("'functions' must be a nonempty list of 0/1 rows")
    labels = []
    for r in rows:
        if not isinstance(r, list) or len(r) != n or any(v not in (0, 1) or isinstance(v, bool) for v in r):
            raise InputError(f"every function must be a list of n = {n} zeros and ones")
        labels.append(tuple(r))
    if len(set(labels)) != len(labels):
        raise InputError("duplicate functions in the class")
    F = HypothesisClass(tuple(labels), tuple(range(n)))
    if "distribution_class" not in obj:
        raise InputError("problem needs a 'distribution_class'")
    U = _distribution_class(obj["distribution_class"], n)
    order = InstanceSpace(n, obj["parent"]) if obj.get("parent") is not None else None
    return Problem(n, F, U, order, euclid)


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return parse_problem(obj)


def _mass(mu: Distribution) -> list[str]:
    return [str(v) for v in mu.mass]


def to_json(problem: Problem) -> dict:
    out: dict = {}
    if problem.euclidean is not None:
        out["euclidean"] = dict(problem.euclidean)
    if problem.F is None:
        return out
    out["n"] = problem.n
    out["functions"] = [list(r) for r in problem.F.labels]
    if problem.order is not None:
        out["parent"] = list(problem.order.parent)
    U = problem.U
    dc: dict = {"kind": U.kind, "mixture_cap": U.mixture_cap}
    if U.kind == "list":
        dc["members"] = [_mass(m) for m in U.members]
    elif U.kind == "smoothed":
        dc["base"] = _mass(U.base)
        dc["cap"] = str(U.cap)
    out["distribution_class"] = dc
    return out


def dumps(problem: Problem) -> str:
    return json.dumps(to_json(problem), sort_keys=True, indent=2) + "\n"


def eps_arg(text) -> Fraction:
    eps = rational(text)
    if eps <= 0:
        raise InputError("eps must be positive")
    return to_fraction(eps)
