"""Knot Floer complexes over F_2[W, Z] and their specialization along E_{p,q,k}.

A knot complex is a finite presentation: generators with bigradings
``(gr_w, gr_z)`` and a differential whose entries are finite sums of
monomials ``W^a Z^b``.  Specializing sends ``W`` to the monodromy ``phi`` of
E_{p,q,k} and ``Z`` to ``U phi^-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Mapping

import jsonschema

from .diagram import SlopeParams
from .homalg import FiniteComplex, HomologyDecomp, homology
from .localsys import generalized_inverse_times_u, grading_exponents_model, model_module
from .useries import DEFAULT_GUARD, DEFAULT_TRUNC, SeriesMatrix


class KnotError(ValueError):
    pass


class UnknownKnot(KnotError):
    pass


class KnotSchemaError(KnotError):
    pass


Monomial = tuple[int, int]


@dataclass(frozen=True)
class KnotComplex:
    """``differential[(src, dst)]`` is the set of monomials ``W^a Z^b`` with
    which ``dst`` appears in the boundary of ``src``."""

    names: tuple[str, ...]
    gr_w: tuple[Fraction, ...]
    gr_z: tuple[Fraction, ...]
    differential: Mapping[tuple[str, str], frozenset[Monomial]]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise KnotError("generator names must be distinct")
        for (a, b) in self.differential:
            if a not in self.names or b not in self.names:
                raise KnotError(f"differential mentions unknown generator in {a!r} -> {b!r}")

    def index(self, name: str) -> int:
        return self.names.index(name)

    def alexander(self, name: str) -> Fraction:
        i = self.index(name)
        return (self.gr_w[i] - self.gr_z[i]) / 2

    def t_grading(self, name: str, t: Fraction) -> Fraction:
        i = self.index(name)
        return t / 2 * self.gr_w[i] + (1 - t / 2) * self.gr_z[i]

    def boundary(self, src: str) -> dict[str, frozenset[Monomial]]:
        return {b: m for (a, b), m in self.differential.items() if a == src and m}

    def check_d_squared(self) -> None:
        """``d^2 = 0`` over F_2[W, Z]."""
        for g in self.names:
            acc: dict[tuple[str, Monomial], int] = {}
            for h, m1 in self.boundary(g).items():
                for x, m2 in self.boundary(h).items():
                    for a1, b1 in m1:
                        for a2, b2 in m2:
                            key = (x, (a1 + a2, b1 + b2))
                            acc[key] = acc.get(key, 0) ^ 1
            bad = [k for k, v in acc.items() if v]
            if bad:
                raise KnotError(f"d^2 != 0 starting from {g!r}: {sorted(bad)[0]}")

    def check_gradings(self) -> None:
        """``W`` has bigrading (-2, 0), ``Z`` has (0, -2) and d lowers both by one."""
        for (src, dst), monos in self.differential.items():
            i, j = self.index(src), self.index(dst)
            for a, b in monos:
                if self.gr_w[j] - 2 * a != self.gr_w[i] - 1 or self.gr_z[j] - 2 * b != self.gr_z[i] - 1:
                    raise KnotError(f"term W^{a}Z^{b} {dst} in d({src}) is not homogeneous")

    def to_json(self) -> dict:
        def fr(x: Fraction):
            return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

        return {
            "generators": [{"name": n, "gr_w": fr(w), "gr_z": fr(z)}
                           for n, w, z in zip(self.names, self.gr_w, self.gr_z)],
            "differential": [{"from": a, "to": b, "monomials": sorted([list(m) for m in ms])}
                             for (a, b), ms in sorted(self.differential.items()) if ms],
        }


def builtin_knot(name: str) -> KnotComplex:
    if name == "unknot":
        return KnotComplex(("x",), (Fraction(0),), (Fraction(0),), {})
    if name == "rh_trefoil":
        return KnotComplex(
            ("a", "b", "c"),
            (Fraction(-1), Fraction(0), Fraction(-2)),
            (Fraction(-1), Fraction(-2), Fraction(0)),
            {("a", "b"): frozenset({(1, 0)}), ("a", "c"): frozenset({(0, 1)})},
        )
    raise UnknownKnot(f"unknown built-in knot {name!r}; known: unknot, rh_trefoil")


BUILTIN_KNOTS = ("unknot", "rh_trefoil")

_GRADING = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"},
    ]
}

KNOT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["generators", "differential"],
    "properties": {
        "generators": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "gr_w", "gr_z"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "gr_w": _GRADING,
                    "gr_z": _GRADING,
                },
            },
        },
        "differential": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["from", "to", "monomials"],
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "monomials": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            },
        },
    },
}


def _as_fraction(x) -> Fraction:
    if isinstance(x, bool):
        raise KnotSchemaError("boolean is not a grading")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise KnotSchemaError(f"bad grading {x!r}") from exc


def knot_from_json(doc) -> KnotComplex:
    """Validate a knot document and build the complex; checks d^2 and gradings."""
    try:
        jsonschema.validate(doc, KNOT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise KnotSchemaError(f"invalid knot document: {exc.message}") from exc
    names = tuple(g["name"] for g in doc["generators"])
    gw = tuple(_as_fraction(g["gr_w"]) for g in doc["generators"])
    gz = tuple(_as_fraction(g["gr_z"]) for g in doc["generators"])
    diff: dict[tuple[str, str], frozenset] = {}
    for entry in doc["differential"]:
        key = (entry["from"], entry["to"])
        monos = set(diff.get(key, frozenset()))
        for a, b in entry["monomials"]:
            monos ^= {(a, b)}
        diff[key] = frozenset(monos)
    try:
        K = KnotComplex(names, gw, gz, diff)
    except KnotError as exc:
        raise KnotSchemaError(str(exc)) from exc
    K.check_d_squared()
    K.check_gradings()
    return K


def load_knot(path: str | Path) -> KnotComplex:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise KnotSchemaError(f"{path}: not valid JSON ({exc})") from exc
    return knot_from_json(doc)


@dataclass(frozen=True)
class SpecializedComplex:
    knot: KnotComplex
    params: SlopeParams
    complex: FiniteComplex

    @property
    def non_canonical(self) -> bool:
        """Gradings rest on exponents that are not distinct mod 1."""
        return gcd(self.params.p, self.params.k) > 1


def _power(mat: SeriesMatrix, e: int) -> SeriesMatrix:
    out = SeriesMatrix.identity(mat.rows, mat.trunc_order)
    for _ in range(e):
        out = out @ mat
    return out


def specialize(K: KnotComplex, params: SlopeParams, trunc_order: int = DEFAULT_TRUNC) -> SpecializedComplex:
    """``CFK (x) E_{p,q,k}`` with W acting as phi and Z as ``U phi^-1``.

    Basis ``g (x) e_i`` is ordered generator-major.
    """
    p = params.p
    t = Fraction(2 * params.k, p)
    phi = model_module(params, trunc_order).monodromy
    zmat = generalized_inverse_times_u(phi)
    u_id = SeriesMatrix([[2 if r == c else 0 for c in range(p)] for r in range(p)], trunc_order, p)
    if phi @ zmat != u_id or zmat @ phi != u_id:
        raise AssertionError("W Z does not act as U")
    mexp = grading_exponents_model(params)
    g = len(K.names)
    data = [[0] * (g * p) for _ in range(g * p)]
    for (src, dst), monos in K.differential.items():
        si, di = K.index(src), K.index(dst)
        block = [[0] * p for _ in range(p)]
        for a, b in monos:
            m = _power(phi, a) @ _power(zmat, b)
            for r in range(p):
                for c in range(p):
                    block[r][c] ^= m.raw[r][c]
        for r in range(p):
            for c in range(p):
                data[di * p + r][si * p + c] ^= block[r][c]
    names = tuple(f"{n}*e{i}" for n in K.names for i in range(p))
    grads = tuple(t / 2 * K.gr_w[a] + (1 - t / 2) * K.gr_z[a] - 2 * mexp[i]
                  for a in range(g) for i in range(p))
    C = FiniteComplex(names, SeriesMatrix(data, trunc_order, g * p), grads)
    return SpecializedComplex(K, params, C)


def hfk(K: KnotComplex, params: SlopeParams, trunc_order: int = DEFAULT_TRUNC,
        guard: int = DEFAULT_GUARD) -> HomologyDecomp:
    """Graded decomposition of the homology of the specialized complex."""
    return homology(specialize(K, params, trunc_order).complex, guard)


def u_specialization(K: KnotComplex, trunc_order: int = DEFAULT_TRUNC) -> FiniteComplex:
    """The complex with ``W = 1`` and ``Z = U`` (ungraded)."""
    g = len(K.names)
    data = [[0] * g for _ in range(g)]
    for (src, dst), monos in K.differential.items():
        for _, b in monos:
            if b < trunc_order:
                data[K.index(dst)][K.index(src)] ^= 1 << b
    return FiniteComplex(K.names, SeriesMatrix(data, trunc_order, g), None)
