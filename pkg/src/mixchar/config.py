"""Job configuration: JSON parsing, schema validation and object construction."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

import jsonschema

from mixchar.coeffrings import (
    ActionError,
    Automorphism,
    LaurentFp,
    O1,
    Qp,
    RingDescriptor,
    SemilinearAction,
)
from mixchar.iwasawa import GroupPresentation, IwasawaElem, PresentationError
from mixchar.valuations import is_prime

DEFAULT_N = 8
DEFAULT_D = 4


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def _schema() -> dict:
    text = resources.files("mixchar").joinpath("schemas/job.schema.json").read_text()
    return json.loads(text)


def parse_config_text(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ConfigError(f"invalid config at {path}: {e.message}")
    return data


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    return parse_config_text(text)


@dataclass
class Precision:
    N: int
    D: int
    M: int
    explicit_N: bool = False


def resolve_precision(cfg: dict, N: int | None = None, D: int | None = None) -> Precision:
    """file < environment (MIXCHAR_N, MIXCHAR_D) < flags."""
    prec = dict(cfg.get("precision", {}))
    for key in ("N", "D"):
        env = os.environ.get(f"MIXCHAR_{key}")
        if env is not None:
            try:
                prec[key] = int(env)
            except ValueError:
                raise ConfigError(f"MIXCHAR_{key} must be an integer, got {env!r}") from None
    if N is not None:
        prec["N"] = N
    if D is not None:
        prec["D"] = D
    out = Precision(prec.get("N", DEFAULT_N), prec.get("D", DEFAULT_D), prec.get("M", 0),
                    "N" in prec)
    if out.N < 1 or out.D < 0:
        raise ConfigError("need N >= 1 and D >= 0")
    if not out.M:
        out.M = out.N
    return out


def build_ring(spec: dict) -> RingDescriptor:
    p = spec["p"]
    if not is_prime(p):
        raise ConfigError(f"p = {p} is not prime")
    kind = spec["kind"]
    if kind == "Qp":
        if "var" in spec:
            raise ConfigError("Qp takes no variable name")
        return Qp(p)
    if kind == "LaurentFp":
        return LaurentFp(p, spec.get("var", "T"))
    return O1(p, spec.get("var", "X"))


def build_scalar(ring: RingDescriptor, value, cap: int):
    if isinstance(value, dict):
        return ring.laurent({int(k): c for k, c in value["terms"].items()}, cap)
    if isinstance(value, int):
        return ring.from_int(value, cap)
    try:
        from fractions import Fraction

        from mixchar.padic import PadicInt

        q = PadicInt.parse(value, ring.p).value
        if ring.kind == "LaurentFp":
            return ring.from_int(q.numerator * pow(q.denominator, -1, ring.p), cap)
        return ring.from_fraction(Fraction(q), cap)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"cannot read scalar {value!r}: {exc}") from None


def build_group(ring: RingDescriptor, spec: dict | None, cap: int) -> GroupPresentation:
    spec = spec or {}
    preset = spec.get("preset")
    try:
        if preset == "example":
            d = 2
        else:
            d = spec.get("d", 1)
        maps = []
        for a in spec.get("action", []):
            if a["kind"] == "trivial":
                maps.append(Automorphism.trivial(ring))
            elif a["kind"] == "cyclotomic":
                if "gamma" not in a:
                    raise ConfigError("cyclotomic action needs gamma")
                maps.append(Automorphism.cyclotomic(ring, a["gamma"]))
            else:
                if "image" not in a:
                    raise ConfigError("image action needs image")
                maps.append(Automorphism.from_image(ring, build_scalar(ring, a["image"], cap)))
        action = None
        if maps:
            if len(maps) != d:
                raise ConfigError(f"action lists {len(maps)} maps for d = {d}")
            action = SemilinearAction(ring, tuple(maps))
        if preset == "example":
            if spec.get("relations"):
                raise ConfigError("preset 'example' does not take explicit relations")
            return GroupPresentation.example_group(ring, spec.get("exponent", "1+p^2"), action)
        rel = {}
        for r in spec.get("relations", []):
            rel[(r["j"] - 1, r["i"] - 1)] = tuple(r["exponents"])
        return GroupPresentation(ring, d, rel, action)
    except (PresentationError, ActionError) as exc:
        raise ConfigError(str(exc)) from None


def build_element(pres: GroupPresentation, spec: dict, N: int, D: int) -> IwasawaElem:
    terms = {}
    for key, value in spec.items():
        n = tuple(int(x) for x in key.split(","))
        if len(n) != pres.d:
            raise ConfigError(f"multi-index {key!r} does not have {pres.d} entries")
        terms[n] = build_scalar(pres.ring, value, N)
    return IwasawaElem(pres, terms, N, D)


def build_matrices(ring: RingDescriptor, spec: list, cap: int) -> list:
    return [[[build_scalar(ring, a, cap) for a in row] for row in M] for M in spec]
