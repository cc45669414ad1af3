"""Benchmark problems with known solutions, and the JSON problem loader."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import jsonschema
import numpy as np

from .expr import compile_expr
from .functions import FactoredFunction, constant, zero
from .kernel_engine import KernelWeight
from .solver import ProblemSpec
from .special import (DEFAULT_POLICY, SeriesEvalPolicy, mittag_leffler,
                      mittag_leffler_tail, source_series)

BUILTINS = ("ex1c1", "ex1c2", "ex2")


def _check_alpha(alpha):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")


def _example1(alpha: float, variable_a: bool, policy: SeriesEvalPolicy) -> ProblemSpec:
    _check_alpha(alpha)
    ap1 = alpha + 1
    terms = [
        (alpha, lambda t: ap1 * np.exp(-t)),
        (2 * alpha + 1, lambda t: source_series(t, alpha, policy)),
    ]
    if variable_a:
        terms.append((2 * alpha + 1, lambda t: np.exp(-np.asarray(t, dtype=float))))
        a = FactoredFunction.of([(alpha, constant(1.0)), (0.0, constant(1.0))])
    else:
        a = FactoredFunction.smooth(constant(1.0))
    return ProblemSpec(
        alpha=alpha,
        a=a,
        kernel=KernelWeight(alpha, constant(1 / math.gamma(alpha)), s_weight_degree_hint=0),
        f=FactoredFunction.of(terms),
        u0=0.0,
        T=1.0,
        exact=lambda t: np.asarray(t, dtype=float) ** ap1 * np.exp(-np.asarray(t, dtype=float)),
        exact_derivative=lambda t: (ap1 * np.asarray(t, dtype=float) ** alpha
                                    - np.asarray(t, dtype=float) ** ap1) * np.exp(-np.asarray(t, dtype=float)),
        mu_bounds=(1.0, 2.0) if variable_a else (1.0, max(1.0, 1 / math.gamma(alpha))),
        sigma=ap1 if not float(alpha).is_integer() else math.inf,
        name="ex1c2" if variable_a else "ex1c1",
    )


def ex1_case1(alpha: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> ProblemSpec:
    """u = t^(alpha+1) e^(-t) with a = 1, b = 1/Gamma(alpha)."""
    return _example1(alpha, False, policy)


def ex1_case2(alpha: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> ProblemSpec:
    """Same solution as :func:`ex1_case1` with a(t) = t^alpha + 1."""
    return _example1(alpha, True, policy)


def ex2_fractional_wave(alpha: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> ProblemSpec:
    """a = 0, f = (alpha+1) t^alpha; u = Gamma(alpha+2)(1 - E_{alpha+1}(-t^(alpha+1)))."""
    if not 0 < alpha < 1:
        raise ValueError(f"fractional wave example needs alpha in (0, 1), got {alpha}")
    ap1 = alpha + 1
    g = math.gamma(alpha + 2)

    def exact(t):
        t = np.asarray(t, dtype=float)
        return -g * mittag_leffler_tail(ap1, -t**ap1, policy)

    def exact_derivative(t):
        t = np.asarray(t, dtype=float)
        return g * t**alpha * mittag_leffler(ap1, -t**ap1, beta=ap1, policy=policy)

    return ProblemSpec(
        alpha=alpha,
        a=FactoredFunction.smooth(zero),
        kernel=KernelWeight(alpha, constant(1 / math.gamma(alpha)), s_weight_degree_hint=0),
        f=FactoredFunction.of([(alpha, constant(ap1))]),
        u0=0.0,
        T=1.0,
        exact=exact,
        exact_derivative=exact_derivative,
        mu_bounds=None,
        sigma=ap1,
        name="ex2",
    )


def builtin(name: str, alpha: float) -> ProblemSpec:
    if name == "ex1c1":
        return ex1_case1(alpha)
    if name == "ex1c2":
        return ex1_case2(alpha)
    if name == "ex2":
        return ex2_fractional_wave(alpha)
    raise ValueError(f"unknown builtin problem {name!r}; choose from {', '.join(BUILTINS)}")


_EXPR = {"type": ["string", "number"]}
_TERM = {
    "type": "object",
    "properties": {"sigma0": {"type": "number", "minimum": 0}, "g": _EXPR},
    "required": ["sigma0", "g"],
    "additionalProperties": False,
}
_FACTORED = {"anyOf": [_EXPR, _TERM, {"type": "array", "items": _TERM, "minItems": 1}]}

PROBLEM_SCHEMA = {
    "type": "object",
    "properties": {
        "builtin": {"enum": list(BUILTINS)},
        "name": {"type": "string"},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "u0": {"type": "number"},
        "a": _FACTORED,
        "a_sing_exp": {"type": "number", "minimum": 0},
        "b": _EXPR,
        "f": _FACTORED,
        "exact": _EXPR,
        "exact_derivative": _EXPR,
        "sigma": {"type": "number"},
        "mu_bounds": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
    "required": ["alpha"],
    "additionalProperties": False,
}


class ProblemSchemaError(ValueError):
    pass


def _factored(spec) -> FactoredFunction:
    if isinstance(spec, dict):
        spec = [spec]
    if isinstance(spec, list):
        return FactoredFunction.of([(t["sigma0"], compile_expr(t["g"])) for t in spec])
    return FactoredFunction.smooth(compile_expr(spec))


def load_problem(doc: Union[dict, str, Path]) -> ProblemSpec:
    """Build a ProblemSpec from a parsed JSON document, a JSON string or a path.

    Coefficients are expressions in t (see :mod:`vidg.expr`).  ``a`` and ``f``
    may also be ``{"sigma0": e, "g": expr}`` (meaning t^e g(t)) or lists of
    such terms; ``a_sing_exp`` with a plain ``a`` means t^a_sing_exp * a(t).
    """
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        doc = json.loads(Path(doc).read_text())
    elif isinstance(doc, str):
        doc = json.loads(doc)
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ProblemSchemaError(f"invalid problem document at {where}: {exc.message}") from None
    alpha = float(doc["alpha"])
    if "builtin" in doc:
        extra = set(doc) - {"builtin", "alpha"}
        if extra:
            raise ProblemSchemaError(f"builtin problems take only alpha, got {sorted(extra)}")
        return builtin(doc["builtin"], alpha)
    a = _factored(doc.get("a", 0))
    if "a_sing_exp" in doc:
        if len(a.terms) != 1 or a.terms[0][0] != 0:
            raise ProblemSchemaError("a_sing_exp needs a plain expression for a")
        a = FactoredFunction.of([(doc["a_sing_exp"], a.terms[0][1])])
    exact = compile_expr(doc["exact"]) if "exact" in doc else None
    deriv = compile_expr(doc["exact_derivative"]) if "exact_derivative" in doc else None
    return ProblemSpec(
        alpha=alpha,
        a=a,
        kernel=KernelWeight(alpha, compile_expr(doc.get("b", 0))),
        f=_factored(doc.get("f", 0)),
        u0=float(doc.get("u0", 0.0)),
        T=float(doc.get("T", 1.0)),
        exact=exact,
        exact_derivative=deriv,
        mu_bounds=tuple(doc["mu_bounds"]) if "mu_bounds" in doc else None,
        sigma=doc.get("sigma"),
        name=doc.get("name", "custom"),
    )
