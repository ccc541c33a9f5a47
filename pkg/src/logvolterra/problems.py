"""Problem definitions: configs, problem files and the built-in registry.

A problem file is plain text with one ``key = value`` pair per line and
``#`` comments::

    name = example-4.2
    X = 1
    kind = nonlinear
    f = 0.25*x^2 - 0.5*x^2*ln(x) + x
    kernel = x - y
    kernel_dy = -1
    exact = x
    y0 = 0

For ``kind = linear`` the kernel is K(x, s) and must not mention y; the
integrand is then K(x, s) * y(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from logvolterra.expr import (
    ExpressionError,
    eval_expression,
    parse_expression,
    to_text,
    variables,
)
from logvolterra.solver import ProblemSpec

__all__ = [
    "ExpressionError",
    "ProblemConfig",
    "ProblemError",
    "UnknownProblemError",
    "builtin_problems",
    "eval_expression",
    "get_problem",
    "load_problem",
    "parse_expression",
    "parse_problem_text",
    "read_problem_file",
]

KEYS = ("name", "X", "kind", "f", "kernel", "kernel_dy", "exact", "y0")


class ProblemError(ValueError):
    pass


class UnknownProblemError(LookupError):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    X: float
    kind: str
    f: str
    kernel: str
    kernel_dy: str | None = None
    exact: str | None = None
    y0: float | None = None

    def dump(self) -> str:
        """Canonical text form; floats are written with repr, so it round-trips."""
        lines = []
        for fld in fields(self):
            value = getattr(self, fld.name)
            if value is None:
                continue
            lines.append(f"{fld.name} = {value!r}" if isinstance(value, float)
                         else f"{fld.name} = {value}")
        return "\n".join(lines) + "\n"


class ExprFunction:
    """Callable wrapper around a parsed expression with fixed argument names."""

    def __init__(self, text: str, argnames: tuple):
        self.text = text
        self.ast = parse_expression(text)
        self.argnames = argnames
        extra = variables(self.ast) - set(argnames)
        if extra:
            raise ProblemError(
                f"{text!r} uses {', '.join(sorted(extra))}; "
                f"allowed here: {', '.join(argnames)}"
            )

    def __call__(self, *args):
        return eval_expression(self.ast, dict(zip(self.argnames, args)))

    def __repr__(self):
        return f"ExprFunction({to_text(self.ast)!r})"


class _Product:
    """kappa(x, s, y) = K(x, s) * y for linear problems."""

    def __init__(self, K):
        self.K = K

    def __call__(self, x, s, y):
        return self.K(x, s) * y


class _Partial:
    """d/dy of K(x, s) * y; broadcasts against y."""

    def __init__(self, K):
        self.K = K

    def __call__(self, x, s, y):
        return self.K(x, s) * np.ones_like(y)


def _parse_field(config, key, argnames):
    text = getattr(config, key)
    try:
        return ExprFunction(text, argnames)
    except ExpressionError as exc:
        raise ProblemError(f"{config.name}: bad {key} expression: {exc}") from exc


def load_problem(config: ProblemConfig) -> ProblemSpec:
    if not config.f:
        raise ProblemError(f"{config.name}: missing forcing term f")
    if not config.kernel:
        raise ProblemError(f"{config.name}: missing kernel")
    if config.kind not in ("linear", "nonlinear"):
        raise ProblemError(
            f"{config.name}: kind must be 'linear' or 'nonlinear', got {config.kind!r}"
        )
    f = _parse_field(config, "f", ("x",))
    exact = _parse_field(config, "exact", ("x",)) if config.exact else None
    if config.kind == "linear":
        if "y" in variables(parse_expression(config.kernel)):
            raise ProblemError(
                f"{config.name}: a linear kernel is K(x, s) and may not use y"
            )
        K = _parse_field(config, "kernel", ("x", "s"))
        return ProblemSpec(
            name=config.name, X=float(config.X), f=f, kernel=_Product(K),
            kernel_dy=_Partial(K), linear_kernel=K, exact=exact, y0=config.y0,
        )
    kernel = _parse_field(config, "kernel", ("x", "s", "y"))
    dy = (_parse_field(config, "kernel_dy", ("x", "s", "y"))
          if config.kernel_dy else None)
    return ProblemSpec(
        name=config.name, X=float(config.X), f=f, kernel=kernel, kernel_dy=dy,
        exact=exact, y0=config.y0,
    )


def parse_problem_text(text: str, default_name: str = "problem") -> ProblemConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ProblemError(f"line {lineno}: expected 'key = value'")
        if key not in KEYS:
            raise ProblemError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ProblemError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    for key in ("f", "kernel"):
        if key not in values:
            raise ProblemError(f"missing required key {key!r}")
    try:
        X = float(values.get("X", "1"))
        y0 = float(values["y0"]) if "y0" in values else None
    except ValueError as exc:
        raise ProblemError(f"X and y0 must be numbers: {exc}") from exc
    if not (X > 0 and math.isfinite(X)):
        raise ProblemError(f"X must be a positive number, got {X}")
    return ProblemConfig(
        name=values.get("name", default_name),
        X=X,
        kind=values.get("kind", "nonlinear"),
        f=values["f"],
        kernel=values["kernel"],
        kernel_dy=values.get("kernel_dy"),
        exact=values.get("exact"),
        y0=y0,
    )


def read_problem_file(path) -> ProblemConfig:
    path = Path(path)
    return parse_problem_text(path.read_text(encoding="utf-8"), path.stem)


BUILTIN_CONFIGS = {
    c.name: c for c in (
        ProblemConfig(
            name="example-4.1", X=1.0, kind="nonlinear",
            f="0.75*x^2 - 0.5*x^2*ln(x) + sqrt(x)",
            kernel="y^2", kernel_dy="2*y", exact="sqrt(x)", y0=0.0,
        ),
        ProblemConfig(
            name="example-4.2", X=1.0, kind="nonlinear",
            f="0.25*x^2 - 0.5*x^2*ln(x) + x",
            kernel="x - y", kernel_dy="-1", exact="x", y0=0.0,
        ),
        # manufactured solutions: f = p - int_0^x ln(x - s) p(s) ds with K = 1
        ProblemConfig(
            name="constant-solution", X=1.0, kind="linear",
            f="1 - x*ln(x) + x", kernel="1", exact="1", y0=1.0,
        ),
        ProblemConfig(
            name="linear-solution", X=1.0, kind="linear",
            f="x - 0.5*x^2*ln(x) + 0.75*x^2", kernel="1", exact="x", y0=0.0,
        ),
        ProblemConfig(
            name="zero-kernel", X=1.0, kind="linear",
            f="x^2", kernel="0", exact="x^2",
        ),
    )
}


def builtin_problems() -> dict:
    """Name -> ProblemSpec for every built-in problem."""
    return {name: load_problem(cfg) for name, cfg in BUILTIN_CONFIGS.items()}


def get_config(name_or_path) -> ProblemConfig:
    """Look up a built-in by name, falling back to reading a problem file."""
    if name_or_path in BUILTIN_CONFIGS:
        return BUILTIN_CONFIGS[name_or_path]
    path = Path(name_or_path)
    if path.is_file():
        return read_problem_file(path)
    known = ", ".join(sorted(BUILTIN_CONFIGS))
    raise UnknownProblemError(
        f"unknown problem {name_or_path!r} (built-ins: {known})"
    )


def get_problem(name_or_path) -> ProblemSpec:
    return load_problem(get_config(name_or_path))
