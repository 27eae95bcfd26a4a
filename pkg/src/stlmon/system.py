"""Parameterized ODE systems and the model-file format.

A system is (params u, vars x, domain U x X, init box, flow F).  Model
files are line-oriented with sections [params], [vars], [init], [flow];
see the bundled examples under ``stlmon/models``.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ModelError
from .expr import (
    Expr,
    ExprParser,
    Param,
    Token,
    Tokenizer,
    Var,
    eval_box,
    expr_to_str,
    free_divisions,
)
from .interval import Interval, IntervalBox

__all__ = ["ContinuousSystem", "parse_model", "format_model", "load_builtin", "BUILTIN_MODELS"]


@dataclass(frozen=True)
class ContinuousSystem:
    param_names: tuple[str, ...]
    var_names: tuple[str, ...]
    u_domain: IntervalBox
    x_domain: IntervalBox
    x_init: IntervalBox
    flow: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.flow) != len(self.var_names):
            raise ModelError("flow dimension does not match variable count")
        if not self.x_domain.contains_box(self.x_init):
            raise ModelError("initial box is not contained in the state domain")
        for f in self.flow:
            self._check_divisions(f)

    def _check_divisions(self, e: Expr) -> None:
        # load-time conservative check: denominators must exclude 0 over U x X
        for den in free_divisions(e):
            iv = eval_box(den, self.u_domain, self.x_domain)
            if iv.lo <= 0.0 <= iv.hi:
                raise ModelError(
                    f"denominator {expr_to_str(den)} may vanish over the domain"
                )

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def resolver(self, allow_params: bool = True):
        """Identifier resolver for expressions over this system."""
        params = {n: i for i, n in enumerate(self.param_names)}
        variables = {n: i for i, n in enumerate(self.var_names)}

        def resolve(name: str, tok: Token) -> Expr:
            if name in variables:
                return Var(variables[name], name)
            if allow_params and name in params:
                return Param(params[name], name)
            raise ModelError(f"undeclared identifier {name!r}", tok.line, tok.col)

        return resolve

    def with_u_domain(self, u_domain: IntervalBox) -> "ContinuousSystem":
        return ContinuousSystem(
            self.param_names, self.var_names, u_domain,
            self.x_domain, self.x_init, self.flow,
        )


def _parse_number(tz: Tokenizer) -> float:
    sign = 1.0
    while True:
        if tz.accept("-"):
            sign = -sign
        elif tz.accept("+"):
            pass
        else:
            break
    tok = tz.next()
    if tok.kind != "num":
        raise ModelError(f"expected a number, found {tok.text!r}", tok.line, tok.col)
    return sign * float(tok.text)


def _parse_interval(tz: Tokenizer) -> Interval:
    tz.expect("[")
    lo = _parse_number(tz)
    tz.expect(",")
    hi = _parse_number(tz)
    tz.expect("]")
    if lo > hi:
        raise ModelError(f"domain bounds out of order: [{lo}, {hi}]")
    return Interval(lo, hi)


def parse_model(text: str) -> ContinuousSystem:
    """Parse the model-file format into a validated system."""
    sections = {"params": [], "vars": [], "init": [], "flow": []}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        rest = line.strip()
        if not rest:
            continue
        if rest.startswith("["):
            close = rest.find("]")
            name = rest[1:close].strip() if close > 0 else ""
            if name not in sections:
                raise ModelError(f"unknown section [{name}]", lineno, 1)
            current = name
            rest = rest[close + 1:].strip()
            if not rest:
                continue
        if current is None:
            raise ModelError("declaration outside any section", lineno, 1)
        sections[current].append((lineno, rest))

    params: list[tuple[str, Interval]] = []
    for lineno, decl in sections["params"]:
        params.append(_parse_domain_decl(decl, lineno))
    variables: list[tuple[str, Interval]] = []
    for lineno, decl in sections["vars"]:
        variables.append(_parse_domain_decl(decl, lineno))

    if not variables:
        raise ModelError("a model needs at least one variable")
    _check_distinct([n for n, _ in params] + [n for n, _ in variables])

    param_names = tuple(n for n, _ in params)
    var_names = tuple(n for n, _ in variables)
    var_index = {n: i for i, n in enumerate(var_names)}

    init_ivs: dict[str, Interval] = {}
    for lineno, decl in sections["init"]:
        tz = Tokenizer(decl, line_offset=lineno)
        name_tok = tz.next()
        if name_tok.kind != "ident" or name_tok.text not in var_index:
            raise ModelError(
                f"init declares unknown variable {name_tok.text!r}", name_tok.line, name_tok.col
            )
        if tz.accept("="):
            v = _parse_number(tz)
            init_ivs[name_tok.text] = Interval(v)
        else:
            tz.expect("in")
            init_ivs[name_tok.text] = _parse_interval(tz)
        _expect_end(tz)
    missing = [n for n in var_names if n not in init_ivs]
    if missing:
        raise ModelError(f"missing init for {', '.join(missing)}")

    flows: dict[str, Expr] = {}
    dummy = ContinuousSystem.__new__(ContinuousSystem)  # only for resolver closure
    object.__setattr__(dummy, "param_names", param_names)
    object.__setattr__(dummy, "var_names", var_names)
    resolve = dummy.resolver()
    for lineno, decl in sections["flow"]:
        tz = Tokenizer(decl, line_offset=lineno)
        name_tok = tz.next()
        if name_tok.kind != "ident" or name_tok.text not in var_index:
            raise ModelError(
                f"flow declares unknown variable {name_tok.text!r}", name_tok.line, name_tok.col
            )
        tz.expect("'")
        tz.expect("=")
        flows[name_tok.text] = ExprParser(tz, resolve).parse_sum()
        _expect_end(tz)
    missing = [n for n in var_names if n not in flows]
    if missing:
        raise ModelError(f"missing flow for {', '.join(missing)}")

    return ContinuousSystem(
        param_names=param_names,
        var_names=var_names,
        u_domain=IntervalBox(iv for _, iv in params),
        x_domain=IntervalBox(iv for _, iv in variables),
        x_init=IntervalBox(init_ivs[n] for n in var_names),
        flow=tuple(flows[n] for n in var_names),
    )


def _parse_domain_decl(decl: str, lineno: int) -> tuple[str, Interval]:
    tz = Tokenizer(decl, line_offset=lineno)
    name_tok = tz.next()
    if name_tok.kind != "ident":
        raise ModelError(f"expected a name, found {name_tok.text!r}", name_tok.line, name_tok.col)
    tz.expect("in")
    iv = _parse_interval(tz)
    _expect_end(tz)
    return name_tok.text, iv


def _expect_end(tz: Tokenizer) -> None:
    tok = tz.peek()
    if tok is not None:
        raise ModelError(f"trailing input {tok.text!r}", tok.line, tok.col)


def _check_distinct(names: list[str]) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise ModelError(f"duplicate declaration of {n!r}")
        seen.add(n)


def format_model(sys: ContinuousSystem) -> str:
    """Inverse of parse_model (up to whitespace); used for round-trip checks."""
    lines = []
    if sys.param_names:
        lines.append("[params]")
        for n, iv in zip(sys.param_names, sys.u_domain):
            lines.append(f"  {n} in [{iv.lo!r}, {iv.hi!r}]")
    lines.append("[vars]")
    for n, iv in zip(sys.var_names, sys.x_domain):
        lines.append(f"  {n} in [{iv.lo!r}, {iv.hi!r}]")
    lines.append("[init]")
    for n, iv in zip(sys.var_names, sys.x_init):
        if iv.is_point():
            lines.append(f"  {n} = {iv.lo!r}")
        else:
            lines.append(f"  {n} in [{iv.lo!r}, {iv.hi!r}]")
    lines.append("[flow]")
    for n, f in zip(sys.var_names, sys.flow):
        lines.append(f"  {n}' = {expr_to_str(f)}")
    return "\n".join(lines) + "\n"


BUILTIN_MODELS = ("rotation", "lorenz", "timer")


def load_builtin(name: str) -> ContinuousSystem:
    if name not in BUILTIN_MODELS:
        raise ModelError(f"unknown builtin model {name!r}")
    text = resources.files("stlmon").joinpath(f"models/{name}.model").read_text()
    return parse_model(text)
