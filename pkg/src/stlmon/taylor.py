"""Taylor coefficients of ODE solutions, with interval or jet elements.

A flow F is compiled once into a flat tape (one slot per distinct
subexpression).  Running the tape produces the Taylor coefficients
z^[0], ..., z^[K] of the solution through z0, using the classical
coefficient recurrences

    z^[i+1] = (coefficient i of F(z-series)) / (i + 1)

and, per elementary operation, the product convolution and the exp /
sin-cos / division recurrences.  Element type is anything with ring
operations plus sin/cos/exp: Interval for point expansions and
remainder bounds, Jet for the solution's Jacobian (first-order forward
AD with interval coordinates).

All arithmetic bottoms out in outward-rounded interval kernels, so the
computed coefficient boxes contain the true Taylor coefficients for
every point of the input box.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Add, Const, Cos, Div, Exp, Expr, Mul, Neg, Param, Pow, Sin, Sub, Var
from .interval import Interval

__all__ = ["Jet", "TaylorProgram", "compile_flow", "state_series", "jet_seed", "interval_const", "jet_const_maker"]


class Jet:
    """Value and gradient, both interval-valued: f and (df/dz_1, ..., df/dz_d).

    Seeding component j of a box with gradient e_j and evaluating an
    expression yields an enclosure of its value and of its true gradient
    over the box (first-order forward-mode AD).
    """

    __slots__ = ("val", "grad")

    def __init__(self, val: Interval, grad: tuple):
        self.val = val
        self.grad = grad

    def __repr__(self):
        return f"Jet({self.val}, grad={self.grad})"

    def __add__(self, o):
        return Jet(self.val + o.val, tuple(a + b for a, b in zip(self.grad, o.grad)))

    def __sub__(self, o):
        return Jet(self.val - o.val, tuple(a - b for a, b in zip(self.grad, o.grad)))

    def __neg__(self):
        return Jet(-self.val, tuple(-a for a in self.grad))

    def __mul__(self, o):
        return Jet(
            self.val * o.val,
            tuple(self.val * gb + o.val * ga for ga, gb in zip(self.grad, o.grad)),
        )

    def __truediv__(self, o):
        w = self.val / o.val
        return Jet(w, tuple((ga - w * gb) / o.val for ga, gb in zip(self.grad, o.grad)))

    def sin(self):
        c = self.val.cos()
        return Jet(self.val.sin(), tuple(c * g for g in self.grad))

    def cos(self):
        s = self.val.sin()
        return Jet(self.val.cos(), tuple(-(s * g) for g in self.grad))

    def exp(self):
        e = self.val.exp()
        return Jet(e, tuple(e * g for g in self.grad))


def interval_const(c: float) -> Interval:
    return Interval(c)


def jet_const_maker(dim: int):
    zeros = (Interval(0.0),) * dim
    return lambda c: Jet(Interval(c), zeros)


def jet_seed(box_elems, dim: int) -> list:
    """Identity-seeded jets for the components of a box."""
    zero, one = Interval(0.0), Interval(1.0)
    return [
        Jet(v, tuple(one if i == j else zero for i in range(dim)))
        for j, v in enumerate(box_elems)
    ]


# tape op kinds; each op writes coefficient i of its output slot(s)
# from children coefficients of orders <= i.
_CONST, _STATE, _ADD, _SUB, _MUL, _DIV, _NEG, _EXP, _SINCOS = range(9)


@dataclass(frozen=True)
class TaylorProgram:
    ops: tuple          # (kind, out_slot, ...) in dependency order
    n_slots: int
    n_state: int        # extended-state dimension (vars + params)
    n_vars: int         # leading components that actually flow
    out_slots: tuple    # tape slot of F_j for each flowing component


def compile_flow(flow: tuple, n_vars: int, n_params: int) -> TaylorProgram:
    """Flatten flow expressions into a shared-subexpression tape.

    The extended state is (x_1..x_n, u_1..u_m); parameters flow with
    rate zero and are handled by the runner, not the tape.
    """
    ops: list = []
    memo: dict = {}
    n_slots = 0

    def fresh() -> int:
        nonlocal n_slots
        n_slots += 1
        return n_slots - 1

    def emit(e: Expr) -> int:
        if e in memo:
            return memo[e]
        t = type(e)
        if t is Const:
            slot = fresh()
            ops.append((_CONST, slot, e.value))
        elif t is Var:
            slot = fresh()
            ops.append((_STATE, slot, e.index))
        elif t is Param:
            slot = fresh()
            ops.append((_STATE, slot, n_vars + e.index))
        elif t is Neg:
            a = emit(e.arg)
            slot = fresh()
            ops.append((_NEG, slot, a))
        elif t in (Add, Sub, Mul, Div):
            a, b = emit(e.a), emit(e.b)
            slot = fresh()
            kind = {Add: _ADD, Sub: _SUB, Mul: _MUL, Div: _DIV}[t]
            ops.append((kind, slot, a, b))
        elif t is Exp:
            a = emit(e.arg)
            slot = fresh()
            ops.append((_EXP, slot, a))
        elif t in (Sin, Cos):
            a = emit(e.arg)
            s, c = fresh(), fresh()
            ops.append((_SINCOS, s, c, a))
            memo[Sin(e.arg)] = s
            memo[Cos(e.arg)] = c
            return memo[e]
        elif t is Pow:
            return _emit_pow(e, emit, ops, memo, fresh)
        else:
            raise TypeError(f"unknown expression node {e!r}")
        memo[e] = slot
        return slot

    out_slots = tuple(emit(f) for f in flow)
    return TaylorProgram(
        ops=tuple(ops),
        n_slots=n_slots,
        n_state=n_vars + n_params,
        n_vars=n_vars,
        out_slots=out_slots,
    )


def _emit_pow(e: Pow, emit, ops, memo, fresh) -> int:
    # integer powers become balanced products so the generic convolution
    # recurrence applies (no positivity assumption on the base)
    base = emit(e.base)

    def power(slot: int, n: int) -> int:
        key = ("pow", slot, n)
        if key in memo:
            return memo[key]
        if n == 0:
            out = fresh()
            ops.append((_CONST, out, 1.0))
        elif n == 1:
            out = slot
        elif n % 2 == 0:
            half = power(slot, n // 2)
            out = fresh()
            ops.append((_MUL, out, half, half))
        else:
            rest = power(slot, n - 1)
            out = fresh()
            ops.append((_MUL, out, rest, slot))
        memo[key] = out
        return out

    slot = power(base, e.exponent)
    memo[e] = slot
    return slot


def state_series(program: TaylorProgram, z0: list, order: int, const) -> list:
    """Taylor coefficients [z^[0], ..., z^[order]] for each state component.

    z0 is the extended initial condition (one element per component);
    ``const`` lifts a float into the element type.  Returns a list of
    n_state coefficient lists.
    """
    zero = const(0.0)
    state = [[v] for v in z0]
    slots = [None] * program.n_slots
    for op in program.ops:
        slots[op[1]] = []
        if op[0] == _SINCOS:
            slots[op[2]] = []

    for i in range(order):
        _tape_order(program, state, slots, i, const)
        recip = const(1.0) / const(float(i + 1))
        for j in range(program.n_vars):
            state[j].append(slots[program.out_slots[j]][i] * recip)
        for j in range(program.n_vars, program.n_state):
            state[j].append(zero)
    return state


def _tape_order(program, state, slots, i, const):
    for op in program.ops:
        kind = op[0]
        if kind == _CONST:
            out = const(op[2]) if i == 0 else const(0.0)
            slots[op[1]].append(out)
        elif kind == _STATE:
            slots[op[1]].append(state[op[2]][i])
        elif kind == _ADD:
            slots[op[1]].append(slots[op[2]][i] + slots[op[3]][i])
        elif kind == _SUB:
            slots[op[1]].append(slots[op[2]][i] - slots[op[3]][i])
        elif kind == _NEG:
            slots[op[1]].append(-slots[op[2]][i])
        elif kind == _MUL:
            a, b = slots[op[2]], slots[op[3]]
            acc = a[0] * b[i]
            for j in range(1, i + 1):
                acc = acc + a[j] * b[i - j]
            slots[op[1]].append(acc)
        elif kind == _DIV:
            a, b, w = slots[op[2]], slots[op[3]], slots[op[1]]
            acc = a[i]
            for j in range(i):
                acc = acc - w[j] * b[i - j]
            w.append(acc / b[0])
        elif kind == _EXP:
            u, w = slots[op[2]], slots[op[1]]
            if i == 0:
                w.append(u[0].exp())
            else:
                acc = const(float(i)) * u[i] * w[0]
                for j in range(1, i):
                    acc = acc + const(float(j)) * u[j] * w[i - j]
                w.append(acc / const(float(i)))
        elif kind == _SINCOS:
            u, s, c = slots[op[3]], slots[op[1]], slots[op[2]]
            if i == 0:
                s.append(u[0].sin())
                c.append(u[0].cos())
            else:
                sacc = const(float(i)) * u[i] * c[0]
                cacc = const(float(i)) * u[i] * s[0]
                for j in range(1, i):
                    sacc = sacc + const(float(j)) * u[j] * c[i - j]
                    cacc = cacc + const(float(j)) * u[j] * s[i - j]
                ii = const(float(i))
                s.append(sacc / ii)
                c.append(-(cacc / ii))
        else:
            raise AssertionError(f"bad op kind {kind}")
