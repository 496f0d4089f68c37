"""Bit-exact model of the 16-bit arithmetic logic shift unit (ALSU).

``execute(op, a, b, shamt)`` returns an :class:`AlsuOutput`. Operand ``a``
feeds the arithmetic and logic units, ``b`` is the second operand and the
value the barrel shifter works on, ``shamt`` is the shift distance supplied
by the datapath.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

from . import idea_ref
from .idea_ref import MASK16, to_signed

INT16_MIN = -0x8000
INT16_MAX = 0x7FFF


class AlsuError(Exception):
    """Base class for faults raised inside the ALSU."""


class ReservedOpcodeError(AlsuError):
    pass


class DivisionByZeroError(AlsuError, ArithmeticError):
    pass


class AlsuOp(enum.IntEnum):
    ADD = 0
    DEC = 1
    SUB = 2
    INC = 3
    ADDM = 4
    ADDINV = 5
    MUL = 6
    MULM = 7
    DIV = 8
    MOD = 9
    SHL = 10
    SHR = 11
    ROL = 12
    ROR = 13
    ASHL = 14
    ASHR = 15
    TRANSFER = 16
    NOT = 17
    AND = 18
    NAND = 19
    OR = 20
    NOR = 21
    XOR = 22
    XNOR = 23
    SLT = 24
    SUBNV = 25
    MULINV = 26


class ShiftMode(enum.Enum):
    SHL = "shl"
    SHR = "shr"
    ASHL = "ashl"
    ASHR = "ashr"
    ROL = "rol"
    ROR = "ror"


_SHIFT_OPS = {
    AlsuOp.SHL: ShiftMode.SHL,
    AlsuOp.SHR: ShiftMode.SHR,
    AlsuOp.ROL: ShiftMode.ROL,
    AlsuOp.ROR: ShiftMode.ROR,
    AlsuOp.ASHL: ShiftMode.ASHL,
    AlsuOp.ASHR: ShiftMode.ASHR,
}


@dataclass(frozen=True)
class AlsuOutput:
    result: int
    zero: bool
    sign: bool
    carry: bool = False
    overflow: bool = False

    def flag_string(self) -> str:
        """Compact ``ZSCV`` rendering, ``-`` for a clear flag."""
        return "".join(c if f else "-" for c, f in
                       zip("ZSCV", (self.zero, self.sign, self.carry, self.overflow)))


def _out(value: int, carry: bool = False, overflow: bool = False) -> AlsuOutput:
    value &= MASK16
    return AlsuOutput(value, value == 0, bool(value & 0x8000), carry, overflow)


def _signed_out(exact: int) -> AlsuOutput:
    """Wrap an exact signed result to 16 bits, flagging signed overflow."""
    return _out(exact, overflow=not INT16_MIN <= exact <= INT16_MAX)


def barrel_shift(value: int, amount: int, mode: ShiftMode) -> Tuple[int, bool, bool]:
    """Shift or rotate a 16-bit word by 0..15 places.

    Returns ``(result, carry, overflow)``. Carry is the last bit shifted out
    (never set by rotations); overflow is only raised by ASHL, when a bit
    shifted out differs from the sign bit of the result.
    """
    if not 0 <= amount <= 15:
        raise ValueError(f"shift amount {amount} outside 0..15")
    value &= MASK16
    if amount == 0:
        return value, False, False
    if mode is ShiftMode.ROL:
        return ((value << amount) | (value >> (16 - amount))) & MASK16, False, False
    if mode is ShiftMode.ROR:
        return ((value >> amount) | (value << (16 - amount))) & MASK16, False, False
    if mode in (ShiftMode.SHL, ShiftMode.ASHL):
        result = (value << amount) & MASK16
        carry = bool((value >> (16 - amount)) & 1)
        overflow = False
        if mode is ShiftMode.ASHL:
            lost = value >> (16 - amount)
            fill = (1 << amount) - 1 if result & 0x8000 else 0
            overflow = lost != fill
        return result, carry, overflow
    carry = bool((value >> (amount - 1)) & 1)
    if mode is ShiftMode.SHR:
        return value >> amount, carry, False
    return (to_signed(value) >> amount) & MASK16, carry, False


def _trunc_divmod(a: int, b: int) -> Tuple[int, int]:
    # quotient truncates toward zero, remainder takes the dividend's sign
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q, a - q * b


def execute(op: int, a: int, b: int, shamt: int = 0) -> AlsuOutput:
    try:
        op = AlsuOp(op)
    except ValueError:
        raise ReservedOpcodeError(f"ALSU opcode {op} is reserved") from None
    a &= MASK16
    b &= MASK16
    sa, sb = to_signed(a), to_signed(b)

    if op is AlsuOp.ADD:
        return _signed_out(sa + sb)
    if op is AlsuOp.DEC:
        return _signed_out(sa - 1)
    if op is AlsuOp.SUB:
        return _signed_out(sa - sb)
    if op is AlsuOp.INC:
        return _signed_out(sa + 1)
    if op is AlsuOp.ADDM:
        return _out(idea_ref.add_mod(a, b))
    if op is AlsuOp.ADDINV:
        return _out(idea_ref.add_inv(b))
    if op is AlsuOp.MUL:
        return _signed_out(sa * sb)
    if op is AlsuOp.MULM:
        return _out(idea_ref.mul_mod(a, b))
    if op in (AlsuOp.DIV, AlsuOp.MOD):
        if sb == 0:
            raise DivisionByZeroError(f"{op.name.lower()} by zero")
        q, r = _trunc_divmod(sa, sb)
        # -32768 / -1 wraps silently; only ops 0-3, 6 and 14 report overflow
        return _out(q if op is AlsuOp.DIV else r)
    if op in _SHIFT_OPS:
        result, carry, overflow = barrel_shift(b, shamt, _SHIFT_OPS[op])
        return _out(result, carry=carry, overflow=overflow)
    if op is AlsuOp.TRANSFER:
        return _out(a)
    if op is AlsuOp.NOT:
        return _out(~a)
    if op is AlsuOp.AND:
        return _out(a & b)
    if op is AlsuOp.NAND:
        return _out(~(a & b))
    if op is AlsuOp.OR:
        return _out(a | b)
    if op is AlsuOp.NOR:
        return _out(~(a | b))
    if op is AlsuOp.XOR:
        return _out(a ^ b)
    if op is AlsuOp.XNOR:
        return _out(~(a ^ b))
    if op is AlsuOp.SLT:
        diff = _signed_out(sa - sb)
        # sign and overflow disagree exactly when a < b
        return _out(MASK16 if diff.sign != diff.overflow else 0)
    if op is AlsuOp.SUBNV:
        return _out(sa - sb)
    assert op is AlsuOp.MULINV
    return _out(idea_ref.mul_inv(a))
