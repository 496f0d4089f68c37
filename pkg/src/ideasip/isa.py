"""Instruction encoding, decoding and hardwired control.

Instruction words are 32 bits wide and use the classic MIPS field layout::

    R-type  opcode[31:26]=0  rs[25:21]  rt[20:16]  rd[15:11]  shamt[10:6]  function[5:0]
    I-type  opcode[31:26]    rs[25:21]  rt[20:16]  imm[15:0]

The mnemonic table lives in ``opcodes.csv`` next to this module and is
shared by the assembler, the disassembler and the documentation.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Optional, Tuple

from .alsu import AlsuOp

NUM_REGISTERS = 32
MAX_OPCODE = 22
MAX_FUNCTION = 25


class DecodeError(ValueError):
    def __init__(self, word: int, field: str, value: int):
        super().__init__(f"cannot decode 0x{word:08x}: {field} {value} is undefined")
        self.word = word
        self.field = field
        self.value = value


class EncodeError(ValueError):
    pass


@dataclass(frozen=True)
class OpcodeEntry:
    mnemonic: str
    format: str
    opcode: int
    function: Optional[int]
    syntax: Tuple[str, ...]
    description: str


def _load_table() -> Tuple[OpcodeEntry, ...]:
    text = resources.files(__package__).joinpath("opcodes.csv").read_text(encoding="utf-8")
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append(OpcodeEntry(
            mnemonic=row["mnemonic"],
            format=row["format"],
            opcode=int(row["opcode"]),
            function=int(row["function"]) if row["function"] else None,
            syntax=tuple(s for s in row["syntax"].split(",") if s),
            description=row["description"],
        ))
    return tuple(rows)


OPCODE_TABLE: Tuple[OpcodeEntry, ...] = _load_table()
BY_MNEMONIC: Dict[str, OpcodeEntry] = {e.mnemonic: e for e in OPCODE_TABLE}
BY_CODE: Dict[Tuple[int, Optional[int]], OpcodeEntry] = {
    (e.opcode, e.function): e for e in OPCODE_TABLE
}


def opcode_table_csv() -> str:
    """The opcode table as CSV text (mnemonic, format, opcode, function, syntax, description)."""
    return resources.files(__package__).joinpath("opcodes.csv").read_text(encoding="utf-8")


@dataclass(frozen=True)
class DecodedInstruction:
    format: str
    opcode: int
    function: Optional[int] = None
    rs: int = 0
    rt: int = 0
    rd: int = 0
    shamt: int = 0
    imm: int = 0

    @property
    def entry(self) -> OpcodeEntry:
        return BY_CODE[(self.opcode, self.function)]

    @property
    def mnemonic(self) -> str:
        return self.entry.mnemonic


def make(mnemonic: str, **fields: int) -> DecodedInstruction:
    """Build a :class:`DecodedInstruction` from a mnemonic and field values."""
    entry = BY_MNEMONIC[mnemonic]
    if entry.format == "R":
        return DecodedInstruction("R", 0, entry.function, **fields)
    return DecodedInstruction("I", entry.opcode, None, **fields)


@lru_cache(maxsize=65536)
def decode(word: int) -> DecodedInstruction:
    word &= 0xFFFFFFFF
    opcode = word >> 26
    rs = (word >> 21) & 0x1F
    rt = (word >> 16) & 0x1F
    if opcode > MAX_OPCODE:
        raise DecodeError(word, "opcode", opcode)
    if opcode == 0:
        function = word & 0x3F
        if function > MAX_FUNCTION:
            raise DecodeError(word, "function", function)
        return DecodedInstruction("R", 0, function, rs, rt,
                                  (word >> 11) & 0x1F, (word >> 6) & 0x1F)
    return DecodedInstruction("I", opcode, None, rs, rt, imm=word & 0xFFFF)


def _field(name: str, value: int, bits: int) -> int:
    if not 0 <= value < (1 << bits):
        raise EncodeError(f"{name}={value} does not fit in {bits} bits")
    return value


def encode(d: DecodedInstruction) -> int:
    if d.format == "R":
        if d.opcode != 0 or d.function is None:
            raise EncodeError("R-type instructions need opcode 0 and a function code")
        if d.imm:
            raise EncodeError("R-type instructions carry no immediate")
        if d.function > MAX_FUNCTION:
            raise EncodeError(f"function {d.function} is undefined")
        return (_field("rs", d.rs, 5) << 21 | _field("rt", d.rt, 5) << 16
                | _field("rd", d.rd, 5) << 11 | _field("shamt", d.shamt, 5) << 6
                | d.function)
    if d.format == "I":
        if d.function is not None or d.rd or d.shamt:
            raise EncodeError("I-type instructions carry no function, rd or shamt")
        if not 1 <= d.opcode <= MAX_OPCODE:
            raise EncodeError(f"opcode {d.opcode} is not an I-type opcode")
        return (d.opcode << 26 | _field("rs", d.rs, 5) << 21
                | _field("rt", d.rt, 5) << 16 | _field("imm", d.imm, 16))
    raise EncodeError(f"unknown format {d.format!r}")


# ---------------------------------------------------------------------------
# Hardwired control unit
# ---------------------------------------------------------------------------

class Source(enum.Enum):
    REGISTER = "register"
    IMMEDIATE = "immediate"


class WriteTarget(enum.Enum):
    RD = "rd"
    RT = "rt"


class PcAction(enum.Enum):
    INCREMENT = "increment"
    BRANCH_EQ = "branch_eq"
    BRANCH_NE = "branch_ne"
    JUMP_ADDR = "jump_addr"
    JUMP_REG = "jump_reg"
    JUMP_LINK = "jump_link"
    HALT = "halt"


@dataclass(frozen=True)
class ControlSignals:
    alsu_opcode: AlsuOp
    to_register: bool
    reg_write: bool
    mem_write: bool
    operand_a_source: Source
    operand_b_source: Source
    write_target: WriteTarget
    pc_action: PcAction


_R_ALSU = {
    0: AlsuOp.AND, 1: AlsuOp.NAND, 2: AlsuOp.OR, 3: AlsuOp.NOR,
    4: AlsuOp.XOR, 5: AlsuOp.XNOR, 6: AlsuOp.NOT,
    7: AlsuOp.SHL, 8: AlsuOp.SHR, 9: AlsuOp.ASHL, 10: AlsuOp.ASHR,
    11: AlsuOp.ROL, 12: AlsuOp.ROR,
    13: AlsuOp.ADD, 14: AlsuOp.SUB, 15: AlsuOp.MUL, 16: AlsuOp.DIV,
    17: AlsuOp.MOD, 18: AlsuOp.INC, 19: AlsuOp.DEC, 20: AlsuOp.SLT,
    21: AlsuOp.ADDM, 22: AlsuOp.MULM, 23: AlsuOp.ADDINV, 24: AlsuOp.MULINV,
    25: AlsuOp.TRANSFER,
}

_I_ALSU = {
    1: AlsuOp.AND, 2: AlsuOp.NAND, 3: AlsuOp.OR, 4: AlsuOp.NOR,
    5: AlsuOp.XOR, 6: AlsuOp.XNOR, 7: AlsuOp.NOT,
    8: AlsuOp.SUBNV, 9: AlsuOp.SUBNV,
    10: AlsuOp.TRANSFER, 11: AlsuOp.TRANSFER, 12: AlsuOp.TRANSFER,
    13: AlsuOp.ADD, 14: AlsuOp.TRANSFER, 15: AlsuOp.ADD, 16: AlsuOp.TRANSFER,
    17: AlsuOp.ADD, 18: AlsuOp.SUB, 19: AlsuOp.MUL, 20: AlsuOp.DIV,
    21: AlsuOp.MOD, 22: AlsuOp.SLT,
}

_I_PC = {
    8: PcAction.BRANCH_EQ, 9: PcAction.BRANCH_NE, 10: PcAction.JUMP_ADDR,
    11: PcAction.JUMP_REG, 12: PcAction.JUMP_LINK,
}

# I-type opcodes that do not write the register bank
_I_NO_WRITE = {8, 9, 10, 11, 15, 16}
# I-type opcodes whose ALSU A input is the immediate: INVI, J, JAL, LWI
_I_IMM_A = {7, 10, 12, 14}
# I-type opcodes whose ALSU B input is the immediate
_I_IMM_B = {1, 2, 3, 4, 5, 6, 13, 15, 17, 18, 19, 20, 21, 22}


def to_register(opcode: int, function: Optional[int]) -> bool:
    """The ToRegister select line: ALSU result (True) vs memory data (False)."""
    return ((opcode == 0 and function is not None and 0 <= function <= 24)
            or 1 <= opcode <= 7 or opcode == 14 or 17 <= opcode <= 22)


def control_signals(d: DecodedInstruction) -> ControlSignals:
    if d.format == "R":
        halt = d.function == 25
        return ControlSignals(
            alsu_opcode=_R_ALSU[d.function],
            to_register=to_register(0, d.function),
            reg_write=not halt,
            mem_write=False,
            operand_a_source=Source.REGISTER,
            operand_b_source=Source.REGISTER,
            write_target=WriteTarget.RD,
            pc_action=PcAction.HALT if halt else PcAction.INCREMENT,
        )
    op = d.opcode
    return ControlSignals(
        alsu_opcode=_I_ALSU[op],
        to_register=to_register(op, None),
        reg_write=op not in _I_NO_WRITE,
        mem_write=op in (15, 16),
        operand_a_source=Source.IMMEDIATE if op in _I_IMM_A else Source.REGISTER,
        operand_b_source=Source.IMMEDIATE if op in _I_IMM_B else Source.REGISTER,
        write_target=WriteTarget.RT,
        pc_action=_I_PC.get(op, PcAction.INCREMENT),
    )
