"""Cycle-accurate model of the single-cycle datapath.

Every :func:`step` fetches, decodes and executes one instruction and counts
one clock cycle. All reads see the state from the start of the cycle and the
(single) register write and (single) memory write commit together at the
end, so ``add $1,$1,$1`` doubles ``$1`` exactly once.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Tuple

from . import alsu, isa
from .alsu import AlsuError, AlsuOutput, DivisionByZeroError
from .assembler import DMEM_WORDS, IMEM_WORDS, MemoryImage, disassemble_word
from .isa import DecodeError, PcAction, Source, WriteTarget

MASK16 = 0xFFFF


class FaultKind(enum.Enum):
    DECODE = "decode"
    ARITHMETIC = "arithmetic"
    PC_RANGE = "pc_range"


class Status(enum.Enum):
    HALTED = "halted"
    MAX_CYCLES_EXCEEDED = "max_cycles_exceeded"
    FAULT = "fault"


@dataclass(frozen=True)
class Fault:
    kind: FaultKind
    cycle: int
    pc: int
    message: str = ""


class MachineFault(Exception):
    def __init__(self, fault: Fault):
        super().__init__(f"{fault.kind.value} fault at pc=0x{fault.pc:04x} "
                         f"(cycle {fault.cycle}): {fault.message}")
        self.fault = fault


class MachineHalted(RuntimeError):
    pass


@dataclass
class MachineState:
    pc: int = 0
    regs: List[int] = field(default_factory=lambda: [0] * isa.NUM_REGISTERS)
    imem: List[int] = field(default_factory=lambda: [0] * IMEM_WORDS)
    dmem: List[int] = field(default_factory=lambda: [0] * DMEM_WORDS)
    cycles: int = 0
    halted: bool = False
    fault: Optional[Fault] = None


@dataclass(frozen=True)
class TraceRecord:
    cycle: int
    pc: int
    raw: int
    disassembly: str
    reg_write: Optional[Tuple[int, int, int]]
    mem_write: Optional[Tuple[int, int, int]]
    flags: AlsuOutput
    pc_next: int
    alsu_op: int = 0
    operands: Tuple[int, int, int] = (0, 0, 0)


@dataclass
class RunResult:
    final: MachineState
    status: Status
    cycles: int
    fault: Optional[Fault] = None


def load(imem_image: Iterable[int] | MemoryImage = (),
         dmem_image: Optional[Iterable[int]] = None) -> MachineState:
    """Fresh machine with the images copied to address 0 of each memory."""
    if isinstance(imem_image, MemoryImage):
        if dmem_image is None:
            dmem_image = imem_image.data
        imem_image = imem_image.text
    text = list(imem_image)
    data = list(dmem_image or ())
    if len(text) > IMEM_WORDS:
        raise ValueError(f"instruction image of {len(text)} words exceeds {IMEM_WORDS}")
    if len(data) > DMEM_WORDS:
        raise ValueError(f"data image of {len(data)} words exceeds {DMEM_WORDS}")
    state = MachineState()
    for i, w in enumerate(text):
        if not 0 <= w <= 0xFFFFFFFF:
            raise ValueError(f"instruction word {w:#x} at {i} is not 32-bit")
        state.imem[i] = w
    for i, w in enumerate(data):
        if not 0 <= w <= MASK16:
            raise ValueError(f"data word {w:#x} at {i} is not 16-bit")
        state.dmem[i] = w
    return state


def _fail(s: MachineState, kind: FaultKind, message: str) -> MachineFault:
    fault = Fault(kind, s.cycles, s.pc, message)
    s.halted = True
    s.fault = fault
    return MachineFault(fault)


@lru_cache(maxsize=65536)
def _disasm(word: int) -> str:
    return disassemble_word(word)[0]


def step(s: MachineState) -> TraceRecord:
    if s.halted:
        raise MachineHalted("machine is halted")
    pc = s.pc
    raw = s.imem[pc]
    try:
        d = isa.decode(raw)
    except DecodeError as exc:
        raise _fail(s, FaultKind.DECODE, str(exc)) from None
    ctl = isa.control_signals(d)
    regs = s.regs

    a = d.imm if ctl.operand_a_source is Source.IMMEDIATE else regs[d.rs]
    b = d.imm if ctl.operand_b_source is Source.IMMEDIATE else regs[d.rt]
    shamt = d.shamt & 0xF
    try:
        out = alsu.execute(ctl.alsu_opcode, a, b, shamt)
    except DivisionByZeroError as exc:
        raise _fail(s, FaultKind.ARITHMETIC, str(exc)) from None
    except AlsuError as exc:  # pragma: no cover - the CU never selects a reserved op
        raise _fail(s, FaultKind.DECODE, str(exc)) from None

    action = ctl.pc_action
    reg_write = mem_write = None

    if ctl.mem_write:
        if d.opcode == 15:  # SW: M[RS+Offset] <- RT
            addr, value = out.result, regs[d.rt]
        else:  # SWI: M[RS] <- Data
            addr, value = out.result, d.imm
        mem_write = (addr, s.dmem[addr], value)

    if ctl.reg_write:
        target = d.rd if ctl.write_target is WriteTarget.RD else d.rt
        if action is PcAction.JUMP_LINK:
            value = (pc + 1) & MASK16
        elif ctl.to_register:
            value = out.result
        else:
            value = s.dmem[out.result]
        reg_write = (target, regs[target], value)

    if action is PcAction.HALT:
        pc_next = pc  # PC is disabled
    elif action is PcAction.INCREMENT:
        pc_next = pc + 1
    elif action is PcAction.BRANCH_EQ or action is PcAction.BRANCH_NE:
        taken = out.zero if action is PcAction.BRANCH_EQ else not out.zero
        pc_next = pc + 1 + (alsu.to_signed(d.imm) if taken else 0)
    elif action is PcAction.JUMP_REG:
        pc_next = out.result
    else:  # JUMP_ADDR, JUMP_LINK
        pc_next = d.imm
    if not 0 <= pc_next < IMEM_WORDS:
        raise _fail(s, FaultKind.PC_RANGE, f"next pc {pc_next} outside instruction memory")

    # end of cycle: synchronous writes commit together
    if reg_write is not None:
        regs[reg_write[0]] = reg_write[2]
    if mem_write is not None:
        s.dmem[mem_write[0]] = mem_write[2]
    if action is PcAction.HALT:
        s.halted = True
    s.pc = pc_next
    s.cycles += 1
    return TraceRecord(
        cycle=s.cycles, pc=pc, raw=raw, disassembly=_disasm(raw),
        reg_write=reg_write, mem_write=mem_write, flags=out, pc_next=pc_next,
        alsu_op=int(ctl.alsu_opcode), operands=(a, b, shamt),
    )


def run(s: MachineState, max_cycles: int,
        on_step: Optional[Callable[[TraceRecord], None]] = None) -> RunResult:
    """Step until HLT, a fault, or ``max_cycles`` instructions this call."""
    if max_cycles <= 0:
        raise ValueError("max_cycles must be positive")
    start = s.cycles
    while not s.halted:
        if s.cycles - start >= max_cycles:
            return RunResult(s, Status.MAX_CYCLES_EXCEEDED, s.cycles)
        try:
            rec = step(s)
        except MachineFault as exc:
            return RunResult(s, Status.FAULT, s.cycles, exc.fault)
        if on_step is not None:
            on_step(rec)
    if s.fault is not None:
        return RunResult(s, Status.FAULT, s.cycles, s.fault)
    return RunResult(s, Status.HALTED, s.cycles)


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ("cycle", "pc", "raw", "disassembly", "reg_write", "mem_write", "flags", "pc_next")


def trace_row(rec: TraceRecord) -> Tuple[str, ...]:
    """Columns of one trace line.

    ``reg_write`` renders as ``$n:0xOLD->0xNEW`` and ``mem_write`` as
    ``0xADDR:0xOLD->0xNEW``; both are empty when nothing was written.
    Flags use ``ZSCV`` letters with ``-`` for a clear flag.
    """
    rw = "" if rec.reg_write is None else \
        f"${rec.reg_write[0]}:0x{rec.reg_write[1]:04x}->0x{rec.reg_write[2]:04x}"
    mw = "" if rec.mem_write is None else \
        f"0x{rec.mem_write[0]:04x}:0x{rec.mem_write[1]:04x}->0x{rec.mem_write[2]:04x}"
    return (str(rec.cycle), f"0x{rec.pc:04x}", f"0x{rec.raw:08x}", rec.disassembly,
            rw, mw, rec.flags.flag_string(), f"0x{rec.pc_next:04x}")


class TraceWriter:
    def __init__(self, stream: io.TextIOBase):
        self._w = csv.writer(stream, lineterminator="\n")
        self._w.writerow(TRACE_COLUMNS)

    def __call__(self, rec: TraceRecord) -> None:
        self._w.writerow(trace_row(rec))


def trace_csv(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    w = TraceWriter(buf)
    for rec in records:
        w(rec)
    return buf.getvalue()
