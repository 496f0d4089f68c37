"""IDEA programs for the simulated processor and the harness that runs them.

The programs are straight-line per block: subkeys are generated once with
the 9/7-bit shift-and-OR recurrence, (for decryption) inverted with ``mui``
and ``adi``, and every block then runs through an unrolled 8.5-round body
inside a single block loop.

Data-memory layout shared by every program::

    0x0000-0x0033  encryption subkeys; words 0..7 are the 128-bit key
    0x0040-0x0073  decryption subkeys (decrypt program only)
    0x0080         number of blocks
    0x0100-0x7fff  input blocks, four words each
    0x8000-0xfeff  output blocks, same slot order as the input
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Tuple

from . import idea_ref, machine
from .assembler import MemoryImage, assemble
from .idea_ref import Block

ENC_BASE = 0x0000
DEC_BASE = 0x0040
COUNT_ADDR = 0x0080
IN_BASE = 0x0100
OUT_BASE = 0x8000
MAX_BLOCKS = (OUT_BASE - IN_BASE) // 4

LOOP_LABEL = "block_loop"
DEFAULT_MAX_CYCLES = 10_000_000

PROGRAM_FILES = {
    "keyschedule": "idea_keyschedule.asm",
    "encrypt": "idea_encrypt.asm",
    "decrypt": "idea_decrypt.asm",
}


class Direction(enum.Enum):
    ENCRYPT = "encrypt"
    DECRYPT = "decrypt"


class IdeaHarnessError(RuntimeError):
    def __init__(self, message: str, trace: str = ""):
        super().__init__(message)
        self.trace = trace


class IdeaMismatchError(IdeaHarnessError):
    pass


@dataclass(frozen=True)
class IdeaJob:
    key: Tuple[int, ...]
    blocks: Tuple[Block, ...]
    direction: Direction = Direction.ENCRYPT

    def __post_init__(self) -> None:
        if len(self.key) != 8:
            raise ValueError("key must have eight 16-bit words")
        if not self.blocks:
            raise ValueError("a job needs at least one block")
        if len(self.blocks) > MAX_BLOCKS:
            raise ValueError(f"{len(self.blocks)} blocks exceed data memory ({MAX_BLOCKS} max)")
        for b in self.blocks:
            if len(b) != 4:
                raise ValueError("blocks must have four 16-bit words")


@dataclass(frozen=True)
class IdeaRunReport:
    outputs: Tuple[Block, ...]
    cycles_first_block: int
    cycles_per_steady_block: int
    total_cycles: int


# ---------------------------------------------------------------------------
# code generation
# ---------------------------------------------------------------------------

def _header(title: str) -> List[str]:
    return [
        f"# {title}",
        "#",
        "# data memory layout",
        f"#   0x{ENC_BASE:04x}-0x{ENC_BASE + 51:04x}  encryption subkeys (0..7 = initial key)",
        f"#   0x{DEC_BASE:04x}-0x{DEC_BASE + 51:04x}  decryption subkeys",
        f"#   0x{COUNT_ADDR:04x}         number of blocks",
        f"#   0x{IN_BASE:04x}-0x{OUT_BASE - 1:04x}  input blocks, 4 words each",
        f"#   0x{OUT_BASE:04x}-0x{OUT_BASE + 4 * MAX_BLOCKS - 1:04x}  output blocks",
        "#",
        "# registers: $1-$4 block words, $5-$6 round temporaries,",
        "# $13-$18 subkeys, $20 input pointer, $23 end pointer",
        "",
    ]


def _key_schedule() -> List[str]:
    """Subkeys 8..51; group g is group g-1 rotated left by 25 bits."""
    lines = ["# --- key schedule: 44 subkeys from the 8 key words ---",
             "keyschedule:"]
    banks = (list(range(1, 9)), list(range(9, 17)))
    for j, r in enumerate(banks[0]):
        lines.append(f"    lw   ${r},0x{ENC_BASE + j:04x}($0)")
    for i in range(8, idea_ref.NUM_SUBKEYS):
        g, j = divmod(i, 8)
        prev, cur = banks[(g - 1) % 2], banks[g % 2]
        if j == 0:
            lines.append(f"    # subkeys {i}..{min(i + 7, 51)}")
        hi, lo, dst = prev[(j + 1) % 8], prev[(j + 2) % 8], cur[j]
        lines += [
            f"    shl  $17,${hi},9",
            f"    shr  $18,${lo},7",
            f"    or   ${dst},$17,$18",
            f"    sw   ${dst},0x{ENC_BASE + i:04x}($0)",
        ]
    return lines


def _invert_schedule() -> List[str]:
    lines = ["# --- decryption subkeys from the encryption subkeys ---",
             "invert:"]

    def enc(rnd: int, pos: int) -> int:
        return ENC_BASE + (rnd - 1) * 6 + pos - 1

    for i in range(1, 10):
        src = 10 - i
        out = DEC_BASE + (i - 1) * 6
        swap = 2 <= i <= 8
        plan = [
            ("mui", enc(src, 1)),
            ("adi", enc(src, 3 if swap else 2)),
            ("adi", enc(src, 2 if swap else 3)),
            ("mui", enc(src, 4)),
        ]
        if i <= 8:
            plan += [(None, enc(9 - i, 5)), (None, enc(9 - i, 6))]
        lines.append(f"    # round {i}")
        for k, (op, addr) in enumerate(plan):
            lines.append(f"    lw   $17,0x{addr:04x}($0)")
            if op == "mui":
                lines.append("    mui  $17,$17")
            elif op == "adi":
                lines.append("    adi  $17,$17")
            lines.append(f"    sw   $17,0x{out + k:04x}($0)")
    return lines


def _cipher_loop(key_base: int) -> List[str]:
    x = [1, 2, 3, 4]
    lines = [
        "# --- block loop ---",
        f"    lwi  $20,0x{IN_BASE:04x}",
        f"    lw   $23,0x{COUNT_ADDR:04x}($0)",
        "    shl  $23,$23,2",
        f"    addi $23,$23,0x{IN_BASE:04x}",
        f"{LOOP_LABEL}:",
    ]
    lines += [f"    lw   ${x[i]},{i}($20)" for i in range(4)]
    for rnd in range(idea_ref.NUM_ROUNDS):
        base = key_base + 6 * rnd
        a, b, c, d = x
        lines.append(f"    # round {rnd + 1}")
        lines += [f"    lw   ${13 + k},0x{base + k:04x}($0)" for k in range(6)]
        lines += [
            f"    mulm ${a},${a},$13",
            f"    addm ${b},${b},$14",
            f"    addm ${c},${c},$15",
            f"    mulm ${d},${d},$16",
            f"    xor  $5,${a},${c}",
            f"    xor  $6,${b},${d}",
            "    mulm $5,$5,$17",
            "    addm $6,$6,$5",
            "    mulm $6,$6,$18",
            "    addm $5,$5,$6",
            f"    xor  ${a},${a},$6",
            f"    xor  ${c},${c},$6",
            f"    xor  ${b},${b},$5",
            f"    xor  ${d},${d},$5",
        ]
        # inner words swap by renaming, no moves needed
        x = [a, c, b, d]
    a, b, c, d = x
    base = key_base + 48
    out_off = OUT_BASE - IN_BASE
    lines.append("    # output transformation")
    lines += [f"    lw   ${13 + k},0x{base + k:04x}($0)" for k in range(4)]
    lines += [
        f"    mulm ${a},${a},$13",
        f"    addm ${c},${c},$14",
        f"    addm ${b},${b},$15",
        f"    mulm ${d},${d},$16",
    ]
    for i, r in enumerate((a, c, b, d)):
        lines.append(f"    sw   ${r},0x{out_off + i:04x}($20)")
    lines += [
        "    addi $20,$20,4",
        f"    bne  $20,$23,{LOOP_LABEL}",
    ]
    return lines


def generate_program(kind: str) -> str:
    """Assembly text for ``keyschedule``, ``encrypt`` or ``decrypt``."""
    if kind == "keyschedule":
        body = _header("IDEA key schedule: 52 encryption subkeys") + _key_schedule()
    elif kind == "encrypt":
        body = _header("IDEA encryption") + _key_schedule() + _cipher_loop(ENC_BASE)
    elif kind == "decrypt":
        body = (_header("IDEA decryption") + _key_schedule() + _invert_schedule()
                + _cipher_loop(DEC_BASE))
    else:
        raise ValueError(f"unknown program {kind!r}")
    return "\n".join(body + ["    halt", ""])


def shipped_program(kind: str) -> str:
    """Text of the program file shipped with the package."""
    return resources.files(__package__).joinpath("programs").joinpath(PROGRAM_FILES[kind]).read_text(
        encoding="utf-8")


@lru_cache(maxsize=None)
def program_image(kind: str) -> MemoryImage:
    return assemble(shipped_program(kind))


def data_image(job: IdeaJob) -> List[int]:
    data = [0] * (IN_BASE + 4 * len(job.blocks))
    data[ENC_BASE:ENC_BASE + 8] = job.key
    data[COUNT_ADDR] = len(job.blocks)
    for n, block in enumerate(job.blocks):
        data[IN_BASE + 4 * n: IN_BASE + 4 * n + 4] = block
    return data


def build_idea_program(job: IdeaJob) -> Tuple[str, Dict[str, int]]:
    """Assembly source for ``job`` and the data-layout descriptor.

    The program text depends only on the direction; the key and blocks go
    into data memory at the addresses in the descriptor.
    """
    layout = {
        "enc_subkeys": ENC_BASE,
        "dec_subkeys": DEC_BASE,
        "block_count": COUNT_ADDR,
        "input": IN_BASE,
        "output": OUT_BASE,
        "blocks": len(job.blocks),
    }
    return shipped_program(job.direction.value), layout


# ---------------------------------------------------------------------------
# harness
# ---------------------------------------------------------------------------

def reference_outputs(job: IdeaJob) -> Tuple[Block, ...]:
    sched = idea_ref.expand_key(job.key)
    if job.direction is Direction.DECRYPT:
        sched = idea_ref.invert_schedule(sched)
    return tuple(idea_ref.crypt_block(b, sched) for b in job.blocks)


def execute_job(job: IdeaJob, max_cycles: int = DEFAULT_MAX_CYCLES
                ) -> Tuple[IdeaRunReport, machine.MachineState]:
    """Run ``job`` on a fresh machine; returns the report and the final state."""
    image = program_image(job.direction.value)
    loop_pc = image.symbols[LOOP_LABEL]
    state = machine.load(image.text, data_image(job))
    arrivals: List[int] = []
    recent: deque = deque(maxlen=64)

    def watch(rec: machine.TraceRecord) -> None:
        recent.append(rec)
        if rec.pc == loop_pc:
            arrivals.append(rec.cycle - 1)

    result = machine.run(state, max_cycles, watch)
    if result.status is not machine.Status.HALTED:
        detail = result.fault or result.status.value
        raise IdeaHarnessError(f"IDEA program did not halt cleanly: {detail}",
                               machine.trace_csv(recent))

    n = len(job.blocks)
    total = result.cycles
    # last iteration runs from its loop-head arrival up to the trailing halt
    steady = total - 1 - arrivals[-1]
    deltas = {b - a for a, b in zip(arrivals, arrivals[1:])}
    if len(arrivals) != n or deltas - {steady}:
        raise IdeaHarnessError(f"irregular block loop: arrivals {arrivals[:8]}...",
                               machine.trace_csv(recent))
    outputs = tuple(
        tuple(state.dmem[OUT_BASE + 4 * i: OUT_BASE + 4 * i + 4]) for i in range(n))
    report = IdeaRunReport(
        outputs=outputs,  # type: ignore[arg-type]
        cycles_first_block=total - (n - 1) * steady,
        cycles_per_steady_block=steady,
        total_cycles=total,
    )
    return report, state


def run_idea(job: IdeaJob, max_cycles: int = DEFAULT_MAX_CYCLES,
             check: bool = True) -> IdeaRunReport:
    """Run ``job`` on the simulator; with ``check`` the outputs must match the reference."""
    report, _ = execute_job(job, max_cycles)
    if check:
        expected = reference_outputs(job)
        if report.outputs != expected:
            bad = next(i for i, (g, e) in enumerate(zip(report.outputs, expected)) if g != e)
            raise IdeaMismatchError(
                f"block {bad}: simulator {report.outputs[bad]} != reference {expected[bad]}")
    return report
