"""Two-pass assembler, disassembler and the hex memory-image format.

Source syntax::

    # comment to end of line
    label:  add $3,$1,$2
            lw  $5,3($4)
            beq $1,$2,label          # relative branch, PC+1+offset
            .data                    # switch to the 16-bit data segment
    table:  .word 1, 0x2, -3
            .text                    # back to instructions (the default)

Immediates are decimal (negative allowed, stored two's complement) or
``0x`` hex, in the range -32768..65535. Labels may stand in for any
immediate, offset or address. In ``.text``, ``.word`` emits raw 32-bit
instruction words.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from . import isa
from .isa import BY_MNEMONIC, DecodedInstruction, DecodeError

IMEM_WORDS = 1 << 16
DMEM_WORDS = 1 << 16


class AssemblyError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DisassemblyWarning(UserWarning):
    pass


@dataclass
class MemoryImage:
    text: List[int] = field(default_factory=list)
    data: List[int] = field(default_factory=list)
    symbols: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.text) > IMEM_WORDS:
            raise ValueError(f"instruction image has {len(self.text)} words, limit {IMEM_WORDS}")
        if len(self.data) > DMEM_WORDS:
            raise ValueError(f"data image has {len(self.data)} words, limit {DMEM_WORDS}")


# ---------------------------------------------------------------------------
# hex image files
# ---------------------------------------------------------------------------

def format_hex(words: Iterable[int], width: int = 8) -> str:
    """One ``width``-digit hex word per line; line N holds address N."""
    mask = (1 << (4 * width)) - 1
    lines = []
    for w in words:
        if not 0 <= w <= mask:
            raise ValueError(f"word 0x{w:x} wider than {width} hex digits")
        lines.append(f"{w:0{width}x}")
    return "".join(line + "\n" for line in lines)


def parse_hex(text: str, width: int = 8) -> List[int]:
    words = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if len(line) != width or not re.fullmatch(r"[0-9a-fA-F]+", line):
            raise ValueError(f"line {lineno}: expected {width} hex digits, got {line!r}")
        words.append(int(line, 16))
    return words


# ---------------------------------------------------------------------------
# assembler
# ---------------------------------------------------------------------------

_LABEL = re.compile(r"^\s*([A-Za-z_.][\w.]*)\s*:")
_IDENT = re.compile(r"[A-Za-z_.][\w.]*")
_REG = re.compile(r"\$(\d+)")
_MEM = re.compile(r"^(.*)\(\s*(\$\d+)\s*\)$")


@dataclass
class _Stmt:
    line: int
    section: str
    address: int
    mnemonic: str
    operands: List[str]


def _split_operands(rest: str) -> List[str]:
    rest = rest.strip()
    if not rest:
        return []
    return [op.strip() for op in rest.split(",")]


def _parse_int(text: str) -> Optional[int]:
    if re.fullmatch(r"-?0[xX][0-9a-fA-F]+", text):
        return int(text, 16)
    if re.fullmatch(r"-?\d+", text):
        return int(text, 10)
    return None


def _is_register(text: str) -> bool:
    return _REG.fullmatch(text) is not None


def _resolve_alias(mnemonic: str, operands: List[str]) -> str:
    # "lw $rt,Data" / "sw $rs,Data" (no base register) are the immediate forms
    if mnemonic in ("lw", "sw") and len(operands) == 2 and "(" not in operands[1]:
        return mnemonic + "i"
    # register-form mnemonic written with an immediate last operand
    entry = BY_MNEMONIC.get(mnemonic)
    imm_form = BY_MNEMONIC.get(mnemonic + "i")
    if (entry is not None and imm_form is not None and entry.syntax == ("rd", "rs", "rt")
            and len(operands) == 3 and not _is_register(operands[2])):
        return imm_form.mnemonic
    return mnemonic


class _Pass2:
    def __init__(self, symbols: Dict[str, int]):
        self.symbols = symbols

    def register(self, st: _Stmt, text: str) -> int:
        m = _REG.fullmatch(text)
        if not m:
            raise AssemblyError(st.line, f"expected a register, got {text!r}")
        n = int(m.group(1))
        if n >= isa.NUM_REGISTERS:
            raise AssemblyError(st.line, f"register ${n} does not exist")
        return n

    def value(self, st: _Stmt, text: str) -> int:
        v = _parse_int(text)
        if v is not None:
            return v
        if _IDENT.fullmatch(text):
            if text not in self.symbols:
                raise AssemblyError(st.line, f"undefined label {text!r}")
            return self.symbols[text]
        raise AssemblyError(st.line, f"bad operand {text!r}")

    def imm16(self, st: _Stmt, text: str) -> int:
        v = self.value(st, text)
        if not -0x8000 <= v <= 0xFFFF:
            raise AssemblyError(st.line, f"immediate {v} does not fit in 16 bits")
        return v & 0xFFFF

    def offset(self, st: _Stmt, text: str) -> int:
        v = _parse_int(text)
        if v is None:
            if not _IDENT.fullmatch(text):
                raise AssemblyError(st.line, f"bad branch target {text!r}")
            target = self.value(st, text)
            v = target - (st.address + 1)
            if not -0x8000 <= v <= 0x7FFF:
                raise AssemblyError(st.line, f"branch to {text!r} out of range ({v})")
        elif not -0x8000 <= v <= 0xFFFF:
            raise AssemblyError(st.line, f"offset {v} does not fit in 16 bits")
        return v & 0xFFFF

    def instruction(self, st: _Stmt) -> int:
        entry = BY_MNEMONIC.get(st.mnemonic)
        if entry is None:
            raise AssemblyError(st.line, f"unknown mnemonic {st.mnemonic!r}")
        if len(st.operands) != len(entry.syntax):
            raise AssemblyError(
                st.line, f"{entry.mnemonic} takes {len(entry.syntax)} operand(s), "
                f"got {len(st.operands)}")
        fields: Dict[str, int] = {}
        for kind, text in zip(entry.syntax, st.operands):
            if kind in ("rd", "rs", "rt"):
                fields[kind] = self.register(st, text)
            elif kind == "shamt":
                v = self.value(st, text)
                if not 0 <= v <= 15:
                    raise AssemblyError(st.line, f"shift amount {v} outside 0..15")
                fields["shamt"] = v
            elif kind == "imm":
                fields["imm"] = self.imm16(st, text)
            elif kind == "addr":
                v = self.value(st, text)
                if not 0 <= v <= 0xFFFF:
                    raise AssemblyError(st.line, f"address {v} outside 0..65535")
                fields["imm"] = v
            elif kind == "offset":
                fields["imm"] = self.offset(st, text)
            elif kind == "mem":
                m = _MEM.match(text)
                if not m:
                    raise AssemblyError(st.line, f"expected offset($reg), got {text!r}")
                off = m.group(1).strip()
                fields["imm"] = self.imm16(st, off) if off else 0
                fields["rs"] = self.register(st, m.group(2))
            else:  # pragma: no cover - table and assembler out of sync
                raise AssemblyError(st.line, f"unhandled operand kind {kind}")
        return isa.encode(isa.make(entry.mnemonic, **fields))


def assemble(source: str) -> MemoryImage:
    symbols: Dict[str, int] = {}
    stmts: List[_Stmt] = []
    counters = {"text": 0, "data": 0}
    section = "text"

    # pass 1: addresses and labels
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0]
        while True:
            m = _LABEL.match(line)
            if not m:
                break
            name = m.group(1)
            if name in symbols:
                raise AssemblyError(lineno, f"duplicate label {name!r}")
            symbols[name] = counters[section]
            line = line[m.end():]
        line = line.strip()
        if not line:
            continue
        head, *rest = line.split(None, 1)
        mnemonic = head.lower()
        operands = _split_operands(rest[0] if rest else "")
        if mnemonic in (".text", ".data"):
            if operands:
                raise AssemblyError(lineno, f"{mnemonic} takes no operands")
            section = mnemonic[1:]
            continue
        if mnemonic == ".word":
            if not operands:
                raise AssemblyError(lineno, ".word needs at least one value")
            stmts.append(_Stmt(lineno, section, counters[section], mnemonic, operands))
            counters[section] += len(operands)
            continue
        if mnemonic.startswith("."):
            raise AssemblyError(lineno, f"unknown directive {mnemonic!r}")
        if section != "text":
            raise AssemblyError(lineno, "instructions are only allowed in .text")
        mnemonic = _resolve_alias(mnemonic, operands)
        stmts.append(_Stmt(lineno, section, counters["text"], mnemonic, operands))
        counters["text"] += 1

    if counters["text"] > IMEM_WORDS:
        raise AssemblyError(0, f"program needs {counters['text']} words, limit {IMEM_WORDS}")
    if counters["data"] > DMEM_WORDS:
        raise AssemblyError(0, f"data needs {counters['data']} words, limit {DMEM_WORDS}")

    # pass 2: encoding
    enc = _Pass2(symbols)
    text: List[int] = []
    data: List[int] = []
    for st in stmts:
        if st.mnemonic == ".word":
            for op in st.operands:
                v = enc.value(st, op)
                if st.section == "data":
                    if not -0x8000 <= v <= 0xFFFF:
                        raise AssemblyError(st.line, f"data word {v} does not fit in 16 bits")
                    data.append(v & 0xFFFF)
                else:
                    if not 0 <= v <= 0xFFFFFFFF:
                        raise AssemblyError(st.line, f"word {v} does not fit in 32 bits")
                    text.append(v)
        else:
            text.append(enc.instruction(st))
    return MemoryImage(text, data, symbols)


# ---------------------------------------------------------------------------
# disassembler
# ---------------------------------------------------------------------------

def format_instruction(d: DecodedInstruction) -> str:
    """Canonical text: lower-case mnemonic, ``$n`` registers, ``0xNNNN`` immediates."""
    entry = d.entry
    parts = []
    for kind in entry.syntax:
        if kind in ("rd", "rs", "rt"):
            parts.append(f"${getattr(d, kind)}")
        elif kind == "shamt":
            parts.append(str(d.shamt))
        elif kind == "mem":
            parts.append(f"0x{d.imm:04x}(${d.rs})")
        else:
            parts.append(f"0x{d.imm:04x}")
    if not parts:
        return entry.mnemonic
    return f"{entry.mnemonic} {','.join(parts)}"


def _canonical(d: DecodedInstruction) -> DecodedInstruction:
    """Keep only the fields the mnemonic's syntax actually uses."""
    used = set()
    for kind in d.entry.syntax:
        if kind == "mem":
            used.update(("imm", "rs"))
        elif kind in ("offset", "addr"):
            used.add("imm")
        else:
            used.add(kind)
    fields = {k: getattr(d, k) for k in ("rs", "rt", "rd", "shamt", "imm") if k in used}
    return isa.make(d.mnemonic, **fields)


def disassemble_word(word: int) -> Tuple[str, bool]:
    """Return ``(text, ok)``; ``ok`` is False when the word falls back to ``.word``."""
    try:
        d = isa.decode(word)
    except DecodeError:
        return f".word 0x{word:08x}", False
    # unused fields set, or a shift the assembler would reject
    if _canonical(d) != d or d.shamt > 15:
        return f".word 0x{word:08x}", False
    return format_instruction(d), True


def disassemble(image: MemoryImage) -> str:
    lines = []
    for addr, word in enumerate(image.text):
        text, ok = disassemble_word(word)
        if not ok:
            warnings.warn(f"address {addr}: 0x{word:08x} is not a canonical instruction",
                          DisassemblyWarning, stacklevel=2)
        lines.append(text)
    if image.data:
        lines.append(".data")
        lines.extend(f".word 0x{w:04x}" for w in image.data)
    return "".join(line + "\n" for line in lines)
