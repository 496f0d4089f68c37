"""Command-line front end.

Exit codes: 0 success, 1 user error, 2 machine fault, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import List, Optional, Sequence

from . import idea_ref, machine, perf
from .assembler import AssemblyError, MemoryImage, assemble, disassemble, format_hex, parse_hex
from .idea_programs import Direction, IdeaHarnessError, IdeaJob, execute_job

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAULT = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_images(text_path: str, data_path: Optional[str]) -> MemoryImage:
    try:
        text = parse_hex(_read_text(text_path), 8)
        data = parse_hex(_read_text(data_path), 4) if data_path else []
        return MemoryImage(text, data)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_hex_words(text: str, n_words: int, what: str) -> List[int]:
    text = text.strip().lower().removeprefix("0x")
    digits = 4 * n_words
    if len(text) != digits or any(c not in "0123456789abcdefABCDEF" for c in text):
        raise UsageError(f"{what} must be {digits} hex digits")
    return [int(text[i:i + 4], 16) for i in range(0, digits, 4)]


def _parse_blocks(text: str) -> List[tuple]:
    text = text.strip()
    if not text or len(text) % 16:
        raise UsageError("blocks must be a non-empty run of 16-hex-digit groups")
    return [tuple(_parse_hex_words(text[i:i + 16], 4, "block")) for i in range(0, len(text), 16)]


def _fmt_blocks(blocks) -> str:
    return "".join("".join(f"{w:04X}" for w in b) for b in blocks)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_assemble(args) -> int:
    try:
        image = assemble(_read_text(args.source))
    except AssemblyError as exc:
        raise UsageError(f"{args.source}: {exc}") from None
    out = Path(args.output)
    out.write_text(format_hex(image.text, 8), encoding="utf-8")
    if image.data:
        data_out = Path(args.data_output) if args.data_output else out.with_suffix(".data.hex")
        data_out.write_text(format_hex(image.data, 4), encoding="utf-8")
        print(f"{len(image.text)} instruction words -> {out}, "
              f"{len(image.data)} data words -> {data_out}")
    else:
        print(f"{len(image.text)} instruction words -> {out}")
    return EXIT_OK


def cmd_disassemble(args) -> int:
    image = _load_images(args.image, args.data)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sys.stdout.write(disassemble(image))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def _report_run(result: machine.RunResult) -> int:
    print(f"cycles: {result.cycles}")
    print(f"status: {result.status.value}")
    if result.fault is not None:
        print(f"fault: {result.fault.kind.value} at pc=0x{result.fault.pc:04x}: "
              f"{result.fault.message}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def cmd_run(args) -> int:
    image = _load_images(args.image, args.data)
    state = machine.load(image.text, image.data)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            result = machine.run(state, args.max_cycles, machine.TraceWriter(fh))
    else:
        result = machine.run(state, args.max_cycles)
    code = _report_run(result)
    if args.dump_regs:
        for i in range(0, 32, 8):
            print(" ".join(f"${r:<2}={state.regs[r]:04x}" for r in range(i, i + 8)))
    return code


def cmd_trace(args) -> int:
    image = _load_images(args.image, args.data)
    state = machine.load(image.text, image.data)
    result = machine.run(state, args.max_cycles, machine.TraceWriter(sys.stdout))
    if result.fault is not None:
        print(f"fault: {result.fault.kind.value} at pc=0x{result.fault.pc:04x}: "
              f"{result.fault.message}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def cmd_idea(args) -> int:
    key = _parse_hex_words(args.key, 8, "key")
    blocks = _parse_blocks(args.input)
    direction = Direction.ENCRYPT if args.direction == "enc" else Direction.DECRYPT
    try:
        job = IdeaJob(tuple(key), tuple(blocks), direction)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    oracle = sim = None
    if args.mode in ("oracle", "both"):
        sched = idea_ref.expand_key(key)
        if direction is Direction.DECRYPT:
            sched = idea_ref.invert_schedule(sched)
        oracle = [idea_ref.crypt_block(b, sched) for b in blocks]
    if args.mode in ("simulator", "both"):
        try:
            report, _ = execute_job(job, args.max_cycles)
        except IdeaHarnessError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAULT
        sim = list(report.outputs)
        print(f"cycles: first block {report.cycles_first_block}, steady block "
              f"{report.cycles_per_steady_block}, total {report.total_cycles}", file=sys.stderr)

    if oracle is not None and sim is not None and oracle != sim:
        print(f"mismatch: simulator {_fmt_blocks(sim)} != reference {_fmt_blocks(oracle)}",
              file=sys.stderr)
        return EXIT_MISMATCH
    print(_fmt_blocks(sim if sim is not None else oracle))
    return EXIT_OK


def cmd_keyschedule(args) -> int:
    key = _parse_hex_words(args.key, 8, "key")
    sched = idea_ref.expand_key(key)
    if args.invert:
        sched = idea_ref.invert_schedule(sched)
    for r in range(9):
        words = sched.keys[6 * r: 6 * r + 6]
        print(f"round {r + 1}: " + " ".join(f"{w:04X}" for w in words))
    return EXIT_OK


def cmd_bench(args) -> int:
    for line in perf.bench_lines():
        print(line)
    if args.measure:
        job = IdeaJob(tuple(range(1, 9)), ((0, 1, 2, 3), (0, 1, 2, 3)))
        report, _ = execute_job(job)
        print(f"simulator program: first block {report.cycles_first_block} cycles "
              f"(published {perf.PROPOSED.cycles_first_block}), steady block "
              f"{report.cycles_per_steady_block} cycles "
              f"(published {perf.PROPOSED.cycles_steady_block})")
    return EXIT_OK


def cmd_fig10(args) -> int:
    if args.blocks < 1:
        raise UsageError("--blocks must be at least 1")
    text = perf.fig10_csv(args.blocks)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ideasip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("assemble", help="assemble source to a hex memory image")
    s.add_argument("source")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--data-output", help="data image path (default OUT.data.hex)")
    s.set_defaults(func=cmd_assemble)

    s = sub.add_parser("disassemble", help="print canonical assembly for a hex image")
    s.add_argument("image")
    s.add_argument("--data")
    s.set_defaults(func=cmd_disassemble)

    for name, func, hlp in (("run", cmd_run, "run an image and print the cycle count"),
                            ("trace", cmd_trace, "run an image and print the trace CSV")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("image")
        s.add_argument("--data")
        s.add_argument("--max-cycles", type=int, default=1_000_000)
        if name == "run":
            s.add_argument("--trace", help="write the trace CSV here")
            s.add_argument("--dump-regs", action="store_true")
        s.set_defaults(func=func)

    s = sub.add_parser("idea", help="encrypt or decrypt blocks")
    s.add_argument("--key", required=True, help="32 hex digits, most significant word first")
    s.add_argument("--in", dest="input", required=True, help="16 hex digits per block")
    s.add_argument("--direction", choices=("enc", "dec"), required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--on-simulator", dest="mode", action="store_const", const="simulator")
    mode.add_argument("--oracle", dest="mode", action="store_const", const="oracle")
    mode.add_argument("--both", dest="mode", action="store_const", const="both")
    s.add_argument("--max-cycles", type=int, default=10_000_000)
    s.set_defaults(func=cmd_idea, mode="both")

    s = sub.add_parser("keyschedule", help="print the 52 subkeys")
    s.add_argument("--key", required=True)
    s.add_argument("--invert", action="store_true", help="decryption subkeys")
    s.set_defaults(func=cmd_keyschedule)

    s = sub.add_parser("bench", help="throughput and runtime figures")
    s.add_argument("--measure", action="store_true",
                   help="also report cycle counts of the shipped simulator program")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("fig10", help="runtime-vs-blocks CSV for both processors")
    s.add_argument("--blocks", type=int, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_fig10)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
