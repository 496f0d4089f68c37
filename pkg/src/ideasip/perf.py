"""Analytical throughput and runtime model for single- vs multi-cycle processors."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence, Tuple

BLOCK_BITS = 64


@dataclass(frozen=True)
class ProcessorProfile:
    name: str
    clock_period_ns: float
    cycles_first_block: int
    cycles_steady_block: int

    def __post_init__(self) -> None:
        if self.clock_period_ns <= 0:
            raise ValueError("clock period must be positive")
        if self.cycles_first_block <= 0 or self.cycles_steady_block <= 0:
            raise ValueError("cycle counts must be positive")

    @property
    def clock_freq_mhz(self) -> float:
        return 1000.0 / self.clock_period_ns

    def runtime_ns(self, n_blocks: int) -> float:
        return (self.cycles_first_block + (n_blocks - 1) * self.cycles_steady_block) \
            * self.clock_period_ns


# Published constants for the single-cycle design and the earlier
# accumulator-based multi-cycle design it is compared against.
PROPOSED = ProcessorProfile("proposed", 51.911, 422, 221)
PREVIOUS = ProcessorProfile("previous", 14.795, 800, 763)

# Table values used for the throughput figures (MHz, steady-state cycles)
PUBLISHED_THROUGHPUT = {
    "proposed": (19.264, 221, 5.578),
    "previous": (67.590, 763, 5.669),
}


def throughput_mbps(n_bits: int, clock_freq_mhz: float, cycles: int) -> float:
    """Processed bits times clock frequency over clock cycles, in Mbit/s."""
    if cycles <= 0:
        raise ValueError("cycles must be positive")
    # MHz in, Mbit/s out: the 10**6 factors cancel
    return n_bits * clock_freq_mhz / cycles


def runtime_curve(profile: ProcessorProfile, n_blocks: int) -> List[Tuple[int, float]]:
    if n_blocks < 1:
        raise ValueError("n_blocks must be at least 1")
    return [(n, profile.runtime_ns(n)) for n in range(1, n_blocks + 1)]


def steady_state_gap(a: ProcessorProfile, b: ProcessorProfile) -> float:
    """Relative difference of per-block steady-state runtimes, ``|a-b| / min(a,b)``."""
    ta = a.cycles_steady_block * a.clock_period_ns
    tb = b.cycles_steady_block * b.clock_period_ns
    return abs(ta - tb) / min(ta, tb)


def fig10_csv(n_blocks: int, profiles: Sequence[ProcessorProfile] = (PROPOSED, PREVIOUS)) -> str:
    """CSV with a ``blocks`` column and one ``<name>_ns`` runtime column per profile."""
    curves = [runtime_curve(p, n_blocks) for p in profiles]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["blocks"] + [f"{p.name}_ns" for p in profiles])
    for i in range(n_blocks):
        w.writerow([i + 1] + [f"{c[i][1]:.3f}" for c in curves])
    return buf.getvalue()


def bench_lines() -> List[str]:
    lines = []
    for name, (mhz, cycles, published) in PUBLISHED_THROUGHPUT.items():
        tp = throughput_mbps(BLOCK_BITS, mhz, cycles)
        lines.append(f"{name}: {BLOCK_BITS} bits x {mhz:.3f} MHz / {cycles} cycles = "
                     f"{tp:.4f} Mbps (published {published:.3f})")
    gap = steady_state_gap(PROPOSED, PREVIOUS)
    lines.append(f"steady-state block runtime: proposed "
                 f"{PROPOSED.cycles_steady_block * PROPOSED.clock_period_ns:.1f} ns, previous "
                 f"{PREVIOUS.cycles_steady_block * PREVIOUS.clock_period_ns:.1f} ns "
                 f"(gap {100 * gap:.2f}%)")
    return lines
