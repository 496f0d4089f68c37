"""Software reference implementation of the IDEA block cipher.

Everything here works on 16-bit words held in plain ints. A block is a
tuple of four words (most significant quarter first), a key is a tuple of
eight words, and a subkey schedule is a :class:`SubkeySchedule` of 52 words.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

MASK16 = 0xFFFF
MOD_ADD = 0x10000
MOD_MUL = 0x10001

NUM_ROUNDS = 8
NUM_SUBKEYS = 52

Block = Tuple[int, int, int, int]
InitialKey = Tuple[int, int, int, int, int, int, int, int]


def to_signed(word: int) -> int:
    """Reinterpret a 16-bit pattern as a two's-complement integer."""
    word &= MASK16
    return word - 0x10000 if word & 0x8000 else word


def check_word(word: int) -> int:
    if not 0 <= word <= MASK16:
        raise ValueError(f"not a 16-bit word: {word!r}")
    return word


def add_mod(a: int, b: int) -> int:
    return (a + b) & MASK16


def add_inv(k: int) -> int:
    return (MOD_ADD - k) & MASK16


def mul_mod(a: int, b: int) -> int:
    # the all-zero word stands for 2**16
    a = a or MOD_ADD
    b = b or MOD_ADD
    r = (a * b) % MOD_MUL
    return 0 if r == MOD_ADD else r


def _egcd_inverse(k: int) -> int:
    """Inverse of ``k`` modulo 65537 by the extended Euclidean algorithm."""
    a, m = k, MOD_MUL
    x0, x1 = 1, 0
    while m:
        q = a // m
        a, m = m, a - q * m
        x0, x1 = x1, x0 - q * x1
    if a != 1:
        raise ArithmeticError(f"{k} has no inverse modulo {MOD_MUL}")
    return x0 % MOD_MUL


def _build_inverse_table() -> Tuple[int, ...]:
    table = []
    for k in range(MOD_ADD):
        inv = _egcd_inverse(k or MOD_ADD)
        table.append(0 if inv == MOD_ADD else inv)
    return tuple(table)


# Read-only lookup table, the software twin of the ALSU's inverse LUT.
MUL_INV_TABLE: Tuple[int, ...] = _build_inverse_table()


def mul_inv(k: int) -> int:
    return MUL_INV_TABLE[k & MASK16]


@dataclass(frozen=True)
class SubkeySchedule:
    """52 subkeys; ``subkey(i, j)`` addresses round ``i`` (1..9), slot ``j`` (1..6)."""

    keys: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.keys) != NUM_SUBKEYS:
            raise ValueError(f"schedule needs {NUM_SUBKEYS} keys, got {len(self.keys)}")
        for k in self.keys:
            check_word(k)

    def subkey(self, round_: int, pos: int) -> int:
        if not 1 <= round_ <= 9:
            raise IndexError(f"round {round_} out of range 1..9")
        limit = 4 if round_ == 9 else 6
        if not 1 <= pos <= limit:
            raise IndexError(f"position {pos} out of range 1..{limit} for round {round_}")
        return self.keys[(round_ - 1) * 6 + pos - 1]

    def __len__(self) -> int:
        return NUM_SUBKEYS

    def __iter__(self):
        return iter(self.keys)


def _check_key(key: Sequence[int]) -> InitialKey:
    if len(key) != 8:
        raise ValueError(f"initial key needs 8 words, got {len(key)}")
    return tuple(check_word(w) for w in key)  # type: ignore[return-value]


def _check_block(block: Sequence[int]) -> Block:
    if len(block) != 4:
        raise ValueError(f"block needs 4 words, got {len(block)}")
    return tuple(check_word(w) for w in block)  # type: ignore[return-value]


def expand_key(key: Sequence[int]) -> SubkeySchedule:
    """Derive the 52 encryption subkeys with the 16-bit shift/OR recurrence.

    Each group of eight words is the previous group rotated left by 25 bits,
    so word ``j`` of a group combines words ``j+1`` and ``j+2`` (mod 8) of the
    group before it.
    """
    keys = list(_check_key(key))
    for i in range(8, NUM_SUBKEYS):
        base = (i // 8 - 1) * 8
        hi = keys[base + (i + 1) % 8]
        lo = keys[base + (i + 2) % 8]
        keys.append(((hi << 9) | (lo >> 7)) & MASK16)
    return SubkeySchedule(tuple(keys))


def invert_schedule(enc: SubkeySchedule) -> SubkeySchedule:
    """Decryption subkeys from encryption subkeys."""
    out = []
    for i in range(1, 10):
        src = 10 - i
        out.append(mul_inv(enc.subkey(src, 1)))
        if i in (1, 9):
            out.append(add_inv(enc.subkey(src, 2)))
            out.append(add_inv(enc.subkey(src, 3)))
        else:
            out.append(add_inv(enc.subkey(src, 3)))
            out.append(add_inv(enc.subkey(src, 2)))
        out.append(mul_inv(enc.subkey(src, 4)))
        if i <= 8:
            out.append(enc.subkey(9 - i, 5))
            out.append(enc.subkey(9 - i, 6))
    return SubkeySchedule(tuple(out))


def idea_round(x: Block, k: Sequence[int]) -> Block:
    """One full round with keys ``k[0..5]``; the inner words come out swapped."""
    x0, x1, x2, x3 = x
    a = mul_mod(x0, k[0])
    b = add_mod(x1, k[1])
    c = add_mod(x2, k[2])
    d = mul_mod(x3, k[3])
    g = mul_mod(a ^ c, k[4])
    h = mul_mod(add_mod(b ^ d, g), k[5])
    i2 = add_mod(g, h)
    return (a ^ h, c ^ h, b ^ i2, d ^ i2)


def output_transform(x: Block, k: Sequence[int]) -> Block:
    x0, x1, x2, x3 = x
    # undo the swap left behind by the last full round
    return (mul_mod(x0, k[0]), add_mod(x2, k[1]), add_mod(x1, k[2]), mul_mod(x3, k[3]))


def crypt_block(block: Sequence[int], schedule: SubkeySchedule) -> Block:
    x = _check_block(block)
    keys = schedule.keys
    for r in range(NUM_ROUNDS):
        x = idea_round(x, keys[6 * r: 6 * r + 6])
    return output_transform(x, keys[48:52])


def encrypt_block(block: Sequence[int], schedule: SubkeySchedule) -> Block:
    return crypt_block(block, schedule)


def decrypt_block(block: Sequence[int], schedule: SubkeySchedule) -> Block:
    """Same datapath as encryption; ``schedule`` must come from :func:`invert_schedule`."""
    return crypt_block(block, schedule)


def block_from_int(value: int) -> Block:
    return tuple((value >> (48 - 16 * i)) & MASK16 for i in range(4))  # type: ignore[return-value]


def block_to_int(block: Sequence[int]) -> int:
    out = 0
    for w in block:
        out = (out << 16) | w
    return out


def key_from_int(value: int) -> InitialKey:
    return tuple((value >> (112 - 16 * i)) & MASK16 for i in range(8))  # type: ignore[return-value]


def blocks_from_bytes(data: bytes) -> list:
    """Big-endian split of ``data`` (length a multiple of 8) into blocks."""
    if len(data) % 8:
        raise ValueError("data length must be a multiple of 8 bytes")
    return [block_from_int(int.from_bytes(data[i:i + 8], "big")) for i in range(0, len(data), 8)]


def blocks_to_bytes(blocks: Sequence[Sequence[int]]) -> bytes:
    return b"".join(block_to_int(b).to_bytes(8, "big") for b in blocks)
