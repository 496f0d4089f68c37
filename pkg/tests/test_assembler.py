import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from ideasip import isa
from ideasip.assembler import (
    AssemblyError, DisassemblyWarning, MemoryImage, assemble, disassemble, format_hex,
    format_instruction, parse_hex,
)

from oracles import random_fields, random_program

# one accepted and one rejected line per instruction-set row
CORPUS = {
    "and": ("and $1,$2,$3", "and $1,$2"),
    "andi": ("andi $1,$2,0xff", "andi $1,$2,0x10000"),
    "nand": ("nand $1,$2,$3", "nand $1,$2,$33"),
    "nandi": ("nandi $1,$2,-1", "nandi $1,$2,-32769"),
    "or": ("or $1,$2,$3", "or 1,$2,$3"),
    "ori": ("ori $1,$2,7", "ori $1,7"),
    "nor": ("nor $1,$2,$3", "nor $1,$2,$3,$4"),
    "nori": ("nori $1,$2,7", "nori $1,$2,$3"),
    "xor": ("xor $1,$2,$3", "xor $1,$2,"),
    "xori": ("xori $1,$2,0x8000", "xori $1,$2,nowhere"),
    "xnor": ("xnor $1,$2,$3", "xnor $1"),
    "xnori": ("xnori $31,$0,65535", "xnori $32,$0,1"),
    "inv": ("inv $1,$2", "inv $1,$2,$3"),
    "invi": ("invi $1,0x00ff", "invi $1,$2,3"),
    "shl": ("shl $1,$2,15", "shl $1,$2,16"),
    "shr": ("shr $1,$2,0", "shr $1,$2,-1"),
    "ashl": ("ashl $1,$2,3", "ashl $1,$2"),
    "ashr": ("ashr $1,$2,3", "ashr $1,3,$2"),
    "rol": ("rol $1,$2,9", "rol $1,$2,$3"),
    "ror": ("ror $1,$2,7", "ror $1,$2,99"),
    "beq": ("x: beq $1,$2,x", "beq $1,$2,missing"),
    "bne": ("bne $1,$2,-1", "bne $1,$2"),
    "j": ("j 0x0010", "j -1"),
    "jr": ("jr $31", "jr 5"),
    "jal": ("jal $31,0x0100", "jal 0x0100"),
    "lw": ("lw $5,3($4)", "lw $5,3($4"),
    "lwi": ("lwi $5,0xbeef", "lwi $5,$4"),
    "sw": ("sw $5,-1($4)", "sw $5,($40)"),
    "swi": ("swi $5,0x1234", "swi 5,0x1234"),
    "add": ("add $3,$1,$2", "add $3,$1,$2,$4"),
    "addi": ("addi $3,$1,-5", "addi $3,$1,70000"),
    "sub": ("sub $3,$1,$2", "sub $3"),
    "subi": ("subi $3,$1,1", "subi $3,$1"),
    "mul": ("mul $3,$1,$2", "mul $3,$1,$2,$5"),
    "muli": ("muli $3,$1,2", "muli $3,2"),
    "div": ("div $3,$1,$2", "div $3"),
    "divi": ("divi $3,$1,3", "divi $3,$1,0x1ffff"),
    "mod": ("mod $3,$1,$2", "mod $3,$1"),
    "modi": ("modi $3,$1,3", "modi $3,3"),
    "inc": ("inc $1,$2", "inc $1"),
    "dec": ("dec $1,$2", "dec $1,$2,$3"),
    "slt": ("slt $7,$0,$1", "slt $7,$0"),
    "slti": ("slti $7,$0,-2", "slti $7,-2"),
    "addm": ("addm $1,$2,$3", "addm $1,$2"),
    "mulm": ("mulm $1,$2,$3", "mulm $1,$2"),
    "adi": ("adi $1,$2", "adi $1"),
    "mui": ("mui $1,$2", "mui $1,$2,$3"),
    "halt": ("halt", "halt $1"),
}


def test_corpus_covers_every_mnemonic():
    assert set(CORPUS) == set(isa.BY_MNEMONIC)


@pytest.mark.parametrize("mnemonic", sorted(CORPUS))
def test_corpus(mnemonic):
    good, bad = CORPUS[mnemonic]
    img = assemble(good)
    assert isa.decode(img.text[0]).mnemonic == mnemonic
    with pytest.raises(AssemblyError):
        assemble(bad)


class TestAssemble:
    def test_add(self):
        assert assemble("add $3,$1,$2").text == [0x0022180D]

    def test_halt(self):
        assert assemble("halt").text == [0x00000019]

    def test_backward_branch_offset(self):
        src = "\n".join(["halt"] * 5) + "\nloop: beq $1,$2,loop\n"
        word = assemble(src).text[5]
        assert word & 0xFFFF == 0xFFFF

    def test_forward_branch_and_jump_labels(self):
        img = assemble("beq $1,$2,end\nj end\nhalt\nend: halt\n")
        assert img.text[0] & 0xFFFF == 2
        assert img.text[1] & 0xFFFF == 3
        assert img.symbols["end"] == 3

    def test_branch_register_order(self):
        d = isa.decode(assemble("beq $1,$2,0").text[0])
        assert (d.rt, d.rs) == (1, 2)

    def test_comments_case_and_whitespace(self):
        img = assemble("  # header\n\tADD\t$3, $1, $2   # trailing\n\n")
        assert img.text == [0x0022180D]

    def test_short_immediate_load_forms(self):
        assert assemble("lw $1,0x0005").text == assemble("lwi $1,0x0005").text
        assert assemble("sw $2,7").text == assemble("swi $2,7").text

    def test_data_segment_and_labels(self):
        img = assemble(".data\nval: .word 1, 0x2, -3\nnext: .word 9\n.text\nlw $1,next($0)\n")
        assert img.data == [1, 2, 0xFFFD, 9]
        assert img.text == assemble("lw $1,3($0)").text

    def test_text_word_directive(self):
        assert assemble(".word 0xfc000000\nhalt").text == [0xFC000000, 0x19]

    def test_mem_without_offset(self):
        assert assemble("lw $1,($2)").text == assemble("lw $1,0($2)").text

    @pytest.mark.parametrize("src, needle", [
        ("a: halt\na: halt", "duplicate label"),
        ("frob $1", "unknown mnemonic"),
        ("beq $1,$2,far\n" + ".word 0\n" * 40000 + "far: halt", "out of range"),
        ("shl $1,$2,20", "shift amount"),
        (".data\nadd $1,$2,$3", "only allowed in .text"),
        (".bss", "unknown directive"),
        (".data\n.word 70000", "16 bits"),
        ("\n\nj nowhere", "undefined label"),
    ])
    def test_errors_report_line(self, src, needle):
        with pytest.raises(AssemblyError) as exc:
            assemble(src)
        assert needle in str(exc.value)
        assert exc.value.line >= 1

    def test_error_line_number(self):
        with pytest.raises(AssemblyError) as exc:
            assemble("halt\n\nadd $1\n")
        assert exc.value.line == 3


class TestDisassemble:
    def test_add(self):
        assert disassemble(MemoryImage([0x0022180D])) == "add $3,$1,$2\n"

    def test_undefined_word(self):
        with pytest.warns(DisassemblyWarning):
            assert disassemble(MemoryImage([0xFC000000])) == ".word 0xfc000000\n"

    def test_nonzero_unused_fields_fall_back(self):
        word = 0x0022180D | (3 << 6)  # add with a shamt
        with pytest.warns(DisassemblyWarning):
            text = disassemble(MemoryImage([word]))
        assert assemble(text).text == [word]

    def test_canonical_forms(self):
        src = ("lw $5,0x0003($4)\nbeq $2,$1,0xffff\nshl $3,$2,9\njal $31,0x0010\n"
               "jr $31\nswi $2,0x0007\nmui $1,$2\nadi $1,$2\nhalt\n")
        assert disassemble(assemble(src)) == src

    def test_data_segment(self):
        img = MemoryImage([0x19], [0xBEEF, 1])
        text = disassemble(img)
        assert text == "halt\n.data\n.word 0xbeef\n.word 0x0001\n"
        assert assemble(text).data == img.data

    def test_round_trip_random_programs(self):
        rng = random.Random(9)
        for _ in range(50):
            src = random_program(rng, rng.randrange(1, 60))
            img = assemble(src)
            again = assemble(disassemble(img))
            assert again.text == img.text

    def test_canonical_source_round_trip(self):
        rng = random.Random(10)
        lines = []
        for _ in range(500):
            e = rng.choice(isa.OPCODE_TABLE)
            lines.append(format_instruction(isa.make(e.mnemonic, **random_fields(e, rng))))
        src = "\n".join(lines) + "\n"
        assert disassemble(assemble(src)) == src

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 0xFFFFFFFF), min_size=1, max_size=20))
    def test_any_image_round_trips(self, words):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DisassemblyWarning)
            text = disassemble(MemoryImage(words))
        assert assemble(text).text == words


class TestHexFormat:
    def test_round_trip(self):
        words = [0x0022180D, 0x19, 0xFFFFFFFF]
        text = format_hex(words)
        assert text == "0022180d\n00000019\nffffffff\n"
        assert parse_hex(text) == words

    def test_comments_and_blank_lines(self):
        assert parse_hex("# program\n00000019  # halt\n\n", 8) == [0x19]

    def test_data_width(self):
        assert format_hex([0xBEEF, 1], 4) == "beef\n0001\n"
        assert parse_hex("beef\n0001\n", 4) == [0xBEEF, 1]

    @pytest.mark.parametrize("text", ["19\n", "0000001g\n", "000000190\n"])
    def test_bad_lines(self, text):
        with pytest.raises(ValueError):
            parse_hex(text)

    def test_too_wide(self):
        with pytest.raises(ValueError):
            format_hex([0x10000], 4)

    def test_image_size_limit(self):
        with pytest.raises(ValueError):
            MemoryImage([0] * 65537)
