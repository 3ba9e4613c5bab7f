#!/usr/bin/env python3
"""Regenerates the built-in confusable tables in this directory.

The tables are derived once from Python's unicodedata (NFKC / NFD) and a
hand-curated look-alike list, then committed. The Rust side never applies a
normalization form at runtime; it only reads these files.

    python3 crates/core/data/gen_tables.py
"""

import os
import unicodedata

HERE = os.path.dirname(os.path.abspath(__file__))
VERSION = "1"


def printable_ascii(s):
    return len(s) > 0 and all(0x20 <= ord(c) <= 0x7E for c in s)


def nfkc_alnum(cp):
    out = unicodedata.normalize("NFKC", chr(cp))
    if len(out) == 1 and out.isascii() and out.isalnum():
        return out
    return None


def write_table(name, description, rows):
    seen = set()
    path = os.path.join(HERE, f"{name}.tsv")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# @name {name}\n")
        f.write(f"# @version {VERSION}\n")
        f.write(f"# {description}\n")
        f.write("# generated by gen_tables.py; edit the generator, not this file\n")
        for cp, repl in rows:
            assert cp not in seen, hex(cp)
            assert printable_ascii(repl), (hex(cp), repl)
            assert chr(cp) != repl
            seen.add(cp)
            try:
                label = unicodedata.name(chr(cp))
            except ValueError:
                label = "?"
            f.write(f"# {label}\n")
            f.write(f"{cp:04X}\t{repl}\n")
    return seen


def mathematical():
    rows = []
    for cp in range(0x1D400, 0x1D800):
        r = nfkc_alnum(cp)
        if r is not None:
            rows.append((cp, r))
    # Letterlike symbols fill the reserved holes of the styled alphabets.
    for cp in range(0x2100, 0x2150):
        r = nfkc_alnum(cp)
        if r is not None:
            rows.append((cp, r))
    return rows


def fullwidth():
    return [(cp, chr(cp - 0xFEE0)) for cp in range(0xFF01, 0xFF5F)]


def enclosed():
    rows = []
    for cp in range(0x2460, 0x2500):
        out = unicodedata.normalize("NFKC", chr(cp))
        if out != chr(cp) and printable_ascii(out):
            rows.append((cp, out))
    # negative circled numbers have no decomposition
    for i, cp in enumerate(range(0x24EB, 0x24F5)):
        rows.append((cp, str(11 + i)))
    for i, cp in enumerate(range(0x24F5, 0x24FF)):
        rows.append((cp, str(1 + i)))
    rows.append((0x24FF, "0"))
    for cp in range(0x1F100, 0x1F150):
        out = unicodedata.normalize("NFKC", chr(cp))
        if out != chr(cp) and printable_ascii(out):
            rows.append((cp, out))
    for base in (0x1F150, 0x1F170, 0x1F1E6):
        for i in range(26):
            rows.append((base + i, chr(ord("A") + i)))
    done = {cp for cp, _ in rows}
    return [r for r in sorted(rows) if r[0] in done]


CURATED = {
    # Cyrillic
    0x0410: "A", 0x0412: "B", 0x0415: "E", 0x041A: "K", 0x041C: "M",
    0x041D: "H", 0x041E: "O", 0x0420: "P", 0x0421: "C", 0x0422: "T",
    0x0423: "Y", 0x0425: "X", 0x0405: "S", 0x0406: "I", 0x0408: "J",
    0x0430: "a", 0x0435: "e", 0x043E: "o", 0x0440: "p", 0x0441: "c",
    0x0443: "y", 0x0445: "x", 0x0455: "s", 0x0456: "i", 0x0458: "j",
    0x04BB: "h", 0x0501: "d", 0x051B: "q", 0x051D: "w", 0x0432: "b",
    0x043A: "k", 0x043C: "m", 0x043D: "h", 0x0442: "t", 0x044C: "b",
    0x0457: "i", 0x04CF: "l", 0x0491: "r",
    # Greek
    0x0391: "A", 0x0392: "B", 0x0395: "E", 0x0396: "Z", 0x0397: "H",
    0x0399: "I", 0x039A: "K", 0x039C: "M", 0x039D: "N", 0x039F: "O",
    0x03A1: "P", 0x03A4: "T", 0x03A5: "Y", 0x03A7: "X", 0x03B1: "a",
    0x03B5: "e", 0x03B9: "i", 0x03BA: "k", 0x03BD: "v", 0x03BF: "o",
    0x03C1: "p", 0x03C4: "t", 0x03C5: "u", 0x03C7: "x", 0x03F2: "c",
    0x03F3: "j",
    # Armenian
    0x0570: "h", 0x0578: "n", 0x057D: "u", 0x0585: "o", 0x0566: "q",
    # IPA and Latin extensions
    0x0251: "a", 0x0261: "g", 0x0269: "i", 0x026A: "i", 0x0131: "i",
    0x0237: "j", 0x01C0: "l", 0x00F8: "o", 0x00D8: "O", 0x0142: "l",
    0x0141: "L", 0x0111: "d", 0x0110: "D", 0x0127: "h", 0x0126: "H",
    0x0167: "t", 0x0166: "T", 0x00DF: "ss", 0x00E6: "ae", 0x00C6: "AE",
    0x0153: "oe", 0x0152: "OE", 0x00F0: "d", 0x0180: "b", 0x0188: "c",
    # small capitals
    0x1D00: "a", 0x0299: "b", 0x1D04: "c", 0x1D05: "d", 0x1D07: "e",
    0xA730: "f", 0x0262: "g", 0x029C: "h", 0x1D0A: "j", 0x1D0B: "k",
    0x029F: "l", 0x1D0D: "m", 0x0274: "n", 0x1D0F: "o", 0x1D18: "p",
    0x0280: "r", 0xA731: "s", 0x1D1B: "t", 0x1D1C: "u", 0x1D20: "v",
    0x1D21: "w", 0x028F: "y", 0x1D22: "z",
    # ligatures
    0xFB00: "ff", 0xFB01: "fi", 0xFB02: "fl", 0xFB03: "ffi", 0xFB04: "ffl",
    0xFB05: "st", 0xFB06: "st",
}


def lookalike():
    rows = dict(CURATED)
    for lo, hi in ((0x00C0, 0x0250), (0x1E00, 0x1F00)):
        for cp in range(lo, hi):
            if cp in rows:
                continue
            base = unicodedata.normalize("NFD", chr(cp))[0]
            if base != chr(cp) and base.isascii() and base.isalpha():
                rows[cp] = base
    return sorted(rows.items())


def main():
    taken = set()
    for name, desc, rows in (
        ("mathematical", "Mathematical Alphanumeric Symbols and letterlike fillers", mathematical()),
        ("fullwidth", "Fullwidth ASCII variants", fullwidth()),
        ("enclosed", "Enclosed Alphanumerics and supplement", enclosed()),
        ("lookalike", "Accented, Cyrillic, Greek and other look-alike letters", lookalike()),
    ):
        seen = write_table(name, desc, rows)
        assert not (seen & taken), sorted(hex(c) for c in seen & taken)
        taken |= seen
        print(f"{name}: {len(seen)} entries")


if __name__ == "__main__":
    main()
