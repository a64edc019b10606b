#!/usr/bin/env python3
"""Writes tests/data/alp_golden.txt: reference frames built with struct and binascii.

Each vector is a comment line with the frame fields followed by one line of
space-separated hex bytes. The CRC comes from binascii.crc_hqx, which is
CRC-16/CCITT with a caller-supplied initial value (0xFFFF gives CCITT-FALSE).
"""

import binascii
import pathlib
import struct

READ, WRITE, RETURN = 0, 1, 2


def frame(origin, counter, op, file, offset, payload):
    head = struct.pack("<BQHBBHH", 1, origin, counter, op, file, offset, len(payload))
    body = head + payload
    return body + struct.pack("<H", binascii.crc_hqx(body, 0xFFFF))


def record(t, kind, value_scaled, mv):
    return struct.pack("<IBiH", t, kind, value_scaled, mv)


def config(kind, interval, bits):
    return struct.pack("<BIB", kind, interval, bits)


VECTORS = [
    ("read_sensor", 1, 0, READ, 0x40, 0, b""),
    ("read_config_offset", 0x1000, 513, READ, 0x41, 2, b""),
    ("report_soil", 1, 1, RETURN, 0x40, 0, record(0, 1, 1000, 3600)),
    ("report_negative", 0x1100, 0xFFFF, RETURN, 0x40, 0, record(86400, 2, -543, 3580)),
    ("report_weather", 0x0123456789ABCDEF, 0x1234, RETURN, 0x40, 0, record(0xFFFFFFFF, 3, 2147483647, 4000)),
    ("write_config", 0x1000, 7, WRITE, 0x41, 0, config(1, 900, 12)),
    ("write_config_slow", 0x2001, 8, WRITE, 0x41, 0, config(2, 1800, 9)),
    ("return_config_tail", 0x1200, 42, RETURN, 0x41, 1, config(1, 900, 12)[1:]),
    ("max_payload", 0xFFFFFFFFFFFFFFFF, 65535, RETURN, 0x40, 65535, bytes((i * 7) & 0xFF for i in range(239))),
]


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "alp_golden.txt"
    lines = ["# crc_check 313233343536373839 29b1"]
    first = frame(*VECTORS[0][1:])
    lines.append(f"# crc_header {first[:17].hex()} {binascii.crc_hqx(first[:17], 0xFFFF):04x}")
    for name, origin, counter, op, file, offset, payload in VECTORS:
        lines.append(
            f"# {name} origin={origin:#x} counter={counter} op={op} file={file:#x} offset={offset} payload={payload.hex()}")
        lines.append(" ".join(f"{b:02x}" for b in frame(origin, counter, op, file, offset, payload)))
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
