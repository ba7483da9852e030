"""Writes the SQV1 fixture files used by the unit tests.

Run from this directory: python3 make_vector_fixtures.py
"""
import math
import struct


def sqv(dim, rows, names=None, model=""):
    head = b"SQV1" + struct.pack("<IQ", dim, len(rows))
    payload = b"".join(struct.pack(f"<{dim}f", *r) for r in rows)
    if names is None:
        return head + struct.pack("<Q", 0) + payload
    offset = len(head) + 8 + len(payload)
    table = b"".join(struct.pack("<I", len(s.encode())) + s.encode() for s in [model, *names])
    return head + struct.pack("<Q", offset) + payload + table


def lcg_rows(n, dim, seed=12345):
    state = seed
    rows = []
    for _ in range(n):
        row = []
        for _ in range(dim):
            state = (1103515245 * state + 12345) % (1 << 31)
            row.append(state / (1 << 31) - 0.5)
        norm = math.sqrt(sum(x * x for x in row))
        rows.append([x / norm for x in row])
    return rows


def main():
    files = {
        "two_by_four.sqv": sqv(4, [[1, 2, 3, 4], [0.5, -1, 0, 2]], ["r1", "r2"], "fixture-model"),
        "no_names.sqv": sqv(2, [[1, 0], [0, 1], [0.6, 0.8]]),
        "zero_row.sqv": sqv(3, [[1, 1, 0], [0, 0, 0]], ["a", "b"]),
        "unit_rows.sqv": sqv(8, lcg_rows(16, 8), [f"d{i:02d}" for i in range(16)], "lcg"),
        "bad_magic.sqv": b"SQV2" + sqv(4, [[1, 2, 3, 4]])[4:],
    }
    files["truncated.sqv"] = files["two_by_four.sqv"][: 4 + 4 + 8 + 8 + 5 * 4]
    for name, data in files.items():
        with open(name, "wb") as f:
            f.write(data)


if __name__ == "__main__":
    main()
