"""Minimal MatrixMarket reader/writer for real dense use.

Supports array and coordinate formats with real/integer fields and
general/symmetric/skew-symmetric storage.  Errors carry the offending
line number.  Complex files are rejected: the pencil matrices are real
by definition.
"""

import numpy as np

from .errors import NonRealEntries, ParseError


def read_matrix(path):
    """Read one real matrix from a MatrixMarket file as a dense array."""
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file", path=path, line=1)
    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket" or header[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix ...' header", path=path, line=1)
    layout, field, symmetry = (tok.lower() for tok in header[2:])
    if field == "complex":
        raise NonRealEntries(f"{path}: complex field not supported")
    if field not in ("real", "integer"):
        raise ParseError(f"unsupported field {field!r}", path=path, line=1)
    if layout not in ("array", "coordinate"):
        raise ParseError(f"unsupported layout {layout!r}", path=path, line=1)
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", path=path, line=1)

    body = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines)
        if i > 0 and ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError("missing size line", path=path, line=len(lines))
    size_no, size_line = body[0]
    entries = body[1:]

    def parse_ints(tokens, lineno, count):
        if len(tokens) != count:
            raise ParseError(f"expected {count} integers", path=path, line=lineno)
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise ParseError(f"bad integer in {tokens}", path=path, line=lineno) from None

    if layout == "array":
        rows, cols = parse_ints(size_line.split(), size_no, 2)
        if symmetry != "general" and rows != cols:
            raise ParseError("symmetric array must be square", path=path, line=size_no)
        want = rows * cols if symmetry == "general" else rows * (rows + 1) // 2
        if symmetry == "skew-symmetric":
            want = rows * (rows - 1) // 2
        if len(entries) != want:
            raise ParseError(
                f"expected {want} value lines, found {len(entries)}",
                path=path, line=entries[-1][0] if entries else size_no,
            )
        vals = []
        for lineno, text in entries:
            try:
                vals.append(float(text.split()[0]))
            except (ValueError, IndexError):
                raise ParseError(f"bad value {text!r}", path=path, line=lineno) from None
        a = np.zeros((rows, cols))
        it = iter(vals)
        if symmetry == "general":
            for j in range(cols):          # column-major storage
                for i in range(rows):
                    a[i, j] = next(it)
        else:
            start = (lambda j: j) if symmetry == "symmetric" else (lambda j: j + 1)
            for j in range(cols):
                for i in range(start(j), rows):
                    v = next(it)
                    a[i, j] = v
                    a[j, i] = v if symmetry == "symmetric" else -v
        return a

    rows, cols, nnz = parse_ints(size_line.split(), size_no, 3)
    if len(entries) != nnz:
        raise ParseError(
            f"expected {nnz} entries, found {len(entries)}",
            path=path, line=entries[-1][0] if entries else size_no,
        )
    a = np.zeros((rows, cols))
    for lineno, text in entries:
        tokens = text.split()
        if len(tokens) != 3:
            raise ParseError("expected 'i j value'", path=path, line=lineno)
        i, j = parse_ints(tokens[:2], lineno, 2)
        try:
            v = float(tokens[2])
        except ValueError:
            raise ParseError(f"bad value {tokens[2]!r}", path=path, line=lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"index ({i}, {j}) out of range", path=path, line=lineno)
        a[i - 1, j - 1] = v
        if symmetry == "symmetric" and i != j:
            a[j - 1, i - 1] = v
        elif symmetry == "skew-symmetric" and i != j:
            a[j - 1, i - 1] = -v
    return a


def write_matrix(path, a):
    """Write a real matrix in MatrixMarket array format (full precision)."""
    a = np.asarray(a, dtype=float)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for j in range(a.shape[1]):
            for i in range(a.shape[0]):
                fh.write(f"{a[i, j]:.17g}\n")
