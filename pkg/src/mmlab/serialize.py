"""JSON/CSV schemas for tensors, algorithms, counts, and bit matrices.

Canonical form: dicts with sorted keys, entry lists sorted lexicographically,
scalars rendered through Field.show ("3/7", "12 mod 101",
"[2,0,1] mod 5 / x^3+x+1").  dumps(loads(s)) == s on canonical documents.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .bilinear import BilinearAlgorithm, CountedMatrix
from .errors import SchemaError
from .fields import Field, field_from_descriptor
from .kron_eval import OpCount
from .sparse_f2 import BitMatrix
from .tensors import MatMulShape, Tensor


def _need(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    return doc[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return value


def field_of(doc: dict, where: str, default: Field | None = None) -> Field:
    """Field named by the document's "field" key, else the supplied default."""
    if "field" not in doc:
        if default is None:
            raise SchemaError(f"{where}: missing key 'field'")
        return default
    try:
        return field_from_descriptor(doc["field"])
    except (ValueError, TypeError, IndexError) as exc:
        raise SchemaError(f"{where}: bad field descriptor: {exc}") from exc


# --- tensors ---------------------------------------------------------------


def tensor_to_dict(t: Tensor) -> dict:
    doc = {
        "dims": list(t.dims),
        "field": t.field.descriptor,
        "entries": [[i, j, k, t.field.show(v)]
                    for (i, j, k), v in sorted(t.entries.items())],
    }
    if t.shape is not None:
        doc["shape"] = list(t.shape)
    return doc


def tensor_from_dict(doc: dict, field: Field | None = None) -> Tensor:
    f = field_of(doc, "tensor", field)
    dims = _need(doc, "dims", "tensor")
    if not (isinstance(dims, list) and len(dims) == 3):
        raise SchemaError("tensor.dims: expected a 3-element list")
    entries = {}
    for pos, item in enumerate(_need(doc, "entries", "tensor")):
        where = f"tensor.entries[{pos}]"
        if not (isinstance(item, list) and len(item) == 4):
            raise SchemaError(f"{where}: expected [i, j, k, coeff]")
        i, j, k = (_int(v, where) for v in item[:3])
        try:
            entries[(i, j, k)] = f.parse(str(item[3]))
        except (ValueError, ArithmeticError) as exc:
            raise SchemaError(f"{where}: bad coefficient {item[3]!r}: {exc}") from exc
    shape = MatMulShape(*doc["shape"]) if "shape" in doc else None
    return Tensor(tuple(_int(d, "tensor.dims") for d in dims), f, entries,
                  shape=shape)


# --- counted matrices and bilinear algorithms ------------------------------


def matrix_to_dict(m: CountedMatrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[r, c, m.field.show(v)]
                    for (r, c), v in sorted(m.entries.items())],
    }


def matrix_from_dict(doc: dict, field: Field, where: str = "matrix") -> CountedMatrix:
    rows = _int(_need(doc, "rows", where), f"{where}.rows")
    cols = _int(_need(doc, "cols", where), f"{where}.cols")
    entries = {}
    for pos, item in enumerate(_need(doc, "entries", where)):
        spot = f"{where}.entries[{pos}]"
        if not (isinstance(item, list) and len(item) == 3):
            raise SchemaError(f"{spot}: expected [row, col, coeff]")
        r, c = _int(item[0], spot), _int(item[1], spot)
        try:
            entries[(r, c)] = field.parse(str(item[2]))
        except (ValueError, ArithmeticError) as exc:
            raise SchemaError(f"{spot}: bad coefficient {item[2]!r}: {exc}") from exc
    return CountedMatrix(rows, cols, field, entries)


def algorithm_to_dict(b: BilinearAlgorithm) -> dict:
    doc = {
        "field": b.field.descriptor,
        "rank": b.rank,
        "enc_x": matrix_to_dict(b.enc_x),
        "enc_y": matrix_to_dict(b.enc_y),
        "dec_z": matrix_to_dict(b.dec_z),
    }
    if b.shape is not None:
        doc["shape"] = list(b.shape)
    return doc


def algorithm_from_dict(doc: dict, field: Field | None = None) -> BilinearAlgorithm:
    f = field_of(doc, "algorithm", field)
    algo = BilinearAlgorithm(
        matrix_from_dict(_need(doc, "enc_x", "algorithm"), f, "algorithm.enc_x"),
        matrix_from_dict(_need(doc, "enc_y", "algorithm"), f, "algorithm.enc_y"),
        matrix_from_dict(_need(doc, "dec_z", "algorithm"), f, "algorithm.dec_z"),
        shape=MatMulShape(*doc["shape"]) if "shape" in doc else None,
    )
    if "rank" in doc and _int(doc["rank"], "algorithm.rank") != algo.rank:
        raise SchemaError(
            f"algorithm.rank: declared {doc['rank']}, matrices have {algo.rank}")
    return algo


# --- operation counts -------------------------------------------------------


def opcount_to_dict(c: OpCount) -> dict:
    return {"adds": c.additions, "mults": c.multiplications,
            "prods": c.elementwise_products}


def opcount_from_dict(doc: dict) -> OpCount:
    return OpCount(_int(_need(doc, "adds", "opcount"), "opcount.adds"),
                   _int(_need(doc, "mults", "opcount"), "opcount.mults"),
                   _int(_need(doc, "prods", "opcount"), "opcount.prods"))


# --- bit matrices -----------------------------------------------------------


def bitmatrix_to_dict(m: BitMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "data": m.to_lists()}


def bitmatrix_from_dict(doc: dict) -> BitMatrix:
    data = _need(doc, "data", "bitmatrix")
    if not (isinstance(data, list) and data):
        raise SchemaError("bitmatrix.data: expected a nonempty list of rows")
    try:
        m = BitMatrix.from_lists(data)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"bitmatrix.data: {exc}") from exc
    declared = (doc.get("rows", m.rows), doc.get("cols", m.cols))
    if declared != (m.rows, m.cols):
        raise SchemaError(
            f"bitmatrix: declared dims {declared}, data is {m.rows}x{m.cols}")
    return m


def bitmatrix_from_text(text: str) -> BitMatrix:
    """Dense 0/1 text: one row per line, characters 0 and 1."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if set(line) - {"0", "1"}:
            raise SchemaError(f"line {lineno}: expected only 0/1 characters")
        rows.append([int(ch) for ch in line])
    if not rows:
        raise SchemaError("empty 0/1 matrix text")
    if len({len(r) for r in rows}) != 1:
        raise SchemaError("0/1 matrix rows have unequal lengths")
    return BitMatrix.from_lists(rows)


def bitmatrix_to_text(m: BitMatrix) -> str:
    return "\n".join("".join(str(v) for v in row) for row in m.to_lists()) + "\n"


# --- dense scalar matrices (engine inputs) ----------------------------------


def dense_to_csv(mat: list, field: Field) -> str:
    return "\n".join(",".join(field.show(v) for v in row) for row in mat) + "\n"


def dense_from_csv(text: str, field: Field) -> list:
    out = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row = []
        for cell in line.split(","):
            try:
                row.append(field.parse(cell.strip()))
            except (ValueError, ArithmeticError) as exc:
                raise SchemaError(f"line {lineno}: bad scalar {cell!r}: {exc}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"line {lineno}: expected {width} columns, got {len(row)}")
        out.append(row)
    if not out:
        raise SchemaError("empty matrix CSV")
    return out


# --- canonical text ---------------------------------------------------------


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def show_number(v) -> str:
    """CSV cell format: exact values verbatim, floats to 6 significant digits."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
