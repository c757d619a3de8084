"""Versioned JSON formats for problems, tensors and reports.

All files are written in a canonical form (sorted keys, two-space indent,
field elements as strings) so that ``dump(parse(text)) == text`` for any
canonical ``text``. Positions are 1-based.

Problem file::

    {"version": "rankbridge/1", "kind": "problem", "field": "rational",
     "shape": [3, 3],
     "entries": [{"pos": [1, 1], "value": "2"}, ...],
     "unknowns": [[1, 2], [1, 3], ...]}

``unknowns`` may be replaced by ``generators``: a list of pure tensors, each
a list of factor vectors. In that mode positions not listed in ``entries``
are zero in the base tensor.

Tensor file::

    {"version": "rankbridge/1", "kind": "tensor", "field": "gf:2",
     "shape": [2, 2, 3], "values": ["0", "1", ...], "slots": {...}}
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field as dc_field
from math import prod

import numpy as np

from .completion import AffineTensorSpace, PartialMatrix, to_affine_space
from .errors import RankBridgeError, ValidationError
from .fields import FieldSpec
from .tensor import CPDecomposition, DenseTensor, PureTensor

FORMAT_VERSION = "rankbridge/1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rankbridge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(source) -> dict:
    if isinstance(source, dict):
        return source
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError("top-level JSON value must be an object")
    return data


def _require(data: dict, key: str, where: str = ""):
    if key not in data:
        raise ValidationError(f"{where}missing key {key!r}")
    return data[key]


def _check_version(data: dict, kind: str):
    version = _require(data, "version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"version: unsupported format version {version!r} (expected {FORMAT_VERSION!r})")
    if data.get("kind", kind) != kind:
        raise ValidationError(f"kind: expected {kind!r}, got {data.get('kind')!r}")


def _parse_shape(raw) -> tuple:
    if not isinstance(raw, list) or not raw or not all(isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in raw):
        raise ValidationError(f"shape: expected a nonempty list of positive integers, got {raw!r}")
    return tuple(raw)


def _parse_value(field: FieldSpec, raw, where: str):
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise ValidationError(f"{where}: values must be strings, got {raw!r}")
    try:
        return field.scalar(str(raw))
    except (ValueError, ZeroDivisionError, RankBridgeError) as exc:
        raise ValidationError(f"{where}: cannot parse {raw!r} in {field}: {exc}") from None


def _parse_position(raw, shape, where: str) -> tuple:
    if not isinstance(raw, list) or len(raw) != len(shape) or not all(isinstance(i, int) and not isinstance(i, bool) for i in raw):
        raise ValidationError(f"{where}: expected a list of {len(shape)} integers, got {raw!r}")
    for axis, (i, m) in enumerate(zip(raw, shape)):
        if not 1 <= i <= m:
            raise ValidationError(f"{where}[{axis}]: index {i} out of range 1..{m}")
    return tuple(raw)


@dataclass
class ProblemFile:
    field: FieldSpec
    shape: tuple
    entries: list  # [(pos, value)]
    unknowns: list | None = None
    generators: list | None = None  # per generator, one list of values per factor
    version: str = FORMAT_VERSION
    raw_values: dict = dc_field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = {
            "version": self.version,
            "kind": "problem",
            "field": str(self.field),
            "shape": list(self.shape),
            "entries": [{"pos": list(pos), "value": self.field.format(self.field.scalar(v))} for pos, v in self.entries],
        }
        if self.generators is not None:
            out["generators"] = [
                [[self.field.format(self.field.scalar(x)) for x in factor] for factor in g] for g in self.generators
            ]
        else:
            out["unknowns"] = [list(pos) for pos in self.unknowns]
        return out

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    def with_field(self, field: FieldSpec) -> "ProblemFile":
        """Re-read every value in another field (e.g. cast a rational problem to the reals)."""
        return parse_problem(_recast(self, field))

    def to_partial_matrix(self) -> PartialMatrix:
        if self.generators is not None:
            raise ValidationError("problem uses explicit generators; it has no unknown positions")
        return PartialMatrix(self.shape, dict(self.entries), self.unknowns, self.field)

    def to_space(self) -> AffineTensorSpace:
        if self.generators is None:
            return to_affine_space(self.to_partial_matrix())
        base = self.field.zeros(self.shape)
        for pos, v in self.entries:
            base[tuple(i - 1 for i in pos)] = self.field.scalar(v)
        gens = [PureTensor([self.field.array(list(f)) for f in g], self.field) for g in self.generators]
        return AffineTensorSpace(DenseTensor(base, self.field), gens)


def _recast(pf: ProblemFile, field: FieldSpec) -> dict:
    raw = pf.raw_values
    out = {
        "version": pf.version,
        "kind": "problem",
        "field": str(field),
        "shape": list(pf.shape),
        "entries": [{"pos": list(pos), "value": raw.get(("entry", i), str(v))} for i, (pos, v) in enumerate(pf.entries)],
    }
    if pf.generators is not None:
        out["generators"] = [
            [[raw.get(("gen", g, f, x), str(val)) for x, val in enumerate(factor)] for f, factor in enumerate(gen)]
            for g, gen in enumerate(pf.generators)
        ]
    else:
        out["unknowns"] = [list(p) for p in pf.unknowns]
    return out


def parse_problem(source) -> ProblemFile:
    """Parse and validate a problem file (JSON text or an already-decoded dict)."""
    data = _load(source)
    _check_version(data, "problem")
    try:
        field = FieldSpec.parse(str(_require(data, "field")))
    except ValidationError as exc:
        raise ValidationError(f"field: {exc}") from None
    shape = _parse_shape(_require(data, "shape"))
    raw_entries = _require(data, "entries")
    if not isinstance(raw_entries, list):
        raise ValidationError("entries: expected a list")
    entries, raw_values, seen = [], {}, set()
    for i, e in enumerate(raw_entries):
        where = f"entries[{i}]"
        if not isinstance(e, dict):
            raise ValidationError(f"{where}: expected an object with 'pos' and 'value'")
        pos = _parse_position(_require(e, "pos", where + ": "), shape, where + ".pos")
        if pos in seen:
            raise ValidationError(f"{where}.pos: position {list(pos)} listed twice")
        seen.add(pos)
        value = _parse_value(field, _require(e, "value", where + ": "), where + ".value")
        raw_values[("entry", i)] = str(e["value"])
        entries.append((pos, value))

    has_u, has_g = "unknowns" in data, "generators" in data
    if has_u == has_g:
        raise ValidationError("exactly one of 'unknowns' and 'generators' must be present")
    unknowns = generators = None
    if has_u:
        raw_u = data["unknowns"]
        if not isinstance(raw_u, list):
            raise ValidationError("unknowns: expected a list of positions")
        unknowns = []
        for i, p in enumerate(raw_u):
            pos = _parse_position(p, shape, f"unknowns[{i}]")
            if pos in seen:
                raise ValidationError(f"unknowns[{i}]: position {list(pos)} is already known or listed")
            seen.add(pos)
            unknowns.append(pos)
        missing = prod(shape) - len(seen)
        if missing:
            raise ValidationError(f"{missing} positions are neither in 'entries' nor in 'unknowns'")
    else:
        raw_g = data["generators"]
        if not isinstance(raw_g, list):
            raise ValidationError("generators: expected a list of pure tensors")
        generators = []
        for g, gen in enumerate(raw_g):
            where = f"generators[{g}]"
            if not isinstance(gen, list) or len(gen) != len(shape):
                raise ValidationError(f"{where}: expected {len(shape)} factor vectors")
            factors = []
            for f, factor in enumerate(gen):
                if not isinstance(factor, list) or len(factor) != shape[f]:
                    raise ValidationError(f"{where}[{f}]: expected a vector of length {shape[f]}")
                vec = []
                for x, val in enumerate(factor):
                    vec.append(_parse_value(field, val, f"{where}[{f}][{x}]"))
                    raw_values[("gen", g, f, x)] = str(val)
                factors.append(vec)
            generators.append(factors)
    return ProblemFile(field, shape, entries, unknowns, generators, FORMAT_VERSION, raw_values)


def problem_from_partial(P: PartialMatrix) -> ProblemFile:
    entries = sorted(P.known.items())
    return ProblemFile(P.field, P.shape, entries, list(P.unknowns))


def problem_from_space(S: AffineTensorSpace) -> ProblemFile:
    """Generator-mode problem for an arbitrary affine space (zero base entries omitted)."""
    field = S.field
    entries = [
        (tuple(i + 1 for i in idx), v) for idx, v in np.ndenumerate(S.base.data) if not field.is_zero(v)
    ]
    gens = [[list(f) for f in g.factors] for g in S.generators]
    return ProblemFile(field, S.shape, entries, None, gens)


# -- tensors -----------------------------------------------------------------------------


def tensor_to_dict(T: DenseTensor, slots: dict | None = None) -> dict:
    out = {
        "version": FORMAT_VERSION,
        "kind": "tensor",
        "field": str(T.field),
        "shape": list(T.shape),
        "values": [T.field.format(v) for v in T.entries],
    }
    if slots:
        out["slots"] = slots
    return out


def dump_tensor(T: DenseTensor, slots: dict | None = None) -> str:
    return canonical_json(tensor_to_dict(T, slots))


def parse_tensor(source, field: FieldSpec | None = None):
    """Parse a tensor file. Returns ``(DenseTensor, slots)``; ``field`` overrides the file's field."""
    data = _load(source)
    _check_version(data, "tensor")
    if field is None:
        try:
            field = FieldSpec.parse(str(_require(data, "field")))
        except ValidationError as exc:
            raise ValidationError(f"field: {exc}") from None
    shape = _parse_shape(_require(data, "shape"))
    values = _require(data, "values")
    if not isinstance(values, list) or len(values) != prod(shape):
        raise ValidationError(f"values: expected {prod(shape)} row-major entries for shape {list(shape)}")
    parsed = [_parse_value(field, v, f"values[{i}]") for i, v in enumerate(values)]
    arr = np.empty(len(parsed), dtype=object)
    arr[:] = parsed
    return DenseTensor(arr, field, shape=shape), data.get("slots", {})


def decomposition_to_list(dec: CPDecomposition) -> list:
    f = dec.field
    return [[[f.format(x) for x in factor] for factor in t.factors] for t in dec.terms]


def decomposition_from_list(raw, shape, field: FieldSpec) -> CPDecomposition:
    terms = [PureTensor([[field.scalar(str(x)) for x in factor] for factor in t], field) for t in raw]
    return CPDecomposition(shape, field, terms)
