"""Dense float64 tensors, named parameter collections, and their disk format.

Checkpoint format (version tag ``NKP1``), UTF-8 text, one tensor per line:

    NKP1 <n_tensors>
    <name> <ndim> <dim0> ... <dimN-1> <v0> <v1> ... (row-major)

Floats are serialized with 17 significant digits, which round-trips IEEE-754
doubles exactly, so write -> read is bit-identical.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

FORMAT_TAG = "NKP1"


def format_float(x: float) -> str:
    """Serialize a float64 losslessly (17 significant digits)."""
    return format(float(x), ".17g")


class Tensor:
    """A dense, row-major float64 array whose entries are always finite."""

    __slots__ = ("array",)

    def __init__(self, array) -> None:
        arr = np.ascontiguousarray(array, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite (no NaN/Inf)")
        self.array = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the entries."""
        return self.array.reshape(-1)

    @classmethod
    def zeros(cls, shape) -> "Tensor":
        return cls(np.zeros(shape, dtype=np.float64))

    @classmethod
    def from_flat(cls, shape, values) -> "Tensor":
        shape = tuple(int(d) for d in shape)
        flat = np.asarray(values, dtype=np.float64)
        if flat.ndim != 1 or flat.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(
                f"flat data of length {flat.size} does not fill shape {shape}"
            )
        return cls(flat.reshape(shape))

    def copy(self) -> "Tensor":
        return Tensor(self.array.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"


class ParamSet:
    """Ordered, named tensors (weights and biases) for one network."""

    __slots__ = ("_names", "_tensors")

    def __init__(self, items: Iterable[tuple[str, Tensor]]) -> None:
        self._names: list[str] = []
        self._tensors: dict[str, Tensor] = {}
        for name, tensor in items:
            if not name or any(ch.isspace() for ch in name):
                raise ValueError(f"invalid parameter name {name!r}")
            if name in self._tensors:
                raise ValueError(f"duplicate parameter name {name!r}")
            if not isinstance(tensor, Tensor):
                tensor = Tensor(tensor)
            self._names.append(name)
            self._tensors[name] = tensor

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[tuple[str, Tensor]]:
        for name in self._names:
            yield name, self._tensors[name]

    def __len__(self) -> int:
        return len(self._names)

    def copy(self) -> "ParamSet":
        return ParamSet((n, t.copy()) for n, t in self)

    def zeros_like(self) -> "ParamSet":
        return ParamSet((n, Tensor.zeros(t.shape)) for n, t in self)

    def same_shapes(self, other: "ParamSet") -> bool:
        return self.names == other.names and all(
            self[n].shape == other[n].shape for n in self.names
        )

    def equal(self, other: "ParamSet") -> bool:
        """Bitwise equality of names, shapes, and entries."""
        return self.same_shapes(other) and all(
            np.array_equal(self[n].array, other[n].array) for n in self.names
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}{list(t.shape)}" for n, t in self)
        return f"ParamSet({inner})"


def encode_params(params: ParamSet) -> str:
    """Render a ParamSet in the NKP1 checkpoint format."""
    lines = [f"{FORMAT_TAG} {len(params)}"]
    for name, tensor in params:
        dims = " ".join(str(d) for d in tensor.shape)
        values = " ".join(format_float(v) for v in tensor.data)
        ndim = len(tensor.shape)
        line = f"{name} {ndim}"
        if dims:
            line += f" {dims}"
        if values:
            line += f" {values}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def decode_params(text: str, *, offset: int = 0) -> ParamSet:
    """Parse the NKP1 format; ``offset`` shifts line numbers in diagnostics."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty parameter record")
    header = lines[0].split()
    if len(header) != 2 or header[0] != FORMAT_TAG:
        raise ValueError(f"line {offset + 1}: expected '{FORMAT_TAG} <count>' header")
    count = int(header[1])
    if len(lines) != count + 1:
        raise ValueError(
            f"parameter record declares {count} tensors but has {len(lines) - 1} lines"
        )
    items = []
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        lineno = offset + i
        if len(tokens) < 2:
            raise ValueError(f"line {lineno}: truncated tensor record")
        name = tokens[0]
        try:
            ndim = int(tokens[1])
            dims = [int(t) for t in tokens[2 : 2 + ndim]]
            values = [float(t) for t in tokens[2 + ndim :]]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed tensor record: {exc}") from exc
        if len(dims) != ndim:
            raise ValueError(f"line {lineno}: expected {ndim} dimensions")
        expected = int(np.prod(dims, dtype=np.int64)) if dims else 1
        if len(values) != expected:
            raise ValueError(
                f"line {lineno}: tensor '{name}' expects {expected} values, got {len(values)}"
            )
        items.append((name, Tensor.from_flat(dims, values)))
    return ParamSet(items)


def write_params(params: ParamSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(encode_params(params))


def read_params(path) -> ParamSet:
    with open(path, "r", encoding="utf-8") as f:
        return decode_params(f.read())
