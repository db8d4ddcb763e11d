from __future__ import annotations

from typing import Iterator

import numpy as np

from .autodiff import Parameter

EMBEDDING_RANGE = 0.1


class ParamStore:
    """Named, ordered collection of parameters drawn from one seeded stream.

    Parameters are initialized in creation order, so the same sequence of
    ``add_*`` calls with the same seed always yields identical values.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self._params: dict[str, Parameter] = {}

    def _register(self, name: str, value: np.ndarray) -> Parameter:
        if name in self._params:
            raise KeyError(f"duplicate parameter name {name!r}")
        p = Parameter(name, value)
        self._params[name] = p
        return p

    def add_matrix(self, name: str, rows: int, cols: int) -> Parameter:
        """Glorot-uniform weight matrix."""
        if rows <= 0 or cols <= 0:
            raise ValueError(f"{name}: dimensions must be positive, got {(rows, cols)}")
        bound = np.sqrt(6.0 / (rows + cols))
        return self._register(name, self.rng.uniform(-bound, bound, size=(rows, cols)))

    def add_bias(self, name: str, size: int, fill: float = 0.0) -> Parameter:
        if size <= 0:
            raise ValueError(f"{name}: size must be positive, got {size}")
        return self._register(name, np.full(size, fill, dtype=np.float64))

    def add_embedding(self, name: str, rows: int, dim: int) -> Parameter:
        if rows <= 0 or dim <= 0:
            raise ValueError(f"{name}: dimensions must be positive, got {(rows, dim)}")
        return self._register(name, self.rng.uniform(-EMBEDDING_RANGE, EMBEDDING_RANGE, size=(rows, dim)))

    def add_vector(self, name: str, size: int) -> Parameter:
        """Small-uniform learned vector (padding slots and the like)."""
        return self._register(name, self.rng.uniform(-EMBEDDING_RANGE, EMBEDDING_RANGE, size=size))

    def add_value(self, name: str, value) -> Parameter:
        return self._register(name, np.array(value, dtype=np.float64))

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.value.copy() for name, p in self._params.items()}

    def restore(self, values: dict[str, np.ndarray]) -> None:
        for name, v in values.items():
            p = self._params[name]
            if p.value.shape != v.shape:
                raise ValueError(f"{name}: shape {v.shape} does not match {p.value.shape}")
            p.value[...] = v

    def equals(self, other: "ParamStore") -> bool:
        """Bitwise equality of names, shapes and values."""
        if self.names() != other.names():
            return False
        return all(
            a.value.shape == b.value.shape and a.value.tobytes() == b.value.tobytes()
            for a, b in zip(self, other)
        )


def init_parameters(dims: dict[str, tuple[int, ...]], seed: int) -> ParamStore:
    """Build a store from a name -> shape map.

    Two-dimensional shapes become Glorot matrices (embedding tables if the
    name starts with ``emb``), one-dimensional shapes become zero biases.
    """
    store = ParamStore(seed)
    for name, shape in dims.items():
        if len(shape) == 2 and name.startswith("emb"):
            store.add_embedding(name, *shape)
        elif len(shape) == 2:
            store.add_matrix(name, *shape)
        elif len(shape) == 1:
            store.add_bias(name, shape[0])
        else:
            raise ValueError(f"{name}: unsupported rank {len(shape)}")
    return store
