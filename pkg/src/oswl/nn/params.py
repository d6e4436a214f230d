"""Named float64 parameters with paired gradient buffers, a flat binary
checkpoint format, and a plain Adam optimizer.

Parameters are partitioned into two disjoint groups, "upstream" (the model
producing sampling scores) and "downstream" (the model consuming sampled
subgraphs), so the two optimizers never touch each other's weights.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import GuardError

GROUPS = ("upstream", "downstream")

_MAGIC = b"OSWL-NN-CKPT-1\n"


class ParamStore:
    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.group_of: dict[str, str] = {}

    def register(self, name: str, value: np.ndarray, group: str) -> np.ndarray:
        if group not in GROUPS:
            raise GuardError(f"unknown parameter group {group!r}")
        if name in self.params:
            raise GuardError(f"duplicate parameter name {name!r}")
        arr = np.asarray(value, dtype=np.float64)
        self.params[name] = arr
        self.grads[name] = np.zeros_like(arr)
        self.group_of[name] = group
        return arr

    def names(self, group: str | None = None) -> list[str]:
        if group is None:
            return sorted(self.params)
        return sorted(n for n, g in self.group_of.items() if g == group)

    def add_grad(self, name: str, grad: np.ndarray) -> None:
        buf = self.grads[name]
        if grad.shape != buf.shape:
            raise GuardError(
                f"gradient shape {grad.shape} does not match {name} {buf.shape}"
            )
        buf += grad

    def zero_grads(self, group: str | None = None) -> None:
        for name in self.names(group):
            self.grads[name].fill(0.0)

    def save(self, path) -> None:
        """Write all tensors as a flat binary checkpoint.

        Layout: magic line, then a little-endian u32 tensor count, then per
        tensor: u16 name length + utf-8 name, u8 group (0 upstream,
        1 downstream), u8 ndim, u32 per dimension, float64 data row-major.
        """
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", len(self.params)))
            for name in self.names():
                arr = self.params[name]
                raw = name.encode("utf-8")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
                fh.write(struct.pack("<BB", GROUPS.index(self.group_of[name]), arr.ndim))
                fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
                fh.write(arr.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "ParamStore":
        store = cls()
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                raise GuardError(f"{path} is not a checkpoint file")
            (count,) = struct.unpack("<I", fh.read(4))
            for _ in range(count):
                (name_len,) = struct.unpack("<H", fh.read(2))
                name = fh.read(name_len).decode("utf-8")
                group_idx, ndim = struct.unpack("<BB", fh.read(2))
                shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                data = np.frombuffer(
                    fh.read(8 * int(np.prod(shape, dtype=np.int64))), dtype="<f8"
                )
                store.register(name, data.reshape(shape).copy(), GROUPS[group_idx])
        return store


class Adam:
    """Adam over one parameter group; default moments, no weight decay."""

    def __init__(
        self,
        store: ParamStore,
        group: str,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        prefix: str | None = None,
    ):
        if group not in GROUPS:
            raise GuardError(f"unknown parameter group {group!r}")
        self.store = store
        self.group = group
        self.prefix = prefix
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {n: np.zeros_like(store.params[n]) for n in self._names()}
        self.v = {n: np.zeros_like(store.params[n]) for n in self._names()}

    def _names(self) -> list[str]:
        """Parameters this optimizer owns; `prefix` narrows the group."""
        names = self.store.names(self.group)
        if self.prefix is not None:
            names = [n for n in names if n.startswith(self.prefix)]
        return names

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name in self._names():
            g = self.store.grads[name]
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1**self.t)
            v_hat = self.v[name] / (1 - b2**self.t)
            self.store.params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
