# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

"""
Minimal reverse-mode differentiation over numpy arrays.

A `GradientTape` records every operation applied to the `Variable` objects it watches as a
Wengert list. Walking the list backwards accumulates adjoints and yields the exact gradient
of a scalar with respect to every watched parameter.

The module level functions (`exp`, `log`, `matmul`, ...) accept either plain numpy values
or `Variable` objects. With plain inputs they return plain numpy results, so the same model
code serves both the traced training path and the untraced inference path.

Examples:
    >>> tape = GradientTape()
    >>> x = tape.watch(np.array([1.0, 2.0]), "x")
    >>> loss = sum(x * x)
    >>> tape.gradient(loss, {"x": x})["x"]
    array([2., 4.])
"""

from __future__ import annotations

from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

VectorJacobian = Callable[[np.ndarray], np.ndarray]
ArrayLike = Union[np.ndarray, float, "Variable"]


class Variable:
    """
    A value tracked by a `GradientTape`.

    Variables are created by `GradientTape.watch()` (parameters) or by applying an operation
    to another variable. They support the arithmetic operators, `@`, indexing and `.T`.
    """

    # Make numpy defer binary operators such as `ndarray * Variable` to this class.
    __array_ufunc__ = None

    def __init__(
        self,
        value: np.ndarray,
        tape: GradientTape,
        parents: Sequence[Tuple[Variable, VectorJacobian]] = (),
        name: Optional[str] = None,
    ):
        self.value = np.asarray(value, dtype=float)
        self.tape = tape
        self.parents = tuple(parents)
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def T(self) -> Union[Variable, np.ndarray]:
        return transpose(self)

    def __len__(self) -> int:
        return len(self.value)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return subtract(self, other)

    def __rsub__(self, other):
        return subtract(other, self)

    def __mul__(self, other):
        return multiply(self, other)

    def __rmul__(self, other):
        return multiply(other, self)

    def __truediv__(self, other):
        return divide(self, other)

    def __rtruediv__(self, other):
        return divide(other, self)

    def __neg__(self):
        return multiply(self, -1.0)

    def __pow__(self, exponent: float):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return take(self, index)

    def __repr__(self) -> str:
        return f"Variable('name': {self.name}, 'shape': {self.shape})"


class GradientTape:
    """
    Records operations on watched variables so gradients of a scalar can be computed.

    A tape is single use: build one per loss evaluation, call `gradient()` once.
    """

    def __init__(self):
        self._nodes: List[Variable] = []

    def watch(self, value: np.ndarray, name: Optional[str] = None) -> Variable:
        """
        Registers a parameter value with this tape.

        Args:
            value (np.ndarray): Parameter value. It is copied as a float64 array.
            name (str, optional): Name used in reprs. Default is `None`.

        Returns:
            Variable: The tracked parameter.
        """
        variable = Variable(np.array(value, dtype=float), self, name=name)
        self._nodes.append(variable)
        return variable

    def record(self, value: np.ndarray, parents: Sequence[Tuple[Variable, VectorJacobian]]):
        variable = Variable(value, self, parents)
        self._nodes.append(variable)
        return variable

    def gradient(
        self, target: Variable, sources: Mapping[str, Variable]
    ) -> Dict[str, np.ndarray]:
        """
        Computes the gradient of a scalar variable with respect to watched variables.

        Args:
            target (Variable): Scalar result recorded on this tape.
            sources (Mapping[str, Variable]): Watched variables keyed by name.

        Returns:
            Dict[str, np.ndarray]: Gradient per source name, shaped like the source value.
            Sources the target does not depend on receive zeros.

        Raises:
            ValueError: If `target` is not a scalar recorded on this tape.
        """
        if not isinstance(target, Variable) or target.tape is not self:
            raise ValueError("target must be a Variable recorded on this tape")
        if target.value.size != 1:
            raise ValueError(f"target must be a scalar, got shape {target.shape}")

        adjoints: Dict[int, np.ndarray] = {id(target): np.ones_like(target.value)}
        leaf_gradients: Dict[int, np.ndarray] = {}
        for node in reversed(self._nodes):
            adjoint = adjoints.pop(id(node), None)
            if adjoint is None:
                continue
            if not node.parents:
                leaf_gradients[id(node)] = adjoint
                continue
            for parent, vector_jacobian in node.parents:
                contribution = vector_jacobian(adjoint)
                key = id(parent)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + contribution
                else:
                    adjoints[key] = contribution
        return {
            name: np.array(leaf_gradients.get(id(source), np.zeros_like(source.value)))
            for name, source in sources.items()
        }

    def __len__(self) -> int:
        return len(self._nodes)


def value_of(x: ArrayLike) -> np.ndarray:
    """Returns the numpy value of `x`, unwrapping a `Variable` if necessary."""
    return x.value if isinstance(x, Variable) else np.asarray(x, dtype=float)


def is_traced(*values: ArrayLike) -> bool:
    return any(isinstance(v, Variable) for v in values)


def _apply(value: np.ndarray, operands: Sequence[ArrayLike], vjps: Sequence[VectorJacobian]):
    tracked = [(op, vjp) for op, vjp in zip(operands, vjps) if isinstance(op, Variable)]
    if not tracked:
        return value
    return tracked[0][0].tape.record(value, tracked)


def _unbroadcast(gradient: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while gradient.ndim > len(shape):
        gradient = gradient.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and gradient.shape[axis] != 1:
            gradient = gradient.sum(axis=axis, keepdims=True)
    return gradient


def add(a: ArrayLike, b: ArrayLike):
    av, bv = value_of(a), value_of(b)
    if not is_traced(a, b):
        return av + bv
    return _apply(
        av + bv,
        (a, b),
        (lambda g: _unbroadcast(g, av.shape), lambda g: _unbroadcast(g, bv.shape)),
    )


def subtract(a: ArrayLike, b: ArrayLike):
    av, bv = value_of(a), value_of(b)
    if not is_traced(a, b):
        return av - bv
    return _apply(
        av - bv,
        (a, b),
        (lambda g: _unbroadcast(g, av.shape), lambda g: -_unbroadcast(g, bv.shape)),
    )


def multiply(a: ArrayLike, b: ArrayLike):
    av, bv = value_of(a), value_of(b)
    if not is_traced(a, b):
        return av * bv
    return _apply(
        av * bv,
        (a, b),
        (lambda g: _unbroadcast(g * bv, av.shape), lambda g: _unbroadcast(g * av, bv.shape)),
    )


def divide(a: ArrayLike, b: ArrayLike):
    av, bv = value_of(a), value_of(b)
    if not is_traced(a, b):
        return av / bv
    return _apply(
        av / bv,
        (a, b),
        (
            lambda g: _unbroadcast(g / bv, av.shape),
            lambda g: _unbroadcast(-g * av / (bv * bv), bv.shape),
        ),
    )


def power(a: ArrayLike, exponent: float):
    av = value_of(a)
    out = av ** exponent
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * exponent * av ** (exponent - 1.0),))


def square(a: ArrayLike):
    av = value_of(a)
    if not is_traced(a):
        return av * av
    return _apply(av * av, (a,), (lambda g: 2.0 * g * av,))


def exp(a: ArrayLike):
    out = np.exp(value_of(a))
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * out,))


def log(a: ArrayLike):
    av = value_of(a)
    if not is_traced(a):
        return np.log(av)
    return _apply(np.log(av), (a,), (lambda g: g / av,))


def sqrt(a: ArrayLike):
    out = np.sqrt(value_of(a))
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: 0.5 * g / out,))


def tanh(a: ArrayLike):
    out = np.tanh(value_of(a))
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * (1.0 - out * out),))


def relu(a: ArrayLike):
    av = value_of(a)
    out = np.maximum(av, 0.0)
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * (av > 0.0),))


def maximum(a: ArrayLike, floor: float):
    """Elementwise `max(a, floor)` for a constant `floor`; the gradient is zero below it."""
    av = value_of(a)
    out = np.maximum(av, floor)
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * (av >= floor),))


def minimum(a: ArrayLike, ceiling: float):
    """Elementwise `min(a, ceiling)` for a constant `ceiling`; the gradient is zero above it."""
    av = value_of(a)
    out = np.minimum(av, ceiling)
    if not is_traced(a):
        return out
    return _apply(out, (a,), (lambda g: g * (av <= ceiling),))


def sum(a: ArrayLike, axis: Optional[int] = None):  # noqa: A001
    av = value_of(a)
    out = np.sum(av, axis=axis)
    if not is_traced(a):
        return out

    def vjp(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, av.shape).copy()

    return _apply(out, (a,), (vjp,))


def transpose(a: ArrayLike):
    av = value_of(a)
    if not is_traced(a):
        return av.T
    return _apply(av.T, (a,), (lambda g: g.T,))


def take(a: ArrayLike, index):
    av = value_of(a)
    out = av[index]
    if not is_traced(a):
        return out

    def vjp(g):
        gradient = np.zeros_like(av)
        np.add.at(gradient, index, g)
        return gradient

    return _apply(out, (a,), (vjp,))


def matmul(a: ArrayLike, b: ArrayLike):
    av, bv = value_of(a), value_of(b)
    out = av @ bv
    if not is_traced(a, b):
        return out

    def vjp_a(g):
        if av.ndim == 1 and bv.ndim == 1:
            return g * bv
        if av.ndim == 1:
            return bv @ g
        if bv.ndim == 1:
            return np.outer(g, bv)
        return g @ bv.T

    def vjp_b(g):
        if av.ndim == 1 and bv.ndim == 1:
            return g * av
        if av.ndim == 1:
            return np.outer(av, g)
        if bv.ndim == 1:
            return av.T @ g
        return av.T @ g

    return _apply(out, (a, b), (vjp_a, vjp_b))


def concatenate(parts: Sequence[ArrayLike]):
    """Concatenates one-dimensional values."""
    values = [np.atleast_1d(value_of(p)) for p in parts]
    out = np.concatenate(values)
    if not is_traced(*parts):
        return out
    bounds = np.cumsum([0] + [len(v) for v in values])
    vjps = [
        (lambda g, lo=lo, hi=hi, shape=np.shape(value_of(p)): g[lo:hi].reshape(shape))
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:])
    ]
    return _apply(out, parts, vjps)
