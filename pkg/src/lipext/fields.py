"""Scalar fields on R^n: the common currency between modules.

A field exposes `value(x)` and `gradient(x)` for x a 1-D numpy array.
Fields are immutable after construction and safe to evaluate concurrently.
"""

import numpy as np


class ScalarField:
    """Real-valued function on R^n with an optional gradient."""

    dim = None

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def value_many(self, X):
        """Evaluate at each row of X, shape (m, n) -> (m,)."""
        return np.array([self.value(x) for x in np.asarray(X, dtype=float)])

    def gradient_many(self, X):
        return np.array([self.gradient(x) for x in np.asarray(X, dtype=float)])


class ConstField(ScalarField):
    def __init__(self, c, dim):
        self.c = float(c)
        self.dim = int(dim)

    def value(self, x):
        return self.c

    def gradient(self, x):
        return np.zeros(self.dim)

    def value_many(self, X):
        return np.full(len(X), self.c)


class LinearField(ScalarField):
    """x -> <u, x> + b."""

    def __init__(self, u, b=0.0):
        self.u = np.asarray(u, dtype=float)
        self.b = float(b)
        self.dim = self.u.size

    def value(self, x):
        return float(self.u @ np.asarray(x, dtype=float)) + self.b

    def gradient(self, x):
        return self.u.copy()

    def value_many(self, X):
        return np.asarray(X, dtype=float) @ self.u + self.b


class FuncField(ScalarField):
    """Field from value/gradient closures (gradient closure optional)."""

    def __init__(self, fn, grad_fn=None, dim=None, batch_fn=None):
        self._fn = fn
        self._grad = grad_fn
        self._batch = batch_fn
        self.dim = dim

    def value(self, x):
        return float(self._fn(np.asarray(x, dtype=float)))

    def gradient(self, x):
        if self._grad is None:
            raise NotImplementedError("field has no gradient")
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def value_many(self, X):
        if self._batch is not None:
            return np.asarray(self._batch(np.asarray(X, dtype=float)), dtype=float)
        return super().value_many(X)


class SumField(ScalarField):
    def __init__(self, parts, weights=None):
        self.parts = list(parts)
        self.weights = [1.0] * len(self.parts) if weights is None else [float(w) for w in weights]
        self.dim = self.parts[0].dim if self.parts else None

    def value(self, x):
        return float(sum(w * p.value(x) for w, p in zip(self.weights, self.parts)))

    def gradient(self, x):
        g = np.zeros(len(x))
        for w, p in zip(self.weights, self.parts):
            g += w * p.gradient(x)
        return g

    def value_many(self, X):
        out = np.zeros(len(X))
        for w, p in zip(self.weights, self.parts):
            out += w * p.value_many(X)
        return out


class AffinePullbackField(ScalarField):
    """x -> scale_out * inner(shift + scale_in * x); keeps gradients exact."""

    def __init__(self, inner, scale_in=1.0, shift=None, scale_out=1.0):
        self.inner = inner
        self.scale_in = float(scale_in)
        self.scale_out = float(scale_out)
        self.shift = None if shift is None else np.asarray(shift, dtype=float)
        self.dim = inner.dim

    def _map(self, x):
        y = self.scale_in * np.asarray(x, dtype=float)
        if self.shift is not None:
            y = y + self.shift
        return y

    def value(self, x):
        return self.scale_out * self.inner.value(self._map(x))

    def gradient(self, x):
        return (self.scale_out * self.scale_in) * self.inner.gradient(self._map(x))

    def value_many(self, X):
        Y = self.scale_in * np.asarray(X, dtype=float)
        if self.shift is not None:
            Y = Y + self.shift
        return self.scale_out * self.inner.value_many(Y)


class PosPartField(ScalarField):
    """max(f, 0); Lipschitz wherever f is, used by the split stage (values only)."""

    def __init__(self, inner, sign=1.0):
        self.inner = inner
        self.sign = float(sign)
        self.dim = inner.dim

    def value(self, x):
        return max(self.sign * self.inner.value(x), 0.0)

    def value_many(self, X):
        return np.maximum(self.sign * self.inner.value_many(X), 0.0)

    def gradient(self, x):
        v = self.sign * self.inner.value(x)
        if v > 0:
            return self.sign * self.inner.gradient(x)
        return np.zeros(self.dim)


class SlabClipField(ScalarField):
    """clip(f - 1000*k, 0, 1000): one slab of the level decomposition."""

    def __init__(self, inner, k):
        self.inner = inner
        self.k = int(k)
        self.dim = inner.dim

    def value(self, x):
        return float(np.clip(self.inner.value(x) - 1000.0 * self.k, 0.0, 1000.0))

    def value_many(self, X):
        return np.clip(self.inner.value_many(X) - 1000.0 * self.k, 0.0, 1000.0)
