"""Normed-space primitives: boxes, subspaces, covering nets, spatial queries.

Nets are axis-aligned grids expressed in orthonormal coordinates adapted to a
subspace.  A net can stay *virtual* (its centers are a formula, never an
array) so that locality queries work even when the analytic center count is
far beyond anything materializable; the covering property is guaranteed by
the pitch choice, not by enumeration.
"""

import numpy as np
from scipy.linalg import null_space

from .errors import ConfigError, ConstructionError, EvalError, NetCapExceeded

DEFAULT_NET_CAP = 200_000


class Box:
    """Axis-aligned box given by per-coordinate bounds lo < hi."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ConfigError("box bounds must be 1-D arrays of equal length")
        if not np.all(self.lo < self.hi):
            raise ConfigError("box requires lo < hi in every coordinate")

    @property
    def dim(self):
        return self.lo.size

    @property
    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, x, slack=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def inflate(self, margin):
        return Box(self.lo - margin, self.hi + margin)

    def scale(self, factor):
        return Box(self.lo * factor, self.hi * factor)

    def sample(self, rng, m):
        return self.lo + rng.random((m, self.dim)) * (self.hi - self.lo)


class Subspace:
    """Linear subspace of R^n given by an orthonormal row basis (k x n)."""

    ORTHO_TOL = 1e-12

    def __init__(self, basis):
        B = np.asarray(basis, dtype=float)
        if B.ndim != 2 or not (1 <= B.shape[0] <= B.shape[1]):
            raise ConfigError("basis must be k x n with 1 <= k <= n")
        gram = B @ B.T
        if np.max(np.abs(gram - np.eye(B.shape[0]))) > self.ORTHO_TOL:
            raise ConfigError("basis rows are not orthonormal within 1e-12")
        self.basis = B
        self.k, self.n = B.shape
        if self.k < self.n:
            N = null_space(B).T  # (n-k, n), orthonormal rows
            self.normal_basis = np.ascontiguousarray(N)
        else:
            self.normal_basis = np.zeros((0, self.n))

    def coords(self, x):
        return self.basis @ np.asarray(x, dtype=float)

    def from_coords(self, c):
        return self.basis.T @ np.asarray(c, dtype=float)

    def normal_coords(self, x):
        return self.normal_basis @ np.asarray(x, dtype=float)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ConfigError(f"dimension mismatch: point has {x.shape[-1]}, space has {self.n}")
        return (x @ self.basis.T) @ self.basis

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def distance_many(self, X):
        X = np.asarray(X, dtype=float)
        R = X - (X @ self.basis.T) @ self.basis
        return np.linalg.norm(R, axis=-1)

    def coord_interval(self, box, axis_dir, margin=0.0):
        """Support interval of <axis_dir, x> over the (inflated) box."""
        lo = float(np.sum(np.minimum(axis_dir * box.lo, axis_dir * box.hi)))
        hi = float(np.sum(np.maximum(axis_dir * box.lo, axis_dir * box.hi)))
        return lo - margin, hi + margin


def project(S, x):
    return S.project(x)


def quotient_norm(S, x):
    """Euclidean distance to the subspace (quotient-norm surrogate, factor 1)."""
    return S.distance(x)


def quotient_grad(S, x, tol=1e-12):
    """Distance plus its gradient; gradient is None within tol of the subspace."""
    x = np.asarray(x, dtype=float)
    r = x - S.project(x)
    d = float(np.linalg.norm(r))
    if d <= tol:
        return d, None
    return d, r / d


class _UniformAxis:
    """Digits d in [0, count) at coordinate origin + pitch*d (monotone)."""

    def __init__(self, origin, pitch, count):
        self.origin = float(origin)
        self.pitch = float(pitch)
        self.count = int(count)
        if self.count < 1 or self.pitch <= 0:
            raise ConstructionError("axis needs count >= 1 and pitch > 0")

    def values(self, d):
        return self.origin + self.pitch * np.asarray(d, dtype=float)

    def digit_windows(self, a, b):
        d0 = int(np.ceil((a - self.origin) / self.pitch - 1e-12))
        d1 = int(np.floor((b - self.origin) / self.pitch + 1e-12))
        d0, d1 = max(d0, 0), min(d1, self.count - 1)
        return [(d0, d1)] if d0 <= d1 else []

    def extreme_dev(self, xa, d0, d1):
        """Max |xa - value| over digits in [d0, d1] with the achieving digit."""
        v0, v1 = self.values(d0), self.values(d1)
        if abs(xa - v0) >= abs(xa - v1):
            return abs(xa - v0), d0
        return abs(xa - v1), d1


class _MirrorAxis:
    """Digits covering +-(start + pitch*j), j in [0, side); monotone in digit.

    Digit d < side is the negative branch, d >= side the positive one.
    """

    def __init__(self, start, pitch, side):
        self.start = float(start)
        self.pitch = float(pitch)
        self.side = int(side)
        self.count = 2 * self.side
        if self.side < 1 or self.pitch <= 0 or self.start < 0:
            raise ConstructionError("mirror axis needs side >= 1, pitch > 0, start >= 0")

    def values(self, d):
        d = np.asarray(d)
        j_neg = self.side - 1 - d
        j_pos = d - self.side
        return np.where(d < self.side,
                        -(self.start + self.pitch * j_neg),
                        self.start + self.pitch * j_pos)

    def _pos_window(self, a, b):
        j0 = int(np.ceil((a - self.start) / self.pitch - 1e-12))
        j1 = int(np.floor((b - self.start) / self.pitch + 1e-12))
        j0, j1 = max(j0, 0), min(j1, self.side - 1)
        return (self.side + j0, self.side + j1) if j0 <= j1 else None

    def digit_windows(self, a, b):
        out = []
        neg = self._pos_window(-b, -a)
        if neg is not None:
            lo, hi = neg
            out.append((2 * self.side - 1 - hi, 2 * self.side - 1 - lo))
        pos = self._pos_window(a, b)
        if pos is not None:
            out.append(pos)
        return out

    def extreme_dev(self, xa, d0, d1):
        v0, v1 = float(self.values(d0)), float(self.values(d1))
        if abs(xa - v0) >= abs(xa - v1):
            return abs(xa - v0), d0
        return abs(xa - v1), d1


class GridNet:
    """Product grid net along orthonormal directions, possibly virtual.

    Enumeration is lexicographic over the digit tuple (axis 0 most
    significant); that order is what prefix queries refer to.
    """

    def __init__(self, directions, axes, spacing, radius, cap=DEFAULT_NET_CAP):
        self.directions = np.asarray(directions, dtype=float)  # (naxes, n)
        self.axes = list(axes)
        self.spacing = float(spacing)
        self.radius = float(radius)
        self.cap = int(cap)
        self.count = 1
        for ax in self.axes:
            self.count *= ax.count
        self._centers = None
        self._radices = [ax.count for ax in self.axes]

    @property
    def naxes(self):
        return len(self.axes)

    @property
    def dim(self):
        return self.directions.shape[1]

    def is_virtual(self):
        return self.count > self.cap

    def _axis_coords(self, x):
        return self.directions @ np.asarray(x, dtype=float)

    def digits_of(self, lin):
        digits = []
        for radix in reversed(self._radices):
            lin, d = divmod(lin, radix)
            digits.append(d)
        return list(reversed(digits))

    def lin_of(self, digits):
        lin = 0
        for d, radix in zip(digits, self._radices):
            lin = lin * radix + int(d)
        return lin

    def centers_of(self, lins):
        lins = np.asarray(lins, dtype=np.int64)
        out = np.zeros((lins.size, self.dim))
        rem = lins.copy()
        for pos in range(self.naxes - 1, -1, -1):
            radix = self._radices[pos]
            rem, d = np.divmod(rem, radix)
            out += self.axes[pos].values(d)[:, None] * self.directions[pos]
        return out

    def center(self, lin):
        return self.centers_of([lin])[0]

    @property
    def centers(self):
        if self._centers is None:
            if self.is_virtual():
                raise NetCapExceeded(self.count, self.cap)
            self._centers = self.centers_of(np.arange(self.count))
        return self._centers

    def query_ball(self, x, rad):
        """Indices and centers of every net point within rad of x (exact)."""
        coords = self._axis_coords(x)
        per_axis = []
        for ax, xa in zip(self.axes, coords):
            wins = ax.digit_windows(xa - rad, xa + rad)
            if not wins:
                return np.empty(0, dtype=np.int64), np.empty((0, self.dim))
            digs = np.concatenate([np.arange(d0, d1 + 1) for d0, d1 in wins])
            per_axis.append(digs)
        grids = np.meshgrid(*per_axis, indexing="ij")
        digit_mat = np.stack([g.ravel() for g in grids], axis=1)
        lins = np.zeros(len(digit_mat), dtype=np.int64)
        for pos in range(self.naxes):
            lins = lins * self._radices[pos] + digit_mat[:, pos]
        centers = self.centers_of(lins)
        d = np.linalg.norm(centers - np.asarray(x, dtype=float), axis=1)
        keep = d <= rad
        return lins[keep], centers[keep]

    def _prefix_boxes(self, lin):
        """Lex-order prefix {0..lin-1} as up to naxes digit boxes."""
        D = self.digits_of(lin)
        boxes = []
        for p in range(self.naxes):
            if D[p] > 0:
                lohi = [(D[q], D[q]) for q in range(p)]
                lohi.append((0, D[p] - 1))
                lohi.extend((0, self._radices[q] - 1) for q in range(p + 1, self.naxes))
                boxes.append(lohi)
        return boxes

    def prefix_max_dist(self, x, lin):
        """Max distance from x to centers with linear index < lin, plus argmax.

        Exact: per-axis deviations are independent because the axis
        directions are orthonormal, so the box maximum sits at per-axis
        extreme digits.
        """
        if lin <= 0:
            return 0.0, None
        coords = self._axis_coords(x)
        best, best_digits = -1.0, None
        for lohi in self._prefix_boxes(lin):
            s, digs = 0.0, []
            for ax, xa, (d0, d1) in zip(self.axes, coords, lohi):
                dev, dd = ax.extreme_dev(xa, d0, d1)
                s += dev * dev
                digs.append(dd)
            if s > best:
                best, best_digits = s, digs
        base = np.asarray(x, dtype=float) - self.directions.T @ (
            self.directions @ np.asarray(x, dtype=float))
        c = base * 0.0
        for ax, dirv, d in zip(self.axes, self.directions, best_digits):
            c = c + float(ax.values(d)) * dirv
        # off-grid components of x contribute to the distance as well
        dist2 = best + float(base @ base)
        return float(np.sqrt(dist2)), self.centers_of([self.lin_of(best_digits)])[0]


def _axis_range(lo, hi, pitch):
    """Grid indices so every point of [lo, hi] is within pitch/2 of a center."""
    i0 = int(np.floor((lo + pitch / 2) / pitch + 1e-12))
    i1 = int(np.ceil((hi - pitch / 2) / pitch - 1e-12))
    if i1 < i0:
        i1 = i0
    return i0, i1


def subspace_net(S, box, spacing, cap=DEFAULT_NET_CAP, inflate=None):
    """Grid net on Y whose centers cover Y∩box within `spacing`."""
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    margin = spacing if inflate is None else float(inflate)
    # pitch = spacing keeps the classic 1-D grid count; tightened for large k
    # so the product-grid coverage distance stays <= spacing
    pitch = spacing * min(1.0, 2.0 / np.sqrt(S.k))
    axes = []
    for b in S.basis:
        lo, hi = S.coord_interval(box, b, margin)
        i0, i1 = _axis_range(lo, hi, pitch)
        axes.append(_UniformAxis(i0 * pitch, pitch, i1 - i0 + 1))
    return GridNet(S.basis, axes, spacing, spacing, cap=cap)


def offset_region_net(S, box, spacing, min_dist, cap=DEFAULT_NET_CAP, inflate=None):
    """Net covering {dist(., Y) >= min_dist} ∩ box, centers respecting min_dist.

    Codimension 1 uses an exact mirrored offset grid in the normal
    coordinate; higher codimension falls back to a materialized push-out grid
    (cap-bounded).
    """
    if spacing <= 0 or min_dist <= 0:
        raise ConfigError("spacing and min_dist must be positive")
    margin = spacing if inflate is None else float(inflate)
    codim = S.n - S.k
    if codim == 0:
        return ExplicitNet(np.zeros((0, S.n)), spacing, spacing)  # Y = X: empty
    if codim == 1:
        nrm = S.normal_basis[0]
        pitch = 2.0 * spacing / np.sqrt(S.n)
        wlo, whi = S.coord_interval(box, nrm, margin)
        reach = max(abs(wlo), abs(whi))
        if reach < min_dist:
            return ExplicitNet(np.zeros((0, S.n)), spacing, spacing)  # region empty
        side = int(np.floor((reach - min_dist) / pitch)) + 2
        axes = [_MirrorAxis(min_dist, pitch, side)]
        dirs = [nrm]
        for b in S.basis:
            lo, hi = S.coord_interval(box, b, margin)
            i0, i1 = _axis_range(lo, hi, pitch)
            axes.append(_UniformAxis(i0 * pitch, pitch, i1 - i0 + 1))
            dirs.append(b)
        return GridNet(np.asarray(dirs), axes, spacing, spacing, cap=cap)
    # codim >= 2: push-out grid, explicit only; halved pitch absorbs the push
    pitch = spacing / np.sqrt(S.n)
    axes, dirs = [], []
    total = 1
    for v in list(S.normal_basis) + list(S.basis):
        lo, hi = S.coord_interval(box, v, margin)
        i0, i1 = _axis_range(lo, hi, pitch)
        axes.append(_UniformAxis(i0 * pitch, pitch, i1 - i0 + 1))
        dirs.append(v)
        total *= i1 - i0 + 1
    if total > cap:
        raise NetCapExceeded(total, cap)
    net = GridNet(np.asarray(dirs), axes, spacing, spacing, cap=cap)
    raw = net.centers
    w = raw @ S.normal_basis.T
    wn = np.linalg.norm(w, axis=1)
    keep_mask = wn > 0
    scale = np.ones(len(raw))
    inside = (wn < min_dist) & keep_mask
    scale[inside] = min_dist * (1 + 1e-9) / wn[inside]
    pushed = raw - (w - w * scale[:, None]) @ S.normal_basis
    keep = np.linalg.norm(pushed @ S.normal_basis.T, axis=1) >= min_dist * (1 - 1e-12)
    centers = pushed[keep]
    return ExplicitNet(centers, spacing, spacing)


class ExplicitNet:
    """Materialized center list with the same query surface as GridNet."""

    def __init__(self, centers, spacing, radius):
        self.centers_arr = np.asarray(centers, dtype=float)
        self.spacing = float(spacing)
        self.radius = float(radius)
        self.count = len(self.centers_arr)

    @property
    def centers(self):
        return self.centers_arr

    def is_virtual(self):
        return False

    def centers_of(self, lins):
        return self.centers_arr[np.asarray(lins, dtype=np.int64)]

    def center(self, lin):
        return self.centers_arr[int(lin)]

    def query_ball(self, x, rad):
        d = np.linalg.norm(self.centers_arr - np.asarray(x, dtype=float), axis=1)
        idx = np.nonzero(d <= rad)[0].astype(np.int64)
        return idx, self.centers_arr[idx]

    def prefix_max_dist(self, x, lin):
        if lin <= 0:
            return 0.0, None
        d = np.linalg.norm(self.centers_arr[:lin] - np.asarray(x, dtype=float), axis=1)
        j = int(np.argmax(d))
        return float(d[j]), self.centers_arr[j]


class SpatialIndex:
    """Hash-grid over support balls; query(x) over-approximates containment."""

    def __init__(self, supports, cell_size):
        if cell_size <= 0:
            raise ConfigError("cell_size must be positive")
        self.cell_size = float(cell_size)
        self.buckets = {}
        self.supports = [(np.asarray(c, dtype=float), float(r)) for c, r in supports]
        for i, (c, r) in enumerate(self.supports):
            if r <= 0:
                raise ConfigError("support radii must be positive")
            lo = np.floor((c - r) / self.cell_size).astype(int)
            hi = np.floor((c + r) / self.cell_size).astype(int)
            for cell in np.ndindex(*(hi - lo + 1)):
                key = tuple(lo + np.asarray(cell))
                self.buckets.setdefault(key, []).append(i)

    def query(self, x):
        key = tuple(np.floor(np.asarray(x, dtype=float) / self.cell_size).astype(int))
        return list(self.buckets.get(key, []))


def build_index(supports, cell_size):
    return SpatialIndex(supports, cell_size)


def even_power(total):
    """Smallest even p >= max(2, ceil(log2 total)); gives N^(1/p) <= 2."""
    total = max(int(total), 1)
    p = max(2, (total - 1).bit_length() if total > 1 else 1)
    return p if p % 2 == 0 else p + 1


def smooth_sup_norm(v, total=None):
    """l_p norm with even p tied to the entry count: within [1,2]x the sup norm.

    `total` lets callers account for entries that are identically zero and
    were left out of v; appending zeros never changes the value.
    """
    v = np.abs(np.asarray(v, dtype=float))
    if v.size == 0:
        raise ConfigError("smooth_sup_norm needs at least one entry")
    p = even_power(len(v) if total is None else total)
    m = float(v.max())
    if m == 0.0:
        return 0.0
    return m * float(np.sum((v / m) ** p)) ** (1.0 / p)


def smooth_sup_norm_grad(v, total=None):
    """Value and gradient of smooth_sup_norm; gradient valid for v != 0."""
    v = np.asarray(v, dtype=float)
    p = even_power(len(v) if total is None else total)
    a = np.abs(v)
    m = float(a.max())
    if m == 0.0:
        raise EvalError("smooth_sup_norm gradient undefined at 0")
    s = float(np.sum((a / m) ** p))
    val = m * s ** (1.0 / p)
    g = np.sign(v) * (a / val) ** (p - 1)
    return val, g
