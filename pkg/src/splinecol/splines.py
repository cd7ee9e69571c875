"""B-spline / NURBS fundamentals.

Knot vectors, basis-function evaluation with derivatives, Greville
abscissae, knot insertion, refinement strategies, and tensor-product
(rational) spline objects of dimension 1 to 3.

All objects are immutable after construction; refinement operations
return new objects. Coefficients are stored densely in lexicographic
order with the last parametric axis fastest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_array, as_point, check_positive_int
from .errors import (
    DomainError,
    InvalidRefinementError,
    UnsupportedDerivativeError,
)


def _basis_ders(knots, degree, span, u, n_ders):
    """All nonzero basis functions and derivatives at ``u`` (The NURBS Book A2.3).

    Returns an array of shape (n_ders+1, degree+1); row k holds the k-th
    derivatives of the degree+1 basis functions supported on ``span``.
    """
    p = degree
    ndu = np.empty((p + 1, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((n_ders + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, n_ders + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    r = p
    for k in range(1, n_ders + 1):
        ders[k, :] *= r
        r *= p - k
    return ders


@dataclass(frozen=True, eq=False)
class KnotVector:
    """A clamped (open) knot vector with its polynomial degree.

    Invariants enforced at construction: knots nondecreasing, the first and
    last knots each repeated exactly degree+1 times, at least degree+1 basis
    functions, and no interior knot of multiplicity above the degree.
    """

    knots: np.ndarray
    degree: int

    def __eq__(self, other):
        if not isinstance(other, KnotVector):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.knots, other.knots)

    def __hash__(self):
        return hash((self.degree, self.knots.tobytes()))

    def __post_init__(self):
        knots = as_float_array(self.knots, "knots", ndim=1).copy()
        knots.flags.writeable = False
        object.__setattr__(self, "knots", knots)
        p = self.degree
        if int(p) != p or p < 0:
            raise ValueError(f"degree must be a non-negative integer, got {p!r}")
        object.__setattr__(self, "degree", int(p))
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be nondecreasing")
        n = len(knots) - p - 1
        if n < p + 1:
            raise ValueError(
                f"need at least {2 * (p + 1)} knots for degree {p}, got {len(knots)}"
            )
        if knots[0] != knots[p] or (knots[p + 1] == knots[0]):
            raise ValueError("first knot must be repeated exactly degree+1 times")
        if knots[-1] != knots[-p - 1] or (knots[-p - 2] == knots[-1]):
            raise ValueError("last knot must be repeated exactly degree+1 times")
        interior = knots[(knots > knots[0]) & (knots < knots[-1])]
        if interior.size:
            _, counts = np.unique(interior, return_counts=True)
            if np.any(counts > p):
                raise ValueError("interior knot multiplicity exceeds degree")

    @property
    def n_basis(self) -> int:
        """Number of basis functions."""
        return len(self.knots) - self.degree - 1

    @property
    def start(self) -> float:
        return float(self.knots[0])

    @property
    def end(self) -> float:
        return float(self.knots[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct knot values, i.e. the cell boundaries."""
        return np.unique(self.knots)

    @property
    def spans(self) -> list[tuple[float, float]]:
        """Nonempty knot intervals as (left, right) pairs."""
        bp = self.breakpoints
        return list(zip(bp[:-1], bp[1:]))

    def find_span(self, u: float) -> int:
        """Index i with knots[i] <= u < knots[i+1].

        The right end of the domain maps to the last nonempty span so that
        boundary evaluation at the final parameter is valid.
        """
        if not (self.start <= u <= self.end):
            raise DomainError(f"parameter {u!r} outside knot range [{self.start}, {self.end}]")
        span = int(np.searchsorted(self.knots, u, side="right")) - 1
        return min(max(span, self.degree), self.n_basis - 1)

    def basis_values(self, u: float, max_deriv: int = 0) -> np.ndarray:
        """Nonzero basis functions and derivatives at ``u``.

        Returns an array of shape (max_deriv+1, degree+1); row 0 sums to 1,
        higher rows sum to 0. The columns correspond to basis indices
        span-degree .. span.
        """
        if max_deriv > self.degree:
            raise UnsupportedDerivativeError(
                f"derivative order {max_deriv} exceeds degree {self.degree}"
            )
        span = self.find_span(u)
        return _basis_ders(self.knots, self.degree, span, u, max_deriv)

    def greville_abscissae(self) -> np.ndarray:
        """Per-basis averages of degree consecutive knots (collocation sites)."""
        p = self.degree
        if p == 0:
            raise ValueError("Greville abscissae are undefined for degree 0")
        windows = np.lib.stride_tricks.sliding_window_view(self.knots[1:-1], p)
        # Rounding must not push boundary sites outside the knot range.
        return np.clip(windows[: self.n_basis].mean(axis=1), self.start, self.end)

    def multiplicity(self, u: float) -> int:
        return int(np.count_nonzero(self.knots == u))

    def insert(self, u: float) -> "KnotVector":
        """New knot vector with ``u`` inserted once (no coefficient update)."""
        if not (self.start < u < self.end):
            raise InvalidRefinementError(
                f"insertion parameter {u!r} must lie strictly inside ({self.start}, {self.end})"
            )
        if self.multiplicity(u) >= self.degree:
            raise InvalidRefinementError(
                f"inserting {u!r} would raise its multiplicity above the degree"
            )
        idx = int(np.searchsorted(self.knots, u, side="right"))
        return KnotVector(np.insert(self.knots, idx, u), self.degree)


def refine_to_count(kv: KnotVector, target_basis_count: int) -> KnotVector:
    """Insert midpoints of the longest knot interval until the basis count is reached.

    Ties between equally long intervals are broken toward the leftmost one,
    which makes refinement sequences reproducible.
    """
    target = check_positive_int(target_basis_count, "target_basis_count")
    if target < kv.n_basis:
        raise InvalidRefinementError(
            f"target basis count {target} below current count {kv.n_basis}"
        )
    while kv.n_basis < target:
        bp = kv.breakpoints
        lengths = np.diff(bp)
        i = int(np.argmax(lengths))
        kv = kv.insert(0.5 * (bp[i] + bp[i + 1]))
    return kv


def uniform_refine(kv: KnotVector, count: int) -> KnotVector:
    """Insert ``count`` equally spaced interior knots over the knot range."""
    if int(count) != count or count < 0:
        raise ValueError(f"count must be a non-negative integer, got {count!r}")
    lo, hi = kv.start, kv.end
    for i in range(1, int(count) + 1):
        kv = kv.insert(lo + i * (hi - lo) / (count + 1))
    return kv


@dataclass(frozen=True)
class KnotGrid:
    """Tensor grid of knot cells with its refinement parameter h."""

    kvs: tuple[KnotVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "kvs", tuple(self.kvs))
        if not 1 <= len(self.kvs) <= 3:
            raise ValueError("a knot grid has 1 to 3 directions")

    @property
    def dim(self) -> int:
        return len(self.kvs)

    @property
    def grid_size_h(self) -> float:
        """Maximum Euclidean diameter over all knot cells."""
        return float(np.sqrt(sum(max(np.diff(kv.breakpoints)) ** 2 for kv in self.kvs)))

    def cells(self):
        """Iterate over cells as tuples of per-direction (left, right) intervals."""
        return itertools.product(*(kv.spans for kv in self.kvs))


@dataclass(frozen=True)
class SplineJet:
    """Value and physical-parameter derivatives of a spline at one point.

    ``value`` has shape (c,); ``grad`` (d, c) and ``hess`` (d, d, c) are None
    when not requested. ``partials`` maps per-direction derivative orders to
    (c,) arrays for every computed multi-index.
    """

    value: np.ndarray
    grad: np.ndarray | None
    hess: np.ndarray | None
    partials: dict = field(repr=False, default_factory=dict)

    def partial(self, orders: tuple[int, ...]) -> np.ndarray:
        return self.partials[tuple(orders)]


@dataclass(frozen=True)
class LatticeJet:
    """Batched jet on a tensor lattice of parameters.

    ``value`` has shape (m1, ..., md, c); ``grad`` appends (d, c) and
    ``hess`` (d, d, c).
    """

    value: np.ndarray
    grad: np.ndarray | None
    hess: np.ndarray | None


def _deriv_multi_indices(dim, max_total):
    """All per-direction order tuples with total order <= max_total."""
    out = []
    for total in range(max_total + 1):
        for alpha in itertools.product(range(total + 1), repeat=dim):
            if sum(alpha) == total:
                out.append(alpha)
    return out


@dataclass(frozen=True)
class TensorSpline:
    """Tensor-product NURBS object (all weights 1 means a plain B-spline).

    ``coeffs`` has shape (n1, ..., nd, c) with c >= 1 value components;
    ``weights`` has shape (n1, ..., nd) and must be strictly positive.
    """

    kvs: tuple[KnotVector, ...]
    coeffs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        kvs = tuple(self.kvs)
        object.__setattr__(self, "kvs", kvs)
        if not 1 <= len(kvs) <= 3:
            raise ValueError("tensor splines support dimensions 1 to 3")
        shape = tuple(kv.n_basis for kv in kvs)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape == shape:  # scalar-valued input: add component axis
            coeffs = coeffs[..., None]
        if coeffs.shape[:-1] != shape or coeffs.ndim != len(shape) + 1:
            raise ValueError(
                f"coefficients must have shape {shape + ('c',)}, got {coeffs.shape}"
            )
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != shape:
            raise ValueError(f"weights must have shape {shape}, got {weights.shape}")
        if np.any(weights <= 0):
            raise ValueError("all weights must be strictly positive")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        weights = weights.copy()
        weights.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def polynomial(cls, kvs, coeffs) -> "TensorSpline":
        """B-spline with all weights equal to 1."""
        kvs = tuple(kvs)
        shape = tuple(kv.n_basis for kv in kvs)
        return cls(kvs, coeffs, np.ones(shape))

    @property
    def dim(self) -> int:
        return len(self.kvs)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(kv.n_basis for kv in self.kvs)

    @property
    def n_coeffs(self) -> int:
        return int(np.prod(self.shape))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(kv.degree for kv in self.kvs)

    @property
    def grid(self) -> KnotGrid:
        return KnotGrid(self.kvs)

    @property
    def is_polynomial(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def with_coefficients(self, coeffs) -> "TensorSpline":
        """Same basis and weights, different coefficients."""
        return TensorSpline(self.kvs, coeffs, self.weights)

    # -- evaluation ---------------------------------------------------------

    def _local_tables(self, theta, max_deriv):
        """Spans and per-direction derivative tables at one point."""
        spans = []
        tables = []
        for kv, u in zip(self.kvs, theta):
            spans.append(kv.find_span(u))
            tables.append(kv.basis_values(u, max_deriv))
        return spans, tables

    def _homogeneous(self):
        w = self.weights[..., None]
        return np.concatenate([w * self.coeffs, w], axis=-1)

    def evaluate(self, theta, max_deriv: int = 0) -> SplineJet:
        """Value and partial derivatives at a parameter point.

        Rational derivatives are supported up to order 2; B-splines with unit
        weights additionally support any order up to the degree.
        """
        theta = as_point(theta, self.dim)
        polynomial = self.is_polynomial
        if max_deriv > 2 and not polynomial:
            raise UnsupportedDerivativeError(
                "rational derivatives are supported up to order 2"
            )
        spans, tables = self._local_tables(theta, max_deriv)
        block = tuple(
            slice(s - kv.degree, s + 1) for s, kv in zip(spans, self.kvs)
        )
        local = self.coeffs[block] if polynomial else self._homogeneous()[block]

        sums = {}
        for alpha in _deriv_multi_indices(self.dim, max_deriv):
            x = local
            for axis in reversed(range(self.dim)):
                x = np.tensordot(tables[axis][alpha[axis]], x, axes=(0, axis))
            sums[alpha] = x

        c = self.ncomp
        partials = {}
        if polynomial:
            partials = sums
        else:
            d = self.dim
            zero = (0,) * d
            w0 = sums[zero][c]
            partials[zero] = sums[zero][:c] / w0
            for alpha in _deriv_multi_indices(d, max_deriv):
                if sum(alpha) == 1:
                    partials[alpha] = (
                        sums[alpha][:c] - sums[alpha][c] * partials[zero]
                    ) / w0
            for alpha in _deriv_multi_indices(d, max_deriv):
                if sum(alpha) == 2:
                    a, b = _split_second_order(alpha)
                    partials[alpha] = (
                        sums[alpha][:c]
                        - sums[alpha][c] * partials[zero]
                        - sums[a][c] * partials[b]
                        - sums[b][c] * partials[a]
                    ) / w0

        return SplineJet(
            value=partials[(0,) * self.dim],
            grad=_stack_grad(partials, self.dim) if max_deriv >= 1 else None,
            hess=_stack_hess(partials, self.dim) if max_deriv >= 2 else None,
            partials=dict(partials),
        )

    def evaluate_partial(self, theta, orders) -> np.ndarray:
        """Single partial derivative of per-direction orders ``orders``."""
        orders = tuple(int(k) for k in orders)
        if len(orders) != self.dim:
            raise ValueError(f"expected {self.dim} derivative orders, got {orders}")
        return self.evaluate(theta, max_deriv=sum(orders)).partial(orders)

    def evaluate_lattice(self, axes, max_deriv: int = 0) -> LatticeJet:
        """Jet on the tensor lattice spanned by per-direction parameter arrays."""
        axes = [as_float_array(a, f"axes[{i}]", ndim=1) for i, a in enumerate(axes)]
        if len(axes) != self.dim:
            raise ValueError(f"expected {self.dim} axes, got {len(axes)}")
        polynomial = self.is_polynomial
        if max_deriv > 2 and not polynomial:
            raise UnsupportedDerivativeError(
                "rational derivatives are supported up to order 2"
            )

        # Full (n_points, n_basis) derivative tables per direction.
        tables = []
        for kv, pts in zip(self.kvs, axes):
            tab = np.zeros((max_deriv + 1, len(pts), kv.n_basis))
            for j, u in enumerate(pts):
                span = kv.find_span(u)
                ders = kv.basis_values(u, max_deriv)
                tab[:, j, span - kv.degree : span + 1] = ders
            tables.append(tab)

        source = self.coeffs if polynomial else self._homogeneous()
        subs = {
            1: "ui,ic->uc",
            2: "ui,vj,ijc->uvc",
            3: "ui,vj,wk,ijkc->uvwc",
        }[self.dim]

        sums = {}
        for alpha in _deriv_multi_indices(self.dim, max_deriv):
            ops = [tables[a][alpha[a]] for a in range(self.dim)]
            sums[alpha] = np.einsum(subs, *ops, source, optimize=True)

        c = self.ncomp
        if polynomial:
            partials = sums
        else:
            d = self.dim
            zero = (0,) * d
            w0 = sums[zero][..., c:]
            partials = {zero: sums[zero][..., :c] / w0}
            for alpha in _deriv_multi_indices(d, max_deriv):
                if sum(alpha) == 1:
                    partials[alpha] = (
                        sums[alpha][..., :c] - sums[alpha][..., c:] * partials[zero]
                    ) / w0
            for alpha in _deriv_multi_indices(d, max_deriv):
                if sum(alpha) == 2:
                    a, b = _split_second_order(alpha)
                    partials[alpha] = (
                        sums[alpha][..., :c]
                        - sums[alpha][..., c:] * partials[zero]
                        - sums[a][..., c:] * partials[b]
                        - sums[b][..., c:] * partials[a]
                    ) / w0

        d = self.dim
        grad = hess = None
        if max_deriv >= 1:
            grad = np.stack([partials[_unit(d, a)] for a in range(d)], axis=-2)
        if max_deriv >= 2:
            rows = []
            for a in range(d):
                cols = [partials[_add(_unit(d, a), _unit(d, b))] for b in range(d)]
                rows.append(np.stack(cols, axis=-2))
            hess = np.stack(rows, axis=-3)
        return LatticeJet(value=partials[(0,) * d], grad=grad, hess=hess)

    def basis_jets(self, theta):
        """Jets of the nonzero (rational) basis functions at one point.

        Returns ``(cols, value, grad, hess)`` where ``cols`` holds the flat
        coefficient indices of the local support block, ``value`` has shape
        (nloc,), ``grad`` (nloc, d) and ``hess`` (nloc, d, d). These are the
        functions the unknown coefficients multiply, so rows of collocation
        systems are linear combinations of them.
        """
        theta = as_point(theta, self.dim)
        spans, tables = self._local_tables(theta, 2)
        d = self.dim

        ranges = [
            np.arange(s - kv.degree, s + 1) for s, kv in zip(spans, self.kvs)
        ]
        mesh = np.meshgrid(*ranges, indexing="ij")
        cols = np.ravel_multi_index([m.ravel() for m in mesh], self.shape)

        block = tuple(slice(s - kv.degree, s + 1) for s, kv in zip(spans, self.kvs))
        w_loc = self.weights[block].ravel()

        def local(alpha):
            x = tables[0][alpha[0]]
            for a in range(1, d):
                x = np.multiply.outer(x, tables[a][alpha[a]])
            return x.ravel()

        wn = {alpha: w_loc * local(alpha) for alpha in _deriv_multi_indices(d, 2)}
        wsum = {alpha: wn[alpha].sum() for alpha in wn}

        zero = (0,) * d
        w0 = wsum[zero]
        val = wn[zero] / w0
        grads = {}
        for a in range(d):
            ea = _unit(d, a)
            grads[a] = (wn[ea] - wsum[ea] * val) / w0
        grad = np.stack([grads[a] for a in range(d)], axis=-1)
        hess = np.empty((len(cols), d, d))
        for a in range(d):
            for b in range(d):
                ab = _add(_unit(d, a), _unit(d, b))
                hess[:, a, b] = (
                    wn[ab]
                    - wsum[ab] * val
                    - wsum[_unit(d, a)] * grads[b]
                    - wsum[_unit(d, b)] * grads[a]
                ) / w0
        return cols, val, grad, hess

    # -- refinement ---------------------------------------------------------

    def insert_knot(self, direction: int, u: float) -> "TensorSpline":
        """Insert ``u`` once along ``direction``; geometry is preserved exactly.

        Weights and weighted coefficients are updated by the same convex
        combinations (Boehm's algorithm in homogeneous coordinates).
        """
        if not 0 <= direction < self.dim:
            raise ValueError(f"direction {direction} out of range for dim {self.dim}")
        kv = self.kvs[direction]
        new_kv = kv.insert(u)  # validates range and multiplicity
        p = kv.degree
        k = kv.find_span(u)
        mult = kv.multiplicity(u)
        t = kv.knots

        hom = np.moveaxis(self._homogeneous(), direction, 0)
        trailing = hom.shape[1:]
        hom = hom.reshape(hom.shape[0], -1)
        n = hom.shape[0]
        out = np.empty((n + 1, hom.shape[1]))
        out[: k - p + 1] = hom[: k - p + 1]
        for i in range(k - p + 1, k - mult + 1):
            alpha = (u - t[i]) / (t[i + p] - t[i])
            out[i] = alpha * hom[i] + (1.0 - alpha) * hom[i - 1]
        out[k - mult + 1 :] = hom[k - mult :]

        out = np.moveaxis(out.reshape((n + 1,) + trailing), 0, direction)
        weights = out[..., -1]
        coeffs = out[..., :-1] / weights[..., None]
        kvs = list(self.kvs)
        kvs[direction] = new_kv
        return TensorSpline(tuple(kvs), coeffs, weights)

    def refine_uniform(self, counts) -> "TensorSpline":
        """Uniformly insert interior knots per direction (count per direction)."""
        counts = tuple(int(c) for c in np.atleast_1d(counts))
        if len(counts) != self.dim:
            raise ValueError(f"expected {self.dim} counts, got {counts}")
        s = self
        for a, count in enumerate(counts):
            lo, hi = s.kvs[a].start, s.kvs[a].end
            for i in range(1, count + 1):
                s = s.insert_knot(a, lo + i * (hi - lo) / (count + 1))
        return s


def _unit(dim, axis):
    e = [0] * dim
    e[axis] = 1
    return tuple(e)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _split_second_order(alpha):
    """Split a total-order-2 multi-index into two unit multi-indices."""
    first = None
    d = len(alpha)
    for axis in range(d):
        for _ in range(alpha[axis]):
            if first is None:
                first = _unit(d, axis)
            else:
                return first, _unit(d, axis)
    raise ValueError(f"not a second-order multi-index: {alpha}")


def _stack_grad(partials, dim):
    return np.stack([partials[_unit(dim, a)] for a in range(dim)], axis=0)


def _stack_hess(partials, dim):
    d = dim
    rows = []
    for a in range(d):
        rows.append(
            np.stack([partials[_add(_unit(d, a), _unit(d, b))] for b in range(d)], axis=0)
        )
    return np.stack(rows, axis=0)
