"""Boundary value problems and the shipped benchmark examples.

Defines the operator/boundary-condition abstraction consumed by the
assembler, plus five ready-made manufactured-solution benchmarks on
embedded geometries: a 1D reaction-diffusion problem with Dirichlet ends,
the same PDE on a quarter annulus (2D, rational geometry) and a unit cube
(3D), a simply supported plane-stress beam, and a 1D mixed
Dirichlet/Neumann variant used for stability experiments.

Operators and boundary conditions expose two views: ``apply`` acts on a
full field jet (used by error metrics), ``basis_rows`` on batches of
scalar basis-function jets placed in one displacement component (used by
row assembly). Both are vectorized over a leading batch axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .geometry import GeometryMap
from .splines import KnotVector, TensorSpline

SQRT2 = math.sqrt(2.0)

#: Interior knots of the non-uniform discretization used by the 1D
#: stability experiment (10 basis functions on the unit-interval curve).
STABILITY_KNOTS = (0.25, 0.5, 0.6, 0.7, 0.75, 0.8)


# ---------------------------------------------------------------------------
# material data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaterialParams:
    """Plane-stress material and beam load data.

    The reference stress field of the beam benchmark is independent of E
    and nu, so their defaults only affect displacement scaling. E defaults
    to 1 to keep displacement rows and traction rows of the collocation
    system on comparable scales.
    """

    youngs_modulus: float = 1.0
    poisson_ratio: float = 0.3
    load: float = 10.0
    depth: float = 2.0
    half_length: float = 5.0

    def __post_init__(self):
        if self.youngs_modulus <= 0:
            raise ValueError("youngs_modulus must be positive")
        if not 0.0 < self.poisson_ratio < 0.5:
            raise ValueError("poisson_ratio must lie in (0, 0.5)")
        if self.depth <= 0 or self.half_length <= 0:
            raise ValueError("depth and half_length must be positive")

    @property
    def stiffness(self) -> float:
        """Plane-stress axial stiffness E / (1 - nu^2)."""
        return self.youngs_modulus / (1.0 - self.poisson_ratio**2)

    @property
    def shear_modulus(self) -> float:
        return self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))


# ---------------------------------------------------------------------------
# interior operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScreenedPoissonOperator:
    """The scalar operator -laplace(T) + T in physical coordinates."""

    dim: int
    order: int = 2
    components: int = 1

    def apply(self, value, grad, hess):
        """Operator value for field jets with a leading batch shape."""
        lap = np.trace(hess, axis1=-3, axis2=-2)
        return value - lap

    def basis_rows(self, value, grad, hess, component):
        """Rows (components, N) for N basis functions living in ``component``."""
        lap = np.trace(hess, axis1=-2, axis2=-1)
        return (value - lap)[None, :]


@dataclass(frozen=True)
class PlaneStressNavierOperator:
    """Displacement-form equilibrium operator of plane-stress elasticity.

    Acts on (u_x, u_y); with zero body force the interior equations are
    div sigma(u) = 0 built from the plane-stress constitutive law.
    """

    material: MaterialParams
    order: int = 2
    components: int = 2

    def apply(self, value, grad, hess):
        c1 = self.material.stiffness
        mu = self.material.shear_modulus
        cxy = c1 * self.material.poisson_ratio + mu
        out = np.empty(value.shape)
        out[..., 0] = (
            c1 * hess[..., 0, 0, 0] + mu * hess[..., 1, 1, 0] + cxy * hess[..., 0, 1, 1]
        )
        out[..., 1] = (
            c1 * hess[..., 1, 1, 1] + mu * hess[..., 0, 0, 1] + cxy * hess[..., 0, 1, 0]
        )
        return out

    def basis_rows(self, value, grad, hess, component):
        c1 = self.material.stiffness
        mu = self.material.shear_modulus
        cxy = c1 * self.material.poisson_ratio + mu
        hxx = hess[:, 0, 0]
        hyy = hess[:, 1, 1]
        hxy = hess[:, 0, 1]
        if component == 0:
            return np.stack([c1 * hxx + mu * hyy, cxy * hxy])
        return np.stack([cxy * hxy, c1 * hyy + mu * hxx])


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------


def face_id(axis: int, side: int) -> int:
    return 2 * axis + side


@dataclass(frozen=True)
class DirichletBC:
    """Prescribed field values on one parametric face."""

    axis: int
    side: int
    value: Callable[[np.ndarray], np.ndarray]
    components: int = 1
    kind: str = "dirichlet"

    @property
    def face(self) -> int:
        return face_id(self.axis, self.side)

    @property
    def n_rows(self) -> int:
        return self.components

    def rows_for_basis(self, normal, value, grad, component):
        rows = np.zeros((self.components, value.shape[0]))
        rows[component] = value
        return rows

    def rhs(self, x):
        return np.atleast_1d(np.asarray(self.value(x), dtype=float))


@dataclass(frozen=True)
class NormalDerivativeBC:
    """Prescribed outward normal derivative of a scalar field on one face."""

    axis: int
    side: int
    value: Callable[[np.ndarray], np.ndarray]
    kind: str = "neumann"

    @property
    def face(self) -> int:
        return face_id(self.axis, self.side)

    @property
    def n_rows(self) -> int:
        return 1

    def rows_for_basis(self, normal, value, grad, component):
        return (grad @ normal)[None, :]

    def rhs(self, x):
        return np.atleast_1d(np.asarray(self.value(x), dtype=float))


@dataclass(frozen=True)
class TractionBC:
    """Prescribed traction sigma(u) . n on one face (plane stress)."""

    axis: int
    side: int
    material: MaterialParams
    value: Callable[[np.ndarray], np.ndarray]
    kind: str = "traction"

    @property
    def face(self) -> int:
        return face_id(self.axis, self.side)

    @property
    def n_rows(self) -> int:
        return 2

    def rows_for_basis(self, normal, value, grad, component):
        c1 = self.material.stiffness
        nu = self.material.poisson_ratio
        mu = self.material.shear_modulus
        gx = grad[:, 0]
        gy = grad[:, 1]
        n0, n1 = normal
        if component == 0:
            sx, sy, tau = c1 * gx, c1 * nu * gx, mu * gy
        else:
            sx, sy, tau = c1 * nu * gy, c1 * gy, mu * gx
        return np.stack([sx * n0 + tau * n1, tau * n0 + sy * n1])

    def rhs(self, x):
        return np.atleast_1d(np.asarray(self.value(x), dtype=float))


@dataclass(frozen=True)
class PointConstraint:
    """A single-component field value pinned at one parametric point.

    Used to remove rigid-body modes from pure-traction problems. During
    assembly the constraint replaces the matching component row of the
    collocation point nearest ``theta``; ``value`` is evaluated at that
    point's physical location so the constraint stays consistent with the
    analytic solution even when the nearest point is not exactly ``theta``.
    """

    theta: tuple
    component: int
    value: Callable[[np.ndarray], float]


# ---------------------------------------------------------------------------
# problem definition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldQuantity:
    """A scalar output derived from the solution, with its reference field."""

    name: str
    analytic: Callable[[np.ndarray], np.ndarray]
    extract: Callable[[np.ndarray, np.ndarray], np.ndarray]
    needs_gradient: bool = False


@dataclass(frozen=True)
class BvpDefinition:
    """A strong-form boundary value problem on a mapped domain."""

    example_id: str
    description: str
    geometry: GeometryMap
    operator: object
    source: Callable[[np.ndarray], np.ndarray]
    boundary_conditions: tuple
    analytic_solution: Callable[[np.ndarray], np.ndarray] | None
    quantities: tuple
    point_constraints: tuple = ()
    field_components: int = 1

    def __post_init__(self):
        if self.operator.order > 2:
            raise ValueError("operators above second order are not supported")
        covered = sorted(bc.face for bc in self.boundary_conditions)
        expected = list(range(2 * self.geometry.dim))
        if covered != expected:
            raise ValueError(
                f"every parametric face must carry exactly one boundary condition; "
                f"got faces {covered}, expected {expected}"
            )

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def condition_for_face(self, face: int):
        for bc in self.boundary_conditions:
            if bc.face == face:
                return bc
        raise KeyError(face)


# ---------------------------------------------------------------------------
# embedded geometries (unit-interval curve, quarter annulus, unit cube, beam)
# ---------------------------------------------------------------------------


def _cubic_kv() -> KnotVector:
    return KnotVector([0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0], 3)


def curve_unit_interval() -> GeometryMap:
    """Cubic B-spline curve representing [0, 1] with the identity map."""
    kv = _cubic_kv()
    return GeometryMap(TensorSpline.polynomial((kv,), kv.greville_abscissae()))


def patch_quarter_annulus() -> GeometryMap:
    """Rational cubic patch mapping the unit square onto a quarter annulus.

    The u direction is radial (radius 1 to 4), v sweeps the quarter turn.
    The circular arcs are exact thanks to the (1 + sqrt 2)/3 weights on the
    interior angular rows.
    """
    # Angular control polygon of the exact cubic unit-circle quadrant.
    arc = np.array(
        [[1.0, 0.0], [1.0, 2.0 - SQRT2], [2.0 - SQRT2, 1.0], [0.0, 1.0]]
    )
    radii = np.array([1.0, 2.0, 3.0, 4.0])
    coeffs = radii[:, None, None] * arc[None, :, :]  # (u, v, 2)
    w_arc = np.array([1.0, (1.0 + SQRT2) / 3.0, (1.0 + SQRT2) / 3.0, 1.0])
    weights = np.tile(w_arc, (4, 1))
    kv = _cubic_kv()
    return GeometryMap(TensorSpline((kv, kv), coeffs, weights))


def solid_unit_cube() -> GeometryMap:
    """Cubic B-spline solid representing the unit cube with the identity map."""
    kv = _cubic_kv()
    g = kv.greville_abscissae()
    coeffs = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1)
    return GeometryMap(TensorSpline.polynomial((kv, kv, kv), coeffs))


def patch_beam(half_length: float = 5.0, depth: float = 2.0) -> GeometryMap:
    """Cubic patch for the beam domain [-l, l] x [-h/2, h/2] (affine map)."""
    kv = _cubic_kv()
    g = kv.greville_abscissae()
    xs = -half_length + 2.0 * half_length * g
    ys = -0.5 * depth + depth * g
    coeffs = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    return GeometryMap(TensorSpline.polynomial((kv, kv), coeffs))


# ---------------------------------------------------------------------------
# scalar examples
# ---------------------------------------------------------------------------


def _scalar_quantity(analytic):
    return FieldQuantity(
        name="T",
        analytic=lambda x: np.asarray(analytic(x), dtype=float),
        extract=lambda value, grad: value[..., 0],
    )


def example_1d_dirichlet() -> BvpDefinition:
    """-T'' + T = (1 + 4 pi^2) sin(2 pi x) on [0, 1], T(0) = T(1) = 0."""

    def analytic(x):
        return np.sin(2.0 * np.pi * x[..., 0])

    def source(x):
        return np.atleast_1d((1.0 + 4.0 * np.pi**2) * np.sin(2.0 * np.pi * x[..., 0]))

    zero = lambda x: np.zeros(1)
    return BvpDefinition(
        example_id="I",
        description="1D source problem with homogeneous Dirichlet ends",
        geometry=curve_unit_interval(),
        operator=ScreenedPoissonOperator(dim=1),
        source=source,
        boundary_conditions=(
            DirichletBC(axis=0, side=0, value=zero),
            DirichletBC(axis=0, side=1, value=zero),
        ),
        analytic_solution=lambda x: np.atleast_1d(analytic(x)),
        quantities=(_scalar_quantity(analytic),),
    )


def example_2d_annulus() -> BvpDefinition:
    """-laplace(T) + T = f on a quarter annulus, T = 0 on the boundary.

    The manufactured solution (x^2+y^2-1)(x^2+y^2-16) sin x sin y vanishes
    on the inner and outer arcs through its radial factors and on the two
    straight edges through the sine factors.
    """

    def analytic(x):
        xx, yy = x[..., 0], x[..., 1]
        r2 = xx**2 + yy**2
        return (r2 - 1.0) * (r2 - 16.0) * np.sin(xx) * np.sin(yy)

    def source(x):
        xx, yy = x[..., 0], x[..., 1]
        sx, cx = np.sin(xx), np.cos(xx)
        sy, cy = np.sin(yy), np.cos(yy)
        poly = (
            3 * xx**4
            - 67 * xx**2
            - 67 * yy**2
            + 3 * yy**4
            + 6 * xx**2 * yy**2
            + 116
        )
        out = (
            poly * sx * sy
            + (68 * xx - 8 * xx**3 - 8 * xx * yy**2) * cx * sy
            + (68 * yy - 8 * yy**3 - 8 * yy * xx**2) * cy * sx
        )
        return np.atleast_1d(out)

    zero = lambda x: np.zeros(1)
    bcs = tuple(
        DirichletBC(axis=a, side=s, value=zero) for a in (0, 1) for s in (0, 1)
    )
    return BvpDefinition(
        example_id="II",
        description="2D source problem on a quarter annulus",
        geometry=patch_quarter_annulus(),
        operator=ScreenedPoissonOperator(dim=2),
        source=source,
        boundary_conditions=bcs,
        analytic_solution=lambda x: np.atleast_1d(analytic(x)),
        quantities=(_scalar_quantity(analytic),),
    )


def example_3d_cube() -> BvpDefinition:
    """-laplace(T) + T on the unit cube with T = 0 on every face."""

    def analytic(x):
        return (
            np.sin(2 * np.pi * x[..., 0])
            * np.sin(2 * np.pi * x[..., 1])
            * np.sin(2 * np.pi * x[..., 2])
        )

    def source(x):
        return np.atleast_1d((1.0 + 12.0 * np.pi**2) * analytic(x))

    zero = lambda x: np.zeros(1)
    bcs = tuple(
        DirichletBC(axis=a, side=s, value=zero) for a in (0, 1, 2) for s in (0, 1)
    )
    return BvpDefinition(
        example_id="III",
        description="3D source problem on the unit cube",
        geometry=solid_unit_cube(),
        operator=ScreenedPoissonOperator(dim=3),
        source=source,
        boundary_conditions=bcs,
        analytic_solution=lambda x: np.atleast_1d(analytic(x)),
        quantities=(_scalar_quantity(analytic),),
    )


def example_1d_mixed() -> BvpDefinition:
    """Example I's PDE with T(0) = 0 and the Neumann condition T'(1) = 2 pi."""
    base = example_1d_dirichlet()
    bcs = (
        DirichletBC(axis=0, side=0, value=lambda x: np.zeros(1)),
        NormalDerivativeBC(axis=0, side=1, value=lambda x: np.array([2.0 * np.pi])),
    )
    return replace(
        base,
        example_id="V",
        description="1D source problem with mixed Dirichlet/Neumann ends",
        boundary_conditions=bcs,
    )


# ---------------------------------------------------------------------------
# the simply supported beam (Example IV)
# ---------------------------------------------------------------------------


def beam_stresses(params: MaterialParams):
    """Reference stress fields of the simply supported beam.

    With depth h and faces at y = +-h/2, the field carries the load q on
    the lower face (sigma_y(-h/2) = -q, sigma_y(+h/2) = 0) and the shear on
    each end integrates to the reaction force q*l.
    """
    q, h, l = params.load, params.depth, params.half_length

    def sigma_x(x):
        xx, yy = x[..., 0], x[..., 1]
        return (6 * q / h**3) * (l**2 - xx**2) * yy + q * (yy / h) * (
            4 * yy**2 / h**2 - 3.0 / 5.0
        )

    def sigma_y(x):
        yy = x[..., 1]
        return -(q / 2.0) * (1.0 + yy / h) * (1.0 - 2.0 * yy / h) ** 2

    def tau_xy(x):
        xx, yy = x[..., 0], x[..., 1]
        return -(6 * q / h**3) * xx * (h**2 / 4.0 - yy**2)

    return sigma_x, sigma_y, tau_xy


def beam_displacements(params: MaterialParams):
    """Displacement field matching :func:`beam_stresses` under plane stress.

    Integration constants are fixed by the simply-supported gauge
    u_y(+-l, 0) = 0 and u_x(0, y) = 0 (the problem is symmetric in x).
    """
    q, h, l = params.load, params.depth, params.half_length
    E, nu = params.youngs_modulus, params.poisson_ratio
    c_gauge = (5.0 / (2 * h**3)) * l**4 + (l**2 / (2 * h)) * (2.4 + 1.5 * nu)

    def u_x(x):
        xx, yy = x[..., 0], x[..., 1]
        return (q / E) * (
            (6 / h**3) * (l**2 * xx - xx**3 / 3.0) * yy
            + xx
            * (
                (4 / h**3) * yy**3
                - (3.0 / (5 * h)) * yy
                + nu / 2.0
                - (3 * nu / (2 * h)) * yy
                + (2 * nu / h**3) * yy**3
            )
        )

    def u_y(x):
        xx, yy = x[..., 0], x[..., 1]
        return (q / E) * (
            -yy / 2.0
            + (3.0 / (4 * h)) * yy**2
            - yy**4 / (2 * h**3)
            - nu * (3 / h**3) * (l**2 - xx**2) * yy**2
            - nu * yy**4 / h**3
            + (3 * nu / (10 * h)) * yy**2
            + xx**4 / (2 * h**3)
            - (3 * l**2 / h**3) * xx**2
            - ((2.4 + 1.5 * nu) / (2 * h)) * xx**2
            + c_gauge
        )

    return u_x, u_y


def example_beam(
    params: MaterialParams | None = None, end_condition: str = "pinned"
) -> BvpDefinition:
    """Simply supported plane-stress beam under a uniform surface load.

    ``end_condition`` selects how the ends x = +-l are supported:

    * ``"pinned"`` (default): the reference tractions act on all four faces
      and three point constraints (u_y at the two end midpoints, u_x at the
      center) remove the rigid-body modes, mirroring a weakly simply
      supported beam held by its end reactions.
    * ``"dirichlet"``: the reference displacements are prescribed on both
      end faces instead (a stiffer support, useful for comparison runs).
    """
    params = params or MaterialParams()
    if end_condition not in ("pinned", "dirichlet"):
        raise ValueError(f"unknown end_condition {end_condition!r}")
    q, h, l = params.load, params.depth, params.half_length
    sigma_x, sigma_y, tau_xy = beam_stresses(params)
    u_x, u_y = beam_displacements(params)

    def displacement(x):
        return np.stack([u_x(x), u_y(x)], axis=-1)

    def traction(normal):
        n0, n1 = normal

        def value(x):
            x = np.asarray(x, dtype=float)
            sx, sy, txy = sigma_x(x), sigma_y(x), tau_xy(x)
            return np.stack([sx * n0 + txy * n1, txy * n0 + sy * n1], axis=-1)

        return value

    top = TractionBC(axis=1, side=1, material=params, value=traction((0.0, 1.0)))
    bottom = TractionBC(axis=1, side=0, material=params, value=traction((0.0, -1.0)))
    if end_condition == "pinned":
        left = TractionBC(axis=0, side=0, material=params, value=traction((-1.0, 0.0)))
        right = TractionBC(axis=0, side=1, material=params, value=traction((1.0, 0.0)))
        constraints = (
            PointConstraint(theta=(0.0, 0.5), component=1, value=lambda x: float(u_y(x))),
            PointConstraint(theta=(1.0, 0.5), component=1, value=lambda x: float(u_y(x))),
            PointConstraint(theta=(0.5, 0.5), component=0, value=lambda x: float(u_x(x))),
        )
    else:
        left = DirichletBC(axis=0, side=0, value=displacement, components=2)
        right = DirichletBC(axis=0, side=1, value=displacement, components=2)
        constraints = ()

    quantities = (
        FieldQuantity(
            "sigma_x",
            analytic=sigma_x,
            extract=_stress_extractor(params, "sigma_x"),
            needs_gradient=True,
        ),
        FieldQuantity(
            "sigma_y",
            analytic=sigma_y,
            extract=_stress_extractor(params, "sigma_y"),
            needs_gradient=True,
        ),
        FieldQuantity(
            "tau_xy",
            analytic=tau_xy,
            extract=_stress_extractor(params, "tau_xy"),
            needs_gradient=True,
        ),
    )

    return BvpDefinition(
        example_id="IV",
        description="simply supported plane-stress beam",
        geometry=patch_beam(l, h),
        operator=PlaneStressNavierOperator(params),
        source=lambda x: np.zeros(2),
        boundary_conditions=(bottom, top, left, right),
        analytic_solution=displacement,
        quantities=quantities,
        point_constraints=constraints,
        field_components=2,
    )


def _stress_extractor(params: MaterialParams, which: str):
    """Plane-stress recovery of one stress component from displacement jets."""
    c1 = params.stiffness
    nu = params.poisson_ratio
    mu = params.shear_modulus

    def extract(value, grad):
        ex = grad[..., 0, 0]
        ey = grad[..., 1, 1]
        gxy = grad[..., 1, 0] + grad[..., 0, 1]
        if which == "sigma_x":
            return c1 * (ex + nu * ey)
        if which == "sigma_y":
            return c1 * (ey + nu * ex)
        return mu * gxy

    return extract


#: Factory registry keyed by the benchmark identifiers used on the CLI.
EXAMPLES = {
    "I": example_1d_dirichlet,
    "II": example_2d_annulus,
    "III": example_3d_cube,
    "IV": example_beam,
    "V": example_1d_mixed,
}


def make_example(example_id: str, **kwargs) -> BvpDefinition:
    try:
        factory = EXAMPLES[example_id]
    except KeyError:
        raise KeyError(
            f"unknown example {example_id!r}; choose one of {sorted(EXAMPLES)}"
        ) from None
    return factory(**kwargs)
