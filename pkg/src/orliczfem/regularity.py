"""Experiments measuring the a-priori estimates on solved fields.

* :func:`regularity_ratio`: the W^{1,2} data of the transformed strain of the
  truncation-continuation limit against the conjugate modulars of the forcing
  and its gradient (the global regularity bound).
* :func:`caccioppoli_ratio`: interior-ball means of phi(|eps u|) against the
  zeroth-order means over the doubled ball (rigid motions removed by weighted
  least squares) plus the conjugate modular of the scaled forcing.
* :func:`interpolation_step_check`: the discrete Hoelder step bounding
  int |grad eps u|^r through the transform seminorm and a high power of the
  strain; exact at the quadrature level, so the returned gap ratio is >= 1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fem import (
    FemField,
    gradient_at_qp,
    modular,
    quad_cache,
    region_measure,
    strain_grad_mandel,
    strain_mandel,
    values_at_qp,
    w12_norm_v,
)
from .meshing import Mesh
from .nfunctions import DomainError, NFunction, PowerLaw, Truncated
from .solver import SolveConfig, delta_continuation
from .truncation import f_truncation_for_solver

__all__ = [
    "RegularityReport",
    "default_disk_forcing",
    "conjugate_forcing_modulars",
    "energy_ratio",
    "regularity_ratio",
    "caccioppoli_ratio",
    "rigid_projection",
    "interpolation_step_check",
]


@dataclass
class RegularityReport:
    """One experiment record: measured sides, their ratio, and the protocol."""

    experiment: str
    spec: str
    h: float
    delta_stages: tuple
    lhs: float
    rhs: float
    ratio: float
    stats: dict = dataclass_field(default_factory=dict)
    runtime: float = 0.0  # informational; excluded from deterministic outputs

    def __post_init__(self):
        for value in (self.lhs, self.rhs, self.ratio):
            if not math.isfinite(value):
                raise DomainError(f"non-finite report entry in {self.experiment}")


def default_disk_forcing(mesh: Mesh, amplitude: float = 1.0) -> FemField:
    """Smooth zero-trace forcing (b y, b x) with b = a (1 - x^2 - y^2)^2.

    The swirl makes the solved strain pass through zero in the interior, so
    the truncation continuation is exercised nontrivially.
    """

    def func(x, y):
        b = amplitude * (1.0 - x * x - y * y) ** 2
        return np.stack([b * y, b * x])

    return FemField.from_callable(mesh, func, zero_boundary=True)


def conjugate_forcing_modulars(spec: NFunction, f: FemField):
    """(int phi*(|f|), int phi*(|grad f|)) with the untruncated conjugate."""
    cache = quad_cache(f.mesh)
    conj = spec.conjugate_spec()
    fv = values_at_qp(f)
    fg = gradient_at_qp(f)
    m_f = float(np.sum(cache.weights * conj.phi(np.sqrt(np.sum(fv * fv, axis=-1)))))
    m_g = float(np.sum(cache.weights * conj.phi(np.sqrt(np.sum(fg * fg, axis=(-2, -1))))))
    return m_f, m_g


def energy_ratio(spec: NFunction, field: FemField, f: FemField) -> float:
    """int phi(|eps u|) / int phi*(|f|) (the energy-estimate ratio)."""
    m_f, _ = conjugate_forcing_modulars(spec, f)
    lhs = modular(spec, field, "sym_grad")
    if m_f == 0.0:
        if lhs == 0.0:
            return 0.0
        raise DomainError("energy ratio undefined: zero forcing, nonzero strain")
    return lhs / m_f


def regularity_ratio(
    spec: NFunction,
    mesh: Mesh,
    f: FemField,
    cfg: SolveConfig | None = None,
    lattice_n: int = 64,
):
    """Run the truncation continuation and measure the global regularity ratio.

    Returns ``(report, stages)``.  The left side is the final-stage W^{1,2}
    data of the transformed strain; the right side is
    int phi*(|f|) + phi*(|grad f|).  Each stage solves against the forcing
    Lipschitz-truncated at level phi'(trunc_hi) of that stage.
    """
    if not f.zero_boundary:
        raise DomainError("regularity experiments need a zero-trace forcing")
    cfg = cfg or SolveConfig()
    start = time.perf_counter()
    stages = delta_continuation(
        mesh,
        spec,
        f,
        cfg,
        stage_forcing=lambda lo, hi: f_truncation_for_solver(f, hi, spec, lattice_n),
    )
    m_f, m_g = conjugate_forcing_modulars(spec, f)
    rhs = m_f + m_g
    lhs = stages[-1].w12_total
    ratio = lhs / rhs if rhs > 0.0 else 0.0
    stage_ratios = [s.w12_total / rhs if rhs > 0.0 else 0.0 for s in stages]
    report = RegularityReport(
        experiment="global_regularity",
        spec=spec.describe(),
        h=mesh.h,
        delta_stages=tuple(cfg.delta_schedule),
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        stats={
            "stage_ratios": stage_ratios,
            "cauchy": [s.cauchy_prev for s in stages[1:]],
            "forcing_modular": m_f,
            "forcing_grad_modular": m_g,
        },
        runtime=time.perf_counter() - start,
    )
    return report, stages


# ---------------------------------------------------------------------------
# Caccioppoli
# ---------------------------------------------------------------------------


def rigid_projection(field: FemField, region) -> np.ndarray:
    """Weighted L2 projection of the field onto rigid motions (a - c y, b + c x).

    Returns the coefficients (a, b, c); the projection is taken over the
    quadrature points selected by ``region``.
    """
    cache = quad_cache(field.mesh)
    mask = np.asarray(region(cache.qpoints[..., 0], cache.qpoints[..., 1]), dtype=bool)
    w = cache.weights * mask
    u = values_at_qp(field)
    x = cache.qpoints[..., 0]
    y = cache.qpoints[..., 1]
    # basis: (1,0), (0,1), (-y, x)
    g = np.zeros((3, 3))
    rhs = np.zeros(3)
    b3x, b3y = -y, x
    g[0, 0] = np.sum(w)
    g[1, 1] = np.sum(w)
    g[0, 2] = g[2, 0] = np.sum(w * b3x)
    g[1, 2] = g[2, 1] = np.sum(w * b3y)
    g[2, 2] = np.sum(w * (b3x * b3x + b3y * b3y))
    rhs[0] = np.sum(w * u[..., 0])
    rhs[1] = np.sum(w * u[..., 1])
    rhs[2] = np.sum(w * (u[..., 0] * b3x + u[..., 1] * b3y))
    return np.linalg.solve(g, rhs)


def caccioppoli_ratio(
    spec: NFunction, field: FemField, f: FemField, center, radius: float
) -> float:
    """Interior-ball ratio of the reverse estimate.

    lhs: mean of phi(|eps u|) over B(center, radius).
    rhs: mean of phi(|u - pi| / radius) over 2B at the least-squares rigid
    motion pi, plus the mean of phi*(radius |f|) over 2B.
    """
    mesh = field.mesh
    center = np.asarray(center, dtype=float)
    if float(mesh.boundary_distance(center[None, :])[0]) <= 2.0 * radius:
        raise DomainError("caccioppoli ball must satisfy 2B inside the domain")

    def ball(r):
        return lambda x, y: (x - center[0]) ** 2 + (y - center[1]) ** 2 <= r * r

    cache = quad_cache(mesh)
    lhs_meas = region_measure(mesh, ball(radius))
    rhs_meas = region_measure(mesh, ball(2.0 * radius))
    if lhs_meas == 0.0 or rhs_meas == 0.0:
        raise DomainError("caccioppoli ball contains no quadrature points")
    lhs = modular(spec, field, "sym_grad", region=ball(radius)) / lhs_meas

    a, b, c = rigid_projection(field, ball(2.0 * radius))
    mask = np.asarray(
        ball(2.0 * radius)(cache.qpoints[..., 0], cache.qpoints[..., 1]), dtype=bool
    )
    w = cache.weights * mask
    u = values_at_qp(field)
    x, y = cache.qpoints[..., 0], cache.qpoints[..., 1]
    dx = u[..., 0] - (a - c * y)
    dy = u[..., 1] - (b + c * x)
    mean_val = float(np.sum(w * spec.phi(np.sqrt(dx * dx + dy * dy) / radius))) / rhs_meas

    conj = spec.conjugate_spec()
    fv = values_at_qp(f)
    mean_force = (
        float(np.sum(w * conj.phi(radius * np.sqrt(np.sum(fv * fv, axis=-1))))) / rhs_meas
    )
    rhs = mean_val + mean_force
    # numerically rigid data: both means are roundoff dust of an exact zero
    if rhs <= 1e-26 and lhs <= 1e-26:
        return 0.0
    if rhs == 0.0:
        raise DomainError("caccioppoli ratio undefined: zero right side, nonzero strain")
    return lhs / rhs


# ---------------------------------------------------------------------------
# Hoelder interpolation step
# ---------------------------------------------------------------------------


def interpolation_step_check(
    spec: PowerLaw, field: FemField, stage_spec: Truncated, q: float = 8.0
) -> float:
    """Discrete gap ratio of the Hoelder step for power laws with p < 2.

    With r = 2q / (q + 2 - p) the finite-sum Hoelder inequality together with
    the pointwise bounds

        phi_delta''(t) >= (p - 1) max(t, trunc_lo)^(p - 2)
        sum_i |dv(eps u)[d_i eps u]|^2 >= phi_delta''(|eps u|) |grad eps u|^2

    gives, exactly at the quadrature level,

        int |grad eps u|^r
            <= (p-1)^(-r/2) (int |grad v(eps u)|^2)^(r/2)
               (int max(|eps u|, trunc_lo)^q)^((2-r)/2).

    Returns bound/lhs (>= 1 up to roundoff; inf when eps u is cellwise
    constant).  In two dimensions every finite power integrates, so q is a
    free protocol constant, fixed at 8.
    """
    if not isinstance(spec, PowerLaw) or not (spec.p < 2.0):
        raise DomainError("interpolation step check applies to power laws with p < 2")
    if not isinstance(stage_spec, Truncated) or stage_spec.lo <= 0.0:
        raise DomainError("interpolation step check needs the solver's truncated spec")
    p = spec.p
    r = 2.0 * q / (q + 2.0 - p)

    cache = quad_cache(field.mesh)
    dE = strain_grad_mandel(field)  # (nc, 2, 3), cellwise constant
    grad_eps = np.sqrt(np.sum(dE * dE, axis=(1, 2)))  # (nc,)
    if float(grad_eps.max(initial=0.0)) <= 1e-10:  # constant strain up to roundoff
        return math.inf
    lhs = float(np.sum(cache.weights * (grad_eps[:, None] ** r)))

    _, seminorm = w12_norm_v(stage_spec, field)
    E = strain_mandel(field)
    t = np.sqrt(np.sum(E * E, axis=-1))
    clamped = np.maximum(t, stage_spec.lo)
    power_int = float(np.sum(cache.weights * clamped**q))

    bound = (p - 1.0) ** (-r / 2.0) * seminorm ** (r / 2.0) * power_int ** ((2.0 - r) / 2.0)
    return bound / lhs
