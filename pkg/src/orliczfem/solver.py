"""Damped Newton minimisation of int phi_delta(|eps u|) - f.u with zero Dirichlet data.

The energy is strictly convex for quadratic-growth specs, its discrete
gradient is exactly the assembled residual and its Hessian the assembled
Jacobian (same quadrature everywhere), so Newton with Armijo backtracking is
globally convergent and the energy decreases along every accepted step.

``delta_continuation`` solves a warm-started sequence of truncated problems
with trunc_lo decreasing and trunc_hi increasing, recording the W^{1,2} data
of the transformed strain per stage; that sequence approximates the
untruncated degenerate/singular problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.sparse.linalg import factorized

from .fem import (
    FemField,
    _coeff_ratio,
    assemble_jacobian,
    assemble_residual,
    modular,
    quad_cache,
    strain_mandel,
    values_at_qp,
    w12_norm_v,
)
from .meshing import Mesh
from .nfunctions import DomainError, NFunction

__all__ = [
    "SolveConfig",
    "SolveTrace",
    "StageResult",
    "NonConvergenceError",
    "ContinuationError",
    "energy",
    "solve",
    "delta_continuation",
    "DEFAULT_SCHEDULE",
]

#: trunc_lo decreasing, trunc_hi = 1/trunc_lo increasing.  Six decades: the
#: singular exponents need the extra stages before the W^{1,2} data of the
#: transformed strain settles between consecutive stages.
DEFAULT_SCHEDULE = tuple((10.0 ** (-k), 10.0**k) for k in range(1, 7))


@dataclass(frozen=True)
class SolveConfig:
    newton_tol: float = 1e-9
    max_iters: int = 60
    line_search: str = "armijo"
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    delta_schedule: tuple = DEFAULT_SCHEDULE

    def __post_init__(self):
        if not (self.newton_tol > 0.0):
            raise DomainError("newton_tol must be positive")
        if self.line_search != "armijo":
            raise DomainError(f"unsupported line search {self.line_search!r}")
        if not (0.0 < self.armijo_c < 1.0):
            raise DomainError("armijo_c must lie in (0, 1)")
        los = [lo for lo, _ in self.delta_schedule]
        his = [hi for _, hi in self.delta_schedule]
        if any(a < b for a, b in zip(los, los[1:])) or any(
            a > b for a, b in zip(his, his[1:])
        ):
            raise DomainError("delta schedule must have lo non-increasing, hi non-decreasing")


@dataclass
class SolveTrace:
    """Per-iteration record of one Newton solve."""

    rows: list = dataclass_field(default_factory=list)  # (iter, energy, residual, step)

    def append(self, iteration, energy_value, residual, step):
        self.rows.append((int(iteration), float(energy_value), float(residual), float(step)))

    @property
    def iterations(self) -> int:
        return len(self.rows) - 1 if self.rows else 0

    def energies(self):
        return [r[1] for r in self.rows]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iter,energy,residual,step\n")
            for it, en, res, st in self.rows:
                fh.write(f"{it},{en:.17g},{res:.17g},{st:.17g}\n")


class NonConvergenceError(RuntimeError):
    """Newton failed to reach the residual tolerance; carries the trace."""

    def __init__(self, message, trace: SolveTrace):
        super().__init__(message)
        self.trace = trace


class ContinuationError(RuntimeError):
    """A continuation stage failed; carries the completed stages."""

    def __init__(self, message, stages):
        super().__init__(message)
        self.stages = stages


def energy(spec: NFunction, field: FemField, f: FemField) -> float:
    """J(u) = int phi(|eps u|) - int f . u with the assembly quadrature."""
    cache = quad_cache(field.mesh)
    load = float(
        np.sum(cache.weights[..., None] * values_at_qp(f) * values_at_qp(field))
    )
    return modular(spec, field, "sym_grad") - load


def solve(
    mesh: Mesh,
    spec: NFunction,
    f: FemField,
    cfg: SolveConfig | None = None,
    initial: FemField | None = None,
):
    """Newton-solve the zero-boundary problem; returns (field, trace).

    The spec must have quadratic growth (truncate degenerate specs first).
    """
    cfg = cfg or SolveConfig()
    if not spec.has_quadratic_growth():
        raise DomainError(
            f"{spec.describe()} lacks quadratic growth; "
            "truncate it (trunc_lo > 0, trunc_hi < oo) before solving"
        )
    cache = quad_cache(mesh)
    free = ~cache.boundary_vector()

    u = FemField.zeros(mesh) if initial is None else initial.with_zero_boundary()
    trace = SolveTrace()
    step = 0.0
    for it in range(cfg.max_iters + 1):
        residual = assemble_residual(spec, u, f)
        res_norm = float(np.linalg.norm(residual[free]))
        current = energy(spec, u, f)
        trace.append(it, current, res_norm, step)
        if res_norm <= cfg.newton_tol:
            return u, trace
        if it == cfg.max_iters:
            break

        jac = assemble_jacobian(spec, u)
        jac_ff = jac[free][:, free].tocsc()
        direction = factorized(jac_ff)(-residual[free])
        slope = float(residual[free] @ direction)
        if not (slope < 0.0) or not np.isfinite(slope):
            raise RuntimeError(
                "internal error: Newton direction is not a descent direction "
                "(indefinite Jacobian should be impossible for quadratic-growth specs)"
            )

        full = np.zeros(cache.n_vector)
        full[free] = direction
        increment = full.reshape(-1, 2)

        step = 1.0
        while True:
            candidate = FemField(mesh, u.coeffs + step * increment, zero_boundary=True)
            if energy(spec, candidate, f) <= current + cfg.armijo_c * step * slope:
                break
            step *= cfg.backtrack
            if step < cfg.min_step:
                raise NonConvergenceError(
                    f"line search stalled at iteration {it} (residual {res_norm:.3e})",
                    trace,
                )
        u = candidate

    raise NonConvergenceError(
        f"no convergence within {cfg.max_iters} Newton iterations "
        f"(residual {res_norm:.3e} > tol {cfg.newton_tol:.3e})",
        trace,
    )


def v_strain_mandel(spec: NFunction, field: FemField) -> np.ndarray:
    """(nc, q, 3) Mandel form of v_map(eps u) at the quadrature points."""
    E = strain_mandel(field)
    t = np.sqrt(np.sum(E * E, axis=-1))
    return np.sqrt(_coeff_ratio(spec, t))[..., None] * E


@dataclass
class StageResult:
    trunc_lo: float
    trunc_hi: float
    field: FemField
    w12_l2: float
    w12_semi: float
    cauchy_prev: float  # L2 distance of transformed strains to the previous stage
    trace: SolveTrace

    @property
    def w12_total(self) -> float:
        return self.w12_l2 + self.w12_semi


def delta_continuation(
    mesh: Mesh,
    spec: NFunction,
    f: FemField,
    cfg: SolveConfig | None = None,
    stage_forcing=None,
):
    """Warm-started truncation continuation; returns the list of stage results.

    ``stage_forcing(trunc_lo, trunc_hi) -> FemField`` may supply a per-stage
    forcing (e.g. a Lipschitz-truncated one); by default every stage uses f.
    """
    cfg = cfg or SolveConfig()
    if not cfg.delta_schedule:
        raise DomainError("delta schedule is empty")
    cache = quad_cache(mesh)
    stages: list[StageResult] = []
    u = None
    prev_v = None
    for lo, hi in cfg.delta_schedule:
        stage_spec = spec.truncate(lo, hi)
        stage_f = f if stage_forcing is None else stage_forcing(lo, hi)
        try:
            u, trace = solve(mesh, stage_spec, stage_f, cfg, initial=u)
        except NonConvergenceError as exc:
            raise ContinuationError(
                f"stage (trunc_lo={lo}, trunc_hi={hi}) failed: {exc}", stages
            ) from exc
        l2_part, semi_part = w12_norm_v(stage_spec, u)
        v_now = v_strain_mandel(stage_spec, u)
        if prev_v is None:
            cauchy = math.nan
        else:
            diff = v_now - prev_v
            cauchy = float(
                math.sqrt(np.sum(cache.weights * np.sum(diff * diff, axis=-1)))
            )
        prev_v = v_now
        stages.append(StageResult(lo, hi, u.copy(), l2_part, semi_part, cauchy, trace))
    return stages
