"""The six experiment suites and their pass/fail contracts.

Each suite turns one family of estimates into rows (written as CSV by the CLI)
plus a list of contract checks.  The contracts encode the measurable form of
each estimate: exact identities at machine tolerance, inequality sweeps with
zero violations, and empirical constant envelopes asserted to be bounded and
stable under refinement.

Suite -> estimate map:

* ``indices_suite``      index formulas and the scalar inequality sweeps
                         (Simonenko bounds, doubling constants, Young gap,
                         conjugate sandwich, truncation error bound)
* ``hammer_suite``       three-way monotonicity equivalence and the stress /
                         transform derivatives against finite differences
* ``korn_suite``         Korn and Poincare modular inequalities on random
                         zero-boundary ensembles
* ``manufactured``       solver convergence against manufactured solutions
* ``regularity_sweep``   energy estimate, global W^{1,2} regularity ratio of
                         the transformed strain, interior Caccioppoli ratios,
                         and the Hoelder interpolation step
* ``truncation_suite``   truncation-conjugation duality, discrete Lipschitz
                         truncation properties, and the truncated-forcing
                         modular bound
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fem import (
    FemField,
    korn_ratio,
    korn_ratio_meanfree,
    modular,
    poincare_ratio,
    quad_cache,
    random_zero_boundary_field,
    values_at_qp,
    gradient_at_qp,
)
from .inequalities import inequality_margins
from .manufactured import convergence_study, sine_bubble
from .meshing import build_mesh
from .nfunctions import (
    DeltaPower,
    DomainError,
    NFunction,
    PowerLaw,
    SumPower,
    Truncated,
    from_text,
    truncation_dual_gap,
)
from .regularity import (
    caccioppoli_ratio,
    default_disk_forcing,
    interpolation_step_check,
    regularity_ratio,
)
from .solver import SolveConfig
from .tensors import a_map, da_map, dv_map, frobenius, hammer_triple, random_sym, v_map
from .truncation import (
    GridFunction,
    bad_set,
    discrete_lipschitz,
    f_truncation_for_solver,
    grid_modular,
    lipschitz_truncate,
)

__all__ = ["ContractCheck", "SuiteResult", "SUITES", "run_suite", "DEFAULT_SPEC_ROSTER"]


DEFAULT_SPEC_ROSTER = (
    PowerLaw(1.3),
    PowerLaw(1.5),
    PowerLaw(2.0),
    PowerLaw(3.0),
    PowerLaw(4.0),
    DeltaPower(3.0, 1.0),
    DeltaPower(1.5, 0.1),
    SumPower(1.5, 3.0),
    Truncated(PowerLaw(3.0), 0.1, 10.0),
    Truncated(PowerLaw(1.3), 1e-4, 1e4),
    Truncated(DeltaPower(1.5, 0.5), 0.01, 100.0),
)

#: Pinned contract tolerances and envelopes (measured once, frozen here).
MARGIN_TOL = 1e-9
YOUNG_TOL = 1e-12
INDEX_TOL = 1e-6
GRID_INDEX_TOL = 5e-3
HAMMER_ENVELOPE = 100.0
HAMMER_P2_TOL = 1e-12
FD_TOL = 1e-6
KORN_ENVELOPE = 4.0
KORN_STABILITY = 0.3
POINCARE_ENVELOPE = 1.0
RATE_P2 = 1.9
RATE_NONLINEAR = 1.0
ENERGY_SPREAD = 10.0
REG_H_STEP = 0.10
REG_STAGE_STEP = 0.10
CACC_SPREAD = 10.0
CACC_H_STABILITY = 0.5
INTERP_MIN = 1.0 - 1e-10
INTERP_MAX = 50.0
DUAL_TOL = 1e-8
LIP_SLACK = 1e-12
MODULAR_ENVELOPE = 10.0
KDELTA_ENVELOPE = 50.0


@dataclass
class ContractCheck:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteResult:
    suite: str
    header: list
    rows: list
    contracts: list
    summary: dict = dataclass_field(default_factory=dict)
    traces: dict = dataclass_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.contracts)


def _parallel(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _rel_step(previous: float, current: float) -> float:
    if previous == 0.0:
        return 0.0 if current == 0.0 else math.inf
    return abs(current - previous) / previous


def _spec_from_options(options: dict) -> NFunction | None:
    block = options.get("spec")
    if not block:
        return None
    return from_text("\n".join(f"{k}={v}" for k, v in block.items()))


def _solve_config(options: dict) -> SolveConfig:
    solver = options.get("solver", {})
    schedule = options.get("schedule", {})
    kwargs = {}
    if "newton_tol" in solver:
        kwargs["newton_tol"] = solver["newton_tol"]
    if "max_iters" in solver:
        kwargs["max_iters"] = solver["max_iters"]
    if "armijo_c" in solver:
        kwargs["armijo_c"] = solver["armijo_c"]
    if schedule:
        los = schedule.get("delta_lo")
        his = schedule.get("delta_hi")
        if los is None or his is None or len(los) != len(his):
            raise DomainError("schedule needs matching delta_lo and delta_hi lists")
        kwargs["delta_schedule"] = tuple(zip(los, his))
    return SolveConfig(**kwargs)


# ---------------------------------------------------------------------------
# indices suite
# ---------------------------------------------------------------------------

_MARGIN_COLUMNS = [
    "simonenko_lo",
    "simonenko_hi",
    "scaling_lo",
    "scaling_hi",
    "delta2_phi",
    "delta2_conj",
    "sandwich_lo",
    "sandwich_hi",
    "young",
    "trunc_identity",
    "trunc_approx",
    "quad_growth_lo",
    "quad_growth_hi",
]


def run_indices_suite(options: dict, seed: int, jobs: int) -> SuiteResult:
    single = _spec_from_options(options)
    specs = [single] if single is not None else list(DEFAULT_SPEC_ROSTER)

    def work(spec):
        idx = spec.indices()
        grid = spec.indices_grid()
        return spec, idx, grid, inequality_margins(spec)

    results = _parallel(work, specs, jobs)
    header = ["spec", "p_minus", "p_plus", "grid_p_minus", "grid_p_plus"] + _MARGIN_COLUMNS
    rows = []
    contracts = []
    worst = {}
    for spec, idx, grid, margins in results:
        rows.append(
            [spec.describe(), idx.p_minus, idx.p_plus, grid.p_minus, grid.p_plus]
            + [margins.get(c) for c in _MARGIN_COLUMNS]
        )
        for name, value in margins.items():
            worst[name] = min(worst.get(name, math.inf), value)

    exact_ok = True
    details = []
    for spec, idx, grid, _ in results:
        if isinstance(spec, PowerLaw):
            expect = (spec.p, spec.p)
        elif isinstance(spec, DeltaPower) and spec.delta > 0:
            expect = (min(spec.p, 2.0), max(spec.p, 2.0))
        else:
            continue
        err = max(abs(idx.p_minus - expect[0]), abs(idx.p_plus - expect[1]))
        if err > INDEX_TOL:
            exact_ok = False
            details.append(f"{spec.describe()}: index error {err:.3e}")
    contracts.append(
        ContractCheck("index_exactness", exact_ok, "; ".join(details) or "all within 1e-6")
    )

    def _grid_consistent(spec, idx, grid):
        inside = (
            grid.p_minus >= idx.p_minus - GRID_INDEX_TOL
            and grid.p_plus <= idx.p_plus + GRID_INDEX_TOL
        )
        if isinstance(spec, Truncated):
            return inside  # hull indices are conservative: containment only
        close = (
            idx.p_minus - grid.p_minus <= GRID_INDEX_TOL
            and idx.p_plus - grid.p_plus <= GRID_INDEX_TOL
        )
        return inside and close

    grid_ok = all(_grid_consistent(spec, idx, grid) for spec, idx, grid, _ in results)
    contracts.append(
        ContractCheck(
            "grid_reconciliation",
            grid_ok,
            f"grid estimates within {GRID_INDEX_TOL} of closed forms (inside for truncations)",
        )
    )

    violations = {
        name: value
        for name, value in worst.items()
        if value < -(YOUNG_TOL if name == "young" else MARGIN_TOL)
    }
    contracts.append(
        ContractCheck(
            "scalar_inequalities_zero_violations",
            not violations,
            f"violated: {violations}" if violations else "all inequality margins nonnegative",
        )
    )
    return SuiteResult("indices_suite", header, rows, contracts, {"worst_margins": worst})


# ---------------------------------------------------------------------------
# hammer suite
# ---------------------------------------------------------------------------


def run_hammer_suite(options: dict, seed: int, jobs: int) -> SuiteResult:
    block = options.get("hammer", {})
    n_pairs = int(block.get("pairs", 10_000))
    n_fd = int(block.get("fd_samples", 1_000))
    single = _spec_from_options(options)
    specs = [single] if single is not None else list(DEFAULT_SPEC_ROSTER)

    def work(item):
        index, spec = item
        rng = np.random.default_rng([seed, index])
        P = random_sym(rng, n_pairs)
        Q = random_sym(rng, n_pairs)
        trip = hammer_triple(spec, P, Q)
        r1 = trip.lhs / trip.mid
        r2 = trip.mid / trip.rhs
        ratios = (float(min(r1.min(), r2.min())), float(max(r1.max(), r2.max())))

        Pf = random_sym(rng, n_fd, scale=(1e-1, 1e1))
        Hf = random_sym(rng, n_fd, scale=(1.0, 1.0))
        if isinstance(spec, Truncated):
            t = frobenius(Pf)
            for kink in (spec.lo, spec.hi):
                if 0.0 < kink < math.inf:
                    Pf[np.abs(t - kink) < 1e-3] *= 1.01
        h = 1e-5
        fd_a = (np.asarray(a_map(spec, Pf + h * Hf)) - np.asarray(a_map(spec, Pf - h * Hf))) / (
            2 * h
        )
        fd_v = (np.asarray(v_map(spec, Pf + h * Hf)) - np.asarray(v_map(spec, Pf - h * Hf))) / (
            2 * h
        )
        err_a = float(np.max(frobenius(fd_a - np.asarray(da_map(spec, Pf, Hf))) / frobenius(fd_a)))
        err_v = float(np.max(frobenius(fd_v - np.asarray(dv_map(spec, Pf, Hf))) / frobenius(fd_v)))
        return spec, ratios, err_a, err_v

    results = _parallel(work, list(enumerate(specs)), jobs)
    header = ["spec", "ratio_min", "ratio_max", "fd_err_stress", "fd_err_transform"]
    rows = [
        [spec.describe(), ratios[0], ratios[1], err_a, err_v]
        for spec, ratios, err_a, err_v in results
    ]

    env_ok = all(
        ratios[0] >= 1.0 / HAMMER_ENVELOPE and ratios[1] <= HAMMER_ENVELOPE
        for _, ratios, _, _ in results
    )
    p2_detail = "no quadratic spec in roster"
    p2_ok = True
    for spec, ratios, _, _ in results:
        if isinstance(spec, PowerLaw) and spec.p == 2.0:
            p2_ok = (
                abs(ratios[0] - 1.0) <= HAMMER_P2_TOL and abs(ratios[1] - 1.0) <= HAMMER_P2_TOL
            )
            p2_detail = f"envelope [{ratios[0]:.2e}, {ratios[1]:.2e}] at p=2"
    fd_ok = all(err_a <= FD_TOL and err_v <= FD_TOL for _, _, err_a, err_v in results)

    contracts = [
        ContractCheck(
            "hammer_envelope", env_ok, f"pairwise ratios within [1/{HAMMER_ENVELOPE:g}, {HAMMER_ENVELOPE:g}]"
        ),
        ContractCheck("hammer_p2_exact", p2_ok, p2_detail),
        ContractCheck("derivative_fd_match", fd_ok, f"relative error <= {FD_TOL:g} at h=1e-5"),
    ]
    return SuiteResult("hammer_suite", header, rows, contracts)


# ---------------------------------------------------------------------------
# korn suite
# ---------------------------------------------------------------------------


def run_korn_suite(options: dict, seed: int, jobs: int) -> SuiteResult:
    block = options.get("korn", {})
    ensemble = int(block.get("ensemble", 100))
    mesh_block = options.get("mesh", {})
    domain = mesh_block.get("domain", "unit_square")
    h_values = mesh_block.get("h", [0.25, 0.125])
    p_values = options.get("sweep", {}).get("p_values", [1.3, 1.5, 2.0, 3.0])

    items = [(i, p, h) for i, (p, h) in enumerate((p, h) for p in p_values for h in h_values)]

    def work(item):
        index, p, h = item
        rng = np.random.default_rng([seed, index])
        spec = PowerLaw(p)
        mesh = build_mesh(domain, h)
        korn_max = meanfree_max = poincare_max = 0.0
        for _ in range(ensemble):
            field = random_zero_boundary_field(mesh, rng)
            korn_max = max(korn_max, korn_ratio(spec, field))
            meanfree_max = max(meanfree_max, korn_ratio_meanfree(spec, field))
            poincare_max = max(poincare_max, poincare_ratio(spec, field, r=1.0))
        return p, h, korn_max, meanfree_max, poincare_max

    results = _parallel(work, items, jobs)
    header = ["p", "h", "korn_max", "korn_meanfree_max", "poincare_max"]
    rows = [list(r) for r in results]

    korn_ok = all(r[2] <= KORN_ENVELOPE and r[3] <= KORN_ENVELOPE for r in results)
    poincare_ok = all(r[4] <= POINCARE_ENVELOPE for r in results)
    stable = True
    details = []
    for p in p_values:
        maxima = [r[2] for r in results if r[0] == p]
        for a, b in zip(maxima, maxima[1:]):
            if abs(b - a) / a > KORN_STABILITY:
                stable = False
                details.append(f"p={p}: korn max moved {a:.3f} -> {b:.3f}")
    contracts = [
        ContractCheck("korn_envelope", korn_ok, f"ensemble maxima <= {KORN_ENVELOPE}"),
        ContractCheck("poincare_envelope", poincare_ok, f"ensemble maxima <= {POINCARE_ENVELOPE}"),
        ContractCheck(
            "korn_refinement_stability",
            stable,
            "; ".join(details) or f"maxima move <= {KORN_STABILITY:.0%} under refinement",
        ),
    ]
    return SuiteResult("korn_suite", header, rows, contracts)


# ---------------------------------------------------------------------------
# manufactured suite
# ---------------------------------------------------------------------------

_MANUFACTURED_CASES = (
    ("power2", PowerLaw(2.0), (1e-4, 1e4), RATE_P2),
    ("power3", PowerLaw(3.0), (1e-4, 1e4), RATE_NONLINEAR),
    ("power1.5", PowerLaw(1.5), (1e-2, 1e2), RATE_NONLINEAR),
    ("delta_power3", DeltaPower(3.0, 1.0), (1e-4, 1e4), RATE_NONLINEAR),
)


def run_manufactured(options: dict, seed: int, jobs: int) -> SuiteResult:
    h_values = options.get("manufactured", {}).get("h", [0.25, 0.125, 0.0625])
    cfg = _solve_config(options)
    case = sine_bubble()

    def work(entry):
        label, base, (lo, hi), min_rate = entry
        spec = base.truncate(lo, hi)
        errors, rates = convergence_study(spec, case, h_values, cfg=cfg)
        slope = float(
            np.polyfit(np.log(np.asarray(h_values)), np.log(np.asarray(errors)), 1)[0]
        )
        return label, base, (lo, hi), min_rate, errors, rates, slope

    results = _parallel(work, list(_MANUFACTURED_CASES), jobs)
    header = ["case", "trunc_lo", "trunc_hi", "h", "h1_error", "pair_rate", "ls_rate"]
    rows = []
    contracts = []
    for label, base, (lo, hi), min_rate, errors, rates, slope in results:
        for i, h in enumerate(h_values):
            rows.append(
                [label, lo, hi, h, errors[i], rates[i - 1] if i > 0 else None, slope]
            )
        contracts.append(
            ContractCheck(
                f"rate_{label}",
                slope >= min_rate,
                f"LS slope {slope:.3f} over {len(h_values)} refinements (need >= {min_rate})",
            )
        )
    return SuiteResult("manufactured", header, rows, contracts)


# ---------------------------------------------------------------------------
# regularity sweep
# ---------------------------------------------------------------------------

_CACC_CENTERS = ((0.0, 0.0), (0.25, 0.1), (-0.15, 0.2))
_CACC_RADII = (0.05, 0.1, 0.2, 0.3)


def run_regularity_sweep(options: dict, seed: int, jobs: int) -> SuiteResult:
    mesh_block = options.get("mesh", {})
    domain = mesh_block.get("domain", "unit_disk")
    h_values = mesh_block.get("h", [0.25, 0.125, 0.0625])
    lattice_n = int(mesh_block.get("lattice_n", 64))
    p_values = options.get("sweep", {}).get("p_values", [1.3, 1.5, 2.0, 3.0, 4.0])
    amplitude = options.get("forcing", {}).get("amplitude", 1.0)
    cfg = _solve_config(options)

    def work(item):
        p, h = item
        spec = PowerLaw(p)
        mesh = build_mesh(domain, h)
        f = default_disk_forcing(mesh, amplitude)
        report, stages = regularity_ratio(spec, mesh, f, cfg, lattice_n)
        rows = []
        traces = {}
        for k, stage in enumerate(stages):
            stage_spec = spec.truncate(stage.trunc_lo, stage.trunc_hi)
            lhs_energy = modular(stage_spec, stage.field, "sym_grad")
            conj = stage_spec.conjugate_spec()
            cache = quad_cache(mesh)
            fv = values_at_qp(f)
            rhs_energy = float(
                np.sum(cache.weights * conj.phi(np.sqrt(np.sum(fv * fv, axis=-1))))
            )
            rows.append(
                (
                    "energy",
                    p,
                    h,
                    stage.trunc_lo,
                    stage.trunc_hi,
                    None,
                    None,
                    None,
                    lhs_energy,
                    rhs_energy,
                    lhs_energy / rhs_energy,
                    stage.cauchy_prev,
                )
            )
            rows.append(
                (
                    "regularity",
                    p,
                    h,
                    stage.trunc_lo,
                    stage.trunc_hi,
                    None,
                    None,
                    None,
                    stage.w12_total,
                    report.rhs,
                    stage.w12_total / report.rhs,
                    stage.cauchy_prev,
                )
            )
            traces[f"p{p:g}_h{h:g}_stage{k}"] = stage.trace

        final = stages[-1]
        final_spec = spec.truncate(final.trunc_lo, final.trunc_hi)
        for cx, cy in _CACC_CENTERS:
            for radius in _CACC_RADII:
                if math.hypot(cx, cy) + 2.0 * radius >= 0.98:
                    continue
                if radius < h:  # ball means below mesh resolution are noise
                    continue
                ratio = caccioppoli_ratio(spec, final.field, f, (cx, cy), radius)
                rows.append(
                    ("caccioppoli", p, h, None, None, cx, cy, radius, None, None, ratio, None)
                )
        if p < 2.0:
            ratio = interpolation_step_check(spec, final.field, final_spec)
            rows.append(
                ("interp_step", p, h, final.trunc_lo, final.trunc_hi, None, None, None, None, None, ratio, None)
            )
        return rows, traces

    items = [(p, h) for p in p_values for h in h_values]
    results = _parallel(work, items, jobs)
    header = [
        "experiment",
        "p",
        "h",
        "delta_lo",
        "delta_hi",
        "center_x",
        "center_y",
        "radius",
        "lhs",
        "rhs",
        "ratio",
        "cauchy",
    ]
    rows = []
    traces = {}
    for row_block, trace_block in results:
        rows.extend(row_block)
        traces.update(trace_block)

    contracts = []
    energy_ratios = np.array([r[10] for r in rows if r[0] == "energy"])
    spread = float(energy_ratios.max() / np.median(energy_ratios))
    contracts.append(
        ContractCheck(
            "energy_envelope",
            spread <= ENERGY_SPREAD,
            f"max/median = {spread:.2f} over {energy_ratios.size} stage ratios "
            f"(need <= {ENERGY_SPREAD:g})",
        )
    )

    h_sorted = sorted(h_values, reverse=True)
    for p in p_values:
        finals = []
        for h in h_sorted:
            stage_rows = [r for r in rows if r[0] == "regularity" and r[1] == p and r[2] == h]
            finals.append(stage_rows[-1][10])
            if h == h_sorted[-1]:
                stage_seq = [r[10] for r in stage_rows]
        monotone = all(b <= a * 1.02 for a, b in zip(finals, finals[1:]))
        last_step = _rel_step(finals[-2], finals[-1]) if len(finals) > 1 else 0.0
        ok_h = monotone or last_step <= REG_H_STEP
        contracts.append(
            ContractCheck(
                f"regularity_h_stability_p{p:g}",
                ok_h,
                f"ratios over h: {[f'{v:.4g}' for v in finals]} (last step {last_step:.1%})",
            )
        )
        stage_step = _rel_step(stage_seq[-2], stage_seq[-1]) if len(stage_seq) > 1 else 0.0
        contracts.append(
            ContractCheck(
                f"regularity_stage_stability_p{p:g}",
                stage_step <= REG_STAGE_STEP,
                f"last two stage ratios move {stage_step:.2%} (need <= {REG_STAGE_STEP:.0%})",
            )
        )

    for p in p_values:
        cacc = np.array([r[10] for r in rows if r[0] == "caccioppoli" and r[1] == p])
        if cacc.size == 0:  # every ball below mesh resolution
            continue
        cacc_med = float(np.median(cacc))
        ok_env = bool(np.all(np.isfinite(cacc))) and cacc.max() <= CACC_SPREAD * cacc_med
        per_h_max = [
            max((r[10] for r in rows if r[0] == "caccioppoli" and r[1] == p and r[2] == h), default=None)
            for h in h_sorted
        ]
        per_h_max = [v for v in per_h_max if v is not None]
        ok_stab = (
            len(per_h_max) < 2 or _rel_step(per_h_max[-2], per_h_max[-1]) <= CACC_H_STABILITY
        )
        contracts.append(
            ContractCheck(
                f"caccioppoli_envelope_p{p:g}",
                ok_env and ok_stab,
                f"max/median {cacc.max() / cacc_med:.2f}, per-h maxima "
                f"{[f'{v:.3g}' for v in per_h_max]}",
            )
        )

    interp = [r for r in rows if r[0] == "interp_step"]
    if interp:
        vals = np.array([r[10] for r in interp])
        ok = bool(np.all(vals >= INTERP_MIN) and np.all(vals <= INTERP_MAX))
        contracts.append(
            ContractCheck(
                "interpolation_gap",
                ok,
                f"gap ratios in [{vals.min():.3f}, {vals.max():.3f}] (need >= 1, <= {INTERP_MAX:g})",
            )
        )

    summary = {
        "energy_spread": spread,
        "h_values": list(h_values),
        "p_values": list(p_values),
        "schedule": [list(s) for s in cfg.delta_schedule],
    }
    return SuiteResult("regularity_sweep", header, rows, contracts, summary, traces)


# ---------------------------------------------------------------------------
# truncation suite
# ---------------------------------------------------------------------------

_DUAL_COMBOS = (
    (PowerLaw(2.0), 1.0, 1.0),
    (PowerLaw(3.0), 0.5, 2.0),
    (PowerLaw(1.3), 0.1, 10.0),
    (DeltaPower(1.5, 0.1), 0.2, 5.0),
    (DeltaPower(3.0, 1.0), 0.05, 20.0),
    (SumPower(1.5, 3.0), 0.5, 4.0),
)


def _test_functions(seed: int):
    rng = np.random.default_rng([seed, 77])
    cx, cy, sharp = rng.uniform(0.2, 0.8, 5), rng.uniform(0.2, 0.8, 5), rng.uniform(2, 30, 5)
    return {
        "sine": lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y),
        "spike": lambda X, Y: np.maximum(
            0.0, 1.0 - 10.0 * np.sqrt((X - 0.5) ** 2 + (Y - 0.5) ** 2)
        ),
        "oscillation": lambda X, Y: 16
        * np.sin(4 * np.pi * X)
        * np.sin(4 * np.pi * Y)
        * X
        * (1 - X)
        * Y
        * (1 - Y),
        "bumps": lambda X, Y: sum(
            np.exp(-s * ((X - a) ** 2 + (Y - b) ** 2)) for a, b, s in zip(cx, cy, sharp)
        )
        * np.sin(np.pi * X)
        * np.sin(np.pi * Y),
        "pyramid": lambda X, Y: 4.0
        * np.minimum(np.minimum(X, 1 - X), np.minimum(Y, 1 - Y)),
    }


_LAMBDA_SWEEP = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0)


def run_truncation_suite(options: dict, seed: int, jobs: int) -> SuiteResult:
    lattice_n = int(options.get("truncation", {}).get("lattice_n", 64))
    rows = []
    contracts = []

    # conjugation duality of truncations
    dual_worst = 0.0
    for spec, lo, hi in _DUAL_COMBOS:
        s = np.linspace(0.0, float(spec.d_phi(np.asarray(hi))), 256)
        gap = float(np.max(truncation_dual_gap(spec, lo, hi, s)))
        dual_worst = max(dual_worst, gap)
        rows.append(("dual_gap", spec.describe(), lo, hi, None, gap, None, None, None))
    contracts.append(
        ContractCheck(
            "truncation_duality",
            dual_worst <= DUAL_TOL,
            f"max gap {dual_worst:.2e} over 256 samples x {len(_DUAL_COMBOS)} combos",
        )
    )

    # Lipschitz truncation properties on the lattice
    bbox = (0.0, 1.0, 0.0, 1.0)
    spec_mod = PowerLaw(1.5)
    lip_ok = True
    containment_ok = True
    recovery_ok = True
    ratio_worst = 0.0
    for name, func in _test_functions(seed).items():
        gf = GridFunction.sample(func, bbox, lattice_n)
        scale = max(1.0, float(np.abs(gf.values).max()))
        diff_mods = []
        for lam in _LAMBDA_SWEEP:
            trunc = lipschitz_truncate(gf, lam)
            lip = discrete_lipschitz(trunc)
            bad = bad_set(gf, lam)
            disagree = np.abs(gf.values - trunc.values) > 1e-12 * scale
            contained = not np.any(disagree & ~bad)
            diff = GridFunction(gf.values - trunc.values, gf.origin, gf.spacing)
            diff_mod = grid_modular(spec_mod, diff, "grad")
            val_num = grid_modular(spec_mod, trunc, "value")
            val_den = grid_modular(spec_mod, gf, "value")
            grad_num = grid_modular(spec_mod, trunc, "grad")
            grad_den = grid_modular(spec_mod, gf, "grad")
            ratio_v = val_num / val_den if val_den else 0.0
            ratio_g = grad_num / grad_den if grad_den else 0.0
            ratio_worst = max(ratio_worst, ratio_v, ratio_g)
            lip_ok &= lip <= lam * (1.0 + LIP_SLACK)
            containment_ok &= contained
            diff_mods.append(diff_mod)
            rows.append(
                ("lipschitz", name, None, None, lam, lip, int(contained), diff_mod, bad.mean())
            )
        # recovery: exactly v at the top of the sweep, bounded on the way there
        recovery_ok &= diff_mods[-1] == 0.0
        recovery_ok &= max(diff_mods) <= 2.0 * max(diff_mods[0], 1e-300)
    contracts.append(
        ContractCheck("lipschitz_level_exact", lip_ok, "discrete Lipschitz constant <= level")
    )
    contracts.append(
        ContractCheck(
            "lipschitz_bad_set_containment",
            containment_ok,
            "replacement confined to the dyadic bad set",
        )
    )
    contracts.append(
        ContractCheck(
            "lipschitz_recovery",
            recovery_ok,
            "difference modular bounded in the level and exactly 0 at the top",
        )
    )
    contracts.append(
        ContractCheck(
            "truncation_modular_envelope",
            ratio_worst <= MODULAR_ENVELOPE,
            f"value/gradient modular ratios <= {MODULAR_ENVELOPE:g} (worst {ratio_worst:.2f})",
        )
    )

    # truncated-forcing modular bound
    mesh = build_mesh("unit_disk", 1.0 / 8.0)
    cache = quad_cache(mesh)

    def rough(x, y):
        b = (1.0 - x * x - y * y) ** 2
        return np.stack([b * np.sin(4 * np.pi * x), b * np.cos(3 * np.pi * y)])

    f_rough = FemField.from_callable(mesh, rough, zero_boundary=True)
    fg = gradient_at_qp(f_rough)
    grad_mag = np.sqrt(np.sum(fg * fg, axis=(-2, -1)))
    kdelta_worst = 0.0
    for p in (1.3, 1.5, 3.0):
        spec = PowerLaw(p)
        conj = spec.conjugate_spec()
        base_mod = float(np.sum(cache.weights * conj.phi(grad_mag)))
        for lo, hi in ((0.5, 2.0), (0.1, 10.0)):
            fd = f_truncation_for_solver(f_rough, hi, spec, lattice_n)
            fdg = gradient_at_qp(fd)
            fd_mag = np.sqrt(np.sum(fdg * fdg, axis=(-2, -1)))
            conj_d = spec.truncate(lo, hi).conjugate_spec()
            lhs = float(np.sum(cache.weights * conj_d.phi(fd_mag)))
            rhs = float(spec.phi(np.asarray(lo))) + base_mod
            ratio = lhs / rhs
            kdelta_worst = max(kdelta_worst, ratio)
            rows.append(("kdelta", spec.describe(), lo, hi, None, ratio, None, None, None))
    contracts.append(
        ContractCheck(
            "truncated_forcing_bound",
            kdelta_worst <= KDELTA_ENVELOPE,
            f"modular of truncated forcing gradient within {KDELTA_ENVELOPE:g}x of its bound "
            f"(worst {kdelta_worst:.2f})",
        )
    )

    header = [
        "experiment",
        "label",
        "trunc_lo",
        "trunc_hi",
        "level",
        "value",
        "contained",
        "diff_modular",
        "bad_fraction",
    ]
    return SuiteResult("truncation_suite", header, rows, contracts)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteSpec:
    runner: object
    description: str
    template: str


SUITES = {
    "indices_suite": SuiteSpec(
        run_indices_suite,
        "index formulas and scalar inequality sweeps on log grids",
        "[experiment]\nkind = indices_suite\nseed = 1\n\n"
        "# optional: restrict to one spec\n[spec]\nvariant = power\np = 2.0\n",
    ),
    "hammer_suite": SuiteSpec(
        run_hammer_suite,
        "monotonicity equivalence triple and derivative checks on random tensors",
        "[experiment]\nkind = hammer_suite\nseed = 1\n\n[hammer]\npairs = 10000\nfd_samples = 1000\n",
    ),
    "korn_suite": SuiteSpec(
        run_korn_suite,
        "Korn/Poincare modular ratios on random zero-boundary ensembles",
        "[experiment]\nkind = korn_suite\nseed = 1\n\n[korn]\nensemble = 100\n\n"
        "[mesh]\ndomain = unit_square\nh = 0.25 0.125\n\n[sweep]\np_values = 1.3 1.5 2.0 3.0\n",
    ),
    "manufactured": SuiteSpec(
        run_manufactured,
        "solver convergence rates against manufactured solutions",
        "[experiment]\nkind = manufactured\nseed = 1\n\n[manufactured]\nh = 0.25 0.125 0.0625\n",
    ),
    "regularity_sweep": SuiteSpec(
        run_regularity_sweep,
        "energy, global regularity, Caccioppoli and interpolation ratios over p x h x stages",
        "[experiment]\nkind = regularity_sweep\nseed = 1\n\n"
        "[sweep]\np_values = 1.3 1.5 2.0 3.0 4.0\n\n"
        "[mesh]\ndomain = unit_disk\nh = 0.25 0.125 0.0625\nlattice_n = 64\n\n"
        "[solver]\nnewton_tol = 1e-9\nmax_iters = 60\narmijo_c = 1e-4\n\n"
        "[schedule]\ndelta_lo = 1e-1 1e-2 1e-3 1e-4 1e-5 1e-6\n"
        "delta_hi = 1e1 1e2 1e3 1e4 1e5 1e6\n\n[forcing]\namplitude = 1.0\n",
    ),
    "truncation_suite": SuiteSpec(
        run_truncation_suite,
        "truncation duality, lattice Lipschitz truncation, truncated-forcing bound",
        "[experiment]\nkind = truncation_suite\nseed = 1\n\n[truncation]\nlattice_n = 64\n",
    ),
}


def run_suite(kind: str, options: dict, seed: int, jobs: int = 1) -> SuiteResult:
    if kind not in SUITES:
        raise DomainError(f"unknown suite {kind!r}; valid: {', '.join(sorted(SUITES))}")
    return SUITES[kind].runner(options, seed, jobs)
