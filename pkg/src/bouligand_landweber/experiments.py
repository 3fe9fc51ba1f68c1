"""Exact data, noise generation and the experiment campaigns.

The benchmark problem reconstructs the source

    u*(x1, x2) = max(y*, 0) + [4 pi^2 y*
                 - 2 ((2 x1 - 1)^2 + 2 (x1 - 1 + beta)(x1 - beta)) sin(2 pi x2)]
                 * ind_(beta, 1-beta](x1)

whose state is

    y*(x1, x2) = (x1 - beta)^2 (x1 - 1 + beta)^2 sin(2 pi x2) * ind_(beta, 1-beta](x1)

with beta = 0.005; y* vanishes on a strip of width 2 beta, so the forward
map is not differentiable at u*.  A second starting point

    u_bar = u* - 2 rho sin(pi x1) sin(2 pi x2)

places the initial error in the range of the subderivative at u*, which
speeds up the iteration considerably.

Noise is iid Gaussian per interior node, either with a raw amplitude sigma
or rescaled so the measured M-norm noise level matches a target exactly.
The generator is NumPy's default PCG64, seeded per cell, so all campaign
outputs are reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forward import ForwardProblem, solve_forward
from .landweber import LandweberConfig, RunRecord, empirical_rate, run
from .mesh_fem import GridFunction, Mesh, build_mesh, interpolate, m_norm

DEFAULT_BETA = 0.005
DEFAULT_RHO = 5.0


def exact_state(x1, x2, beta: float = DEFAULT_BETA):
    """Closed-form exact state y*."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    strip = (x1 > beta) & (x1 <= 1.0 - beta)
    return (x1 - beta) ** 2 * (x1 - 1.0 + beta) ** 2 * np.sin(2.0 * np.pi * x2) * strip


def exact_source(x1, x2, beta: float = DEFAULT_BETA):
    """Closed-form exact source u*; satisfies the PDE with state y*."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    strip = (x1 > beta) & (x1 <= 1.0 - beta)
    y = exact_state(x1, x2, beta)
    curvature = 4.0 * np.pi**2 * y - 2.0 * (
        (2.0 * x1 - 1.0) ** 2 + 2.0 * (x1 - 1.0 + beta) * (x1 - beta)
    ) * np.sin(2.0 * np.pi * x2)
    return np.maximum(y, 0.0) + curvature * strip


def source_guess(x1, x2, beta: float = DEFAULT_BETA, rho: float = DEFAULT_RHO):
    """Starting point u_bar = u* - 2 rho sin(pi x1) sin(2 pi x2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return exact_source(x1, x2, beta) - 2.0 * rho * np.sin(np.pi * x1) * np.sin(2.0 * np.pi * x2)


def exact_fields(
    mesh: Mesh, beta: float = DEFAULT_BETA, rho: float = DEFAULT_RHO
) -> tuple[GridFunction, GridFunction, GridFunction]:
    """Nodal interpolants (u*, y*, u_bar) on the given mesh."""
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 0.5), got {beta}")
    u_exact = interpolate(mesh, lambda a, b: exact_source(a, b, beta), role="source")
    y_exact = interpolate(mesh, lambda a, b: exact_state(a, b, beta), role="state")
    u_start = interpolate(mesh, lambda a, b: source_guess(a, b, beta, rho), role="source")
    return u_exact, y_exact, u_start


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded Gaussian noise, either raw amplitude or rescaled to a target level."""

    seed: int
    mode: str = "rescale"  # 'raw' (value = sigma) | 'rescale' (value = target delta)
    value: float = 0.0

    def __post_init__(self):
        if self.mode not in ("raw", "rescale"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.value < 0.0:
            raise ValueError(f"noise amplitude/target must be >= 0, got {self.value}")


def add_noise(y: GridFunction, spec: NoiseSpec, M) -> tuple[GridFunction, float]:
    """Perturb y with componentwise Gaussian noise; returns (y_noisy, measured delta).

    In raw mode the draws are scaled by sigma; in rescale mode they are
    scaled so the measured M-norm perturbation equals the target.  The
    returned delta is always the measured M-norm of the perturbation.
    """
    if spec.value == 0.0:
        return y.copy(), 0.0
    rng = np.random.default_rng(spec.seed)
    g = rng.standard_normal(y.values.size)
    scale = spec.value if spec.mode == "raw" else spec.value / m_norm(M, g)
    noisy = GridFunction(y.mesh, y.values + scale * g, role="data")
    return noisy, m_norm(M, noisy.values - y.values)


def _start_iterate(start: str, u_exact: GridFunction, u_bar: GridFunction) -> GridFunction:
    if start == "zero":
        return GridFunction(u_exact.mesh, np.zeros_like(u_exact.values), "source")
    if start == "source":
        return u_bar
    raise ValueError(f"unknown starting point {start!r}, expected 'zero' or 'source'")


def run_noise_free(
    n_h: int,
    start: str = "source",
    iters: int = 100,
    beta: float = DEFAULT_BETA,
    cfg: LandweberConfig | None = None,
    problem: ForwardProblem | None = None,
) -> RunRecord:
    """Noise-free campaign: fixed iteration count, discrepancy disabled (delta = 0)."""
    base = cfg or LandweberConfig()
    if problem is None:
        problem = ForwardProblem.build(build_mesh(n_h))
    u_exact, y_exact, u_bar = exact_fields(problem.mesh, beta, base.rho)
    cfg_run = LandweberConfig(
        mu=base.mu,
        tau=base.tau,
        rho=base.rho,
        lbar=base.lbar,
        steps=base.steps,
        max_iter=iters if iters >= 1 else 1,
        delta=0.0,
        warm_start=base.warm_start,
    )
    record = run(problem, y_exact, cfg_run, _start_iterate(start, u_exact, u_bar), u_exact)
    if iters == 0:  # keep only the starting entry
        record.residual_norms = record.residual_norms[:1]
        record.ssn_counts = record.ssn_counts[:1]
        if record.rel_errors is not None:
            record.rel_errors = record.rel_errors[:1]
        record.stopping_index = 0
    return record


TABLE_COLUMNS = ("delta", "seed", "N", "rel_error", "rate", "ssn_total", "reason")


def run_table(
    n_h: int,
    deltas,
    start: str = "source",
    seeds=(0,),
    beta: float = DEFAULT_BETA,
    cfg: LandweberConfig | None = None,
    problem: ForwardProblem | None = None,
) -> list[dict]:
    """Noisy campaign over (delta_target, seed) cells; rescale-mode noise.

    Returns one row dict per cell with keys TABLE_COLUMNS.  Failures of a
    single cell are recorded in its 'reason' and the campaign continues.
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0.0 for d in deltas):
        raise ValueError("all noise targets must be positive")
    base = cfg or LandweberConfig()
    if problem is None:
        problem = ForwardProblem.build(build_mesh(n_h))
    u_exact, y_exact, u_bar = exact_fields(problem.mesh, beta, base.rho)
    u0 = _start_iterate(start, u_exact, u_bar)

    rows = []
    for seed in seeds:
        for delta_target in deltas:
            y_noisy, delta = add_noise(
                y_exact, NoiseSpec(seed=int(seed), mode="rescale", value=delta_target), problem.M
            )
            cfg_cell = LandweberConfig(
                mu=base.mu,
                tau=base.tau,
                rho=base.rho,
                lbar=base.lbar,
                steps=base.steps,
                max_iter=base.max_iter,
                delta=delta,
                warm_start=base.warm_start,
            )
            record = run(problem, y_noisy, cfg_cell, u0, u_exact)
            err = np.nan if record.rel_errors is None else float(record.rel_errors[-1])
            rows.append(
                {
                    "delta": delta,
                    "seed": int(seed),
                    "N": record.stopping_index,
                    "rel_error": err,
                    "rate": empirical_rate(err * m_norm(problem.M, u_exact), delta),
                    "ssn_total": record.total_ssn,
                    "reason": record.reason,
                }
            )
    return rows


def write_table_csv(path, rows) -> Path:
    """Write campaign rows with columns delta,seed,N,rel_error,rate,ssn_total,reason."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    f"{row['delta']:.17g}",
                    row["seed"],
                    row["N"],
                    f"{row['rel_error']:.17g}",
                    f"{row['rate']:.17g}",
                    row["ssn_total"],
                    row["reason"],
                ]
            )
    return path


def read_table_csv(path) -> list[dict]:
    """Read campaign rows written by :func:`write_table_csv`."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "delta": float(row["delta"]),
                    "seed": int(row["seed"]),
                    "N": int(row["N"]),
                    "rel_error": float(row["rel_error"]),
                    "rate": float(row["rate"]),
                    "ssn_total": int(row["ssn_total"]),
                    "reason": row["reason"],
                }
            )
    return rows


def consistency_residuals(n_h_list, beta: float = DEFAULT_BETA) -> dict[int, float]:
    """Discrete consistency of the exact pair: r(n_h) = ||F_h(I_h u*) - I_h y*||_M.

    The residual decays under refinement since (u*, y*) solve the continuum
    equation; the campaign tests assert the decay rate.
    """
    out = {}
    for n_h in n_h_list:
        problem = ForwardProblem.build(build_mesh(n_h))
        u_exact, y_exact, _ = exact_fields(problem.mesh, beta)
        y_h = solve_forward(problem, u_exact).y
        out[n_h] = m_norm(problem.M, y_h.values - y_exact.values)
    return out
