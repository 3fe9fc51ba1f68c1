"""Landweber outer iteration with Bouligand subderivative steps.

The iteration is

    u_{n+1} = u_n + w_n G_{u_n}(y_data - F(u_n)),

where F is the discrete forward map, G_{u_n} applies (A + K_{y_n})^{-1} M
(self-adjoint in the M inner product, so no separate adjoint solve), and
w_n is the step size.  With noisy data of level delta the loop stops at the
first index whose M-norm residual drops to tau*delta (discrepancy
principle) or after max_iter steps.  All residual and error norms use the
M-weighted norm.

Two scalar parameter conditions from the convergence theory are evaluated
by :func:`check_parameters` and logged, never enforced: with the default
experiment parameters both are violated, yet the iteration behaves well.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .bouligand import apply_subderivative, build_linearized
from .forward import ForwardProblem, ForwardSolveError, solve_forward
from .mesh_fem import GridFunction, m_norm, values_of
from .sparse_linalg import ConvergenceError

logger = logging.getLogger(__name__)

REASON_DISCREPANCY = "discrepancy"
REASON_MAX_ITERATIONS = "max-iterations"
REASON_FORWARD_FAILURE = "forward-failure"


@dataclass(frozen=True)
class LandweberConfig:
    """Parameters of one Landweber run.

    The default step size is the constant w = (2 - 2 mu) / lbar^2; an
    explicit per-step schedule may be given instead, in which case the step
    bounds lam/Lam default to its min/max.  rho is the ball radius of the
    theory and is informational only.
    """

    mu: float = 0.1
    tau: float = 1.4
    rho: float = 5.0
    lbar: float = 5e-2
    steps: tuple[float, ...] | None = None
    lam: float | None = None
    Lam: float | None = None
    max_iter: int = 5000
    delta: float = 0.0
    store_iterates: bool = False
    warm_start: bool = False

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu}")
        if self.tau <= 1.0:
            raise ValueError(f"tau must exceed 1, got {self.tau}")
        if self.rho <= 0.0 or self.lbar <= 0.0:
            raise ValueError("rho and lbar must be positive")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.delta < 0.0:
            raise ValueError(f"noise level must be >= 0, got {self.delta}")
        if self.steps is not None:
            object.__setattr__(self, "steps", tuple(float(w) for w in self.steps))
            if any(w <= 0.0 for w in self.steps):
                raise ValueError("step sizes must be positive")
        lam, Lam = self.effective_bounds()
        if not 0.0 < lam <= Lam:
            raise ValueError(f"need 0 < lam <= Lam, got lam={lam}, Lam={Lam}")

    @property
    def constant_step(self) -> float:
        return (2.0 - 2.0 * self.mu) / self.lbar**2

    def step_size(self, n: int) -> float:
        if self.steps is None:
            return self.constant_step
        if n >= len(self.steps):
            raise ValueError(f"step schedule exhausted at iteration {n}")
        return self.steps[n]

    def effective_bounds(self) -> tuple[float, float]:
        """Step-size bounds (lam, Lam), inferred from the schedule when not set."""
        if self.steps is not None:
            lam = self.lam if self.lam is not None else min(self.steps)
            Lam = self.Lam if self.Lam is not None else max(self.steps)
        else:
            lam = self.lam if self.lam is not None else self.constant_step
            Lam = self.Lam if self.Lam is not None else self.constant_step
        return lam, Lam

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "tau": self.tau,
            "rho": self.rho,
            "lbar": self.lbar,
            "steps": list(self.steps) if self.steps is not None else None,
            "lam": self.effective_bounds()[0],
            "Lam": self.effective_bounds()[1],
            "max_iter": self.max_iter,
            "delta": self.delta,
            "warm_start": self.warm_start,
        }


@dataclass(frozen=True)
class ParameterCheck:
    """The two scalar left-hand sides that must be negative in the theory."""

    choice: float
    choice_aux: float
    satisfied: tuple[bool, bool]


def check_parameters(cfg: LandweberConfig, L: float) -> ParameterCheck:
    """Evaluate both step-size conditions for a subderivative norm bound L.

    choice     = 2 (mu + 1) / tau - (2 - 2 mu - Lam L^2)
    choice_aux = -1 + mu + 5 Lam L^2

    Both must be negative for the convergence theory; the result is reported,
    never enforced.
    """
    if L <= 0.0:
        raise ValueError(f"norm bound L must be positive, got {L}")
    _, Lam = cfg.effective_bounds()
    choice = 2.0 * (cfg.mu + 1.0) / cfg.tau - (2.0 - 2.0 * cfg.mu - Lam * L * L)
    choice_aux = -1.0 + cfg.mu + 5.0 * Lam * L * L
    return ParameterCheck(choice, choice_aux, (choice < 0.0, choice_aux < 0.0))


def relative_error(u, u_exact, M: sp.spmatrix) -> float:
    """Relative M-norm error ||u_exact - u||_M / ||u_exact||_M."""
    norm_exact = m_norm(M, u_exact)
    if norm_exact == 0.0:
        raise ValueError("relative error undefined: exact field has zero norm")
    return m_norm(M, values_of(u_exact) - values_of(u)) / norm_exact


def empirical_rate(err_abs: float, delta: float) -> float:
    """Empirical convergence rate ||u_exact - u||_M / sqrt(delta)."""
    if delta <= 0.0:
        raise ValueError(f"rate undefined for noise level {delta}")
    return err_abs / np.sqrt(delta)


@dataclass
class RunRecord:
    """Complete history of one Landweber run."""

    residual_norms: np.ndarray
    rel_errors: np.ndarray | None
    ssn_counts: np.ndarray
    stopping_index: int
    reason: str
    delta: float
    tau: float
    config: dict
    final: GridFunction | None = None
    iterates: list | None = None

    @property
    def threshold(self) -> float:
        return self.tau * self.delta

    @property
    def total_ssn(self) -> int:
        return int(np.sum(self.ssn_counts))

    def check_discrepancy(self) -> bool:
        """Re-verify the stopping rule from the recorded history alone."""
        n = self.stopping_index
        if n < 0 or n >= len(self.residual_norms):
            return False
        if np.any(self.residual_norms[:n] <= self.threshold):
            return False
        stopped = self.residual_norms[n] <= self.threshold
        return stopped if self.reason == REASON_DISCREPANCY else not stopped

    def save(self, base) -> tuple[Path, Path]:
        """Write `<base>.csv` (per-iteration history) and `<base>.json` (summary)."""
        base = Path(base)
        csv_path = base.with_name(base.name + ".csv")
        json_path = base.with_name(base.name + ".json")
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "residual_M", "rel_error", "ssn_iters"])
            for n, res in enumerate(self.residual_norms):
                err = "" if self.rel_errors is None else f"{self.rel_errors[n]:.17g}"
                writer.writerow([n, f"{res:.17g}", err, int(self.ssn_counts[n])])
        summary = {
            "config": self.config,
            "delta": self.delta,
            "tau": self.tau,
            "stopping_index": int(self.stopping_index),
            "reason": self.reason,
            "ssn_total": self.total_ssn,
        }
        with open(json_path, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        return csv_path, json_path

    @classmethod
    def load(cls, base) -> "RunRecord":
        """Rebuild a record from its CSV/JSON pair (iterates are not serialized)."""
        base = Path(base)
        with open(base.with_name(base.name + ".json")) as fh:
            summary = json.load(fh)
        residuals, errors, ssn = [], [], []
        with open(base.with_name(base.name + ".csv"), newline="") as fh:
            for row in csv.DictReader(fh):
                residuals.append(float(row["residual_M"]))
                errors.append(float(row["rel_error"]) if row["rel_error"] else np.nan)
                ssn.append(int(row["ssn_iters"]))
        errors_arr = np.array(errors)
        return cls(
            residual_norms=np.array(residuals),
            rel_errors=None if np.all(np.isnan(errors_arr)) else errors_arr,
            ssn_counts=np.array(ssn, dtype=int),
            stopping_index=summary["stopping_index"],
            reason=summary["reason"],
            delta=summary["delta"],
            tau=summary["tau"],
            config=summary["config"],
        )


def run(
    problem: ForwardProblem,
    y_data,
    cfg: LandweberConfig,
    u0,
    u_exact=None,
) -> RunRecord:
    """Run the Landweber iteration from u0 against data y_data.

    Residual and (when u_exact is given) relative error are recorded for every
    iterate including the final one; the discrepancy principle uses the
    threshold tau*delta from cfg.  A forward solve failure truncates the
    record with reason 'forward-failure'.
    """
    M = problem.M
    check = check_parameters(cfg, cfg.lbar)
    if not all(check.satisfied):
        logger.warning(
            "step-size conditions violated for L=lbar: choice=%.6g, choice_aux=%.6g "
            "(negative required); continuing anyway",
            check.choice,
            check.choice_aux,
        )

    data = values_of(y_data)
    u = values_of(u0).copy()
    exact = None if u_exact is None else values_of(u_exact)
    norm_exact = None
    if exact is not None:
        norm_exact = m_norm(M, exact)
        if norm_exact == 0.0:
            raise ValueError("u_exact has zero norm; relative errors undefined")

    threshold = cfg.tau * cfg.delta
    residuals: list[float] = []
    errors: list[float] = []
    ssn_counts: list[int] = []
    iterates: list[np.ndarray] | None = [] if cfg.store_iterates else None

    reason = REASON_MAX_ITERATIONS
    y_prev = None
    n = 0
    while True:
        try:
            sol = solve_forward(
                problem,
                u,
                y0=y_prev if (cfg.warm_start and y_prev is not None) else None,
            )
        except (ForwardSolveError, ConvergenceError) as exc:
            logger.error("forward solve failed at iteration %d: %s", n, exc)
            reason = REASON_FORWARD_FAILURE
            break
        y_prev = sol.y.values
        residual_vec = data - sol.y.values
        residuals.append(m_norm(M, residual_vec))
        ssn_counts.append(sol.ssn_iterations)
        if exact is not None:
            errors.append(m_norm(M, exact - u) / norm_exact)
        if iterates is not None:
            iterates.append(u.copy())
        if residuals[-1] <= threshold:
            reason = REASON_DISCREPANCY
            break
        if n >= cfg.max_iter:
            reason = REASON_MAX_ITERATIONS
            break
        try:
            op = build_linearized(problem, sol.y)
            update = apply_subderivative(op, M, residual_vec)
        except ConvergenceError as exc:
            logger.error("subderivative solve failed at iteration %d: %s", n, exc)
            reason = REASON_FORWARD_FAILURE
            break
        u = u + cfg.step_size(n) * update.values
        n += 1

    return RunRecord(
        residual_norms=np.array(residuals),
        rel_errors=np.array(errors) if exact is not None and errors else None,
        ssn_counts=np.array(ssn_counts, dtype=int),
        stopping_index=len(residuals) - 1,
        reason=reason,
        delta=cfg.delta,
        tau=cfg.tau,
        config=cfg.to_dict(),
        final=GridFunction(problem.mesh, u, "source"),
        iterates=iterates,
    )
