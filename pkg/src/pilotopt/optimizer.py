"""Successive per-cell pilot optimization with exchange and delta-stopping.

Each outer iteration lets every cell re-solve its own pilot subproblem
around the previous iterates and then exchanges the results. Under the
jacobi schedule all cells build their subproblem from iteration t-1
pilots; under gauss-seidel cells update in index order and later cells
already see the refreshed pilots of earlier ones. The loop stops when
the summed Frobenius change of all pilot matrices drops to delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conic
from .errors import SolverError
from .estimation import PilotSet, mse_woodbury
from .network import NetworkRealization, SystemConfig

BENCHMARK_BASIS_RETRIES = 16


@dataclass
class OptimizerParams:
    """Knobs of the successive optimization loop.

    delta is in the pilots' own sqrt-mW Frobenius units. The initializer
    defaults to feasible random pilots: starting from the shared
    benchmark basis is also supported, but when tau >= N that point is
    already a fixed point of the per-cell updates (the shared basis
    diagonalizes every cell's interference, making each subproblem
    stationary at its own previous pilots), so nothing would move.
    """

    delta: float = 1e-2
    max_iterations: int = 50
    schedule: str = "jacobi"            # jacobi | gauss-seidel
    initializer: str = "random"         # random | benchmark
    eps_solver: float = conic.DEFAULT_EPS_SOLVER

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.schedule not in ("jacobi", "gauss-seidel"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.initializer not in ("random", "benchmark"):
            raise ValueError(f"unknown initializer {self.initializer!r}")


@dataclass
class IterationRecord:
    iteration: int
    objectives: np.ndarray              # per-cell f/M recomputed at X^(t)
    subproblem_objectives: np.ndarray   # per-cell Tr(G) of the solves
    metric: float                       # sum_c ||X^(t) - X^(t-1)||_F


@dataclass
class OptimizationTrace:
    """Everything Algorithm-style loops produce, per iteration."""

    iterates: list                      # PilotSet snapshots, X^(0) first
    records: list                       # IterationRecord per iteration
    initial_objectives: np.ndarray      # per-cell f/M at X^(0)
    status: str = "converged"           # converged | max-iterations
    solver_iterations: int = 0

    @property
    def iterations_used(self) -> int:
        return len(self.records)

    @property
    def final_pilots(self) -> PilotSet:
        return self.iterates[-1]

    @property
    def final_metric(self) -> float:
        return self.records[-1].metric if self.records else 0.0


def convergence_metric(current: PilotSet, previous: PilotSet) -> float:
    """Summed Frobenius distance between two pilot sets."""
    if current.pilots.shape != previous.pilots.shape:
        raise ValueError("pilot sets have mismatched shapes")
    diffs = current.pilots - previous.pilots
    return float(sum(np.linalg.norm(diffs[c]) for c in range(current.num_cells)))


def benchmark_pilots(tau: int, N: int, C: int, per_symbol_power_mw: float,
                     seed) -> PilotSet:
    """Orthogonal reference pilots shared by every cell.

    A random matrix with i.i.d. uniform entries supplies an eigenvector
    basis which is orthonormalized; column n mod tau, scaled to carry
    per_symbol_power_mw * tau of energy, is assigned to user n of every
    cell. With tau < N users n and n + tau of a cell share a pilot.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    rng = np.random.default_rng(seed)
    basis = None
    for _ in range(BENCHMARK_BASIS_RETRIES):
        raw = rng.random((tau, tau))
        _, vecs = np.linalg.eig(raw)
        if np.linalg.matrix_rank(vecs) == tau:
            basis, _ = np.linalg.qr(vecs)
            break
    if basis is None:
        raise SolverError("could not draw a non-degenerate eigenbasis")
    scale = np.sqrt(per_symbol_power_mw * tau)
    X = np.stack([basis[:, n % tau] * scale for n in range(N)], axis=1)
    return PilotSet(np.broadcast_to(X, (C, tau, N)).copy())


def random_pilots(tau: int, N: int, C: int, p_max_mw: float, seed) -> PilotSet:
    """Independent complex-Gaussian pilots per cell, scaled to full power."""
    rng = np.random.default_rng(seed)
    out = np.empty((C, tau, N), dtype=complex)
    for c in range(C):
        Z = rng.standard_normal((tau, N)) + 1j * rng.standard_normal((tau, N))
        lam = np.linalg.eigvalsh(Z.conj().T @ Z)[-1]
        out[c] = Z * np.sqrt(p_max_mw / lam)
    return PilotSet(out)


def initial_pilots(config: SystemConfig, params: OptimizerParams, seed) -> PilotSet:
    if params.initializer == "benchmark":
        return benchmark_pilots(config.pilot_length, config.num_users,
                                config.num_cells, config.per_symbol_power_mw, seed)
    return random_pilots(config.pilot_length, config.num_users,
                         config.num_cells, config.p_max_mw, seed)


def _per_cell_f(pilots: PilotSet, net: NetworkRealization, sigma2: float) -> np.ndarray:
    # f/M: the antenna count enters the MSE only as an overall factor
    return np.array([mse_woodbury(pilots, net, cs, 1, sigma2)
                     for cs in range(pilots.num_cells)])


def optimize_pilots(net: NetworkRealization, params: OptimizerParams,
                    config: SystemConfig, initial: PilotSet | None = None,
                    init_seed=None) -> OptimizationTrace:
    """Run the successive pilot optimization and record the full trace.

    initial overrides the configured initializer; init_seed seeds the
    initializer draw (defaults to the config seed). Raises SolverError
    with the failing cell and iteration if any subproblem solve fails.
    """
    C = config.num_cells
    sigma2 = config.noise_variance_mw
    p_max = config.p_max_mw
    if initial is None:
        initial = initial_pilots(config, params,
                                 config.rng_seed if init_seed is None else init_seed)
    X = initial.copy()
    trace = OptimizationTrace(
        iterates=[X.copy()], records=[],
        initial_objectives=_per_cell_f(X, net, sigma2))

    status = "max-iterations"
    for t in range(1, params.max_iterations + 1):
        previous = X.copy()
        working = X.copy()
        sub_objs = np.zeros(C)
        for cs in range(C):
            baseline = previous if params.schedule == "jacobi" else working
            program = conic.build_subproblem(cs, baseline, net, p_max, sigma2)
            try:
                report = conic.solve(program, params.eps_solver)
            except SolverError as exc:
                raise SolverError(f"iteration {t}, cell {cs}: {exc}") from exc
            if report.status != "optimal":
                raise SolverError(
                    f"iteration {t}, cell {cs}: solve ended with "
                    f"status {report.status}")
            working.pilots[cs] = report.pilots
            sub_objs[cs] = report.objective
            trace.solver_iterations += report.iterations
        X = working
        metric = convergence_metric(X, previous)
        trace.iterates.append(X.copy())
        trace.records.append(IterationRecord(
            iteration=t, objectives=_per_cell_f(X, net, sigma2),
            subproblem_objectives=sub_objs, metric=metric))
        if metric <= params.delta:
            status = "converged"
            break
    trace.status = status
    return trace


# ---------------------------------------------------------------- CSV export

def write_trace_csv(trace: OptimizationTrace, path) -> None:
    """Per-iteration, per-cell objective and metric rows."""
    lines = ["iteration,cell,objective_per_link,convergence_metric"]
    C = trace.iterates[0].num_cells
    N = trace.iterates[0].num_users
    for rec in trace.records:
        for cs in range(C):
            lines.append(f"{rec.iteration},{cs},"
                         f"{rec.objectives[cs] / N:.17g},{rec.metric:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pilots_csv(pilots: PilotSet, path) -> None:
    """Pilot matrices with interleaved real/imag entries, one row per symbol."""
    C, tau, N = pilots.pilots.shape
    header = ["cell", "symbol"]
    for n in range(N):
        header += [f"u{n}_re", f"u{n}_im"]
    lines = [f"# tau={tau} num_users={N} num_cells={C} units=sqrt_mW",
             ",".join(header)]
    for c in range(C):
        for t in range(tau):
            row = [str(c), str(t)]
            for n in range(N):
                z = pilots.pilots[c, t, n]
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pilots_csv(path) -> PilotSet:
    with open(path) as fh:
        meta = fh.readline().strip()
        if not meta.startswith("#"):
            raise ValueError("missing pilot CSV header line")
        fields = dict(part.split("=") for part in meta[1:].split() if "=" in part)
        tau, N, C = int(fields["tau"]), int(fields["num_users"]), int(fields["num_cells"])
        fh.readline()   # column header
        out = np.zeros((C, tau, N), dtype=complex)
        for line in fh:
            cells = line.strip().split(",")
            if not cells or cells == [""]:
                continue
            c, t = int(cells[0]), int(cells[1])
            vals = np.array([float(x) for x in cells[2:]])
            out[c, t] = vals[0::2] + 1j * vals[1::2]
    return PilotSet(out)
