"""Monte-Carlo experiment harness: MSE, power, convergence, and uplink SE.

run_experiment drives, per network realization, one benchmark pilot draw
and one optimized run, and records per-link MSE, per-symbol powers,
iteration counts, and use-and-then-forget spectral efficiencies for both
schemes. All randomness derives from (master seed, realization index,
stream id) so results are reproducible record by record regardless of
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import optimizer as opt
from .estimation import PilotSet, complex_gaussian, mmse_filter, mse_woodbury
from .network import NetworkRealization, SystemConfig, generate_network

SE_CHUNK = 200     # draws per batch; fixed so reductions are order-stable

# stream ids for per-realization substreams
_STREAM_NETWORK = 0
_STREAM_BENCH = 1
_STREAM_INIT = 2
_STREAM_SE = 3


def realization_seed(master_seed: int, realization: int, stream: int):
    """Deterministic child seed for one realization substream."""
    return np.random.SeedSequence((master_seed, realization, stream))


def per_link_mse(f_value: float, num_antennas: int, num_users: int) -> float:
    """Normalize a summed estimation error to one user-antenna link."""
    if f_value < 0:
        raise ValueError("f_value must be >= 0")
    return f_value / (num_antennas * num_users)


def empirical_cdf(samples) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF: sorted (value, k/n) pairs."""
    arr = np.sort(np.asarray(samples, dtype=float))
    if arr.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    n = arr.size
    return [(float(v), (k + 1) / n) for k, v in enumerate(arr)]


def per_symbol_power(pilots: PilotSet) -> np.ndarray:
    """|X_c[t, n]|^2 for every cell, symbol, and user (flat mW samples)."""
    return (np.abs(pilots.pilots) ** 2).reshape(-1)


def uplink_se_uatf(pilots: PilotSet, net: NetworkRealization,
                   data_power_mw: float, coherence_length: int,
                   n_draws: int, seed, sigma2_mw: float,
                   num_antennas: int) -> np.ndarray:
    """Per-user uplink spectral efficiency with maximum-ratio detection.

    Uses the use-and-then-forget bound: only the mean combined channel
    carries signal, every fluctuation counts as interference. For user k
    of cell cs, with v_k the (unnormalized) MMSE channel-estimate row
    and h_j the true faded channel of any user j toward BS cs,

        SINR_k = p |E[v_k^H h_k]|^2 /
                 (p sum_j E[|v_k^H h_j|^2] - p |E[v_k^H h_k]|^2
                  + sigma2 E[||v_k||^2])

    and SE_k = (1 - tau/tau_c) log2(1 + SINR_k). All expectations are
    sample averages over n_draws joint channel/noise draws pushed through
    the estimation pipeline. Returns a (C, N) array in bits/s/Hz.
    """
    if coherence_length <= pilots.tau:
        raise ValueError("coherence_length must exceed the pilot length")
    if n_draws < 1000:
        raise ValueError("n_draws must be >= 1000")
    C, tau, N = pilots.pilots.shape
    M = num_antennas
    p = float(data_power_mw)
    prelog = 1.0 - pilots.tau / coherence_length
    se = np.zeros((C, N))
    rng = np.random.default_rng(seed)
    for cs in range(C):
        W = mmse_filter(pilots, net, cs, sigma2_mw)
        # channel estimate is a fixed linear mix of the drawn channels:
        # Hhat = sum_c (W X_c D^{1/2}) H_c + W V
        mix = np.stack([W @ (pilots[c] * np.sqrt(net.large_scale[c, cs]))
                        for c in range(C)])
        amp = np.sqrt(net.large_scale[:, cs, :])       # (C, N) channel scales
        sig_mean = np.zeros(N, dtype=complex)
        cross_pow = np.zeros(N)
        vnorm = 0.0
        done = 0
        while done < n_draws:
            b = min(SE_CHUNK, n_draws - done)
            H = complex_gaussian(rng, (b, C, N, M))
            V = complex_gaussian(rng, (b, tau, M), sigma2_mw)
            est = np.einsum("cij,bcjm->bim", mix, H, optimize=True) + W @ V
            # inner[b, c, k, j] = v_k^H h_j for users j of cell c
            faded = H * amp[None, :, :, None]
            inner = np.einsum("bkm,bcjm->bckj", est.conj(), faded,
                              optimize=True)
            sig_mean += inner[:, cs].diagonal(axis1=1, axis2=2).sum(axis=0)
            cross_pow += (np.abs(inner) ** 2).sum(axis=(0, 1, 3))
            vnorm += (np.abs(est) ** 2).sum(axis=(0, 2))
            done += b
        sig_mean /= n_draws
        cross_pow /= n_draws
        vnorm = vnorm / n_draws
        num = p * np.abs(sig_mean) ** 2
        den = p * cross_pow - num + sigma2_mw * vnorm
        with np.errstate(invalid="ignore", divide="ignore"):
            sinr = np.where(den > 0, num / den, 0.0)
        se[cs] = prelog * np.log2(1.0 + sinr)
    return se


@dataclass
class RealizationRecord:
    """All scalar metrics of one (realization, scheme) pair."""

    realization: int
    scheme: str                      # proposed | benchmark
    tau: int
    per_cell_mse: np.ndarray         # f/(M N) per cell
    symbol_powers: np.ndarray        # |X[t,n]|^2 samples, flat
    se_per_user: np.ndarray          # (C, N) bits/s/Hz
    iterations: int                  # 0 for the benchmark scheme
    converged: bool
    convergence: list = field(default_factory=list)   # (iteration, cell, f/MN, metric)

    @property
    def mean_mse(self) -> float:
        return float(np.mean(self.per_cell_mse))

    @property
    def mean_se(self) -> float:
        return float(np.mean(self.se_per_user))

    @property
    def mean_symbol_power(self) -> float:
        return float(np.mean(self.symbol_powers))


@dataclass
class ExperimentResult:
    tau: int
    records: list
    aggregates: dict

    def scheme_records(self, scheme: str) -> list:
        return [r for r in self.records if r.scheme == scheme]


def run_experiment(config: SystemConfig, params: opt.OptimizerParams,
                   data_power_mw: float | None = None,
                   coherence_length: int = 200, se_draws: int = 2000,
                   jobs: int = 1, progress=None) -> ExperimentResult:
    """Full Monte-Carlo sweep over config.mc_realizations network drops.

    Per realization: draw the network and benchmark pilots, optimize from
    the configured initializer, then record MSE, power, SE, and the
    convergence trace for both schemes. jobs > 1 distributes realizations
    over processes; the fold over realization indices is sorted, so the
    result is identical for any jobs value.
    """
    if data_power_mw is None:
        data_power_mw = config.per_symbol_power_mw
    idx = list(range(config.mc_realizations))
    args = [(config, params, r, data_power_mw, coherence_length, se_draws)
            for r in idx]
    if jobs > 1:
        import multiprocessing as mp
        with mp.get_context("spawn").Pool(jobs) as pool:
            chunks = pool.map(_realization_worker, args)
    else:
        chunks = []
        for a in args:
            chunks.append(_realization_worker(a))
            if progress is not None:
                progress(a[2] + 1, len(idx))
    records = [rec for chunk in sorted(chunks, key=lambda ch: ch[0].realization)
               for rec in chunk]
    return ExperimentResult(tau=config.pilot_length, records=records,
                            aggregates=aggregate(records))


def _realization_worker(arg) -> list[RealizationRecord]:
    config, params, r, data_power_mw, coherence_length, se_draws = arg
    master = config.rng_seed
    sigma2 = config.noise_variance_mw
    N, M = config.num_users, config.num_antennas
    net = generate_network(config, realization_seed(master, r, _STREAM_NETWORK))
    bench = opt.benchmark_pilots(config.pilot_length, N, config.num_cells,
                                 config.per_symbol_power_mw,
                                 realization_seed(master, r, _STREAM_BENCH))
    init = opt.initial_pilots(config, params,
                              realization_seed(master, r, _STREAM_INIT))
    trace = opt.optimize_pilots(net, params, config, initial=init)

    out = []
    for scheme, pilots in (("benchmark", bench), ("proposed", trace.final_pilots)):
        per_cell = np.array([mse_woodbury(pilots, net, cs, 1, sigma2) / N
                             for cs in range(config.num_cells)])
        se = uplink_se_uatf(pilots, net, data_power_mw, coherence_length,
                            se_draws, realization_seed(master, r, _STREAM_SE),
                            sigma2, M)
        if scheme == "proposed":
            iters = trace.iterations_used
            converged = trace.status == "converged"
            conv = [(rec.iteration, cs, float(rec.objectives[cs]) / N, rec.metric)
                    for rec in trace.records for cs in range(config.num_cells)]
        else:
            iters, converged, conv = 0, True, []
        out.append(RealizationRecord(
            realization=r, scheme=scheme, tau=config.pilot_length,
            per_cell_mse=per_cell, symbol_powers=per_symbol_power(pilots),
            se_per_user=se, iterations=iters, converged=converged,
            convergence=conv))
    return out


def aggregate(records: list) -> dict:
    """Scheme-level summary means over realizations, cells, and users."""
    out = {}
    for scheme in ("benchmark", "proposed"):
        recs = [r for r in records if r.scheme == scheme]
        if not recs:
            continue
        out[scheme] = {
            "mean_per_link_mse": float(np.mean([r.mean_mse for r in recs])),
            "mean_se": float(np.mean([r.mean_se for r in recs])),
            "mean_symbol_power_mw": float(np.mean([r.mean_symbol_power for r in recs])),
            "mean_iterations": float(np.mean([r.iterations for r in recs])),
        }
    if "benchmark" in out and "proposed" in out:
        b, p = out["benchmark"]["mean_se"], out["proposed"]["mean_se"]
        out["se_gain_percent"] = 100.0 * (p - b) / b if b > 0 else float("nan")
    return out


# ---------------------------------------------------------------- CSV output

def write_results_csv(result: ExperimentResult, path) -> None:
    lines = ["tau,realization,scheme,mean_per_link_mse,mean_se,"
             "mean_symbol_power_mw,iterations,converged"]
    for r in result.records:
        lines.append(f"{r.tau},{r.realization},{r.scheme},{r.mean_mse:.17g},"
                     f"{r.mean_se:.17g},{r.mean_symbol_power:.17g},"
                     f"{r.iterations},{int(r.converged)}")
    _write(path, lines)


def write_cdf_csv(samples_by_key: dict, path, value_name: str) -> None:
    """CDF rows keyed by (tau, scheme): tau,scheme,<value>,probability."""
    lines = [f"tau,scheme,{value_name},probability"]
    for (tau, scheme), samples in samples_by_key.items():
        for v, prob in empirical_cdf(samples):
            lines.append(f"{tau},{scheme},{v:.17g},{prob:.17g}")
    _write(path, lines)


def write_convergence_csv(results: list, path) -> None:
    lines = ["tau,realization,iteration,cell,objective_per_link,convergence_metric"]
    for res in results:
        for rec in res.scheme_records("proposed"):
            for (it, cs, obj, metric) in rec.convergence:
                lines.append(f"{res.tau},{rec.realization},{it},{cs},"
                             f"{obj:.17g},{metric:.17g}")
    _write(path, lines)


def write_se_table_csv(results: list, path) -> None:
    """Rows benchmark/proposed/gain_percent, one column per pilot length."""
    taus = [res.tau for res in results]
    header = "scheme," + ",".join(f"tau_{t}" for t in taus)
    rows = {"benchmark": [], "proposed": [], "gain_percent": []}
    for res in results:
        b = res.aggregates["benchmark"]["mean_se"]
        p = res.aggregates["proposed"]["mean_se"]
        rows["benchmark"].append(b)
        rows["proposed"].append(p)
        rows["gain_percent"].append(res.aggregates["se_gain_percent"])
    lines = [header]
    for name in ("benchmark", "proposed", "gain_percent"):
        lines.append(name + "," + ",".join(f"{v:.17g}" for v in rows[name]))
    _write(path, lines)


def _write(path, lines) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
