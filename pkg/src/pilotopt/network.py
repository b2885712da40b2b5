"""Multi-cell network geometry, path loss, and large-scale fading.

Coverage area is a torus: base stations sit on a regular grid of square
cells and all distances wrap around the edges, so every cell sees the
same interference geometry. All powers are carried in linear mW inside
the package; dB only appears at I/O boundaries (config files, CSV dumps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError

# resample attempts per user before giving up on the minimum-distance draw
RESAMPLE_CAP = 1000


@dataclass
class SystemConfig:
    """Scalar parameters of the network and the experiments.

    Power values are linear mW. ``pilot_power_budget_mw`` defaults to
    ``per_symbol_power_mw * pilot_length`` when left as None.
    """

    num_cells: int = 4
    num_antennas: int = 100
    num_users: int = 10
    pilot_length: int = 10
    per_symbol_power_mw: float = 200.0
    pilot_power_budget_mw: float | None = None
    noise_variance_mw: float = 10.0 ** (-9.6)   # -96 dBm
    cell_side_km: float = 0.25
    min_distance_km: float = 0.035
    shadowing_std_db: float = 7.0
    pathloss_intercept_db: float = -148.1
    pathloss_exponent_db_per_decade: float = 37.6
    mc_realizations: int = 200
    rng_seed: int = 1

    def __post_init__(self):
        for name in ("num_cells", "num_antennas", "num_users", "pilot_length"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.noise_variance_mw <= 0:
            raise ConfigError("noise_variance_mw must be > 0")
        if self.per_symbol_power_mw <= 0:
            raise ConfigError("per_symbol_power_mw must be > 0")
        if self.pilot_power_budget_mw is not None and self.pilot_power_budget_mw <= 0:
            raise ConfigError("pilot_power_budget_mw must be > 0")
        if not self.min_distance_km < self.cell_side_km / 2:
            raise ConfigError("min_distance_km must be < cell_side_km / 2")
        if self.mc_realizations < 1:
            raise ConfigError("mc_realizations must be >= 1")

    @property
    def p_max_mw(self) -> float:
        """Per-user pilot power budget (mW)."""
        if self.pilot_power_budget_mw is not None:
            return float(self.pilot_power_budget_mw)
        return self.per_symbol_power_mw * self.pilot_length

    def replace(self, **kw) -> "SystemConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return SystemConfig(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class NetworkRealization:
    """One Monte-Carlo drop of user positions and large-scale gains.

    large_scale[c, cs, n] is the linear power gain between user n of
    cell c and the BS of cell cs (the diagonal of the N x N gain matrix
    of that cell pair).
    """

    bs_positions: np.ndarray      # (C, 2) km
    user_positions: np.ndarray    # (C, N, 2) km
    large_scale: np.ndarray       # (C, C, N) linear gains
    torus_size: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def num_cells(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[1]

    def gain_matrix(self, c: int, cs: int) -> np.ndarray:
        """Diagonal N x N gain matrix between users of cell c and BS cs."""
        return np.diag(self.large_scale[c, cs])


def pathloss_db(distance_km, intercept_db: float = -148.1,
                slope_db_per_decade: float = 37.6):
    """Distance-dependent path loss in dB (no shadowing).

    Accepts a scalar or an array of distances in km; every distance must
    be strictly positive.
    """
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be > 0 km")
    out = intercept_db - slope_db_per_decade * np.log10(d)
    return float(out) if np.isscalar(distance_km) else out


def noise_variance_mw(config: SystemConfig) -> float:
    """Configured receiver noise variance in linear mW."""
    return float(config.noise_variance_mw)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x_lin):
    return 10.0 * np.log10(np.asarray(x_lin, dtype=float))


def _grid_shape(num_cells: int) -> tuple[int, int]:
    gx = int(math.floor(math.sqrt(num_cells)))
    while num_cells % gx:
        gx -= 1
    return gx, num_cells // gx


def torus_distance(p: np.ndarray, q: np.ndarray, size: tuple[float, float]):
    """Wrap-around Euclidean distance on a (width, height) torus.

    Broadcasts over leading axes of p and q; the last axis holds (x, y).
    """
    diff = np.abs(np.asarray(p, float) - np.asarray(q, float))
    w, h = size
    dx = np.minimum(diff[..., 0], w - diff[..., 0])
    dy = np.minimum(diff[..., 1], h - diff[..., 1])
    return np.hypot(dx, dy)


def generate_network(config: SystemConfig, seed) -> NetworkRealization:
    """Drop users uniformly per cell and draw large-scale gains.

    BSs are placed at the centers of a gx x gy grid of square cells that
    tiles the torus. Each user is redrawn until its wrap-around distance
    to every BS is at least min_distance_km; a cap guards against a
    degenerate geometry. Gains combine pathloss_db with i.i.d. log-normal
    shadowing. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    C, N = config.num_cells, config.num_users
    side = config.cell_side_km
    gx, gy = _grid_shape(C)
    size = (gx * side, gy * side)

    bs = np.array([((c % gx) + 0.5, (c // gx) + 0.5) for c in range(C)]) * side
    users = np.zeros((C, N, 2))
    for c in range(C):
        ox, oy = (c % gx) * side, (c // gx) * side
        for n in range(N):
            for _ in range(RESAMPLE_CAP):
                p = np.array([ox, oy]) + rng.random(2) * side
                if np.all(torus_distance(p, bs, size) >= config.min_distance_km):
                    users[c, n] = p
                    break
            else:
                raise ConfigError(
                    f"could not place user {n} of cell {c} at least "
                    f"{config.min_distance_km} km from every BS"
                )

    large = np.zeros((C, C, N))
    for c in range(C):
        for cs in range(C):
            d = torus_distance(users[c], bs[cs], size)
            shadow = rng.normal(0.0, config.shadowing_std_db, N)
            gain_db = pathloss_db(
                d, config.pathloss_intercept_db,
                config.pathloss_exponent_db_per_decade) + shadow
            large[c, cs] = db_to_linear(gain_db)

    return NetworkRealization(bs_positions=bs, user_positions=users,
                              large_scale=large, torus_size=size)


def write_network_csv(net: NetworkRealization, path) -> None:
    """Dump user positions and per-BS gains (dB): one row per user."""
    C, N = net.num_cells, net.num_users
    header = ["cell", "user", "x_km", "y_km"] + [f"phi_bs{cs}_db" for cs in range(C)]
    lines = [",".join(header)]
    for c in range(C):
        for n in range(N):
            x, y = net.user_positions[c, n]
            gains = linear_to_db(net.large_scale[c, :, n])
            row = [str(c), str(n), f"{x:.17g}", f"{y:.17g}"]
            row += [f"{g:.17g}" for g in gains]
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ----------------------------------------------------------------- config I/O

# every key accepted in a config file: name -> (attribute, parser)
_INT_KEYS = {"num_cells", "num_antennas", "num_users", "pilot_length",
             "mc_realizations", "rng_seed"}
_FLOAT_KEYS = {"per_symbol_power_mw", "pilot_power_budget_mw",
               "cell_side_km", "min_distance_km", "shadowing_std_db",
               "pathloss_intercept_db", "pathloss_exponent_db_per_decade"}
_DB_KEYS = {"noise_variance_dbm": "noise_variance_mw"}
# optimizer / evaluation keys the CLI consumes (flat namespace, same file)
EXTRA_FLOAT_KEYS = {"delta", "eps_solver", "data_power_mw"}
EXTRA_INT_KEYS = {"max_iterations", "coherence_length", "se_draws"}
EXTRA_STR_KEYS = {"schedule", "initializer"}


def parse_config_text(text: str) -> dict:
    """Parse 'key = value' lines; '#' starts a comment; unknown keys raise."""
    known = (_INT_KEYS | _FLOAT_KEYS | set(_DB_KEYS) | EXTRA_FLOAT_KEYS
             | EXTRA_INT_KEYS | EXTRA_STR_KEYS)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS | EXTRA_INT_KEYS:
                out[key] = int(val)
            elif key in _FLOAT_KEYS | EXTRA_FLOAT_KEYS | set(_DB_KEYS):
                out[key] = float(val)
            else:
                out[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    return out


def load_config(path) -> dict:
    """Read a config file into a flat dict (dB keys converted to mW)."""
    try:
        with open(path) as fh:
            raw = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for db_key, mw_key in _DB_KEYS.items():
        if db_key in raw:
            raw[mw_key] = float(db_to_linear(raw.pop(db_key)))
    return raw


def system_config_from_dict(values: dict) -> SystemConfig:
    """Build a SystemConfig from a flat config dict, ignoring non-system keys."""
    names = {f.name for f in fields(SystemConfig)}
    return SystemConfig(**{k: v for k, v in values.items() if k in names})
