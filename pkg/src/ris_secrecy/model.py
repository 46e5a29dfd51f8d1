# Core domain types: system configuration, channel container, beamformer
# state, RIS phase vector, and the fixed semi-unitary analog codebook.
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi


def _frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy so shared containers stay immutable."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Geometry:
    """Node coordinates in meters (x, y, z)."""

    ap_pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ris_pos: tuple[float, float, float] = (0.0, 60.0, 20.0)
    user_pos: tuple[float, float, float] = (5.0, 60.0, 0.0)
    eve_pos: tuple[float, float, float] = (5.0, 80.0, 0.0)

    @staticmethod
    def distance(a: tuple[float, float, float], b: tuple[float, float, float]) -> float:
        return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))

    def d_ap_ris(self) -> float:
        return self.distance(self.ap_pos, self.ris_pos)

    def d_ris_user(self) -> float:
        return self.distance(self.ris_pos, self.user_pos)

    def d_ris_eve(self) -> float:
        return self.distance(self.ris_pos, self.eve_pos)

    def d_ap_user(self) -> float:
        return self.distance(self.ap_pos, self.user_pos)

    def d_ap_eve(self) -> float:
        return self.distance(self.ap_pos, self.eve_pos)


@dataclass(frozen=True)
class SystemConfig:
    """All scalar simulation parameters.

    Angles at the arrays are in radians, powers in watts, noise levels in
    dBm.  `power_watts` defaults to a value that puts the doubly-faded
    AP-RIS-user link at a useful SNR for the default geometry; absolute
    rates therefore carry no physical meaning, only comparisons do.
    """

    n_tx: int = 64          # AP antennas
    n_ris: int = 16         # RIS reflecting elements
    n_rf: int = 8           # RF chains (digital beamformer length)
    dac_bits: int = 1       # DAC resolution b
    phase_levels: int = 8   # discrete phase levels L
    power_watts: float = 1.0e9
    noise_user_dbm: float = -110.0
    noise_eve_dbm: float = -110.0
    shadowing_std_db: float = 1.0
    n_paths_g: int = 3      # propagation paths on the AP->RIS link
    n_paths_h: int = 3      # propagation paths on the RIS->receiver links
    geometry: Geometry = field(default_factory=Geometry)
    seed: int = 0

    @property
    def delta_theta(self) -> float:
        """Spacing of the discrete phase grid, 2*pi / L."""
        return TWO_PI / self.phase_levels

    @property
    def noise_user_watts(self) -> float:
        return dbm_to_watts(self.noise_user_dbm)

    @property
    def noise_eve_watts(self) -> float:
        return dbm_to_watts(self.noise_eve_dbm)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def validate_config(cfg: SystemConfig) -> list[str]:
    """Return every violated invariant; an empty list means the config is ok."""
    errors: list[str] = []
    if cfg.n_tx < 1:
        errors.append("n_tx must be >= 1")
    if cfg.n_ris < 1:
        errors.append("n_ris must be >= 1")
    if cfg.n_rf < 1:
        errors.append("n_rf must be >= 1")
    if cfg.n_rf > cfg.n_tx:
        errors.append("n_rf exceeds n_tx")
    if cfg.dac_bits < 1:
        errors.append("dac_bits must be >= 1")
    if cfg.phase_levels < 2:
        errors.append("L must be >= 2")
    if not cfg.power_watts > 0:
        errors.append("power_watts must be > 0")
    if cfg.shadowing_std_db < 0:
        errors.append("shadowing_std_db must be >= 0")
    if cfg.n_paths_g < 1:
        errors.append("n_paths_g must be >= 1")
    if cfg.n_paths_h < 1:
        errors.append("n_paths_h must be >= 1")
    if cfg.seed < 0:
        errors.append("seed must be a non-negative integer")
    return errors


def require_valid(cfg: SystemConfig) -> None:
    errors = validate_config(cfg)
    if errors:
        raise ValueError("invalid config: " + "; ".join(errors))


def config_from_dict(data: dict) -> SystemConfig:
    """Build a SystemConfig from a JSON-style dict; unknown keys are rejected."""
    known = {f.name for f in fields(SystemConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "geometry" in kwargs:
        geo = kwargs["geometry"]
        geo_known = {f.name for f in fields(Geometry)}
        geo_unknown = set(geo) - geo_known
        if geo_unknown:
            raise ValueError(f"unknown geometry keys: {sorted(geo_unknown)}")
        kwargs["geometry"] = Geometry(**{k: tuple(float(x) for x in v) for k, v in geo.items()})
    return SystemConfig(**kwargs)


def load_config(path: str | Path) -> SystemConfig:
    with open(path, encoding="utf-8") as f:
        return config_from_dict(json.load(f))


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the cascaded links.

    g:   AP->RIS matrix, shape (n_ris, n_tx)
    h:   RIS->user vector, shape (n_ris,)
    h_e: RIS->eavesdropper vector, shape (n_ris,)
    """

    g: np.ndarray
    h: np.ndarray
    h_e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen(np.asarray(self.g, complex)))
        object.__setattr__(self, "h", _frozen(np.asarray(self.h, complex)))
        object.__setattr__(self, "h_e", _frozen(np.asarray(self.h_e, complex)))
        n_ris = self.g.shape[0]
        if self.g.ndim != 2:
            raise ValueError("g must be a 2-D matrix")
        if self.h.shape != (n_ris,) or self.h_e.shape != (n_ris,):
            raise ValueError("h and h_e must be length-n_ris vectors")
        for name in ("g", "h", "h_e"):
            if not np.all(np.isfinite(getattr(self, name).view(float))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_ris(self) -> int:
        return self.g.shape[0]

    @property
    def n_tx(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True)
class BeamformerState:
    """Fixed analog codebook plus the digital beamforming vector."""

    f_rf: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f_rf", _frozen(np.asarray(self.f_rf, complex)))
        object.__setattr__(self, "w", _frozen(np.asarray(self.w, complex)))
        n_tx, n_rf = self.f_rf.shape
        if self.w.shape != (n_rf,):
            raise ValueError("w length must match the codebook column count")
        gram = self.f_rf.conj().T @ self.f_rf
        if np.max(np.abs(gram - np.eye(n_rf))) > 1e-12:
            raise ValueError("f_rf is not semi-unitary")

    def with_w(self, w: np.ndarray) -> "BeamformerState":
        return BeamformerState(self.f_rf, w)


def build_codebook(n_tx: int, n_rf: int) -> np.ndarray:
    """First n_rf columns of the n_tx-point unitary DFT matrix.

    Columns are orthonormal, so the codebook is semi-unitary and preserves
    the norm of any digital beamformer applied behind it.
    """
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    if n_rf < 1:
        raise ValueError("n_rf must be >= 1")
    if n_rf > n_tx:
        raise ValueError("n_rf exceeds n_tx: semi-unitary codebook does not exist")
    rows = np.arange(n_tx)[:, None]
    cols = np.arange(n_rf)[None, :]
    return np.exp(-2j * np.pi * rows * cols / n_tx) / np.sqrt(n_tx)


@dataclass(frozen=True)
class PhaseVector:
    """RIS phase angles, canonical in [0, 2*pi).

    The unit-modulus complex form is always derived from `phi`, never
    stored, so the two representations cannot drift apart.  `levels` marks
    the vector as a member of the discrete grid {0, 2*pi/L, ...}.
    """

    phi: np.ndarray
    levels: int | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, float)
        if phi.ndim != 1:
            raise ValueError("phi must be a 1-D vector")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi contains non-finite entries")
        phi = np.mod(phi, TWO_PI)
        object.__setattr__(self, "phi", _frozen(phi))
        if self.levels is not None:
            if self.levels < 2:
                raise ValueError("levels must be >= 2")
            step = TWO_PI / self.levels
            k = phi / step
            if np.max(np.abs(k - np.round(k))) > 1e-9:
                raise ValueError("phi not on the discrete grid for the given level count")

    @property
    def theta(self) -> np.ndarray:
        """Unit-modulus complex phases exp(j*phi)."""
        return np.exp(1j * self.phi)

    @property
    def n_ris(self) -> int:
        return self.phi.shape[0]

    @property
    def discrete(self) -> bool:
        return self.levels is not None

    def with_phi(self, phi: np.ndarray) -> "PhaseVector":
        return PhaseVector(phi, self.levels)

    @staticmethod
    def random_discrete(n_ris: int, levels: int, rng: np.random.Generator) -> "PhaseVector":
        step = TWO_PI / levels
        return PhaseVector(rng.integers(0, levels, size=n_ris) * step, levels)

    @staticmethod
    def zeros(n_ris: int, levels: int | None = None) -> "PhaseVector":
        return PhaseVector(np.zeros(n_ris), levels)
