# Geometric mmWave channel generation: sparse sums of array steering
# vectors with distance-based large-scale fading.
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ChannelSet, SystemConfig, require_valid


@dataclass(frozen=True)
class PathParams:
    """Small-scale parameters of one sparse multipath link.

    gains:      complex CN(0,1) per-path coefficients
    departures: angles of departure in radians, uniform on [-pi/2, pi/2]
    arrivals:   angles of arrival in radians, uniform on [-pi/2, pi/2]
    """

    gains: np.ndarray
    departures: np.ndarray
    arrivals: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.gains.shape[0]


def steering_vector(n: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response: a_k = exp(j*pi*(k-1)*sin(angle))."""
    if n < 1:
        raise ValueError("array size must be >= 1")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def path_loss_db(d: float, shadowing_db: float = 0.0) -> float:
    """Large-scale loss 72 + 29.2*log10(d) + shadowing, in dB (d in meters)."""
    if d <= 0:
        raise ValueError("distance must be positive")
    return 72.0 + 29.2 * np.log10(d) + shadowing_db


def draw_paths(n_paths: int, rng: np.random.Generator) -> PathParams:
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)
    departures = rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths)
    arrivals = rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths)
    return PathParams(gains, departures, arrivals)


def draw_shadowing(std_db: float, rng: np.random.Generator) -> float:
    return float(std_db * rng.standard_normal())


def assemble_matrix(n_rx: int, n_tx: int, paths: PathParams, pl_db: float) -> np.ndarray:
    """Sum of rank-one steering outer products, scaled by sqrt(1/(beta*L)).

    beta = 10^(pl_db/10) is the linear power attenuation; the (plain,
    non-conjugated) transpose on the transmit response matches the rank-one
    product a_rx a_tx^T.
    """
    beta = 10.0 ** (pl_db / 10.0)
    g = np.zeros((n_rx, n_tx), dtype=complex)
    for gain, dep, arr in zip(paths.gains, paths.departures, paths.arrivals):
        g += gain * np.outer(steering_vector(n_rx, arr), steering_vector(n_tx, dep))
    return np.sqrt(1.0 / (beta * paths.n_paths)) * g


def assemble_vector(n_rx: int, paths: PathParams, pl_db: float) -> np.ndarray:
    """Sparse receive-side channel vector (single-antenna far end)."""
    beta = 10.0 ** (pl_db / 10.0)
    h = np.zeros(n_rx, dtype=complex)
    for gain, arr in zip(paths.gains, paths.arrivals):
        h += gain * steering_vector(n_rx, arr)
    return np.sqrt(1.0 / (beta * paths.n_paths)) * h


@dataclass(frozen=True)
class TrialDraw:
    """All randomness of one channel realization, held at path level so the
    same draw can be assembled for different RIS sizes."""

    g_paths: PathParams
    g_shadow: float
    h_paths: PathParams
    h_shadow: float
    he_paths: PathParams
    he_shadow: float
    du_paths: PathParams
    du_shadow: float
    de_paths: PathParams
    de_shadow: float


def draw_trial(cfg: SystemConfig, rng: np.random.Generator) -> TrialDraw:
    s = cfg.shadowing_std_db
    return TrialDraw(
        g_paths=draw_paths(cfg.n_paths_g, rng),
        g_shadow=draw_shadowing(s, rng),
        h_paths=draw_paths(cfg.n_paths_h, rng),
        h_shadow=draw_shadowing(s, rng),
        he_paths=draw_paths(cfg.n_paths_h, rng),
        he_shadow=draw_shadowing(s, rng),
        du_paths=draw_paths(cfg.n_paths_h, rng),
        du_shadow=draw_shadowing(s, rng),
        de_paths=draw_paths(cfg.n_paths_h, rng),
        de_shadow=draw_shadowing(s, rng),
    )


def assemble_channels(cfg: SystemConfig, draw: TrialDraw) -> ChannelSet:
    geo = cfg.geometry
    g = assemble_matrix(cfg.n_ris, cfg.n_tx, draw.g_paths,
                        path_loss_db(geo.d_ap_ris(), draw.g_shadow))
    h = assemble_vector(cfg.n_ris, draw.h_paths,
                        path_loss_db(geo.d_ris_user(), draw.h_shadow))
    h_e = assemble_vector(cfg.n_ris, draw.he_paths,
                          path_loss_db(geo.d_ris_eve(), draw.he_shadow))
    return ChannelSet(g, h, h_e)


def gen_channels(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """One seeded realization of (G, h, h_e) for the configured geometry."""
    require_valid(cfg)
    return assemble_channels(cfg, draw_trial(cfg, rng))


# Extra attenuation applied to the blocked AP->receiver links used by the
# RIS-free baseline.  Large enough that the bypass sits well below the
# reflected link at default geometry.
DEFAULT_BLOCKAGE_DB = 95.0


def assemble_direct_channels(cfg: SystemConfig, draw: TrialDraw,
                             blockage_db: float = DEFAULT_BLOCKAGE_DB
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Blocked direct AP->user and AP->eve vectors, shape (n_tx,) each."""
    geo = cfg.geometry
    h_du = assemble_vector(cfg.n_tx, draw.du_paths,
                           path_loss_db(geo.d_ap_user(), draw.du_shadow) + blockage_db)
    h_de = assemble_vector(cfg.n_tx, draw.de_paths,
                           path_loss_db(geo.d_ap_eve(), draw.de_shadow) + blockage_db)
    return h_du, h_de


def gen_direct_channels(cfg: SystemConfig, rng: np.random.Generator,
                        blockage_db: float = DEFAULT_BLOCKAGE_DB
                        ) -> tuple[np.ndarray, np.ndarray]:
    require_valid(cfg)
    return assemble_direct_channels(cfg, draw_trial(cfg, rng), blockage_db)


def dump_channels_csv(ch: ChannelSet, path: str | Path) -> None:
    """Write a realization as CSV, real/imag interleaved, row-major."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["matrix", "row", "values_re_im_interleaved"])
        for name, arr in (("g", ch.g), ("h", ch.h[None, :]), ("h_e", ch.h_e[None, :])):
            for i, row in enumerate(arr):
                flat = np.empty(2 * row.size)
                flat[0::2] = row.real
                flat[1::2] = row.imag
                writer.writerow([name, i] + [repr(float(v)) for v in flat])


def load_channels_csv(path: str | Path) -> ChannelSet:
    blocks: dict[str, list[np.ndarray]] = {"g": [], "h": [], "h_e": []}
    with open(path, encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for row in reader:
            flat = np.array([float(v) for v in row[2:]])
            blocks[row[0]].append(flat[0::2] + 1j * flat[1::2])
    return ChannelSet(np.vstack(blocks["g"]), blocks["h"][0], blocks["h_e"][0])
