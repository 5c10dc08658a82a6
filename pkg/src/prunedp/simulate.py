"""Synthetic piecewise-constant Gaussian signals."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SimSpec:
    n: int
    n_changes: int = 0
    jump_size: float = 5.0
    sigma: float = 1.0
    seed: int = 0
    placement: str = "equal"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.n_changes < self.n:
            raise ValueError(f"n_changes={self.n_changes} must be in [0, n)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.placement not in ("equal", "uniform-random"):
            raise ValueError(f"unknown placement {self.placement!r}")


def true_changepoints(spec: SimSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Last index of every segment but the final one (1-based)."""
    m = spec.n_changes
    if spec.placement == "equal":
        return np.array([j * spec.n // (m + 1) for j in range(1, m + 1)], dtype=np.int64)
    rng = rng or np.random.default_rng(spec.seed)
    return np.sort(rng.choice(np.arange(1, spec.n), size=m, replace=False)).astype(np.int64)


def simulate(spec: SimSpec) -> tuple[np.ndarray, np.ndarray]:
    """Series whose segment means alternate between 0 and ``jump_size * sigma``."""
    rng = np.random.default_rng(spec.seed)
    cps = true_changepoints(spec, rng)
    bounds = np.concatenate(([0], cps, [spec.n]))
    means = np.zeros(spec.n)
    for j, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
        if j % 2 == 1:
            means[a:b] = spec.jump_size * spec.sigma
    y = means + rng.normal(0.0, spec.sigma, spec.n)
    return y, cps


def write_simulation(spec: SimSpec, out_path: str | Path) -> tuple[Path, Path]:
    """Write the series (one value per line) and a ``.json`` sidecar with the truth."""
    out_path = Path(out_path)
    y, cps = simulate(spec)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(f"{v!r}\n" for v in y.tolist()))
    sidecar = out_path.with_name(out_path.name + ".json")
    meta = {"spec": asdict(spec), "changepoints": cps.tolist()}
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return out_path, sidecar
