"""Parameter sweep over all grid modes and deterministic artifact output.

Each ``(grid node, helicity)`` pair is an independent work unit.  Units are
distributed over worker processes, results are put back in mode-index order,
and every reduction runs serially in that order, so the numbers written to
disk do not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from . import __version__
from .background import evaluate_background, validate_model
from .config import SimulationConfig, config_digest
from .errors import DivergenceError, DomainError, EvaluationError, StiffnessError
from .evolution import SUVState, integrate_dirac_oracle, integrate_mode
from .kinematics import NAMED_STRATEGIES, ModeIndex
from .observables import HELICITIES, StressTensor, integrate_stress

__all__ = ["SweepResult", "run_sweep", "write_outputs", "ModeFailure", "STRESS_HEADER"]

STRESS_HEADER = "t,T00,T11,T22,T33,T12,T13,T23,n"
SPECTRUM_HEADER = "k,costheta,phi,r,S,U,V"
_FMT = "{:.16e}"


class ModeFailure(DivergenceError):
    """A mode integration failed; carries the mode's grid coordinates."""


@dataclass
class SweepResult:
    """Everything a run produces, in mode-index order.

    ``S, U, V`` have shape ``(2, n_nodes, n_times)``; the first axis follows
    :data:`HELICITIES` (``r = +1`` first).
    """

    config: SimulationConfig
    times: np.ndarray
    k: np.ndarray
    costheta: np.ndarray
    phi: np.ndarray
    S: np.ndarray
    U: np.ndarray
    V: np.ndarray
    stress: List[StressTensor]
    max_residual: float
    warnings: List[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return config_digest(self.config)

    def manifest(self, include_timing: bool = True) -> dict:
        out = {
            "artifact_version": __version__,
            "config_digest": self.digest,
            "formulation": self.config.formulation,
            "strategy": self.config.strategy,
            "n_modes": int(self.S.shape[0] * self.S.shape[1]),
            "n_times": int(self.times.size),
            "max_constraint_residual": float(self.max_residual),
            "warnings": list(self.warnings),
        }
        if include_timing:
            out["timing_seconds"] = dict(self.timing)
        return out


# worker-process state, set once per process by the pool initializer
_WORKER = {}


def _init_worker(cfg: SimulationConfig):
    _WORKER["cfg"] = cfg
    _WORKER["model"] = cfg.background.build()
    _WORKER["grid"] = cfg.grid.build()


def _run_mode(unit):
    idx, node, r = unit
    cfg = _WORKER["cfg"]
    grid = _WORKER["grid"]
    mode = ModeIndex(grid.wavevector(node), r)
    try:
        if cfg.formulation == "dirac":
            basis = "adapted" if cfg.strategy == "adapted" else "paper"
            tr = integrate_dirac_oracle(
                mode, _WORKER["model"], cfg.mass, cfg.t0, cfg.output_times, cfg.integrator, basis
            )
        else:
            tr = integrate_mode(
                mode, _WORKER["model"], cfg.mass, cfg.t0, cfg.output_times, cfg.integrator,
                NAMED_STRATEGIES[cfg.strategy], cfg.formulation,
            )
    except (StiffnessError, DivergenceError, EvaluationError) as exc:
        where = (
            f"k={grid.k[node]!r}, theta={math.acos(grid.costheta[node])!r}, "
            f"phi={grid.phi[node]!r}, r={r:+d}"
        )
        return idx, None, f"{type(exc).__name__} at ({where}): {exc}"
    return idx, (tr.S, tr.U, tr.V, tr.residual), None


def _workers(threads: int) -> int:
    return threads if threads > 0 else (os.cpu_count() or 1)


def run_sweep(cfg: SimulationConfig) -> SweepResult:
    """Integrate every ``(node, r)`` mode and assemble the observables.

    Raises
    ------
    ModeFailure
        A mode diverged or its step size underflowed; the message gives the
        mode's ``(k, theta, phi, r)``.
    """
    t_start = time.perf_counter()
    model = cfg.background.build()
    grid = cfg.grid.build()
    diag = validate_model(model, (cfg.t0, cfg.t1))
    if diag.violations:
        raise DomainError("; ".join(diag.violations))
    warnings = []
    if "vacuum Kasner" not in diag.flags and cfg.background.model == "power_law":
        warnings.append("power-law background is not a vacuum Kasner solution")
    if cfg.t23_z_sign != -1.0:
        warnings.append("T23 uses the alternative +Z cos(Phi) sign")

    units = [(j, i, r) for j, (i, r) in enumerate(grid.modes())]
    n_workers = min(_workers(cfg.threads), max(len(units), 1))
    results = [None] * len(units)
    if n_workers == 1:
        _init_worker(cfg)
        outs = map(_run_mode, units)
        failures = _collect(outs, results)
    else:
        chunk = max(1, len(units) // (8 * n_workers))
        with ProcessPoolExecutor(n_workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            failures = _collect(pool.map(_run_mode, units, chunksize=chunk), results)
    if failures:
        idx, msg = min(failures)
        raise ModeFailure(msg)
    t_modes = time.perf_counter()

    n_t = len(cfg.output_times)
    S = np.empty((2, grid.size, n_t))
    U = np.empty_like(S)
    V = np.empty_like(S)
    max_res = 0.0
    for j, (i, r) in enumerate(grid.modes()):
        h = HELICITIES.index(r)
        s, u, v, res = results[j]
        S[h, i], U[h, i], V[h, i] = s, u, v
        max_res = max(max_res, res)

    stress = []
    for it, t in enumerate(cfg.output_times):
        bg = evaluate_background(model, t)
        states = {
            r: [SUVState(S[h, i, it], U[h, i, it], V[h, i, it]) for i in range(grid.size)]
            for h, r in enumerate(HELICITIES)
        }
        stress.append(integrate_stress(grid, states, bg, cfg.mass, cfg.t23_z_sign))
    t_end = time.perf_counter()

    return SweepResult(
        config=cfg,
        times=np.array(cfg.output_times),
        k=grid.k.copy(),
        costheta=grid.costheta.copy(),
        phi=grid.phi.copy(),
        S=S,
        U=U,
        V=V,
        stress=stress,
        max_residual=max_res,
        warnings=warnings,
        timing={
            "workers": n_workers,
            "mode_integration": t_modes - t_start,
            "assembly": t_end - t_modes,
            "total": t_end - t_start,
        },
    )


def _collect(outs, results):
    failures = []
    for idx, payload, err in outs:
        if err is not None:
            failures.append((idx, err))
        else:
            results[idx] = payload
    return failures


def _stress_csv(result: SweepResult) -> str:
    rows = [STRESS_HEADER]
    for t, st in zip(result.times, result.stress):
        rows.append(",".join(_FMT.format(x) for x in (t, *st.as_tuple())))
    return "\n".join(rows) + "\n"


def _spectrum_csv(result: SweepResult, it: int) -> str:
    rows = [SPECTRUM_HEADER]
    for h, r in enumerate(HELICITIES):
        for i in range(result.k.size):
            vals = (
                _FMT.format(result.k[i]),
                _FMT.format(result.costheta[i]),
                _FMT.format(result.phi[i]),
                str(r),
                _FMT.format(result.S[h, i, it]),
                _FMT.format(result.U[h, i, it]),
                _FMT.format(result.V[h, i, it]),
            )
            rows.append(",".join(vals))
    return "\n".join(rows) + "\n"


def write_outputs(result: SweepResult, out_dir) -> List[Path]:
    """Write ``stress.csv``, ``spectrum_<tindex>.csv`` and ``manifest.json``.

    Every file is first written to a temporary name in ``out_dir`` and then
    renamed into place, so a failure never leaves a partial file behind.

    Raises
    ------
    OSError
        ``out_dir`` cannot be created or written; raised before any output
        file is touched.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK | os.X_OK):
        raise PermissionError(f"output directory {str(out)!r} is not writable")

    docs = {"stress.csv": _stress_csv(result)}
    for it in range(result.times.size):
        docs[f"spectrum_{it}.csv"] = _spectrum_csv(result, it)
    docs["manifest.json"] = json.dumps(result.manifest(), indent=2, sort_keys=True) + "\n"

    staged = []
    try:
        for name, text in docs.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".tmp", dir=out)
            staged.append((tmp, out / name))
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]
