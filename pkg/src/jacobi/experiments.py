"""Experiment harness: seeded random instances, config-driven runs, presets
for the desk-scale studies, and CSV/JSON convergence histories."""

from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .block import BlockJacobiConfig, block_jacobi
from .core import ConvergenceState, HistoryRow, read_matrix
from .costs import CostLedger
from .orderings import Ordering, ROW_CYCLIC, parse_ordering
from .recursive import RecursiveJacobiConfig, recursive_jacobi
from .scalar import ScalarJacobiConfig, scalar_jacobi
from .svd import SvdConfig, jacobi_svd

RNG_NOTE = "numpy default_rng (PCG64) seeded with the recorded integer"

CSV_COLUMNS = ("sweep", "max_offdiag", "offdiag_fro", "cum_flops", "rotations")


@dataclass(frozen=True)
class MatrixSource:
    """Seeded random instances or a matrix file.

    kind: gaussian-symmetric (A = (G + G^T)/2 for standard Gaussian G),
    gaussian-rect (standard Gaussian m x n), or file.
    """

    kind: str
    n: int = 0
    m: int = 0
    seed: int = 0
    path: str = ""

    def realize(self, rep: int) -> tuple[np.ndarray, int]:
        seed = self.seed + rep
        rng = np.random.default_rng(seed)
        if self.kind == "gaussian-symmetric":
            g = rng.standard_normal((self.n, self.n))
            return (g + g.T) / 2.0, seed
        if self.kind == "gaussian-rect":
            return rng.standard_normal((self.m, self.n)), seed
        if self.kind == "file":
            return read_matrix(self.path), seed
        raise ValueError(f"unknown matrix source {self.kind!r}")


@dataclass
class ExperimentSpec:
    name: str
    source: MatrixSource
    solver: str  # scalar | block | recursive | svd
    config: object
    repetitions: int = 1
    output_dir: str = "results"


@dataclass
class RunRecord:
    experiment: str
    rep: int
    seed: int
    solver: str
    converged: bool
    sweeps: int
    final_max_offdiag: float
    final_offdiag_fro: float
    flops: int
    breakdown: dict[str, int]
    rotations: int
    block_pair_visits: int
    history: list[HistoryRow]
    max_depth_reached: int = 0
    base_case_solves: int = 0
    inner_stalls: int = 0

    def summary_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "rep": self.rep,
            "seed": self.seed,
            "solver": self.solver,
            "converged": self.converged,
            "sweeps": self.sweeps,
            "final_max_offdiag": self.final_max_offdiag,
            "final_offdiag_fro": self.final_offdiag_fro,
            "flops": self.flops,
            "breakdown": self.breakdown,
            "rotations": self.rotations,
            "block_pair_visits": self.block_pair_visits,
            "max_depth_reached": self.max_depth_reached,
            "base_case_solves": self.base_case_solves,
            "inner_stalls": self.inner_stalls,
        }


def _solve(solver: str, config, a: np.ndarray, ledger: CostLedger) -> ConvergenceState:
    if solver == "scalar":
        _, _, state = scalar_jacobi(a, config, ledger)
    elif solver == "block":
        _, _, state = block_jacobi(a, config, ledger)
    elif solver == "recursive":
        _, _, state = recursive_jacobi(a, config, ledger)
    elif solver == "svd":
        state = jacobi_svd(a, config, ledger).state
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return state


def run_experiment(spec: ExperimentSpec, write: bool = True) -> list[RunRecord]:
    """Execute all repetitions of one experiment; optionally write one history
    CSV per run plus a summary JSON.  Seeds derive as source.seed + rep, so a
    given spec is fully deterministic."""
    out = Path(spec.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    records = []
    for rep in range(spec.repetitions):
        a, seed = spec.source.realize(rep)
        ledger = CostLedger()
        state = _solve(spec.solver, spec.config, a, ledger)
        last = state.history[-1] if state.history else None
        record = RunRecord(
            experiment=spec.name,
            rep=rep,
            seed=seed,
            solver=spec.solver,
            converged=state.converged,
            sweeps=state.sweeps,
            final_max_offdiag=last.max_offdiag if last else state.initial_max_off_diag,
            final_offdiag_fro=last.offdiag_fro if last else 0.0,
            flops=ledger.flops,
            breakdown=dict(ledger.breakdown),
            rotations=ledger.rotations,
            block_pair_visits=ledger.block_pair_visits,
            history=state.history,
            max_depth_reached=state.max_depth_reached,
            base_case_solves=state.base_case_solves,
            inner_stalls=state.inner_stalls,
        )
        records.append(record)
        if write:
            emit_history_csv(record, out / f"{spec.name}_rep{rep}.csv")
    if write:
        write_summary(spec, records, out / f"{spec.name}_summary.json")
    return records


def emit_history_csv(record: RunRecord, path) -> None:
    """Per-sweep history with a fixed header; values at 17 significant digits."""
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in record.history:
            fh.write(f"{row.sweep},{row.max_offdiag:.17g},{row.offdiag_fro:.17g},"
                     f"{row.cum_flops},{row.rotations}\n")


def parse_history_csv(path) -> list[HistoryRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != ",".join(CSV_COLUMNS):
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            sweep, mx, fro, flops, rot = line.strip().split(",")
            rows.append(HistoryRow(int(sweep), float(mx), float(fro), int(flops), int(rot)))
    return rows


def _spec_echo(spec: ExperimentSpec) -> dict:
    echo = {
        "name": spec.name,
        "solver": spec.solver,
        "source": dataclasses.asdict(spec.source),
        "config": dataclasses.asdict(spec.config),
        "repetitions": spec.repetitions,
        "rng": RNG_NOTE,
    }
    return echo


def write_summary(spec: ExperimentSpec, records: list[RunRecord], path) -> None:
    payload = {
        "spec": _spec_echo(spec),
        "runs": [r.summary_dict() for r in records],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def gaussian_symmetric(n: int, seed: int) -> MatrixSource:
    return MatrixSource("gaussian-symmetric", n=n, seed=seed)


def preset_table4(out_dir: str, seed: int = 0, large: bool = False,
                  repetitions: int = 5) -> list[ExperimentSpec]:
    """Sweep-count grid: block Jacobi, row-cyclic, no pivoting, scalar block
    solver, over n x partition combinations."""
    sizes = [128, 256, 512] + ([1024, 2048] if large else [])
    specs = []
    for n in sizes:
        for parts in (4, 8, 16, 32):
            cfg = BlockJacobiConfig(b=n // parts, relative_tolerance=1e-7, max_sweeps=30)
            specs.append(ExperimentSpec(
                name=f"table4_n{n}_p{parts}",
                source=gaussian_symmetric(n, seed),
                solver="block",
                config=cfg,
                repetitions=repetitions,
                output_dir=out_dir,
            ))
    return specs


def preset_fig2(out_dir: str, seed: int = 0, n: int = 512) -> list[ExperimentSpec]:
    """Scalar vs blocked (b in {4,16,64}) vs recursive (f in {0.2..0.8}),
    no pivoting, on one shared instance."""
    specs = [ExperimentSpec(f"fig2_scalar", gaussian_symmetric(n, seed), "scalar",
                            ScalarJacobiConfig(max_sweeps=30), 1, out_dir)]
    for b in (4, 16, 64):
        specs.append(ExperimentSpec(f"fig2_block_b{b}", gaussian_symmetric(n, seed), "block",
                                    BlockJacobiConfig(b=b, max_sweeps=30), 1, out_dir))
    for f in (0.2, 0.4, 0.6, 0.8):
        cfg = RecursiveJacobiConfig(f=f, n_threshold=4, max_sweeps=30)
        specs.append(ExperimentSpec(f"fig2_recursive_f{f}", gaussian_symmetric(n, seed),
                                    "recursive", cfg, 1, out_dir))
    return specs


def preset_fig3(out_dir: str, seed: int = 0, n: int = 512, b: int = 2) -> list[ExperimentSpec]:
    """Adversarial blocked Jacobi with and without pivot fixes (plus a random
    block ordering), against the non-adversarial baseline."""
    src = gaussian_symmetric(n, seed)
    variants = [
        ("fig3_nadv", BlockJacobiConfig(b=b, max_sweeps=20)),
        ("fig3_adv", BlockJacobiConfig(b=b, adversarial=True, max_sweeps=20)),
        ("fig3_adv_lupp", BlockJacobiConfig(b=b, adversarial=True, pivot="lupp", max_sweeps=20)),
        ("fig3_adv_qrcp", BlockJacobiConfig(b=b, adversarial=True, pivot="qrcp", max_sweeps=20)),
        ("fig3_adv_random", BlockJacobiConfig(b=b, adversarial=True,
                                              ordering=Ordering("random", seed), max_sweeps=40)),
    ]
    return [ExperimentSpec(name, src, "block", cfg, 1, out_dir) for name, cfg in variants]


def preset_fig4(out_dir: str, seed: int = 0, n: int = 512) -> list[ExperimentSpec]:
    """Recursive Jacobi base-case accuracy study at f = 0.4."""
    specs = []
    for tol in (1e-7, 1e-6, 1e-5, 1e-4):
        cfg = RecursiveJacobiConfig(f=0.4, n_threshold=4, base_tolerance=tol, max_sweeps=30)
        specs.append(ExperimentSpec(f"fig4_basetol{tol:g}", gaussian_symmetric(n, seed),
                                    "recursive", cfg, 1, out_dir))
    return specs


def preset_fig5(out_dir: str, seed: int = 0, n: int = 512) -> list[ExperimentSpec]:
    """Recursive Jacobi depth-cap study at f = 0.8 with a direct base case."""
    specs = []
    for depth in (1, 2, 3, 4):
        cfg = RecursiveJacobiConfig(f=0.8, n_threshold=4, max_depth=depth,
                                    base_solver="direct", max_sweeps=30)
        specs.append(ExperimentSpec(f"fig5_depth{depth}", gaussian_symmetric(n, seed),
                                    "recursive", cfg, 1, out_dir))
    return specs


PRESETS = {
    "table4": preset_table4,
    "fig2": preset_fig2,
    "fig3": preset_fig3,
    "fig4": preset_fig4,
    "fig5": preset_fig5,
}


def run_preset(name: str, out_dir: str, seed: int = 0, large: bool = False) -> list[RunRecord]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kwargs = {"seed": seed}
    if name == "table4":
        kwargs["large"] = large
    specs = PRESETS[name](out_dir, **kwargs)
    records = []
    for spec in specs:
        records.extend(run_experiment(spec))
    index = {
        "preset": name,
        "rng": RNG_NOTE,
        "experiments": [_spec_echo(s) for s in specs],
        "runs": [r.summary_dict() for r in records],
    }
    with open(Path(out_dir) / f"{name}_index.json", "w") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records


def load_experiment_spec(path) -> ExperimentSpec:
    """Read an experiment from a flat key-value file with sections
    [experiment], [matrix], and [solver] (see README for the key set)."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    exp = parser["experiment"]
    mat = parser["matrix"]
    sol = parser["solver"]

    kind = mat.get("kind", "gaussian-symmetric")
    source = MatrixSource(kind, n=mat.getint("n", 0), m=mat.getint("m", 0),
                          seed=mat.getint("seed", 0), path=mat.get("path", ""))

    solver = sol.get("kind", "scalar")
    ordering = parse_ordering(sol.get("ordering", ROW_CYCLIC))
    tol = sol.getfloat("tolerance", 1e-7)
    max_sweeps = sol.getint("max_sweeps", 50)
    if solver == "scalar":
        config = ScalarJacobiConfig(ordering=ordering, relative_tolerance=tol,
                                    max_sweeps=max_sweeps,
                                    adversarial=sol.getboolean("adversarial", False))
    elif solver == "block":
        config = BlockJacobiConfig(b=sol.getint("b", 8), ordering=ordering, pivot=sol.get("pivot", "none"),
                                   block_solver=sol.get("block_solver", "scalar"),
                                   adversarial=sol.getboolean("adversarial", False),
                                   adversarial_sweep_cap=sol.getint("adversarial_sweep_cap", 4),
                                   relative_tolerance=tol, max_sweeps=max_sweeps)
    elif solver == "recursive":
        schedule = sol.get("f_schedule", "")
        config = RecursiveJacobiConfig(
            f=sol.getfloat("f", 0.5),
            f_schedule=tuple(float(x) for x in schedule.split(",")) if schedule else None,
            n_threshold=sol.getint("n_threshold", 4),
            max_depth=sol.getint("max_depth") if "max_depth" in sol else None,
            base_tolerance=sol.getfloat("base_tolerance") if "base_tolerance" in sol else None,
            base_solver=sol.get("base_solver", "scalar"),
            ordering=ordering, pivot=sol.get("pivot", "none"),
            relative_tolerance=tol, max_sweeps=max_sweeps)
    elif solver == "svd":
        config = SvdConfig(b=sol.getint("b", 8), ordering=ordering, pivot=sol.get("pivot", "none"),
                           gram_solver=sol.get("gram_solver", "scalar"),
                           preprocess=sol.get("preprocess", "none"),
                           relative_tolerance=sol.getfloat("tolerance", 1e-9),
                           max_sweeps=max_sweeps)
    else:
        raise ValueError(f"unknown solver {solver!r}")

    return ExperimentSpec(name=exp.get("name", Path(path).stem), source=source,
                          solver=solver, config=config,
                          repetitions=exp.getint("repetitions", 1),
                          output_dir=exp.get("output_dir", "results"))
