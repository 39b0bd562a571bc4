"""Dispatch of the engines named in an experiment config onto an artifact directory."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from cli.report import Verdict, write_summary
from cli.state import ArtifactError, ArtifactStore
from parsers import ConfigError
from parsers.experiment import Engine, ExperimentConfig
from qja.dynamics import Topology, default_topology, jarzynski_estimate, jarzynski_exact
from qja.engines import RunReport, run_mapped_qa, run_qa, run_qja, run_qja_no_unitary
from qja.errors import QjaError
from qja.mapping import gap_profile
from qja.model import AnnealSchedule, CostDiagonal, gibbs_reference

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENGINE = 3
EXIT_IO = 4

STEP_FIELDS = ("step", "t", "beta", "overlap_gibbs", "gs_prob", "norm_drift")
FINAL_FIELDS = ("index", "energy", "probability", "gibbs_probability")
REFERENCE_FIELDS = ("step", "t", "beta", "gibbs_gs_prob")
GAP_FIELDS = ("step", "t", "beta", "lambda0", "lambda1", "gap")
WORK_FIELDS = ("sample_index", "work_exponent", "exp_work")

PROTOCOL_ENGINES = (Engine.QA, Engine.QJA, Engine.QJA_NO_UNITARY, Engine.MAPPED_QA)


class EngineFailure(RuntimeError):
    """Numerical failure inside one engine."""

    def __init__(self, engine: Engine, cause: BaseException):
        self.engine = engine
        self.cause = cause
        super().__init__(f"{engine.value} failed: {cause}")


@dataclass
class RunOutcome:
    exit_code: int
    output_dir: Optional[Path] = None
    artifacts: List[Path] = field(default_factory=list)
    verdicts: List[Verdict] = field(default_factory=list)
    error: str = ""

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_OK and all(v.passed is not False for v in self.verdicts)


@dataclass(frozen=True)
class _Context:
    config: ExperimentConfig
    cost: CostDiagonal
    schedule: AnnealSchedule
    topology: Topology
    store: ArtifactStore
    threads: int


def _write_protocol(ctx: _Context, engine: Engine, report: RunReport) -> List[Path]:
    steps = [
        {
            "step": r.step, "t": r.t, "beta": r.beta, "overlap_gibbs": r.overlap_gibbs,
            "gs_prob": r.gs_prob, "norm_drift": r.norm_drift,
        }
        for r in report.per_step
    ]
    probabilities = report.final_distribution
    final = [
        {
            "index": i, "energy": float(ctx.cost.energies[i]),
            "probability": float(probabilities[i]), "gibbs_probability": float(report.gibbs_final[i]),
        }
        for i in range(ctx.cost.dimension)
    ]
    return [
        ctx.store.write_csv(f"{engine.value}.csv", STEP_FIELDS, steps),
        ctx.store.write_csv(f"{engine.value}_final.csv", FINAL_FIELDS, final),
    ]


def _run_qa(ctx: _Context) -> List[Path]:
    return _write_protocol(ctx, Engine.QA, run_qa(ctx.cost, ctx.schedule))


def _run_qja(ctx: _Context) -> List[Path]:
    dyn = ctx.config.dynamics
    report = run_qja(ctx.cost, ctx.schedule, ctx.topology, dyn.attempt_rate, dyn.convention, dyn.order)
    return _write_protocol(ctx, Engine.QJA, report)


def _run_qja_no_unitary(ctx: _Context) -> List[Path]:
    return _write_protocol(ctx, Engine.QJA_NO_UNITARY, run_qja_no_unitary(ctx.cost, ctx.schedule))


def _run_mapped_qa(ctx: _Context) -> List[Path]:
    dyn = ctx.config.dynamics
    report = run_mapped_qa(ctx.cost, ctx.schedule, ctx.topology, dyn.attempt_rate, dyn.convention)
    return _write_protocol(ctx, Engine.MAPPED_QA, report)


def _je_schedule(ctx: _Context) -> AnnealSchedule:
    override = ctx.config.je.schedule
    return override.build() if override is not None else ctx.schedule


def _run_je_mc(ctx: _Context) -> List[Path]:
    result = jarzynski_estimate(
        ctx.cost, _je_schedule(ctx), ctx.topology, ctx.config.je.n_samples,
        ctx.config.seed, ctx.config.dynamics.attempt_rate, threads=ctx.threads,
    )
    work = result.work_exponents if result.work_exponents is not None else np.empty(0)
    rows = (
        {"sample_index": i, "work_exponent": float(w), "exp_work": float(np.exp(w))} for i, w in enumerate(work)
    )
    return [
        ctx.store.write_csv("je_mc.csv", WORK_FIELDS, rows),
        ctx.store.write_values("je_mc.txt", result.as_report()),
    ]


def _run_je_exact(ctx: _Context) -> List[Path]:
    schedule = _je_schedule(ctx)
    rate = ctx.config.dynamics.attempt_rate
    full = jarzynski_exact(ctx.cost, schedule, ctx.topology, rate)
    trivial = jarzynski_exact(ctx.cost, schedule, ctx.topology, rate, transitions=False)
    values = {
        "lhs": full.lhs_estimate,
        "rhs": full.rhs_exact,
        "rel_error": full.rel_error,
        "trivial_lhs": trivial.lhs_estimate,
        "trivial_rel_error": trivial.rel_error,
        "n_steps": schedule.n_steps,
    }
    return [ctx.store.write_values("je_exact.txt", values)]


def _run_gap_scan(ctx: _Context) -> List[Path]:
    dyn = ctx.config.dynamics
    profile = gap_profile(ctx.cost, ctx.schedule, ctx.topology, dyn.attempt_rate, dyn.convention, ctx.threads)
    rows = (
        {"step": k, "t": p.t, "beta": p.beta, "lambda0": p.lambda0, "lambda1": p.lambda1, "gap": p.gap}
        for k, p in enumerate(profile.points)
    )
    return [ctx.store.write_csv("gap.csv", GAP_FIELDS, rows)]


ENGINE_RUNNERS: Dict[Engine, Callable[[_Context], List[Path]]] = {
    Engine.QA: _run_qa,
    Engine.QJA: _run_qja,
    Engine.QJA_NO_UNITARY: _run_qja_no_unitary,
    Engine.MAPPED_QA: _run_mapped_qa,
    Engine.JE_MC: _run_je_mc,
    Engine.JE_EXACT: _run_je_exact,
    Engine.GAP_SCAN: _run_gap_scan,
}


def _write_reference(ctx: _Context) -> Path:
    ground = ctx.cost.ground_state_indices()
    rows = []
    for k, (t, beta) in enumerate(zip(ctx.schedule.times, ctx.schedule.beta_grid)):
        probabilities = gibbs_reference(ctx.cost, float(beta)).probabilities
        rows.append({"step": k, "t": float(t), "beta": float(beta),
                     "gibbs_gs_prob": float(probabilities[ground].sum())})
    return ctx.store.write_csv("reference.csv", REFERENCE_FIELDS, rows)


def _dispatch(ctx: _Context, engine: Engine) -> List[Path]:
    try:
        return ENGINE_RUNNERS[engine](ctx)
    except ArtifactError:
        raise
    except (QjaError, ValueError, ArithmeticError) as e:
        raise EngineFailure(engine, e) from e


def run_experiment(config: ExperimentConfig, output_dir: Path, threads: int = 1) -> RunOutcome:
    """
    Run every configured engine and write its artifacts plus summary.txt.

    Engines run concurrently on up to ``threads`` workers; each writes only
    its own files. Exit code 2 for an instance or schedule the numerical core
    rejects, 3 when an engine fails, 4 when output cannot be written.
    """
    try:
        cost = config.instance.build()
        schedule = config.schedule.build()
        topology = config.dynamics.topology or default_topology(cost)
    except (QjaError, ConfigError) as e:
        logger.error(f"Invalid experiment {config.name}: {e}")
        return RunOutcome(exit_code=EXIT_CONFIG, error=str(e))

    try:
        store = ArtifactStore(output_dir)
        artifacts = [store.write_text("config.yaml", config.to_yaml())]
        ctx = _Context(config, cost, schedule, topology, store, max(1, threads))
        if any(engine in PROTOCOL_ENGINES for engine in config.engines):
            artifacts.append(_write_reference(ctx))
        with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
            futures = [pool.submit(_dispatch, ctx, engine) for engine in config.engines]
            results = [future.exception() or future.result() for future in futures]
        for result in results:
            if isinstance(result, BaseException):
                raise result
            artifacts.extend(result)
        verdicts = write_summary(store)
        artifacts.append(store.path("summary.txt"))
    except EngineFailure as e:
        logger.error(str(e))
        return RunOutcome(exit_code=EXIT_ENGINE, output_dir=output_dir, error=str(e))
    except OSError as e:
        logger.error(f"I/O failure in {output_dir}: {e}")
        return RunOutcome(exit_code=EXIT_IO, output_dir=output_dir, error=str(e))

    logger.info(f"Experiment {config.name} wrote {len(artifacts)} files to {output_dir}")
    return RunOutcome(exit_code=EXIT_OK, output_dir=output_dir, artifacts=artifacts, verdicts=verdicts)
