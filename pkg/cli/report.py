"""
Summary verdicts for one output directory.

Everything here is recomputed from the files a run left behind (the CSVs,
the key-value blocks and the config.yaml snapshot that holds the
thresholds), so ``qja summarize`` gives the same answer offline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import yaml

from cli.state import ArtifactError, ArtifactStore
from parsers.experiment import AcceptanceThresholds, ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Verdict:
    """One summary line; ``passed`` is None for informational values."""
    name: str
    value: float
    passed: Optional[bool] = None
    bound: str = ""

    def render(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        bound = f" ({self.bound})" if self.bound else ""
        return f"{status} {self.name} = {self.value!r}{bound}"


def _column(rows: List[Dict[str, str]], key: str) -> List[float]:
    return [float(row[key]) for row in rows]


def load_snapshot(store: ArtifactStore) -> ExperimentConfig:
    try:
        data = yaml.safe_load(store.read_text("config.yaml"))
        return ExperimentConfig.model_validate(data)
    except (yaml.YAMLError, ValueError) as e:
        raise ArtifactError(f"unusable config snapshot in {store.root}: {e}") from e


def _protocol_verdicts(store: ArtifactStore, engine: str, limits: AcceptanceThresholds) -> List[Verdict]:
    steps = store.read_csv(f"{engine}.csv")
    final = store.read_csv(f"{engine}_final.csv")
    overlap = min(_column(steps, "overlap_gibbs"))
    gs_prob = _column(steps, "gs_prob")[-1]
    drift = max(_column(steps, "norm_drift"))
    gibbs_error = max(
        abs(p - q) for p, q in zip(_column(final, "probability"), _column(final, "gibbs_probability"))
    )
    if engine == "qa":
        verdicts = [Verdict("qa.final_gs_prob", gs_prob)]
        if limits.qa_max_gs_prob is not None:
            verdicts[0] = Verdict("qa.final_gs_prob", gs_prob, gs_prob < limits.qa_max_gs_prob,
                                  f"< {limits.qa_max_gs_prob!r}")
        verdicts.append(Verdict("qa.max_norm_drift", drift, drift <= limits.max_norm_drift,
                                f"<= {limits.max_norm_drift!r}"))
        return verdicts

    tracks_gibbs = engine != "mapped_qa"
    verdicts = [
        Verdict(f"{engine}.min_overlap", overlap,
                overlap >= limits.overlap_floor if tracks_gibbs else None,
                f">= {limits.overlap_floor!r}" if tracks_gibbs else ""),
        Verdict(f"{engine}.final_gibbs_max_abs_error", gibbs_error,
                gibbs_error <= limits.gibbs_max_abs_error if tracks_gibbs else None,
                f"<= {limits.gibbs_max_abs_error!r}" if tracks_gibbs else ""),
        Verdict(f"{engine}.max_norm_drift", drift, drift <= limits.max_norm_drift,
                f"<= {limits.max_norm_drift!r}"),
    ]
    if engine == "qja" and limits.qja_min_gs_prob is not None:
        verdicts.append(Verdict("qja.final_gs_prob", gs_prob, gs_prob > limits.qja_min_gs_prob,
                                f"> {limits.qja_min_gs_prob!r}"))
    else:
        verdicts.append(Verdict(f"{engine}.final_gs_prob", gs_prob))
    return verdicts


def _ordering_verdict(store: ArtifactStore) -> Verdict:
    qa = _column(store.read_csv("qa.csv"), "gs_prob")[-1]
    qja = _column(store.read_csv("qja.csv"), "gs_prob")[-1]
    return Verdict("qja_minus_qa.final_gs_prob", qja - qa, qa < qja, "> 0.0")


def _je_verdicts(store: ArtifactStore, limits: AcceptanceThresholds) -> List[Verdict]:
    verdicts = []
    if store.exists("je_exact.txt"):
        exact = store.read_values("je_exact.txt")
        for key in ("rel_error", "trivial_rel_error"):
            value = float(exact[key])
            verdicts.append(Verdict(f"je_exact.{key}", value, value <= limits.je_exact_rtol,
                                    f"<= {limits.je_exact_rtol!r}"))
    if store.exists("je_mc.txt"):
        mc = store.read_values("je_mc.txt")
        deviation = abs(float(mc["lhs"]) - float(mc["rhs"]))
        bound = limits.je_mc_sigmas * float(mc["stderr"])
        verdicts.append(Verdict("je_mc.abs_error", deviation, deviation <= bound,
                                f"<= {limits.je_mc_sigmas!r} stderr = {bound!r}"))
    return verdicts


def _gap_verdicts(store: ArtifactStore) -> List[Verdict]:
    rows = store.read_csv("gap.csv")
    lowest = min(rows, key=lambda row: float(row["gap"]))
    gap = float(lowest["gap"])
    return [
        Verdict("gap_scan.min_gap", gap),
        Verdict("gap_scan.beta_at_min_gap", float(lowest["beta"])),
        Verdict("gap_scan.adiabatic_time", 1.0 / gap ** 2 if gap > 0 else float("inf")),
    ]


def compute_verdicts(store: ArtifactStore) -> List[Verdict]:
    config = load_snapshot(store)
    limits = config.thresholds
    engines = [engine.value for engine in config.engines]
    verdicts: List[Verdict] = []
    for engine in ("qa", "qja", "qja_no_unitary", "mapped_qa"):
        if engine in engines:
            verdicts.extend(_protocol_verdicts(store, engine, limits))
    if "qa" in engines and "qja" in engines:
        verdicts.append(_ordering_verdict(store))
    verdicts.extend(_je_verdicts(store, limits))
    if "gap_scan" in engines:
        verdicts.extend(_gap_verdicts(store))
    return verdicts


def render_summary(config: ExperimentConfig, verdicts: List[Verdict]) -> str:
    checked = [v for v in verdicts if v.passed is not None]
    overall = "PASS" if all(v.passed for v in checked) else "FAIL"
    lines = [
        f"experiment: {config.name}",
        f"config_hash: {config.config_hash()}",
        f"instance: {config.instance.label or config.instance.kind}",
        f"seed: {config.seed}",
        "",
        *(v.render() for v in verdicts),
        "",
        f"overall: {overall} ({sum(1 for v in checked if v.passed)}/{len(checked)} checks)",
    ]
    return "\n".join(lines) + "\n"


def write_summary(store: ArtifactStore) -> List[Verdict]:
    """Recompute the verdicts for ``store`` and (re)write summary.txt."""
    config = load_snapshot(store)
    verdicts = compute_verdicts(store)
    store.write_text("summary.txt", render_summary(config, verdicts))
    failed = [v.name for v in verdicts if v.passed is False]
    if failed:
        logger.warning(f"{len(failed)} checks failed in {store.root}: {', '.join(failed)}")
    return verdicts
