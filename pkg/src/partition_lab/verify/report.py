"""Experiment configuration and reports."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path


class ExperimentId(str, enum.Enum):
    THM_1_1_JOINT = "THM_1_1_JOINT"
    COR_1_2_MARGINAL = "COR_1_2_MARGINAL"
    COR_1_2_CONDITIONAL = "COR_1_2_CONDITIONAL"
    THM_1_3_CLT = "THM_1_3_CLT"
    THM_1_4_GENERAL = "THM_1_4_GENERAL"
    COR_1_5_DIRICHLET = "COR_1_5_DIRICHLET"
    COR_1_6_TRANSFORM = "COR_1_6_TRANSFORM"
    SZEKERES_ACCURACY = "SZEKERES_ACCURACY"
    LEMMA_2_1_IDENTITY = "LEMMA_2_1_IDENTITY"
    M_SWEEP_THM_1_5 = "M_SWEEP_THM_1_5"


# The claim each experiment reproduces.
CLAIMS = {
    ExperimentId.THM_1_1_JOINT: "fixed m, weight q^k1: offsets k_i - ceil(n/m) converge jointly to q^l1/Z",
    ExperimentId.COR_1_2_MARGINAL: "fixed m, weight q^k1: k1 - ceil(n/m) converges to q^l |P_{ml+m-j}(m-1)|/Z",
    ExperimentId.COR_1_2_CONDITIONAL: "fixed m, weight q^k1: given k1 the completion is uniform",
    ExperimentId.THM_1_3_CLT: "growing m, weight q^k1: (k1 - ceil(n/m) - gamma m)/sqrt(m) -> N(0, sigma^2)",
    ExperimentId.THM_1_4_GENERAL: "density weight f(k/n): k/n converges weakly to the law with density f",
    ExperimentId.COR_1_5_DIRICHLET: "Dirichlet kernel weight: k/n -> decreasing Dirichlet(alpha) order statistics",
    ExperimentId.COR_1_6_TRANSFORM: "Dirichlet kernel weight: (k/n)^alpha matches the transformed order statistics",
    ExperimentId.SZEKERES_ACCURACY: "Szekeres formula tracks log |P_n(k)| with shrinking error in n",
    ExperimentId.LEMMA_2_1_IDENTITY: "fixed-largest-part counts equal |P_{m(l+1)-j}(m-1)| up to the cutoff, bounded beyond",
    ExperimentId.M_SWEEP_THM_1_5: "uniform weight, m in {3,5,8}, n=200 m^3: k1/n close to the Dirichlet(1) top order statistic",
}


@dataclass
class ExperimentConfig:
    experiment_id: ExperimentId
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.experiment_id = ExperimentId(self.experiment_id)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    direction: str = "le"  # "le": value <= threshold, "gt": value > threshold

    @property
    def ok(self) -> bool:
        if self.direction == "le":
            return self.value <= self.threshold
        if self.direction == "gt":
            return self.value > self.threshold
        raise ValueError(f"unknown direction {self.direction!r}")

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "direction": self.direction, "ok": self.ok}


@dataclass
class Report:
    experiment_id: ExperimentId
    claim: str
    build: str
    seed: int
    inputs: dict
    statistics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    pass_rule: str = "all checks"
    passed: bool = False
    refused: bool = False
    refusal: str = ""
    artifacts: list = field(default_factory=list)
    runtime_ms: int = 0

    @property
    def primary(self) -> Check | None:
        return self.checks[0] if self.checks else None

    @property
    def threshold(self) -> float | None:
        return self.primary.threshold if self.checks else None

    def as_dict(self, with_runtime: bool = True) -> dict:
        d = {
            "experiment_id": self.experiment_id.value,
            "claim": self.claim,
            "build": self.build,
            "seed": self.seed,
            "inputs": {k: self.inputs[k] for k in sorted(self.inputs)},
            "statistics": {k: self.statistics[k] for k in sorted(self.statistics)},
            "primary": self.primary.name if self.checks else None,
            "threshold": self.threshold,
            "checks": [c.as_dict() for c in self.checks],
            "pass_rule": self.pass_rule,
            "pass": self.passed,
            "refused": self.refused,
            "refusal": self.refusal,
            "artifacts": list(self.artifacts),
        }
        if with_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d

    def to_json(self, with_runtime: bool = True) -> str:
        return json.dumps(self.as_dict(with_runtime), indent=2) + "\n"

    def to_text(self, with_runtime: bool = True) -> str:
        lines = []
        for key, val in self.as_dict(with_runtime).items():
            if isinstance(val, dict):
                for k, v in val.items():
                    lines.append(f"{key}.{k} = {_fmt(v)}")
            elif key == "checks":
                for c in val:
                    mark = "ok" if c["ok"] else "FAIL"
                    lines.append(f"check.{c['name']} = {_fmt(c['value'])} {c['direction']} "
                                 f"{_fmt(c['threshold'])} [{mark}]")
            else:
                lines.append(f"{key} = {_fmt(val)}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.experiment_id.value.lower()
        paths = [out / f"{stem}.report.txt", out / f"{stem}.report.json"]
        paths[0].write_text(self.to_text())
        paths[1].write_text(self.to_json())
        return paths


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)
