from __future__ import annotations
from typing import List, Literal, Optional
from pydantic import BaseModel, Field, model_validator

DefenseName = Literal["none", "median", "zkp"]
DEFENSE_ORDER: tuple[DefenseName, ...] = ("none", "median", "zkp")


# -----------------------------
# Experiment config (JSON file)
# -----------------------------
class CircuitConfig(BaseModel):
    fraction_bits: int = Field(default=16, ge=8, le=24, description="Fixed-point fraction bits f.")
    margin_clamp: float = Field(default=6.0, gt=0, le=64, description="Margin clamp M; margins live in [-M, M].")
    gradient_bound: float = Field(default=32.0, gt=0, le=1024, description="Gradient bound B: |g| < B, 0 <= h < B.")
    degree: int = Field(default=6, ge=0, le=24, description="Surrogate polynomial degree d.")
    max_degree: int = Field(default=16, ge=0, le=24, description="Highest degree tried if d misses the tolerance.")
    range_bits: int = Field(default=24, ge=8, le=40, description="Range-check width; 2*B*2^f must fit.")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check(self) -> "CircuitConfig":
        if self.max_degree < self.degree:
            raise ValueError("max_degree must be >= degree")
        if 2 * round(self.gradient_bound * (1 << self.fraction_bits)) >= 1 << self.range_bits:
            raise ValueError("2*gradient_bound*2^fraction_bits must be < 2^range_bits")
        return self


class DatasetConfig(BaseModel):
    source: Literal["synthetic", "csv"] = Field(default="synthetic", description="Synthetic generator or a CSV file.")
    path: Optional[str] = Field(default=None, description="CSV path (label first, no header) when source = csv.")
    limit_rows: Optional[int] = Field(default=None, ge=1, description="Read at most this many CSV rows.")
    n_rows: int = Field(default=2500, ge=2, le=1_000_000, description="Synthetic rows (train + test).")
    n_features: int = Field(default=10, ge=2, le=256, description="Synthetic feature count.")
    noise: float = Field(default=0.05, ge=0.0, le=1.0, description="Synthetic label flip rate.")
    test_fraction: float = Field(default=0.2, ge=0.0, lt=1.0, description="Held-out share for accuracy.")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check(self) -> "DatasetConfig":
        if self.source == "csv" and not self.path:
            raise ValueError("dataset.path is required when dataset.source = 'csv'")
        return self


class OutputConfig(BaseModel):
    dir: str = Field(default="results", description="Directory for every output file.")
    rounds_csv: str = Field(default="rounds.csv", description="Per-round report lines.")
    summary_json: str = Field(default="summary.json", description="Final per-defense summary.")
    write_models: bool = Field(default=False, description="Also write model_<defense>.json.")
    record_timing: bool = Field(default=True, description="False writes every *_ms value as 0.0.")

    model_config = {"extra": "forbid"}


class ExperimentConfig(BaseModel):
    seed: int = Field(default=7, ge=0, description="Master seed (data, partition, adversaries, setup).")
    n_nodes: int = Field(default=50, ge=1, le=1000, description="Edge nodes.")
    byzantine_fraction: float = Field(default=0.1, ge=0.0, lt=1.0, description="Share of Byzantine nodes.")
    defense: Literal["none", "median", "zkp", "all"] = Field(default="all", description="Defense(s) to run.")
    rounds: int = Field(default=20, ge=1, le=500, description="Boosting rounds (one tree each).")
    depth: int = Field(default=3, ge=1, le=10, description="Maximum tree depth.")
    bins: int = Field(default=32, ge=2, le=256, description="Bins per feature.")
    reg_lambda: float = Field(default=1.0, ge=0.0, description="L2 leaf regularization lambda.")
    gamma: float = Field(default=0.0, ge=0.0, description="Minimum split gain gamma.")
    learning_rate: float = Field(default=0.3, gt=0.0, le=1.0, description="Shrinkage eta.")
    kappa: float = Field(default=10.0, gt=0.0, le=1000.0, description="Attack magnitude scale.")
    invert: bool = Field(default=True, description="Attackers flip gradient signs.")
    dirichlet_alpha: float = Field(default=0.5, gt=0.0, description="Label-skew concentration (small = skewed).")
    threads: Optional[int] = Field(default=None, ge=0, description="Worker threads; None -> settings, 0 -> all cores.")
    queue_partitions: Optional[int] = Field(default=None, ge=1, le=1024, description="Queue partitions P.")
    circuit: CircuitConfig = Field(default_factory=CircuitConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [
                {
                    "seed": 7,
                    "n_nodes": 50,
                    "byzantine_fraction": 0.1,
                    "defense": "all",
                    "rounds": 20,
                    "depth": 3,
                    "bins": 32,
                    "kappa": 10.0,
                    "dirichlet_alpha": 0.5,
                    "circuit": {"fraction_bits": 16, "margin_clamp": 6.0, "gradient_bound": 32.0, "degree": 6},
                    "dataset": {"source": "synthetic", "n_rows": 2500, "noise": 0.05},
                    "output": {"dir": "results", "record_timing": True},
                }
            ]
        },
    }

    def defenses(self) -> list[DefenseName]:
        return list(DEFENSE_ORDER) if self.defense == "all" else [self.defense]  # type: ignore[list-item]

    def n_byzantine(self) -> int:
        return int(round(self.byzantine_fraction * self.n_nodes))


# -----------------------------
# Reports
# -----------------------------
class RoundReport(BaseModel):
    round: int = Field(..., ge=1)
    defense: DefenseName
    accepted: List[int] = Field(default_factory=list, description="Node ids accepted this round")
    rejected: List[int] = Field(default_factory=list, description="Node ids rejected (flagged Byzantine)")
    accuracy: float = Field(..., ge=0.0, le=1.0, description="Held-out accuracy after this round's tree")
    agg_ms: float = Field(default=0.0, ge=0.0, description="Aggregator wall-clock for the round")
    byzantine_submitted: int = Field(default=0, ge=0)
    byzantine_accepted: int = Field(default=0, ge=0)
    influence_rate: Optional[float] = Field(default=None, description="median only: share of coordinates moved by attackers")


class DefenseSummary(BaseModel):
    defense: DefenseName
    final_accuracy: float
    mean_agg_ms: float
    poison_success: float


class RunSummary(BaseModel):
    seed: int
    n_nodes: int
    instances_per_node: int
    byzantine_nodes: List[int]
    pristine_accuracy: float
    records: List[DefenseSummary]

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "seed": 7,
                    "n_nodes": 50,
                    "instances_per_node": 40,
                    "byzantine_nodes": [3, 11, 19, 28, 44],
                    "pristine_accuracy": 0.88,
                    "records": [
                        {"defense": "none", "final_accuracy": 0.41, "mean_agg_ms": 35.2, "poison_success": 1.0},
                        {"defense": "median", "final_accuracy": 0.79, "mean_agg_ms": 41.0, "poison_success": 0.12},
                        {"defense": "zkp", "final_accuracy": 0.88, "mean_agg_ms": 58.9, "poison_success": 0.0},
                    ],
                }
            ]
        }
    }


class BenchRow(BaseModel):
    n_instances: int = Field(..., ge=1)
    constraints: int = Field(..., ge=1)
    prove_ms: float = Field(..., ge=0.0)
    verify_ms: float = Field(..., ge=0.0)
