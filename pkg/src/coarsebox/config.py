"""Runtime limits and output options."""

from dataclasses import dataclass

DEFAULT_VERTEX_BUDGET = 2_000_000
DEFAULT_ORACLE_STATE_BUDGET = 1_000_000
DEFAULT_ORACLE_EDGE_BUDGET = 10_000_000

OUTPUT_FORMATS = ("json", "csv", "dot")


@dataclass
class Config:
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    oracle_state_budget: int = DEFAULT_ORACLE_STATE_BUDGET
    oracle_edge_budget: int = DEFAULT_ORACLE_EDGE_BUDGET
    output_format: str = "json"

    def __post_init__(self):
        for name in ("vertex_budget", "oracle_state_budget", "oracle_edge_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")
