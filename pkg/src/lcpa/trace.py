"""Per-iteration solver records shared by all optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["SolverTrace"]


@dataclass
class SolverTrace:
    """Column-named iteration log; rows are tuples aligned with ``columns``."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width does not match columns")
        if self.rows and values[0] <= self.rows[-1][0]:
            raise ValueError("iterations must be strictly increasing")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.12g" % v
