"""Reader for sweep CSVs (wire format schema=1).

The file contract: first line ``# schema=1``, second line the exact column
header, then one record per line.  This module is the only coupling to the
simulator - everything is parsed from the file, nothing is imported.
"""

from dataclasses import dataclass


class CsvFormatError(ValueError):
    """Input does not match schema=1; message names the offending line."""


SCHEMA_LINE = "# schema=1"

COLUMNS = [
    "experiment_id", "n", "gamma", "epsilon", "rule", "beta", "level_policy",
    "l_max", "trials", "seed", "r_n", "cell_side", "mean_hops", "stderr",
    "skip_fraction", "capacity_estimate", "theory_hop_exponent",
    "theory_capacity",
    "k_bar_emp_1", "k_bar_emp_2", "k_bar_emp_3", "k_bar_emp_4",
    "k_bar_th_1", "k_bar_th_2", "k_bar_th_3", "k_bar_th_4",
    "wall_time_ms",
]

_STRING_COLUMNS = {"experiment_id", "rule", "level_policy"}
_INT_COLUMNS = {"n", "l_max", "trials", "seed", "wall_time_ms"}

UNIFORM_BETA_SENTINEL = -1.0


@dataclass
class SweepRow:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def rule_label(self):
        if self.values["rule"] == "uniform":
            return "uniform"
        return f"beta={self.values['beta']:g}"


def load_rows(path):
    """Parse a schema=1 CSV; raises CsvFormatError with a line number."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != SCHEMA_LINE:
        got = lines[0] if lines else "<empty file>"
        raise CsvFormatError(f"line 1: expected {SCHEMA_LINE!r}, got {got!r}")
    if len(lines) < 2 or lines[1].split(",") != COLUMNS:
        raise CsvFormatError("line 2: column header does not match schema=1")
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(COLUMNS):
            raise CsvFormatError(
                f"line {lineno}: expected {len(COLUMNS)} fields, got {len(parts)}")
        values = {}
        for col, raw in zip(COLUMNS, parts):
            try:
                if col in _STRING_COLUMNS:
                    values[col] = raw
                elif col in _INT_COLUMNS:
                    values[col] = int(raw)
                else:
                    values[col] = float(raw)
            except ValueError as exc:
                raise CsvFormatError(f"line {lineno}: bad value for "
                                     f"{col}: {raw!r}") from exc
        rows.append(SweepRow(values))
    if not rows:
        raise CsvFormatError("no data rows")
    return rows
