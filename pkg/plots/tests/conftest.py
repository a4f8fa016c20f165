import math

import pytest

from plots.csvdata import COLUMNS, SCHEMA_LINE


def make_row(n=1024, gamma=2.5, epsilon=2.5, rule="uniform", beta=-1.0,
             level_policy="direct", seed=1, mean_hops=8.0, stderr=0.05):
    r_n = math.sqrt(math.log(n) / n)
    cap = 1.0 / (math.log(n) * mean_hops) if mean_hops > 0 else 0.0
    values = {
        "experiment_id": f"{rule}-b{beta:g}-{level_policy}-n{n}-s{seed}",
        "n": n, "gamma": gamma, "epsilon": epsilon, "rule": rule, "beta": beta,
        "level_policy": level_policy, "l_max": 1 if level_policy == "direct" else 9,
        "trials": 1000, "seed": seed, "r_n": r_n, "cell_side": r_n,
        "mean_hops": mean_hops, "stderr": stderr, "skip_fraction": 0.0,
        "capacity_estimate": cap, "theory_hop_exponent": 0.5,
        "theory_capacity": 1.0 / math.sqrt(n * math.log(n)),
        "k_bar_emp_1": 1.8, "k_bar_emp_2": 40.0, "k_bar_emp_3": 5.0,
        "k_bar_emp_4": 12.0, "k_bar_th_1": 3.0, "k_bar_th_2": 6.0,
        "k_bar_th_3": 12.0, "k_bar_th_4": 24.0, "wall_time_ms": 5,
    }
    return values


def rows_to_csv(rows):
    lines = [SCHEMA_LINE, ",".join(COLUMNS)]
    for row in rows:
        lines.append(",".join(
            str(row[c]) if isinstance(row[c], (str, int)) else format(row[c], ".10g")
            for c in COLUMNS))
    return "\n".join(lines) + "\n"


@pytest.fixture
def csv_file(tmp_path):
    def write(rows, name="sweep.csv"):
        path = tmp_path / name
        path.write_text(rows_to_csv(rows))
        return str(path)

    return write


@pytest.fixture
def rich_rows():
    """A default-grid-shaped set of rows (small)."""
    rows = []
    for n in (1024, 2048, 4096):
        for eps in (2.4, 3.0):
            for rule, beta in (("uniform", -1.0), ("powerlaw", 1.0),
                               ("powerlaw", 2.5)):
                for policy in ("direct", "hierarchical"):
                    rows.append(make_row(n=n, epsilon=eps, rule=rule,
                                         beta=beta, level_policy=policy,
                                         mean_hops=6.0 + n / 1024))
    return rows
