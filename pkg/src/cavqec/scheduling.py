"""Cavity assignment and conflict-free scheduling of stabilizer rounds.

Each stabilizer of a hypergraph-product layout occupies one grid row plus one
grid column, so a cavity per row and per column of each ancilla layer
(ancilla-1 serves Z-checks, ancilla-2 serves X-checks) suffices.  Checks on a
common diagonal never share a row or column, so measuring diagonal by
diagonal avoids every cavity conflict.  All Z diagonals run before any X
diagonal; interleaving the two coupling types can flip the sign of the
measured operator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .codes import CssCode, Layout


@dataclass(frozen=True)
class CavityMap:
    """One cavity per grid row and per grid column in each ancilla layer."""

    grid_rows: int
    grid_cols: int

    @property
    def count(self) -> int:
        return 2 * (self.grid_rows + self.grid_cols)

    def row_cavity(self, layer: int, row: int) -> int:
        return layer * (self.grid_rows + self.grid_cols) + row

    def col_cavity(self, layer: int, col: int) -> int:
        return layer * (self.grid_rows + self.grid_cols) + self.grid_rows + col


@dataclass(frozen=True)
class Schedule:
    """Ordered timesteps of (check_type, check_index) sets.

    phase_of labels each timestep "Z" or "X"; the Z pass is contiguous and
    precedes the X pass.
    """

    timesteps: tuple
    phase_of: tuple

    def __len__(self) -> int:
        return len(self.timesteps)

    def to_json(self, layout: Layout) -> str:
        support = {"X": layout.x_stab_support, "Z": layout.z_stab_support}
        steps = []
        for step in self.timesteps:
            steps.append([
                {"type": t, "index": i,
                 "row": support[t][i][0], "col": support[t][i][1]}
                for t, i in step])
        return json.dumps(steps, indent=1)


def assign_cavities(layout: Layout) -> CavityMap:
    return CavityMap(grid_rows=layout.grid_rows, grid_cols=layout.grid_cols)


def diagonal_schedule(code: CssCode, layout: Layout) -> Schedule:
    """Group checks by the diagonal index (row - col) of their grid anchor.

    Within a diagonal no two checks share a grid row or column, so each
    diagonal forms one conflict-free timestep.  Checks inside a timestep are
    ordered by row for deterministic emission.
    """
    steps, phases = [], []
    for check_type, supports in (("Z", layout.z_stab_support),
                                 ("X", layout.x_stab_support)):
        by_diag = {}
        for idx, (r, c) in enumerate(supports):
            by_diag.setdefault(r - c, []).append((r, idx))
        for d in sorted(by_diag):
            group = tuple((check_type, idx) for _, idx in sorted(by_diag[d]))
            steps.append(group)
            phases.append(check_type)
    return Schedule(timesteps=tuple(steps), phase_of=tuple(phases))


def validate_schedule(schedule: Schedule, layout: Layout,
                      code: CssCode) -> dict:
    """Check cavity exclusivity and per-pass completeness.

    Returns {"ok": True} or a report naming the first violation.
    """
    support = {"X": layout.x_stab_support, "Z": layout.z_stab_support}
    for step_i, step in enumerate(schedule.timesteps):
        seen_rows, seen_cols = {}, {}
        for t, idx in step:
            r, c = support[t][idx]
            if (t, r) in seen_rows:
                return {"ok": False, "kind": "row-cavity conflict",
                        "timestep": step_i,
                        "checks": [seen_rows[(t, r)], (t, idx)]}
            if (t, c) in seen_cols:
                return {"ok": False, "kind": "column-cavity conflict",
                        "timestep": step_i,
                        "checks": [seen_cols[(t, c)], (t, idx)]}
            seen_rows[(t, r)] = (t, idx)
            seen_cols[(t, c)] = (t, idx)
    scheduled = [ti for step in schedule.timesteps for ti in step]
    if len(scheduled) != len(set(scheduled)):
        dup = next(x for x in scheduled if scheduled.count(x) > 1)
        return {"ok": False, "kind": "duplicate check", "check": dup}
    expected = ({("X", i) for i in range(code.g_x.rows)}
                | {("Z", i) for i in range(code.g_z.rows)})
    missing = expected - set(scheduled)
    if missing:
        return {"ok": False, "kind": "missing checks",
                "checks": sorted(missing)}
    return {"ok": True}


def merge_ghz_correction(m: int, branch_qubits) -> tuple:
    """Pauli correction after merging two cat branches on a parity outcome.

    Outcome m = 0 needs no correction; m = 1 applies X to every qubit of the
    chosen branch.
    """
    if m not in (0, 1):
        raise ValueError("measurement bit must be 0 or 1")
    if m == 0:
        return ()
    return tuple(("X", q) for q in branch_qubits)
