"""CSV contracts for each figure id.

Inputs come from the potlab experiment harness. Headers must match the
expected schema exactly: a renamed or reordered column is a hard error,
never a best-effort parse. Comment lines (leading '#') are ignored.
"""
from __future__ import annotations

import csv
from pathlib import Path

HEADERS = {
    "fig2": ["setting", "game_index", "seed", "potentialness", "has_pure_ne", "has_spne"],
    "fig3": ["setting", "n_runs", "construction_seconds", "mean_potentialness_seconds"],
    "fig4": [
        "setting", "n_games", "mean_potentialness", "var_potentialness",
        "min_potentialness", "max_potentialness", "pure_ne_fraction", "spne_fraction",
    ],
    "fig5": [
        "setting", "bin", "lo", "hi", "n_games", "n_runs",
        "convergence_fraction", "convergence_stddev",
    ],
    "fig6": ["kind", "n_actions", "valuations", "potentialness", "n_pure_ne", "n_strict_ne"],
    "fig7": [
        "kind", "alpha", "potentialness", "has_spne", "convergence_fraction",
        "original_potentialness",
    ],
    "fig8": ["kind", "n_types", "n_strategies", "potentialness", "has_pure_bne"],
    "fig9": [
        "setting", "bin", "lo", "hi", "n_games", "n_runs",
        "convergence_fraction", "convergence_stddev",
    ],
}

FIGURE_IDS = sorted(HEADERS)


class SchemaError(Exception):
    """Input CSV does not match the contract for the requested figure."""


def parse_field(text: str):
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_rows(path: Path, figure_id: str) -> list[dict]:
    """Read and validate one harness CSV; returns parsed row dicts."""
    if figure_id not in HEADERS:
        raise SchemaError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
    expected = HEADERS[figure_id]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: no header row found")
    reader = csv.reader(lines)
    header = next(reader)
    if header != expected:
        raise SchemaError(
            f"{path}: header does not match the {figure_id} schema\n"
            f"  expected: {','.join(expected)}\n"
            f"  found:    {','.join(header)}"
        )
    rows = [dict(zip(expected, map(parse_field, row))) for row in reader]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
