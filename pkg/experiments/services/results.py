"""
Results Service

Writes harness output for plotting: metrics.csv (one row per point),
config.json (the run configuration) and, when squared-error densities were
collected, histogram.csv. Values a scenario does not produce are empty cells.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from experiments.services.harness import MetricsRecord

logger = logging.getLogger(__name__)

METRICS_COLUMNS = (
    'scenario', 'solution', 'beta', 'Q', 'G', 'd', 'L', 'N', 'ebn0',
    'mse_tau', 'ser', 'per', 'trials', 'seed', 'good_estimate_rate',
)
HISTOGRAM_COLUMNS = ('solution', 'L', 'ebn0', 'bin_lo', 'bin_hi', 'density')


class ResultsError(Exception):
    """Result files could not be written."""


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def emit_results(
    records: Iterable[MetricsRecord],
    path_dir,
    config: Optional[Dict[str, Any]] = None,
) -> Dict[str, Path]:
    """Write the result files into `path_dir` and return their paths by name."""
    records = list(records)
    if not records:
        raise ResultsError("no records to write")

    out = Path(path_dir)
    written: Dict[str, Path] = {}
    try:
        out.mkdir(parents=True, exist_ok=True)

        metrics_path = out / 'metrics.csv'
        with metrics_path.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(METRICS_COLUMNS)
            for record in records:
                writer.writerow([_cell(getattr(record, column)) for column in METRICS_COLUMNS])
        written['metrics'] = metrics_path

        if config is not None:
            config_path = out / 'config.json'
            config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + '\n')
            written['config'] = config_path

        with_histogram = [r for r in records if r.histogram]
        if with_histogram:
            histogram_path = out / 'histogram.csv'
            with histogram_path.open('w', newline='') as handle:
                writer = csv.writer(handle)
                writer.writerow(HISTOGRAM_COLUMNS)
                for record in with_histogram:
                    for lo, hi, density in record.histogram:
                        writer.writerow([record.solution, record.L, _cell(record.ebn0), _cell(lo), _cell(hi), _cell(density)])
            written['histogram'] = histogram_path
    except OSError as exc:
        logger.error(f"HARNESS: cannot write results to {out}: {exc}")
        raise ResultsError(f"cannot write results to {out}: {exc}") from exc

    logger.info(f"HARNESS: wrote {len(records)} records to {out}")
    return written
