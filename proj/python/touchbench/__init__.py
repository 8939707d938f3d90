"""Touch interaction humanization benchmark."""

import json

from ._touchbench import (
    Corpus,
    TouchbenchError,
    bspline_swipe,
    estimate_jsd,
    extract_features,
    feature_matrix,
    feature_names,
    fit_threshold,
    gaussian_jsd,
    information_gain,
    load_corpus,
    optimal_detector_value,
    parse_corpus,
    run_cli,
    save_corpus,
    synth_corpus,
    wasserstein_1d,
)

DEFAULT_MODES = ("RAW", "bspline", "history", "history+fake+long")


def run_benchmark(corpus, modes=DEFAULT_MODES, seed=7, retrain=True, per_cluster=True, threads=1):
    """Benchmark report as a dict (rows, warnings, metadata)."""
    from ._touchbench import run_benchmark_json

    return json.loads(
        run_benchmark_json(corpus, list(modes), seed, retrain, per_cluster, threads)
    )


__all__ = [
    "Corpus",
    "DEFAULT_MODES",
    "TouchbenchError",
    "bspline_swipe",
    "estimate_jsd",
    "extract_features",
    "feature_matrix",
    "feature_names",
    "fit_threshold",
    "gaussian_jsd",
    "information_gain",
    "load_corpus",
    "optimal_detector_value",
    "parse_corpus",
    "run_benchmark",
    "run_cli",
    "save_corpus",
    "synth_corpus",
    "wasserstein_1d",
]
