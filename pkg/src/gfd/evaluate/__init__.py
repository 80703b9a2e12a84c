from gfd.evaluate.bench import BenchmarkConfig, BenchmarkData, load_benchmark_data, run_benchmark, run_seeds
from gfd.evaluate.metrics import ConfusionMatrix, Metrics, confusion, metrics
from gfd.evaluate.report import EvalReport, SeedSummary, render_table, report_records
from gfd.evaluate.synth import SynthConfig, generate_synthetic

__all__ = [
    "BenchmarkConfig",
    "BenchmarkData",
    "ConfusionMatrix",
    "EvalReport",
    "Metrics",
    "SeedSummary",
    "SynthConfig",
    "confusion",
    "generate_synthetic",
    "load_benchmark_data",
    "metrics",
    "render_table",
    "report_records",
    "run_benchmark",
    "run_seeds",
]
