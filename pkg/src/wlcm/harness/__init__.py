from .data import AnalysisReport, CsvSchema, Dataset, analyze_dataset, load_response_csv
from .report import emit_report
from .scenarios import CANNED, ScenarioConfig, ScenarioReport, get_scenario, run_scenario

__all__ = [
    "AnalysisReport",
    "CANNED",
    "CsvSchema",
    "Dataset",
    "ScenarioConfig",
    "ScenarioReport",
    "analyze_dataset",
    "emit_report",
    "get_scenario",
    "load_response_csv",
    "run_scenario",
]
