"""Usage coverage simulation, product family evaluation and project selection."""

__version__ = "0.1.0"

from .coverage import (FeasibilityResult, UCIReport, is_feasible, uci, uci_family,  # noqa: E402
                       uci_population, uci_single)
from .market import (ChoiceResult, GapReport, MarketShares, coverage_gaps, market_share,  # noqa: E402
                     preferred_product)
from .model import (AttributeBox, Interval, ModelError, ModelSpec, UnknownIdError,  # noqa: E402
                    evaluate_performance, evaluate_performance_interval, validate_model)
from .paving import Paving, pave_feasible  # noqa: E402
from .proofs import SelectionRules, accumulate, decide, filter1  # noqa: E402
from .scenarios import EmptyDemandError, expected_scenarios, sample_population  # noqa: E402

__all__ = [
    "AttributeBox", "ChoiceResult", "EmptyDemandError", "FeasibilityResult", "GapReport", "Interval",
    "MarketShares", "ModelError", "ModelSpec", "Paving", "SelectionRules", "UCIReport", "UnknownIdError",
    "accumulate", "coverage_gaps", "decide", "evaluate_performance", "evaluate_performance_interval",
    "expected_scenarios", "filter1", "is_feasible", "market_share", "pave_feasible", "preferred_product",
    "sample_population", "uci", "uci_family", "uci_population", "uci_single", "validate_model",
]
