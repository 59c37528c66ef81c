"""Privacy-budget manager: noisy statistical queries with noise reuse and a
tamper-evident release ledger."""

from .accountant import (
    BudgetState,
    SpendPoint,
    SpendReport,
    charge,
    initial_budget,
    replay_budget,
    spend_report,
    total_loss_variance_naive,
    total_loss_variance_ours,
)
from .dataset import (
    AverageOfColumn,
    ColumnSpec,
    Dataset,
    FrequencyOfPredicate,
    QueryRegistry,
    QueryTypeSpec,
    build_query_type,
    evaluate,
    ingest_csv,
    parse_predicate,
    sensitivity_average,
    sensitivity_frequency,
)
from .dp_core import (
    PrivacyParams,
    epsilon_from_loss_variance,
    epsilon_squared_cost_fresh,
    epsilon_squared_cost_partial,
    erf_inverse,
    gaussian_sigma,
    sample_gaussian,
    utility_alpha,
)
from .errors import (
    CasePreconditionError,
    CorruptHistoryError,
    DpLedgerError,
    EvaluatorUnavailableError,
    IngestionError,
    InsufficientBudgetError,
    InvalidParameterError,
    LedgerIntegrityError,
    StorageError,
    UnknownQueryTypeError,
)
from .ledger import ChainVerdict, Ledger, NoiseRecord, verify_file
from .reuse import (
    SIGMA_MATCH_RTOL,
    CaseKind,
    CaseTag,
    HistoryEntry,
    answer_exact,
    answer_fresh,
    answer_full,
    answer_partial,
    classify,
    optimal_reuse_ratio,
)
from .service import (
    DisabledEvaluator,
    InlineEvaluator,
    QueryResponse,
    QueryService,
    RemoteEvaluator,
    ServiceConfig,
    build_registry,
    build_service,
    load_config,
    load_dataset,
)

__version__ = "0.1.0"
