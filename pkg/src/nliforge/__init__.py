"""nliforge: synthetic NLI corpus generation and evaluation toolkit.

The pipeline runs in stages, each usable as a library call or a CLI
command: domain discovery, stratified premise generation, hypothesis and
label generation, split assembly, human-annotation agreement, and scorer
evaluation. The language model behind generation is abstracted as a
text-completion backend, with a deterministic mock for desk-scale runs.
"""

from .agreement import (
    AgreementReport,
    AnnotationSession,
    agreement_report,
    cohen_kappa,
    majority_label,
)
from .assembly import (
    AblationSpec,
    SplitSpec,
    assemble,
    subsample_nested,
    verify_balance,
)
from .corpus import (
    CorpusError,
    CorpusStats,
    DomainRoster,
    Label,
    LengthCategory,
    NliExample,
    Split,
    compute_stats,
    default_roster,
    read_corpus,
    validate_example,
    write_corpus,
)
from .discovery import (
    DomainTally,
    DomainTriple,
    build_discovery_prompt,
    curate_roster,
    load_default_seeds,
    sample_domain_triples,
    tally_domains,
)
from .evaluation import (
    EvalInstance,
    EvalReport,
    evaluate_3way,
    evaluate_binary_task,
    ingest_true_task,
    roc_auc,
    run_ablation,
    to_binary,
)
from .gateway import (
    BackendError,
    CompletionRequest,
    CompletionResponse,
    Gateway,
    GatewayError,
    GatewayPolicy,
    HttpBackend,
    MockBackend,
    TransportError,
)
from .labeling import build_labeler_input, label_premises, parse_labeler_output
from .premises import (
    Premise,
    PremiseBatchSpec,
    audit_lengths,
    dedup_premises,
    generate_premise,
    generate_stratified,
)

__version__ = "0.1.0"
