"""toposearch: hybrid geospatial-semantic search and QA over toponym records."""

__version__ = "0.1.0"

from .corpus import (
    FieldCategory,
    FieldSegment,
    IndexedDocument,
    ToponymRecord,
    ToponymSubtype,
    ToponymType,
    assemble_qa_context,
    assemble_retrieval_context,
    build_documents,
    ingest_file,
    ingest_records,
    load_corpus,
    write_corpus,
)
from .errors import DataFormatError
from .evaluation import (
    BootstrapCI,
    EvalQuery,
    RetrievalReport,
    bootstrap_ci,
    compare_methods,
    generate_eval_queries,
    recall_at_k,
    reciprocal_rank,
)
from .geo import GeoPoint, SpatialIndex, bounding_box, covering_box, haversine_m, radius_query
from .hybrid import (
    Method,
    ScoredHit,
    SearchEngine,
    SearchQuery,
    SearchResult,
    combine,
    geo_score,
    grid_search_alpha,
    max_normalize,
    min_max_normalize,
)
from .lexical import BM25Index, tokenize
from .qagen import (
    QaPair,
    QuestionTemplate,
    builtin_templates,
    emit_flat,
    emit_squad,
    generate_corpus,
    generate_pairs,
    load_pairs,
    split_corpus,
)
from .reader import (
    QaMetrics,
    ReaderAnswer,
    answer_question,
    classify_question,
    evaluate_predictions,
    evaluate_reader,
    exact_match,
    extract,
    normalize_answer,
    token_f1,
)
from .semantic import HashingProvider, VectorIndex, hash_encode, load_vectors, write_vectors
