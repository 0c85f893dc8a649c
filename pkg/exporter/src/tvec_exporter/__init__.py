"""tvec-exporter: transformer embeddings for toponym corpora, as TVEC files."""

__version__ = "0.1.0"

from .contexts import read_documents, retrieval_context
from .export import ExportJob, ModelUnavailableError, export_vectors
from .tvec import write_tvec
