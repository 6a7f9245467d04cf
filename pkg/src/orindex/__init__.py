"""Text indexes stored as relational and object-relational tables."""

from .corpus import Document, GenSpec, generate, read_corpus, write_corpus
from .engine import add_documents, bulk_build, evaluate_query, expand_query, tokenize
from .representations import IndexPlan, Representation, SearchIndex
from .size_model import CorpusStats, compare, estimate_cor, estimate_hor, estimate_orif, estimate_pr
from .storage import CostModel, HeapTable

__version__ = "0.1.0"
