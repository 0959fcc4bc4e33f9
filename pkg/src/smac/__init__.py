"""Smart-contract corpus engine.

Ingests Solidity contract artifacts, deduplicates them by content,
computes lexical metrics, and serves the corpus through a filter
query language, an HTTP API, and a CLI.
"""

__version__ = "0.1.0"
