"""Retrieval-augmented question answering over pharmacogenomic guideline corpora.

The package has two halves that share one set of data types:

* a query pipeline (corpus loading, chunking, embedding, exact cosine
  retrieval, two-layer summarize/synthesize generation), and
* an evaluation harness (rubric aggregation, retrieval recall/precision,
  paired Wilcoxon signed-rank tests, quiz scoring, append-only annotation
  storage, and an HTTP service for a browser review console).
"""

__version__ = "0.1.0"
