"""wpforensic: snapshot WordPress-backed news sites and analyze the result.

Subpackages cover harvesting (REST API snapshots), extraction (clean articles
and translation graphs) and the analyses: backdating detection, monthly
n-gram tables, sentence-level topic clustering, lexicon scoring, Cyrillic
findings and temporal/coverage reports.
"""

__version__ = "0.1.0"
