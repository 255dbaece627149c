"""Video feature extraction: samples frames and writes .feat.jsonl streams."""

from autocut_extract.extract import ExtractorConfig, extract

__version__ = "0.1.0"
