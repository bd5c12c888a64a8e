"""Extractors package: synthetic generation, CSV and IDX ingestion."""

from .csv_extractor import CsvExtractor, load_csv, save_csv
from .dataset import Dataset, split_train_test
from .idx_extractor import IdxExtractor, load_idx
from .synthetic_extractor import SyntheticExtractor, generate

__all__ = [
    "CsvExtractor",
    "Dataset",
    "IdxExtractor",
    "SyntheticExtractor",
    "generate",
    "load_csv",
    "load_idx",
    "save_csv",
    "split_train_test",
]
