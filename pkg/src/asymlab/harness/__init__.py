"""Batch experiment runner and command line."""

from .catalog import list_experiments
from .config import ExperimentSpec, SchemaError, load_spec, parse_spec_text
from .runner import RunManifest, run, verify_manifest

__all__ = ["ExperimentSpec", "RunManifest", "SchemaError", "list_experiments", "load_spec", "parse_spec_text", "run", "verify_manifest"]
