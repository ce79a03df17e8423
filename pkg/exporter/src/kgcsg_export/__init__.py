"""Transformer embedding exporter for the kgcsg embedding file format."""

from .cli import export_embeddings
from .manifest import TokenManifest, read_manifest

__version__ = "0.1.0"
