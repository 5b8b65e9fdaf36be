"""One-shot exporter: benchmark sentences -> encoder -> simcal files."""

from .export import ExportManifest, export, verify_manifest
from .spot_check import spot_check

__version__ = "0.1.0"

__all__ = ["ExportManifest", "export", "spot_check", "verify_manifest"]
