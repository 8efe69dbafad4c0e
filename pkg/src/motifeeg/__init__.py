"""Motif discovery and motif-based classification for multichannel EEG."""

__version__ = "0.1.0"
