"""Audio sample browser engine.

Pipeline stages: sample loading (dataset), cochlear timbre profiles
(cochlea), 2D placement (embedding, layout), visual labels (labels), study
scenes and the HTTP service (scene, study, store, server), and analysis of
logged measures (stats).
"""

__version__ = "0.1.0"
