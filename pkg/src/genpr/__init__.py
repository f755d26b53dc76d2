"""Generalized phase retrieval: measurement ensembles, injectivity certificates,
measurement-number bounds and signal recovery from quadratic samples."""
