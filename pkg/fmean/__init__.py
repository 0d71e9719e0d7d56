"""Quasi-arithmetic f-means, f-conditional expectation and certainty-equivalent pricing."""
