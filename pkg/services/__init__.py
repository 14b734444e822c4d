"""Exact and numerical services of the polytope realization toolkit."""
