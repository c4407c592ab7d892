"""Exact verification of hypergeometric closed forms."""
