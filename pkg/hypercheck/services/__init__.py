"""Hypercheck service modules."""
