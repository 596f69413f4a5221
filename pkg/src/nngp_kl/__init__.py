"""Vecchia / nearest-neighbor GP approximations and KL-based model comparison."""
