"""Numerical core: systems, special functions, kernels, bounds, weights, semigroup and resolvent."""
