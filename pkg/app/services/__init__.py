"""Estimation Services

- kernels: Gaussian-mixture kernel algebra
- bandwidths: schedules, candidate grids, rate diagnostics
- estimator: recursive estimator and streaming matrix
- selection: LMR and Goldenshluger-Lepski rules
- densities: test laws and seeded sampling
- experiments: Monte-Carlo harness
"""
