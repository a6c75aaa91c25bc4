"""ompar: LLM-guided OpenMP parallelization of restricted-C loop kernels.

Pipeline stages: parse → dependence analysis → plan (LLM or deterministic
mock) → static validation → pragma insertion → compile/run/sanitize
verification → benchmarking.
"""

__version__ = "0.1.0"
