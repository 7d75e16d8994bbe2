"""replan: repairable planning workbench.

MILP model core, in-house LP/MILP kernel, tail-assignment and
production-planning domains, scenario repair (exact and VNS) and
recoverable-robustness evaluation, with a CLI and HTTP service on top.
"""

__version__ = "0.1.0"
