"""Desk-scale laboratory for hybrid variational time evolution of nonlinear
PDEs: a statevector simulator with cyclic-shift derivative operators, a
symbolic cost algebra, classical optimizers, and a finite-difference oracle.
"""

__version__ = "0.1.0"
