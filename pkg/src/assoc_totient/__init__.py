"""Associated Euler totient function for polynomial Euler products.

Modules: ``sources`` (characters, tau, eigenvalue tables), ``euler`` (local
factors, phi, alpha, C(F)), ``sieve`` (bulk scan), ``analysis`` (residuals,
series identities, reports), ``cli``.
"""

__version__ = "0.1.0"
