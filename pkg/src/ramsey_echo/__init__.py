"""
Generalized one-axis-twisting echo Ramsey protocols.

Analytic sensitivities of twist / rotate / untwist / measure sequences, their
optimization over signal and measurement axes, and the brute-force, Fisher
information and Wigner-function tools used to check them.
"""

from ramsey_echo.__about__ import __version__

__all__ = ["__version__"]
