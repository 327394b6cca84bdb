"""Scrambled non-systematic coding for the AWGN wire-tap channel.

Modules: ``gf2`` (packed GF(2) algebra), ``scrambling``, ``block_codes``,
``ldpc``, ``channel``, ``analytic`` (closed-form error rates), ``montecarlo``,
``secgap`` (security gap) and ``cli``.
"""

__version__ = "0.1.0"
