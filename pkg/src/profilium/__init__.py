"""Internal-profile variance of random suffix trees, three independent ways.

Subpackages:
  words       -- alphabet/word machinery (probabilities, overlaps, correlations)
  genfun      -- exact rational generating functions and root-based estimates
  oracle      -- ground truth: enumeration, automaton DP, Monte Carlo
  asymptotics -- regime thresholds, saddle/polar evaluators, landscape
  cli         -- command-line front end
"""

__version__ = "0.1.0"
