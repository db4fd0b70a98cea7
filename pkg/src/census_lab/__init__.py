"""Exact and asymptotic counting of labeled connected graphs by complexity.

The counting identity behind this package expresses C(k, l), the number of
labeled connected graphs on k vertices with k - 1 + l edges, through a tilted
balls-into-bins process explored breadth-first.  Submodules:

    census       exact big-integer counts C(k, l) and binomials
    tilt         truncated geometric tilt, moments of M, tilt equation
    walk         queue walk, exact Pr[TREE], law of M*, identity checker
    montecarlo   seeded reproducible estimators for walk/excursion targets
    asymptotics  log-space regime formulas and comparison tables
    sampler      uniform random connected graph of given size and complexity
    cli          command line front end
"""

__version__ = "0.1.0"
