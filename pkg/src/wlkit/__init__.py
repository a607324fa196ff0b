"""Color refinement, isomorphism testing, and a recoloring graph network.

Subpackages:

- ``wlkit.graphs``: immutable graphs, permutations, color partitions, JSON codec
- ``wlkit.refinement``: refinement closure, pair test, individualization test
- ``wlkit.fractional``: exact LP feasibility, polytope vertices, compactness
- ``wlkit.nn``: GIN layers, recoloring layer, training loop
- ``wlkit.data``: TU-format parsing, feature construction, benchmark generators
- ``wlkit.cli``: command-line interface
- ``wlkit.service``: HTTP API around the same operations
"""

__version__ = "0.1.0"
