"""simgap: find pairs two embedding spaces disagree on, then make them count.

The package splits into five layers: :mod:`simgap.store` holds the
embedding corpus formats, :mod:`simgap.miner` the blind-pair scan,
:mod:`simgap.mof` the feature-mixing transforms, :mod:`simgap.bench`
the benchmark types and scoring rules, and :mod:`simgap.service` the
curation HTTP service.  :mod:`simgap.cli` wires them into one binary.
"""

__version__ = "0.1.0"
