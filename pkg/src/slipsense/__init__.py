"""Partial-slip contact simulation and incipient-slip detection.

Subpackages by role:

- :mod:`slipsense.cattaneo`: closed-form sphere-on-plane partial slip model
  and the synthetic frame-sequence generator.
- :mod:`slipsense.beam`: quasi-static beam-chain and beam-lattice stick-slip
  simulators with exact ground truth.
- :mod:`slipsense.strain`: deformation-field strain pipeline up to the
  characteristic strain rate.
- :mod:`slipsense.detector`: streaming extreme-event detection and the
  per-node slip state machine.
- :mod:`slipsense.slipmap`: slip maps, contact-factor ground truth, and
  estimate-vs-truth evaluation.
- :mod:`slipsense.friction`: stochastic friction sampling and OLS fitting.
- :mod:`slipsense.seqio` / :mod:`slipsense.cli`: file formats and the
  command-line pipeline.
"""

__version__ = "0.1.0"
