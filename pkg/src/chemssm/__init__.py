"""chemssm: selective state-space sequence models for molecular strings.

Pretrains an autoregressive sequence model on SMILES corpora, fine-tunes it
on labeled property-prediction tasks under scaffold splits, and evaluates
with rank-based and regression metrics. Pure NumPy; fully deterministic
given a seed.
"""

__version__ = "0.1.0"
