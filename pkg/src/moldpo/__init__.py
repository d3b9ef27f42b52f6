"""moldpo: goal-directed molecule generation with preference optimization.

A small SMILES language model is pretrained on a molecule corpus, then
fine-tuned with a sigmoid preference loss against a frozen reference, using
curriculum-scheduled winner/loser pairs drawn from a shared scored memory by
several agents. See README.md for the CLI and file formats.
"""

__version__ = "0.1.0"
