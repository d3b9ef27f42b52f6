"""Exception hierarchy for the whole package.

Every error raised by moldpo derives from :class:`MoldpoError`, so callers can
catch one base class at API boundaries (the CLI maps the tree onto exit
codes). Plain OSError is used for I/O failures and is not wrapped.
"""

from __future__ import annotations


class MoldpoError(Exception):
    """Base class for all package errors."""


# --- SMILES tokenizing / parsing -------------------------------------------


class SmilesError(MoldpoError, ValueError):
    """A SMILES string was rejected.

    Carries the offending string and, when known, the character position.
    """

    def __init__(self, message: str, smiles: str = "", position: int | None = None):
        self.smiles = smiles
        self.position = position
        if position is not None:
            message = f"{message} (position {position} in {smiles!r})"
        elif smiles:
            message = f"{message} (in {smiles!r})"
        super().__init__(message)


class IllegalCharacter(SmilesError):
    """A byte outside the SMILES grammar."""


class UnclosedBracket(SmilesError):
    """A '[' without a matching ']'."""


class MalformedBracketAtom(SmilesError):
    """A bracket atom that does not match the bracket-atom grammar."""


class UnmatchedRingBond(SmilesError):
    """A ring-closure digit without a partner, or an inconsistent pair."""


class UnmatchedParenthesis(SmilesError):
    """A branch parenthesis without a partner."""


class EmptyInput(SmilesError):
    """Empty or whitespace-only input where a molecule was required."""


class ValenceViolation(SmilesError):
    """An atom's bonding exceeds its allowed valence."""

    def __init__(self, message: str, smiles: str = "", *, element: str = "",
                 atom_index: int | None = None, valence: int | None = None):
        self.element = element
        self.atom_index = atom_index
        self.valence = valence
        super().__init__(message, smiles)


class MalformedFormula(MoldpoError, ValueError):
    """A molecular-formula string does not match the element-count grammar."""


# --- descriptors / modifiers -------------------------------------------------


class WidthMismatch(MoldpoError, ValueError):
    """Tanimoto over fingerprints of different widths."""


class NonPositiveSigma(MoldpoError, ValueError):
    """gaussian_modifier needs sigma > 0."""


class NonPositiveThreshold(MoldpoError, ValueError):
    """threshold_modifier needs t > 0."""


class EmptyList(MoldpoError, ValueError):
    """An aggregation over zero values."""


class OutOfRange(MoldpoError, ValueError):
    """A score outside [0, 1] where one was required."""


# --- task construction -------------------------------------------------------


class InvalidTarget(MoldpoError, ValueError):
    """A task target SMILES failed to parse or validate."""


class EmptyTerms(MoldpoError, ValueError):
    """An MPO task with no terms."""


class UnknownSelector(MoldpoError, ValueError):
    """An MPO term names a property the task layer does not provide."""


class TooFewOracles(MoldpoError, ValueError):
    """multi_target_task needs at least two component oracles."""


class SchemaError(MoldpoError, ValueError):
    """A config document violates its schema (unknown field, bad type...)."""


# --- model / training ---------------------------------------------------------


class InvalidConfig(MoldpoError, ValueError):
    """A ModelConfig with impossible field values."""


class SequenceTooLong(MoldpoError, ValueError):
    """A token sequence longer than the model's context window."""


class InvalidTemperature(MoldpoError, ValueError):
    """Sampling temperature must be > 0."""


class EmptyBatch(MoldpoError, ValueError):
    """A training batch with no sequences."""


class ShapeMismatch(MoldpoError, ValueError):
    """Gradient/parameter tensors whose names or shapes disagree."""


class NonFiniteGradient(MoldpoError, ArithmeticError):
    """A NaN/Inf gradient reached the optimizer."""


class NonFiniteLoss(MoldpoError, ArithmeticError):
    """A NaN/Inf loss value."""


class EmptyPairs(MoldpoError, ValueError):
    """A DPO step with zero preference pairs."""


# --- checkpoints --------------------------------------------------------------


class CheckpointError(MoldpoError):
    """Base for checkpoint read/write failures (I/O errors stay OSError)."""


class FormatVersionMismatch(CheckpointError):
    """Unknown magic or unsupported format version."""


class ChecksumMismatch(CheckpointError):
    """Payload CRC-32 does not match the trailer."""


class CheckpointMismatch(FormatVersionMismatch):
    """A checkpoint incompatible with the requesting context (vocab/config)."""


# --- engine / CLI --------------------------------------------------------------


class EmptyMemory(MoldpoError, ValueError):
    """Winner selection from an empty memory."""


class LengthMismatch(MoldpoError, ValueError):
    """build_pairs with winner/loser lists of different lengths."""


class CorpusTooSmall(MoldpoError, ValueError):
    """Pretraining corpus with fewer parseable molecules than required."""


class ConfigError(MoldpoError, ValueError):
    """A run-level configuration problem (missing file, bad value...)."""
