"""Exception and warning types shared across the toolkit."""


class PlanEvalError(Exception):
    """Base class for every error the toolkit raises on purpose."""


# --- plan text format ---------------------------------------------------


class EmptyPlanError(PlanEvalError):
    """No steps could be recovered from a plan string."""


class MissingTerminatorError(PlanEvalError):
    """Strict parsing requires the END terminator."""


class MalformedStepError(PlanEvalError):
    """A step segment carried no content."""


# --- environment tables -------------------------------------------------


class SchemaError(PlanEvalError):
    """A structured document does not match its declared schema."""


class DuplicateIdError(SchemaError):
    """An identifier that must be unique appeared twice."""


class DanglingReceptacleError(SchemaError):
    """A parent_receptacle points at an object id that does not exist."""


class BudgetTooSmallError(PlanEvalError):
    """The token budget cannot fit even a zero-row encoding."""


# --- action lexicon -----------------------------------------------------


class LexiconError(PlanEvalError):
    """The lexicon document is malformed."""


class EmptyLexiconError(LexiconError):
    """The lexicon declares no verbs."""


class CycleInSynonymsError(LexiconError):
    """The synonym map contains a cycle and cannot be made idempotent."""


# --- metrics and aggregation --------------------------------------------


class EmptyCorpusError(PlanEvalError):
    """An operation over a corpus received no documents."""


class DomainError(PlanEvalError):
    """A numeric argument is outside its declared domain."""


class LengthMismatchError(PlanEvalError):
    """Two vectors that must share a length do not."""


class StepScoringError(PlanEvalError):
    """A step scorer failed; the message carries the step index."""


# --- analyses -----------------------------------------------------------


class EmptyInputError(PlanEvalError):
    """An analysis received no data points."""


class EmptyBucketBoundariesError(PlanEvalError):
    """Length bucketing needs at least one boundary."""


class EmptyDatasetError(PlanEvalError):
    """Dataset statistics need at least one record."""


# --- generator protocol -------------------------------------------------


class GeneratorError(PlanEvalError):
    """Base class for decode-harness failures."""


class GeneratorUnreachableError(GeneratorError):
    """The generator endpoint could not be reached after retries."""


class ProtocolError(GeneratorError):
    """The generator sent a response outside the wire contract."""


class EmptyFirstStepError(GeneratorError):
    """The generator emitted END on the very first iterative call."""


# --- runs and reports ---------------------------------------------------


class MissingTaskError(PlanEvalError):
    """A prediction has no matching reference task."""


class ConfigError(PlanEvalError):
    """A run configuration is unusable."""


class EmptyTableWarning(UserWarning):
    """An object table with zero rows was flattened."""
