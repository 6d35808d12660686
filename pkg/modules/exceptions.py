"""Error types raised by homlab operations.

All of them derive from ValueError so callers that only guard against bad
input keep working.
"""


class HomlabError(ValueError):
    """Base class for every error raised on invalid input."""


class MalformedInputError(HomlabError):
    """Input data does not describe a well-formed object."""


class SignatureMismatchError(HomlabError):
    """Two structures that must share a signature do not."""


class SizeCapExceededError(HomlabError):
    """An exhaustive construction was requested above its size guard."""


class InvalidCoverError(HomlabError):
    """A forest cover or pebble cover does not validate for its structure."""


class PreconditionError(HomlabError):
    """An operation was called outside its documented precondition."""


class InvalidMorphismError(HomlabError):
    """A map that must be a homomorphism is not one."""


class UnboundVariableError(HomlabError):
    """A formula has a free variable that the environment does not assign."""


class NotSynchronizationTreeError(HomlabError):
    """A pointed structure is not a synchronization tree of the required height."""


class FormulaSyntaxError(HomlabError):
    """Formula text could not be parsed."""
