"""Exception hierarchy shared by all modules."""


class SilhouetteError(Exception):
    """Base class for all errors raised by this package."""


class PrefixViolation(SilhouetteError, ValueError):
    """A node set is not prefix-closed; ``node`` is the offending path."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"parent of node {node!r} is missing")


class EmptyTree(SilhouetteError, ValueError):
    pass


class FormatError(SilhouetteError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateKey(SilhouetteError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"key at position {index} repeats an earlier key")


class DepthExceeded(SilhouetteError, RuntimeError):
    pass


class DomainError(SilhouetteError, ValueError):
    pass


class NotASilhouette(SilhouetteError, ValueError):
    pass


class ResolutionTooCoarse(SilhouetteError, ValueError):
    pass


class LevelOverflow(SilhouetteError, ValueError):
    pass


class EmptyPool(SilhouetteError, ValueError):
    pass


class EmptySample(SilhouetteError, ValueError):
    pass


class LengthMismatch(SilhouetteError, ValueError):
    pass


class ConfigError(SilhouetteError, ValueError):
    pass
