"""Exception types shared across the toolkit."""


class HybridTagError(Exception):
    """Base class for all toolkit errors."""


class FormatError(HybridTagError):
    """A resource or corpus file violates its line format."""

    def __init__(self, message, line=None, source=None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        where = []
        if self.source:
            where.append(str(self.source))
        if self.line is not None:
            where.append(f"line {self.line}")
        if where:
            return f"{':'.join(where)}: {self.message}"
        return self.message


class ResourceError(HybridTagError):
    """Resources are missing or inconsistent with each other."""


class ImpossibleSequence(ResourceError):
    """A class sequence has zero probability under the model."""

    def __init__(self, message="impossible sequence"):
        super().__init__(message)


class AlignmentError(HybridTagError):
    """Fine and coarse token streams cannot be reconciled."""

    def __init__(self, message, fine_index=None, coarse_index=None):
        self.fine_index = fine_index
        self.coarse_index = coarse_index
        super().__init__(
            f"{message} (fine position {fine_index}, coarse position {coarse_index})")


class EvaluationError(HybridTagError):
    """System output and gold corpus cannot be compared token by token."""
