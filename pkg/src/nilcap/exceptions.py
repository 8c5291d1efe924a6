"""nilcap exceptions."""

from __future__ import annotations


class NilcapError(Exception):
    """Base exception for nilcap."""


class ExprSyntaxError(NilcapError):
    """A commutator expression does not match the grammar."""

    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"Syntax error at position {position}: {reason}")


class GeneratorIndexError(NilcapError):
    """A generator index lies outside x1..xr."""

    def __init__(self, index: int, r: int):
        self.index = index
        self.r = r
        super().__init__(f"Generator x{index} out of range: only x1..x{r} available")


class ShoveUndefinedError(NilcapError):
    """The shove [u<-v] was requested with u = v."""

    def __init__(self, commutator: str):
        self.commutator = commutator
        super().__init__(f"Shove undefined for equal arguments: {commutator}")


class NotBasicError(NilcapError):
    """An expression is not a basic commutator."""

    def __init__(self, text: str):
        self.text = text
        super().__init__(f"Not a basic commutator: {text}")


class BasisMismatchError(NilcapError):
    """Elements from different bases or presentations were combined."""

    def __init__(self, left: str, right: str):
        self.left = left
        self.right = right
        super().__init__(f"Mismatched operands: {left} vs {right}")


class ResourceLimitError(NilcapError):
    """A computation would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"Resource limit exceeded: {what} needs {size}, cap is {cap}")


class ConsistencyError(NilcapError):
    """A presentation or normal form check failed."""

    def __init__(self, check: str, witness: object = None):
        self.check = check
        self.witness = witness
        message = f"Consistency check failed: {check}"
        if witness is not None:
            message += f" (witness: {witness})"
        super().__init__(message)


class OutOfRangeError(NilcapError):
    """A parameter lies outside the supported range."""

    def __init__(self, parameter: str, value: object, reason: str):
        self.parameter = parameter
        self.value = value
        self.reason = reason
        super().__init__(f"{parameter}={value!r} out of range: {reason}")


class PreconditionError(NilcapError):
    """An operation was called with inputs violating its precondition."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class CacheFormatError(NilcapError):
    """A cached presentation file could not be parsed."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")
