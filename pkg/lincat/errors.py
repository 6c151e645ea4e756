from __future__ import annotations

from typing import Any


class LincatError(Exception):
	"""Base class for every error raised by lincat."""


class ConfigError(LincatError):
	pass


class ParseError(LincatError):
	def __init__(self, message: str, position: int | None = None) -> None:
		self.position = position
		where = f" at position {position}" if position is not None else ""
		super().__init__(f"{message}{where}")


class UndeclaredAtomError(ParseError):
	pass


class TypeCheckError(LincatError):
	def __init__(self, message: str, path: tuple[int, ...] = (), expected: Any = None, found: Any = None) -> None:
		self.path = path
		self.expected = expected
		self.found = found
		loc = ".".join(str(i) for i in path) or "<root>"
		super().__init__(f"{message} (at {loc})")


class BoundaryMismatch(LincatError):
	pass


class NoMatchError(LincatError):
	pass


class PathError(LincatError):
	pass


class FuelExhausted(LincatError):
	def __init__(self, term: Any, trace: Any) -> None:
		self.term = term
		self.trace = trace
		super().__init__(f"fuel exhausted after {len(trace)} steps")


class TruncationInstability(LincatError):
	def __init__(self, entry: Any, low: int, high: int) -> None:
		self.entry = entry
		self.low = low
		self.high = high
		super().__init__(f"coefficient {entry} changed from {low} to {high} when the degree cap was raised")


class IndexOutsideTruncation(LincatError):
	pass


class AnnotationError(LincatError):
	pass


class EnumerationLimit(LincatError):
	pass


class FlowError(LincatError):
	def __init__(self, kind: str, message: str) -> None:
		self.kind = kind
		super().__init__(f"flow {kind}: {message}")


class InconsistentAssignment(LincatError):
	pass


class EchoParamError(LincatError):
	pass


class ReconstructionError(LincatError):
	pass


class PrimeTooSmall(LincatError):
	def __init__(self, p: int, required: int) -> None:
		self.p = p
		self.required = required
		super().__init__(f"prime {p} too small; need a prime above {required}")


class GraphError(LincatError):
	pass


class NotPrimeError(LincatError):
	def __init__(self, p: int) -> None:
		self.p = p
		super().__init__(f"{p} is not prime")
