"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can map failures without inspecting messages.
"""


class EskgError(Exception):
    code = "error"


class ParseError(EskgError):
    """A document failed to parse; message carries line/field diagnostics."""

    code = "parse_error"


class IntegrityError(EskgError):
    """A graph invariant was violated (dangling reference, duplicate id, bad time)."""

    code = "integrity_error"


class ValidationError(EskgError):
    """Operation inputs are outside their valid range."""

    code = "invalid_input"


class NotFoundError(EskgError):
    code = "not_found"


class ConflictError(EskgError):
    """State does not admit the operation (duplicate child, closed session, re-review)."""

    code = "conflict"


class UnauthorizedError(EskgError):
    code = "unauthorized"


class UnknownSymbolError(NotFoundError):
    """A model was asked to score a symbol it was not trained on."""

    code = "unknown_symbol"

    def __init__(self, symbol: str, role: str):
        self.symbol = symbol
        self.role = role
        super().__init__(f"unknown {role}: {symbol!r}")
