"""Failure taxonomy, mirroring the downstream package's exit-code split."""


class InputError(ValueError):
    """Bad arguments, unreadable or undecodable inputs. CLI exit code 1."""


class ExtractionError(RuntimeError):
    """Valid inputs that produced nothing usable. CLI exit code 2."""
