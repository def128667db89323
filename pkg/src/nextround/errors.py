"""Exception hierarchy shared across the package.

Two failure families matter to callers: data/validation problems (bad CSV
rows, violated invariants, mismatched ids) and numeric/runtime problems
(diverged training, NaN metrics). The service layer maps the former to
HTTP 400 and the latter to HTTP 500; the CLI maps them to exit codes 1
and 2 respectively.
"""


class DataError(ValueError):
    """Invalid input data or violated domain invariant."""


class ParseError(DataError):
    """Malformed input file; carries file path and 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class NumericError(RuntimeError):
    """Numeric failure at runtime (NaN/Inf where finite values are required)."""


class TrainingDiverged(NumericError):
    """Loss became non-finite during optimization."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
