"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed user input: bad problem file, spec string or argument."""


class CapExceededError(RuntimeError):
    """A configured size cap (set-cover cap, expert cap, search budget) binds."""


class MalformedTreeError(ValueError):
    """An interaction tree is structurally invalid, as opposed to failing a condition."""


class DegenerateDataError(ValueError):
    """Labeled halfspace data that no halfspace realizes."""


class SolverError(RuntimeError):
    """A numerical solver returned an unusable status."""
