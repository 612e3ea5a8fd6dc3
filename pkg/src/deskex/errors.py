"""Exception types shared across the package."""


class DeskexError(Exception):
    pass


class BadRecord(DeskexError):
    """A wire record failed checksum or structural validation."""


class ReplayError(DeskexError):
    """Replay aborted; `seq` is the first bad sequence number."""

    def __init__(self, seq: int, reason: str):
        super().__init__(f"replay aborted at seq {seq}: {reason}")
        self.seq = seq
        self.reason = reason


class HaltError(DeskexError):
    """A halt invariant fired: the core takes a technical stop."""

    def __init__(self, seq: int, reason: str):
        super().__init__(f"halt at seq {seq}: {reason}")
        self.seq = seq
        self.reason = reason


class TriggerSyntaxError(DeskexError):
    """Trigger text failed to parse; `pos` is the offending token index."""

    def __init__(self, pos: int, message: str):
        super().__init__(f"syntax error at token {pos}: {message}")
        self.pos = pos


class TriggerValidationError(DeskexError):
    """Trigger expression violates the anti-resonance rule."""

    def __init__(self, conjunct: str, message: str):
        super().__init__(f"{message} (offending conjunct: {conjunct})")
        self.conjunct = conjunct


class BasketError(DeskexError):
    """Basket decomposition infeasible for the given bound/epsilon."""


class ScenarioError(DeskexError):
    """Scenario file invalid or internally inconsistent."""
