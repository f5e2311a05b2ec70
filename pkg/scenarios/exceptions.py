from typing import List, NamedTuple


class Diagnostic(NamedTuple):
    line: int
    column: int
    code: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.code}: {self.message}"

    def as_dict(self) -> dict:
        return self._asdict()


SYNTAX_ERROR = "SyntaxError"
UNRESOLVED_REFERENCE = "UnresolvedReference"
COMMON_SIGN_MISMATCH = "CommonSignMismatch"
GEOMETRY_ERROR = "GeometryError"
INVALID_VALUE = "InvalidValue"


class ScenarioError(Exception):
    """Scenario input rejected; carries every diagnostic found"""

    def __init__(self, diagnostics: List[Diagnostic], source: str = "<scenario>"):
        self.diagnostics = sorted(diagnostics)
        self.source = source
        super().__init__("\n".join(f"{source}:{d}" for d in self.diagnostics))

    @property
    def codes(self) -> List[str]:
        return [d.code for d in self.diagnostics]


class TraceFormatError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
