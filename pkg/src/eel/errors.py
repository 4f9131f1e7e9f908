from __future__ import annotations


class EelError(Exception):
    """Base error for every pipeline stage.

    ``code`` is a stable identifier such as ``E_SYNTAX``; ``line`` and
    ``column`` are 1-based source positions when known.
    """

    def __init__(
        self,
        code: str,
        message: str,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        self.code = code
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self.describe())

    def describe(self) -> str:
        where = ""
        if self.line is not None:
            where = f"{self.line}:"
            if self.column is not None:
                where += f"{self.column}:"
            where += " "
        return f"{where}{self.code} {self.message}"


class TokenizeError(EelError):
    pass


class ParseError(EelError):
    def __init__(
        self,
        code: str,
        message: str,
        line: int | None = None,
        column: int | None = None,
        expected: tuple[str, ...] = (),
    ) -> None:
        self.expected = expected
        super().__init__(code, message, line, column)


class LoweringError(EelError):
    pass


class CompileError(EelError):
    pass


class VmError(EelError):
    def __init__(
        self,
        code: str,
        message: str,
        pc: int | None = None,
        instruction: str | None = None,
        line: int | None = None,
    ) -> None:
        self.pc = pc
        self.instruction = instruction
        super().__init__(code, message, line)

    def describe(self) -> str:
        text = super().describe()
        if self.pc is not None:
            text += f" (pc={self.pc}"
            if self.instruction:
                text += f", {self.instruction}"
            text += ")"
        return text
