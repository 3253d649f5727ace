class EcotourError(Exception):
    """Base class for all library errors."""


class NegativeCycle(EcotourError):
    def __init__(self, cycle, message=None):
        self.cycle = list(cycle)
        super().__init__(message or f"negative cycle through nodes {self.cycle}")


class Unreachable(EcotourError):
    def __init__(self, src, dst):
        self.src = src
        self.dst = dst
        super().__init__(f"node {dst} is unreachable from node {src}")


class NotATour(EcotourError):
    pass


class InvalidInstance(EcotourError):
    pass


class ParseError(EcotourError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InstanceTooLarge(EcotourError):
    pass


class GenerationFailed(EcotourError):
    pass
