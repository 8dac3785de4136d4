"""Exception types raised across the simulator."""


class BdmmError(Exception):
    pass


class InvalidBatch(BdmmError):
    pass


class UnknownVertex(BdmmError):
    pass


class NotMatchedEdge(BdmmError):
    pass


class InvalidMatching(BdmmError):
    pass


class BandwidthViolation(BdmmError):
    def __init__(self, src, dst, count):
        super().__init__(f"link {src}->{dst} carries {count} tokens in one round")
        self.src = src
        self.dst = dst
        self.count = count


class IterationCapExceeded(BdmmError):
    pass


class PreconditionFailed(BdmmError):
    pass


class SampleDeficit(BdmmError):
    def __init__(self, vertex):
        super().__init__(f"all sampled neighbours of {vertex} were taken")
        self.vertex = vertex


class IndivisibleConfig(BdmmError):
    pass


class Exhausted(BdmmError):
    pass


class OracleFailure(BdmmError):
    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
