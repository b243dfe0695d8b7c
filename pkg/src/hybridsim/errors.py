"""Exception types shared across the simulator."""


class HybridSimError(Exception):
    """Base class for all simulator errors."""


class SchedulingInPast(HybridSimError):
    pass


class DuplicateFlow(HybridSimError):
    pass


class UnknownFlow(HybridSimError):
    pass


class NoRoute(HybridSimError):
    pass


class RoutingLoop(HybridSimError):
    pass


class InvalidPath(HybridSimError):
    pass


class UnknownPort(HybridSimError):
    pass


class UnknownSwitch(HybridSimError):
    pass


class SessionNotEstablished(HybridSimError):
    pass


class AlreadyEstablished(HybridSimError):
    pass


class NotAdjacent(HybridSimError):
    pass


class InvalidK(HybridSimError):
    pass


class TooFewHosts(HybridSimError):
    pass


class NoPath(HybridSimError):
    pass


class ParseError(HybridSimError):
    pass


class ValidationError(HybridSimError):
    pass
