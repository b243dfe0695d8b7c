class ClientError(Exception):
    """Base class for scripting-client errors."""


class BinaryNotFound(ClientError):
    """The hybridsim CLI is not on PATH and no explicit path was given."""


class RunFailed(ClientError):
    """The CLI exited nonzero; the message carries its diagnostic."""


class MissingResult(ClientError):
    """An expected result file is absent from the output directory."""


class EmptyResults(ClientError):
    """A plot was requested over no data."""
