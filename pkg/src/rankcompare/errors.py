"""Exception hierarchy shared by all modules."""


class RankCompareError(Exception):
    """Base class; ``module`` names the subsystem that raised."""

    module = "rankcompare"


class ParseError(RankCompareError):
    module = "ingest"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ValidationError(RankCompareError):
    module = "ingest"


class LinkageConflictError(RankCompareError):
    module = "entity_link"


class EmptySeriesError(RankCompareError):
    module = "transforms"


class DomainError(RankCompareError):
    module = "transforms"


class KindMismatchError(RankCompareError):
    module = "transforms"


class UndefinedSkewnessError(RankCompareError):
    module = "stats"


class InsufficientPairsError(RankCompareError):
    module = "stats"


class UndefinedCorrelationError(RankCompareError):
    module = "stats"


class AnalysisError(RankCompareError):
    module = "analyses"


class ConfigError(RankCompareError):
    module = "cli_report"


class RenderError(RankCompareError):
    module = "cli_report"
