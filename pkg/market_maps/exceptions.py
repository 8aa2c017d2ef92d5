"""Exception hierarchy shared by the market_maps modules.

Every error renders as a single module-qualified line, e.g.
``ingest: row 4 has 5 fields, expected 7``, which the management commands hand
straight to ``CommandError``.
"""


class MarketMapsError(Exception):
    module = 'market_maps'

    def __init__(self, message, module=None):
        super().__init__(message)
        self.message = message
        if module is not None:
            self.module = module

    def __str__(self):
        return f'{self.module}: {self.message}'


# ============ INGEST ============

class IngestError(MarketMapsError):
    module = 'ingest'


class MalformedRow(IngestError):
    pass


class EmptyInput(IngestError):
    pass


class NonPositivePrice(IngestError):
    pass


class DateMismatch(IngestError):
    pass


class EmptyList(IngestError):
    pass


class BadConfig(IngestError):
    pass


# ============ BACKTEST ============

class BacktestError(MarketMapsError):
    module = 'backtest'


class BadWindow(BacktestError):
    pass


class LengthMismatch(BacktestError):
    pass


# ============ PREPROCESS ============

class PreprocessError(MarketMapsError):
    module = 'preprocess'


class InsufficientData(PreprocessError):
    """Carries the required and available counts for the diagnostic."""

    def __init__(self, message, required=None, available=None, module=None):
        super().__init__(message, module=module)
        self.required = required
        self.available = available


class DegenerateWindow(PreprocessError):
    pass


# ============ PCA ============

class PcaError(MarketMapsError):
    module = 'pca'


class TooFewRows(PcaError):
    pass


class NotSymmetric(PcaError):
    pass


class NoConvergence(PcaError):
    pass


class BadK(PcaError):
    pass


# ============ ELASTIC MAP ============

class ElasticMapError(MarketMapsError):
    module = 'elasticmap'


class DegenerateData(ElasticMapError):
    pass


class DimensionMismatch(ElasticMapError):
    pass


class SingularSystem(ElasticMapError):
    pass


class BadPartition(ElasticMapError):
    pass


# ============ ANALYSIS ============

class AnalysisError(MarketMapsError):
    module = 'analysis'


class RowSetMismatch(AnalysisError):
    pass


class DegenerateLabels(AnalysisError):
    pass


# ============ RENDER ============

class RenderError(MarketMapsError):
    module = 'render'


class EmptyPoints(RenderError):
    pass


class NonFiniteCoordinate(RenderError):
    pass


# ============ CONFIG ============

class ConfigError(MarketMapsError):
    module = 'cli'


class ConfigInvalid(ConfigError):
    pass
