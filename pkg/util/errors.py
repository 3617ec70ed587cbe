class QuantumWalkError(Exception):
    """Root of every error raised by the simulator"""


class ConfigError(QuantumWalkError):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class SimulationError(QuantumWalkError):
    """Numeric failures, reported with exit code 3 by the CLI"""


class ParameterError(SimulationError):
    pass


class WindowError(SimulationError):
    pass


class TruncationError(SimulationError):
    pass


class NormalizationError(SimulationError):
    pass


class DegenerateBandError(SimulationError):
    pass


class NotPlanarError(SimulationError):
    pass


class ZeroCountError(SimulationError):
    pass


class QuadratureError(SimulationError):
    pass


class ZeroEfficiencyError(SimulationError):
    pass


class AmplitudeRangeError(SimulationError):
    pass


class EmptyDistributionError(SimulationError):
    pass
