"""Exception hierarchy shared by every qgraphpy module."""


class QGraphError(Exception):
    """Root of all library errors."""


# ---- graph_model ----
class GraphError(QGraphError):
    pass


class DanglingEndpoint(GraphError, ValueError):
    pass


class NonpositiveLength(GraphError, ValueError):
    pass


class ZeroDeltaPrimeStrength(GraphError, ValueError):
    pass


class Disconnected(GraphError):
    pass


class UnknownVertex(GraphError, KeyError):
    pass


class UnknownEdge(GraphError, KeyError):
    pass


class PositionOutOfRange(GraphError, ValueError):
    pass


class NotDegreeTwo(GraphError):
    pass


class NotStandard(GraphError):
    pass


class WouldCreateDanglingLoop(GraphError):
    pass


class NotATree(GraphError):
    pass


class NotBipartite(GraphError):
    pass


class GraphFormatError(GraphError, ValueError):
    pass


# ---- spectrum ----
class SolverError(QGraphError):
    pass


class KMaxExceedsDofs(SolverError, ValueError):
    pass


class MeshInvalid(SolverError, ValueError):
    pass


class ConstraintRankDeficiency(UserWarning):
    """Redundant constraint rows were dropped."""


class LambdaBeyondComputedRange(SolverError, ValueError):
    pass


class ConstraintViolation(SolverError, ValueError):
    pass


# ---- oracle ----
class OracleError(QGraphError):
    pass


class RobinNotClosedForm(OracleError, ValueError):
    pass


class BracketingFailure(OracleError):
    def __init__(self, message, grid=None):
        super().__init__(message)
        self.grid = grid


# ---- surgery ----
class SurgeryError(QGraphError):
    pass


class MixedConditionFamilies(SurgeryError, ValueError):
    pass


class PartitionIncomplete(SurgeryError, ValueError):
    pass


class StrengthSumMismatch(SurgeryError, ValueError):
    pass


class AssignmentIncomplete(SurgeryError, ValueError):
    pass


class NonpositiveFactor(SurgeryError, ValueError):
    pass


class UnknownOperation(SurgeryError, ValueError):
    pass


# ---- bounds ----
class BoundsError(QGraphError):
    pass


class IndexOutOfRange(BoundsError, ValueError):
    pass


class ZeroStrengthVertexWithoutRemarkPath(BoundsError):
    pass


# ---- checker ----
class CheckError(QGraphError):
    pass


class NotDeltaPrime(CheckError, ValueError):
    pass


class NoValidRK(CheckError):
    pass


class GridPointTooCloseToEigenvalue(CheckError):
    pass


class UnsatisfiableParams(CheckError, ValueError):
    pass


class ConfigInvalid(CheckError, ValueError):
    pass
