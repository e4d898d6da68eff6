"""Exception hierarchy shared by every stage of the planner."""

from __future__ import annotations


class ScoutPathError(Exception):
    """Base class. ``code`` is the stable, machine-readable name of the failure."""

    code = "Error"

    def __init__(self, detail: str = "") -> None:
        super().__init__(detail)
        self.detail = detail


class OutOfBounds(ScoutPathError):
    code = "OutOfBounds"


class MalformedFile(ScoutPathError):
    code = "MalformedFile"


class PlacementFailed(ScoutPathError):
    code = "PlacementFailed"


class InvalidConfig(ScoutPathError):
    code = "InvalidConfig"


class NonFiniteObjective(ScoutPathError):
    code = "NonFiniteObjective"


class Infeasible(ScoutPathError):
    code = "Infeasible"


class MaxSweepsExceeded(ScoutPathError):
    code = "MaxSweepsExceeded"


class PlannerError(ScoutPathError):
    """Failure while stepping a 2D leg.

    ``partial`` holds the waypoints produced before the failure (possibly just
    the start), ``steps`` the matching step records and ``leg`` the zero-based
    leg index once :func:`scoutpath.planner.plan_path` has annotated it.
    """

    code = "PlannerError"

    def __init__(self, detail: str = "", partial=None, leg: int | None = None, steps=None) -> None:
        super().__init__(detail)
        self.partial = list(partial) if partial is not None else []
        self.steps = list(steps) if steps is not None else []
        self.leg = leg


class StartOccupied(PlannerError):
    code = "StartOccupied"


class TargetOccupied(PlannerError):
    code = "TargetOccupied"


class StallDetected(PlannerError):
    code = "StallDetected"


class MaxStepsExceeded(PlannerError):
    code = "MaxStepsExceeded"


class StageError(ScoutPathError):
    """Wraps an upstream error with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: ScoutPathError) -> None:
        super().__init__(f"{stage}: {cause.detail}")
        self.stage = stage
        self.cause = cause
        self.code = cause.code
