"""Exception hierarchy for the planner."""


class PlannerError(Exception):
    """Base class for every error raised by ttplan."""


class NoPathError(PlannerError):
    """No loop-free path satisfies the flow's deadline."""


class InvalidFlowError(PlannerError):
    """Flow parameters are malformed (e.g. empty phase range)."""


class DuplicateConfigurationError(PlannerError):
    pass


class UnknownFlowError(PlannerError, KeyError):
    pass


class NotACandidateError(PlannerError):
    """The configuration is not in the flow's candidate set."""


class EmptyGraphError(PlannerError):
    pass


class ConsistencyError(PlannerError):
    """Internal state does not match the current traffic plan."""


class MalformedPlanError(PlannerError):
    pass


class MisalignedActivationError(PlannerError):
    """Activation time is not a hyper-cycle boundary of the old plan."""


class InstanceTooLargeError(PlannerError):
    pass


class TopologyError(PlannerError):
    pass
