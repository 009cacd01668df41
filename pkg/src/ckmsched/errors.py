"""Exception types shared across the package."""


class ScheduleError(ValueError):
    """Base class for all input/validation failures."""


class GapOrOverlap(ScheduleError):
    pass


class BadBounds(ScheduleError):
    pass


class BadParam(ScheduleError):
    pass


class BadSpec(ScheduleError):
    pass


class OutOfHorizon(ScheduleError):
    pass


class InfeasibleSchedule(ScheduleError):
    pass


class ZeroWorkingTime(ScheduleError):
    pass


class BadInterval(ScheduleError):
    pass


class BadGridSpec(ScheduleError):
    pass


class InfeasibleEdge(ScheduleError):
    pass


class EmptyFrontier(ScheduleError):
    pass


class CorruptBackpointer(ScheduleError):
    pass


class TooManyCandidates(ScheduleError):
    pass


class BadPeriod(ScheduleError):
    pass


class NegativeTime(ScheduleError):
    pass
