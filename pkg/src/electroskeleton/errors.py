"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SkeletonError(Exception):
    exit_code = 1


class InvalidPolygon(SkeletonError):
    exit_code = 2

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NonConvex(InvalidPolygon):
    exit_code = 3


class DegenerateAngle(InvalidPolygon):
    exit_code = 4


class DuplicateVertex(InvalidPolygon):
    exit_code = 5


class SingularSystem(SkeletonError):
    exit_code = 6


class NegativeDensity(SkeletonError):
    exit_code = 7


class TooCloseToBoundary(SkeletonError):
    exit_code = 8


class OutsideDomain(SkeletonError):
    exit_code = 9


class ChainingFailure(SkeletonError):
    exit_code = 10


class TooCloseToJunction(SkeletonError):
    exit_code = 11


class TooCloseToVertex(SkeletonError):
    exit_code = 12


class CircleIntersectsK(SkeletonError):
    exit_code = 13


class RootNotBracketed(SkeletonError):
    exit_code = 14


# raised by `verify` when a check fails; not an input error
class VerificationFailed(SkeletonError):
    exit_code = 20
