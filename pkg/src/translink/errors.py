"""Exception taxonomy shared by the geometry, solver and verification layers."""

from __future__ import annotations


class TranslinkError(Exception):
    """Base class for every error raised by this package."""


class InputError(TranslinkError):
    """Malformed user input (bad scene file, bad spec string, bad config)."""


class GeneralPositionError(TranslinkError):
    """A configuration violates one of the general-position requirements."""


# -- geometry / curve construction -------------------------------------------

class DegeneratePoints(TranslinkError):
    """Points expected to be distinct coincide within tolerance."""


class CollinearPoints(DegeneratePoints):
    """Three points fed to circle_through are collinear within tolerance."""


class AtCenter(TranslinkError):
    """Point-to-invert sits at the inversion center."""


class CurveHitsCenter(AtCenter):
    """A curve to invert passes through the inversion center."""


class CurveDegenerate(InputError):
    """Curve fails the regularity or embeddedness checks at construction."""


class LiftFailure(TranslinkError):
    """Sphere lift could not pick consistent signs (sampling too coarse)."""


class CoincidentHits(GeneralPositionError):
    """Two hit parameters on a transversal are too close to order reliably."""


# -- linking numbers ----------------------------------------------------------

class CurvesTooClose(GeneralPositionError):
    """Minimal distance between two curves is below the safe threshold."""


class QuadratureNotConverged(TranslinkError):
    """Adaptive quadrature hit its evaluation budget before stabilizing."""


class NoGenericDirectionFound(TranslinkError):
    """No projection direction passed the crossing-genericity tests."""


class PoleOnCurve(TranslinkError):
    """Stereographic pole falls on a lifted curve (retried internally)."""


# -- solvers ------------------------------------------------------------------

class DegenerateChord(TranslinkError):
    """Chord endpoints coincide; the seed cannot define a line."""


class NonIsolatedFamily(GeneralPositionError):
    """A root lies on a positive-dimensional family of transversals."""


class FivePointSecant(GeneralPositionError):
    """A root line meets some curve in an extra point beyond its slots."""


class SeedBudgetExceeded(TranslinkError):
    """Seeding produced more starts than the configured budget allows."""


class ChartExhaustion(TranslinkError):
    """Reserved for chart-sweep fallbacks; the native homogeneous solver
    does not raise it."""


class CollinearAnchors(TranslinkError):
    """Anchor triple of the circle residual is collinear; re-anchor."""


class DegenerateFamily(GeneralPositionError):
    """Circle family degenerates (e.g. collapses to a point or a line)."""


class SeparationTooSmall(GeneralPositionError):
    """Repeated-slot hits violate the minimum parameter separation."""


# -- surface tracing ----------------------------------------------------------

class BranchNotClosed(TranslinkError):
    """Continuation ran out of steps before returning to its start point."""


class DegenerateSecant(GeneralPositionError):
    """A pointed secant fails the classification preconditions."""


class OrientationInconsistent(TranslinkError):
    """The per-index orientation sign products disagree at a regular vertex."""


class NoRegularValue(TranslinkError):
    """No regular value with adequate margin was found for a section map."""


class TangentFrameDegenerate(TranslinkError):
    """Frame vectors for a weight computation are numerically dependent."""


class UnsupportedPattern(InputError):
    """Slot pattern has no proved signature formula."""
