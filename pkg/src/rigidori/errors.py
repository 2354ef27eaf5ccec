"""Exception types shared across the toolkit."""


class RigidOrigamiError(Exception):
    """Base class for all toolkit errors."""


# -- pattern validation -------------------------------------------------

class PatternError(RigidOrigamiError):
    """Invalid crease pattern input."""


class NonPlanar(PatternError):
    """Crease interiors cross each other or pass through vertices."""


class OpenPanel(PatternError):
    """A panel cycle is not a valid simple polygon bounded by creases."""


class DanglingCrease(PatternError):
    """Inner crease without exactly two panels (or outer without one)."""


class Disconnected(PatternError):
    """Panel adjacency graph (or a genericity input graph) is not connected."""


# -- kinematics ----------------------------------------------------------

class PointOutsidePanel(RigidOrigamiError):
    """Queried point does not lie in the closure of the named panel."""


# -- analysis / tracking -------------------------------------------------

class NotOnVariety(RigidOrigamiError):
    """State does not satisfy the loop-closure constraints to tolerance."""


class NotAFlex(RigidOrigamiError):
    """Direction is not in the nullspace of the constraint Jacobian."""


class CorrectorDiverged(RigidOrigamiError):
    """Gauss-Newton corrector left its convergence basin."""


class NotForest(RigidOrigamiError):
    """Interior sharing structure of the crease pattern contains a cycle."""


class NonGenericIntersection(RigidOrigamiError):
    """Shared-angle ranges meet in a single point; composition undecidable."""


# -- single-vertex closed forms -------------------------------------------

class NotDegree3(RigidOrigamiError):
    """Closed-form degree-3 solver called with the wrong number of angles."""


class NoCase(RigidOrigamiError):
    """No closed-form case applies; the loop has an empty solution set."""


class BadAngles(RigidOrigamiError):
    """Sector angles outside (0, 2*pi) or otherwise malformed."""


class NotDevelopable(RigidOrigamiError):
    """Operation requires sector angles summing to 2*pi at each inner vertex."""
