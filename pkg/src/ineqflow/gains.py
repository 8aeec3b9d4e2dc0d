"""Gain schedules b(t) and their admissibility conditions."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostics:
    """Analytic verdicts on the four conditions the convergence results need."""

    positive: bool
    non_increasing: bool
    divergent_integral: bool
    square_integrable: bool

    @property
    def admissible(self) -> bool:
        return self.positive and self.non_increasing and self.divergent_integral and self.square_integrable

    @property
    def consensus_only(self) -> bool:
        """Usable only with the gradient term switched off."""
        return not self.admissible

    def failures(self):
        return [k for k in ("positive", "non_increasing", "divergent_integral", "square_integrable")
                if not getattr(self, k)]


class StepSizeSchedule:
    kind = ""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)

    def validate(self) -> Diagnostics:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Harmonic(StepSizeSchedule):
    """``b(t) = a0 / (t + b0)``."""

    a0: float
    b0: float
    kind = "harmonic"

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0):
            raise ValueError("harmonic gain needs a0 > 0 and b0 > 0")

    def value(self, t):
        return self.a0 / (t + self.b0)

    def validate(self):
        return Diagnostics(True, True, True, True)

    def params(self):
        return {"a0": self.a0, "b0": self.b0}


@dataclass(frozen=True)
class GeneralizedHarmonic(StepSizeSchedule):
    """``b(t) = a0 / (scale * t + b0)``."""

    a0: float
    b0: float
    scale: float
    kind = "generalized_harmonic"

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0 and self.scale > 0):
            raise ValueError("generalized harmonic gain needs a0, b0, scale > 0")

    def value(self, t):
        return self.a0 / (self.scale * t + self.b0)

    def validate(self):
        return Diagnostics(True, True, True, True)

    def params(self):
        return {"a0": self.a0, "b0": self.b0, "scale": self.scale}


@dataclass(frozen=True)
class Constant(StepSizeSchedule):
    """``b(t) = c``.  Never admissible; allowed only in consensus-only runs."""

    c: float = 0.0
    kind = "constant"

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("constant gain must be nonnegative")

    def value(self, t):
        return self.c

    def validate(self):
        positive = self.c > 0
        # the integral of a constant diverges iff it is nonzero; its square is
        # integrable iff it is zero
        return Diagnostics(
            positive=positive,
            non_increasing=True,
            divergent_integral=positive,
            square_integrable=not positive,
        )

    def params(self):
        return {"c": self.c}


KINDS = {cls.kind: cls for cls in (Harmonic, GeneralizedHarmonic, Constant)}


def from_spec(spec: dict) -> StepSizeSchedule:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in KINDS:
        raise ValueError(f"unknown gain family {kind!r}; expected one of {sorted(KINDS)}")
    return KINDS[kind](**spec)


def to_spec(sched: StepSizeSchedule) -> dict:
    return {"kind": sched.kind, **sched.params()}


def value(sched, t):
    return sched.value(t)


def validate(sched):
    return sched.validate()
