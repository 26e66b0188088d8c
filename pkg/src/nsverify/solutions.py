"""Registry of the five solution families and the claims each one is audited for."""
from __future__ import annotations

from dataclasses import dataclass, field

from .fields import Family, SolutionFamily, TimeProfile

UMBILICAL_ZERO = "umbilical_zero"
SATISFIES_MOMENTUM = "satisfies_momentum"
DIVERGENCE_FREE = "divergence_free"
PRESSURE_MATCHES_PPE = "pressure_matches_ppe"
ENERGY_DECAY = "energy_decay"

EXPECTED_PASS = "expected-pass"
AUDIT_REQUIRED = "audit-required"


@dataclass(frozen=True)
class FamilyMetadata:
    tag: Family
    decay_rate: float  # coefficient of kappa
    has_closed_inertial: bool
    claims: dict[str, str] = field(default_factory=dict)
    parameters: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.tag.dim

    @property
    def paper_claims(self) -> list[str]:
        return list(self.claims)


def _claims(*names: str, audit: tuple[str, ...] = ()) -> dict[str, str]:
    return {name: AUDIT_REQUIRED if name in audit else EXPECTED_PASS for name in names}


_CORE = (UMBILICAL_ZERO, SATISFIES_MOMENTUM, DIVERGENCE_FREE, PRESSURE_MATCHES_PPE)

_REGISTRY = (
    FamilyMetadata(
        Family.TAYLOR_VORTEX_2D, Family.TAYLOR_VORTEX_2D.decay_coefficient, True, _claims(*_CORE, ENERGY_DECAY)
    ),
    FamilyMetadata(
        Family.FORCED_TAYLOR_VORTEX_2D,
        Family.FORCED_TAYLOR_VORTEX_2D.decay_coefficient,
        True,
        _claims(*_CORE),
        ("G",),
    ),
    FamilyMetadata(
        Family.ABC_FLOW_3D, Family.ABC_FLOW_3D.decay_coefficient, True, _claims(*_CORE, ENERGY_DECAY), ("a", "b", "c")
    ),
    FamilyMetadata(
        Family.FORCED_ABC_FLOW_3D,
        Family.FORCED_ABC_FLOW_3D.decay_coefficient,
        True,
        _claims(*_CORE),
        ("a", "b", "c", "G"),
    ),
    # The uniform stream h(t) added to the ABC field advects it: g gains
    # h * dv/dx1 = h b pi e^{-pi^2 kappa t} (0, cos pi x1, sin pi x1), which is
    # solenoidal and so survives projection unless b = 0.  Measured, not assumed.
    FamilyMetadata(
        Family.ABC_EXP_FORCED_3D,
        Family.ABC_EXP_FORCED_3D.decay_coefficient,
        False,
        _claims(*_CORE, audit=(UMBILICAL_ZERO, SATISFIES_MOMENTUM, PRESSURE_MATCHES_PPE)),
        ("a", "b", "c", "f_I", "lambda"),
    ),
)

_BY_TAG = {meta.tag: meta for meta in _REGISTRY}


def registry() -> list[FamilyMetadata]:
    return list(_REGISTRY)


def metadata(tag) -> FamilyMetadata:
    return _BY_TAG[Family(tag)]


@dataclass(frozen=True)
class SpecialCase:
    family: SolutionFamily
    expected: str
    reduces_to: SolutionFamily | None = None


def special_cases(tag) -> list[SpecialCase]:
    """Degenerate parameterisations with a known outcome, used as harness self-checks."""
    tag = Family(tag)
    abc = (1.0, 0.5, 0.25)
    if tag is Family.TAYLOR_VORTEX_2D:
        return []
    if tag is Family.FORCED_TAYLOR_VORTEX_2D:
        return [
            SpecialCase(
                SolutionFamily.forced_taylor_vortex(TimeProfile.zero()),
                "G = 0 reduces to the unforced Taylor vortex",
                SolutionFamily.taylor_vortex(),
            )
        ]
    if tag is Family.ABC_FLOW_3D:
        return [SpecialCase(SolutionFamily.abc_flow(0, 0, 0), "a = b = c = 0: velocity and pressure vanish")]
    if tag is Family.FORCED_ABC_FLOW_3D:
        return [
            SpecialCase(
                SolutionFamily.forced_abc_flow(*abc, TimeProfile.zero()),
                "G = 0 reduces to the unforced ABC flow",
                SolutionFamily.abc_flow(*abc),
            )
        ]
    return [
        SpecialCase(
            SolutionFamily.abc_exp_forced(*abc, 0.0, 1.0),
            "f_I = 0 reduces to the unforced ABC flow",
            SolutionFamily.abc_flow(*abc),
        ),
        SpecialCase(
            SolutionFamily.abc_exp_forced(1.0, 0.0, 0.25, 1.0, 1.0),
            "b = 0: the uniform stream advects nothing, every claim holds",
        ),
        SpecialCase(
            SolutionFamily.abc_exp_forced(0.0, 0.0, 0.0, 1.0, 0.0),
            "a = b = c = 0: pure uniform stream f_I t",
        ),
    ]
