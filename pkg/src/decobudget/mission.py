"""Mission concepts: target, cloud geometry and timing, loadable from JSON."""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from . import units
from .errors import ConfigError, DomainError
from .flux import data_path
from .kinematics import TargetSpec
from .response import COLD_ATOM, MATTER_COHERENT, FormFactorParams, StructureMode

PRESETS = ("maqro", "beccal", "gdm", "aedge")


@dataclass(frozen=True)
class MissionConfig:
    name: str
    target: TargetSpec
    n_nuc: float
    r_cloud: float  # m
    dx: float  # m
    t_shot: float  # s
    kind: str = COLD_ATOM
    n_atoms: float = None  # derived as n_nuc / A when None
    n_ind: float = None  # 1 for matter-coherent, n_atoms otherwise
    t_exp: float = units.YEAR
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.n_atoms is None:
            object.__setattr__(self, "n_atoms", self.n_nuc / self.target.A)
        if self.n_ind is None:
            n_ind = 1.0 if self.kind == MATTER_COHERENT else self.n_atoms
            object.__setattr__(self, "n_ind", n_ind)
        if self.r_cloud <= 0:
            raise DomainError(f"{self.name}: r_cloud must be > 0")
        if self.dx < 0:
            raise DomainError(f"{self.name}: dx must be >= 0")
        if self.t_shot <= 0 or self.t_exp <= 0:
            raise DomainError(f"{self.name}: t_shot and t_exp must be > 0")
        if self.n_ind not in (1.0, self.n_atoms):
            raise ConfigError(f"{self.name}: n_ind must be 1 or n_atoms")
        StructureMode(self.kind, self.n_atoms)

    @property
    def mode(self):
        return StructureMode(self.kind, self.n_atoms)

    @property
    def M(self):
        return self.target.mass

    @property
    def alpha_n(self):
        """Polarizability in natural units: 4 pi alpha_vol (Heaviside-Lorentz)."""
        return 4.0 * math.pi * self.target.polarizability_volume * units.ANGSTROM**3

    @property
    def r_atom(self):
        return self.target.r_atom * units.METER

    def ff_params(self):
        return FormFactorParams.for_target(self.r_cloud, self.target.A)

    def natural(self):
        """(r_cloud, dx) in eV^-1."""
        return self.r_cloud * units.METER, self.dx * units.METER

    def with_(self, **changes):
        """Copy with changes; derived counts are re-derived unless given."""
        if "n_atoms" in changes and "n_ind" not in changes:
            changes.setdefault("n_ind", None)
        if "n_nuc" in changes and "n_atoms" not in changes:
            changes["n_atoms"] = None
            changes.setdefault("n_ind", None)
        if "kind" in changes and "n_ind" not in changes:
            changes["n_ind"] = None
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d


def mission_from_dict(d):
    try:
        t = dict(d["target"])
        if "polarizability_a0^3" in t:
            t["polarizability_volume"] = t.pop("polarizability_a0^3") * units.BOHR_RADIUS_ANGSTROM**3
        target = TargetSpec(**t)
        kw = {k: v for k, v in d.items() if k != "target"}
        kw["notes"] = tuple(kw.get("notes", ()))
        if kw.get("t_exp") is None:
            kw.pop("t_exp", None)
        return MissionConfig(target=target, **kw)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad mission config: {exc}") from None


def load_mission(name_or_path):
    """Load a preset by name or a JSON file by path."""
    key = str(name_or_path).lower()
    if key in PRESETS:
        path = data_path(f"missions/{key}.json")
    else:
        path = Path(name_or_path)
        if not path.exists():
            raise ConfigError(f"unknown mission {name_or_path!r}")
    try:
        with path.open() as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return mission_from_dict(d)


def load_missions(spec):
    """Resolve 'all' or a comma-separated list."""
    names = [s.strip() for s in spec.split(",") if s.strip()] if isinstance(spec, str) else list(spec)
    if names == ["all"]:
        names = list(PRESETS)
    if not names:
        raise ConfigError("empty mission list")
    return [load_mission(n) for n in names]
