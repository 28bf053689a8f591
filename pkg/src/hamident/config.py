"""Experiment configuration: a YAML file describing the system, the
noise, the sampling grid, and the identification setup.

Schema (see README for the full reference)::

    name: two_qubit_exchange
    system:
      qubits: 2
      hamiltonian:
        - {name: omega1, op: ZI, scale: 0.5, value: 1.3, unknown: true}
      observables: [XI]
      initial_expectations: {YI: 1.0}
    noise:
      # exactly one of psd / transfer / realization
      psd: {num: [...], den: [...], zero_selection: minimum_phase|maximum_phase}
      transfer: {num: [...], den: [...]}
      realization: {E: [[...]], G: [...]}
      xi0: [0.02, 0.1]
    sampling: {dt: 0.1, steps: 120, shot_sigma: 0.0, seed: 7}
    # (sampling.final_time may replace steps: steps = round(final_time / dt))
    identify:
      r: 20
      s: 100
      gap_ratio: 1.0e-6
      starts: 200
      seed: 1234
      noise_order: auto
      bounds: {omega1: [0.5, 2.0], alpha: [...], xi0: [...]}
    noise_check: {steps: 32768, segment_len: 4096, overlap: 0.5, seed: 3}

Hamiltonian operators are sums of Pauli strings ("ZI", "XX+YY",
"0.5*XZ-ZX"); frequencies carry the reciprocal unit of ``dt``.  A term
whose ``value`` is the string ``"unknown"`` can only be identified; a
term with a numeric value and ``unknown: true`` is simulated from the
value and still treated as an identification target.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .liealg import BasisSet, PAULI, pauli_product_basis
from .noisemodel import (
    NoiseRealization,
    NoiseTransfer,
    RationalPsd,
    canonical_realization,
    spectral_factorize,
)
from .tfmatch import HamiltonianTerm, ParameterSpec

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "parse_pauli_operator",
]


@dataclass
class TermConfig:
    name: str
    op: str
    scale: float = 1.0
    value: float | None = None
    unknown: bool = False


@dataclass
class SystemConfig:
    qubits: int
    hamiltonian: list[TermConfig]
    observables: list[str]
    initial_expectations: dict[str, float]


@dataclass
class NoiseConfig:
    psd: dict | None = None
    transfer: dict | None = None
    realization: dict | None = None
    zero_selection: str = "minimum_phase"
    xi0: list[float] | None = None


@dataclass
class SamplingConfig:
    dt: float
    steps: int
    shot_sigma: float = 0.0
    seed: int = 0


@dataclass
class IdentifyConfig:
    r: int = 20
    s: int = 100
    gap_ratio: float = 1e-6
    starts: int = 150
    seed: int = 0
    noise_order: int | str = "auto"
    noise_param: str = "companion"
    bounds: dict = field(default_factory=dict)


@dataclass
class NoiseCheckConfig:
    steps: int = 1 << 15
    segment_len: int = 1 << 12
    overlap: float = 0.5
    seed: int = 0


@dataclass
class ExperimentConfig:
    name: str
    system: SystemConfig
    sampling: SamplingConfig
    noise: NoiseConfig | None = None
    identify: IdentifyConfig = field(default_factory=IdentifyConfig)
    noise_check: NoiseCheckConfig = field(default_factory=NoiseCheckConfig)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.noise is None:
            out.pop("noise")
        return out

    # -- derived objects ------------------------------------------------

    def basis(self) -> BasisSet:
        return pauli_product_basis(self.system.qubits)

    def hamiltonian_terms(self, basis: BasisSet) -> list[HamiltonianTerm]:
        terms = []
        for t in self.system.hamiltonian:
            op = t.scale * parse_pauli_operator(t.op, self.system.qubits)
            value = None if t.unknown or t.value is None else t.value
            terms.append(HamiltonianTerm(t.name, op, value))
        return terms

    def observable_matrices(self, basis: BasisSet) -> list[np.ndarray]:
        return [
            parse_pauli_operator(o, self.system.qubits)
            for o in self.system.observables
        ]

    def x0_full(self, basis: BasisSet) -> np.ndarray:
        x0 = np.zeros(basis.size)
        for label, value in self.system.initial_expectations.items():
            canon = _canonical_pauli_label(label, self.system.qubits)
            x0[basis.index_of(canon)] = float(value)
        return x0

    def ground_truth_values(self) -> dict:
        vals = {}
        for t in self.system.hamiltonian:
            if t.value is None:
                raise ConfigError(
                    f"term {t.name!r} is marked unknown and has no value; "
                    "cannot simulate"
                )
            vals[t.name] = float(t.value)
        return vals

    def noise_realization(self) -> NoiseRealization | None:
        """Shaping-filter realization for simulation, or None when absent."""
        nc = self.noise
        if nc is None:
            return None
        given = [k for k in ("psd", "transfer", "realization") if getattr(nc, k)]
        if len(given) != 1:
            raise ConfigError(
                "noise section needs exactly one of psd / transfer / realization"
            )
        xi0 = None if nc.xi0 is None else np.asarray(nc.xi0, dtype=float)
        try:
            if nc.psd is not None:
                psd = RationalPsd(num=nc.psd["num"], den=nc.psd["den"])
                tf = spectral_factorize(psd, zero_selection=nc.zero_selection)
                return canonical_realization(tf, xi0)
            if nc.transfer is not None:
                den = np.asarray(nc.transfer["den"], dtype=float)
                num = np.asarray(nc.transfer["num"], dtype=float)
                if den.size < 2 or den[0] == 0:
                    raise ValueError("transfer denominator must have degree >= 1")
                lead = den[0]
                den = den / lead
                n = den.size - 1
                if num.size > n:
                    raise ValueError("transfer function must be strictly proper")
                beta = np.zeros(n)
                beta[n - num.size:] = num / lead
                return canonical_realization(NoiseTransfer(beta, den[1:]), xi0)
            E = np.asarray(nc.realization["E"], dtype=float)
            G = np.asarray(nc.realization["G"], dtype=float)
            n = E.shape[0]
            F = np.asarray(nc.realization.get("F", np.eye(n)[:, -1]), dtype=float)
            if xi0 is None:
                xi0 = np.eye(n)[:, 0]
            return NoiseRealization(E=E, F=F, G=G, xi0=xi0)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"invalid noise section: {exc}") from exc

    def parameter_spec(self, basis: BasisSet | None = None) -> ParameterSpec:
        basis = basis or self.basis()
        ic = self.identify
        noise_order = None if ic.noise_order == "auto" else int(ic.noise_order)
        spec = ParameterSpec(
            basis,
            self.hamiltonian_terms(basis),
            self.observable_matrices(basis),
            self.x0_full(basis),
            dict(ic.bounds),
            noise_order=noise_order,
            noise_param=ic.noise_param,
        )
        unknowns = [t.name for t in self.system.hamiltonian if t.unknown or t.value is None]
        missing = [n for n in unknowns if n not in ic.bounds]
        if missing:
            raise ConfigError(f"unknown parameters without bounds: {missing}")
        return spec


def _canonical_pauli_label(label: str, qubits: int) -> str:
    label = label.strip().upper()
    if len(label) != qubits or any(c not in "IXYZ" for c in label):
        raise ConfigError(
            f"{label!r} is not a Pauli string over {qubits} qubit(s)"
        )
    return label


def _split_sum(s: str) -> list[str]:
    """Split on top-level +/- while keeping signs (exponents survive)."""
    out, start = [], 0
    for i in range(1, len(s)):
        if s[i] in "+-" and s[i - 1] not in "eE":
            out.append(s[start:i])
            start = i
    out.append(s[start:])
    return [t for t in out if t]


def parse_pauli_operator(expr: str, qubits: int) -> np.ndarray:
    """Hermitian matrix from a sum of optionally weighted Pauli strings."""
    s = str(expr).replace(" ", "")
    if not s:
        raise ConfigError("empty operator expression")
    dim = 2**qubits
    out = np.zeros((dim, dim), dtype=complex)
    for term in _split_sum(s):
        sign = 1.0
        if term[0] in "+-":
            sign = -1.0 if term[0] == "-" else 1.0
            term = term[1:]
        if "*" in term:
            coef_str, term = term.rsplit("*", 1)
            try:
                coef = float(coef_str)
            except ValueError:
                raise ConfigError(f"bad coefficient {coef_str!r} in operator") from None
        else:
            coef = 1.0
        label = _canonical_pauli_label(term, qubits)
        M = PAULI[label[0]]
        for c in label[1:]:
            M = np.kron(M, PAULI[c])
        out = out + sign * coef * M
    return out


def _section(data: dict, key: str, required: bool = False) -> dict:
    val = data.get(key)
    if val is None:
        if required:
            raise ConfigError(f"missing config section {key!r}")
        return {}
    if not isinstance(val, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return val


def parse_config(data: dict, name: str = "experiment") -> ExperimentConfig:
    """Validate a raw mapping into an :class:`ExperimentConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        sysd = _section(data, "system", required=True)
        terms = []
        for raw in sysd.get("hamiltonian", []):
            value = raw.get("value")
            unknown = bool(raw.get("unknown", False))
            if isinstance(value, str):
                if value.lower() != "unknown":
                    raise ConfigError(f"bad term value {value!r}")
                value, unknown = None, True
            terms.append(
                TermConfig(
                    name=str(raw["name"]),
                    op=str(raw["op"]),
                    scale=float(raw.get("scale", 1.0)),
                    value=None if value is None else float(value),
                    unknown=unknown,
                )
            )
        if not terms:
            raise ConfigError("system.hamiltonian must list at least one term")
        system = SystemConfig(
            qubits=int(sysd["qubits"]),
            hamiltonian=terms,
            observables=[str(o) for o in sysd.get("observables", [])],
            initial_expectations={
                str(k): float(v)
                for k, v in (sysd.get("initial_expectations") or {}).items()
            },
        )
        if not system.observables:
            raise ConfigError("system.observables must list at least one observable")

        samp = _section(data, "sampling", required=True)
        dt = float(samp["dt"])
        if "steps" in samp and "final_time" in samp:
            raise ConfigError("give sampling.steps or sampling.final_time, not both")
        if "steps" in samp:
            steps = int(samp["steps"])
        elif "final_time" in samp:
            steps = int(round(float(samp["final_time"]) / dt))
        else:
            raise ConfigError("sampling needs steps or final_time")
        sampling = SamplingConfig(
            dt=dt,
            steps=steps,
            shot_sigma=float(samp.get("shot_sigma", 0.0)),
            seed=int(samp.get("seed", 0)),
        )
        if sampling.dt <= 0 or sampling.steps < 2:
            raise ConfigError("sampling needs dt > 0 and steps >= 2")
        if sampling.shot_sigma < 0:
            raise ConfigError("sampling.shot_sigma must be non-negative")

        noise = None
        if data.get("noise") is not None:
            nd = _section(data, "noise")
            noise = NoiseConfig(
                psd=nd.get("psd"),
                transfer=nd.get("transfer"),
                realization=nd.get("realization"),
                zero_selection=str(
                    (nd.get("psd") or {}).get(
                        "zero_selection", nd.get("zero_selection", "minimum_phase")
                    )
                ),
                xi0=None if nd.get("xi0") is None else [float(v) for v in nd["xi0"]],
            )
            if noise.psd is not None:
                noise.psd = {
                    "num": [float(v) for v in noise.psd["num"]],
                    "den": [float(v) for v in noise.psd["den"]],
                }
            if noise.transfer is not None:
                noise.transfer = {
                    "num": [float(v) for v in noise.transfer["num"]],
                    "den": [float(v) for v in noise.transfer["den"]],
                }
            if noise.realization is not None:
                noise.realization = {
                    k: np.asarray(v, dtype=float).tolist()
                    for k, v in noise.realization.items()
                }

        idd = _section(data, "identify")
        noise_order = idd.get("noise_order", "auto")
        if noise_order != "auto":
            noise_order = int(noise_order)
            if noise_order < 0:
                raise ConfigError("identify.noise_order must be 'auto' or >= 0")
        identify = IdentifyConfig(
            r=int(idd.get("r", 20)),
            s=int(idd.get("s", 100)),
            gap_ratio=float(idd.get("gap_ratio", 1e-6)),
            starts=int(idd.get("starts", 150)),
            seed=int(idd.get("seed", 0)),
            noise_order=noise_order,
            noise_param=str(idd.get("noise_param", "companion")),
            bounds={str(k): v for k, v in (idd.get("bounds") or {}).items()},
        )
        ncd = _section(data, "noise_check")
        noise_check = NoiseCheckConfig(
            steps=int(ncd.get("steps", 1 << 15)),
            segment_len=int(ncd.get("segment_len", 1 << 12)),
            overlap=float(ncd.get("overlap", 0.5)),
            seed=int(ncd.get("seed", 0)),
        )
        return ExperimentConfig(
            name=str(data.get("name", name)),
            system=system,
            sampling=sampling,
            noise=noise,
            identify=identify,
            noise_check=noise_check,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc!r}") from exc


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a YAML experiment file, applying scalar overrides.

    ``overrides`` maps dotted keys (e.g. ``"identify.starts"``) to values.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if overrides:
        for dotted, value in overrides.items():
            node = data
            *parents, leaf = dotted.split(".")
            for p in parents:
                node = node.setdefault(p, {})
            node[leaf] = value
    return parse_config(data, name=path.stem)
