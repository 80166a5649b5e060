"""Parameter sweeps: calibrate noise across a grid and emit deterministic CSV.

A sweep file is plain key = value text (``#`` comments allowed)::

    mechanism = gaussian
    sweep = m                      # one of: m, tau, epsilon, q, T
    values = 16, 32, 64, 128, 256  # strictly increasing
    alpha = 4
    tau = 1                        # divergence target (needs alpha) ...
    # epsilon = 4                  # ... or a GP target (needs delta)
    q = 0.05
    T = 500
    delta = 1e-5                   # optional with tau targets: adds epsilon column
    accountants = ours, baseline, lower_bound
    out = figure_m_sweep.csv       # optional; --out overrides

Each (swept value, accountant) pair becomes one CSV row holding the
calibrated noise and the guarantee re-accounted at that noise.  Rows are
ordered swept-value major, accountant minor (ours, baseline, lower_bound),
and the emitted bytes are identical across runs: metadata lives in ``#``
header comments and contains no timestamps.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import Iterable, TextIO

from .accountant import RgpGuarantee, GpGuarantee, compose, rgp_to_gp
from .baseline import effective_group_size
from .calibration import achieved_guarantee, calibrate, round_tau
from .mechanisms import make_mechanism

SWEPT_VARIABLES = ("m", "tau", "epsilon", "q", "T")
ACCOUNTANT_ORDER = ("ours", "baseline", "lower_bound")
_ACCOUNTANT_INTERNAL = {"ours": "ours", "baseline": "baseline", "lower_bound": "lower"}

CSV_COLUMNS = (
    "swept_name",
    "swept_value",
    "effective_m",
    "accountant",
    "noise_param",
    "alpha_used",
    "tau",
    "epsilon",
    "delta",
)

_INT_KEYS = {"m", "T", "sens_c"}
_FLOAT_KEYS = {"q", "alpha", "tau", "epsilon", "delta"}


@dataclass(frozen=True)
class SweepSpec:
    mechanism: str
    swept: str
    values: tuple[float, ...]
    accountants: tuple[str, ...]
    q: float | None = None
    iterations: int | None = None
    m: int | None = None
    alpha: float | None = None
    tau: float | None = None
    epsilon: float | None = None
    delta: float | None = None
    sensitivity_c: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.swept not in SWEPT_VARIABLES:
            raise ValueError(f"sweep must be one of {SWEPT_VARIABLES}, got {self.swept!r}")
        if len(self.values) == 0:
            raise ValueError("values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if len(self.accountants) == 0:
            raise ValueError("accountants must be non-empty")
        for name in self.accountants:
            if name not in ACCOUNTANT_ORDER:
                raise ValueError(
                    f"unknown accountant {name!r}; expected a subset of {ACCOUNTANT_ORDER}"
                )
        fixed = {"m": self.m, "tau": self.tau, "epsilon": self.epsilon,
                 "q": self.q, "T": self.iterations}
        if fixed[self.swept] is not None:
            raise ValueError(f"{self.swept} is the swept variable; remove its fixed value")
        for name in ("m", "q", "T"):
            if name != self.swept and fixed[name] is None:
                raise ValueError(f"missing required key {name!r}")
        has_tau = self.tau is not None or self.swept == "tau"
        has_eps = self.epsilon is not None or self.swept == "epsilon"
        if has_tau == has_eps:
            raise ValueError("exactly one target type is required: tau (+alpha) or epsilon (+delta)")
        if has_tau and self.alpha is None:
            raise ValueError("tau targets need a fixed alpha")
        if has_eps and self.delta is None:
            raise ValueError("epsilon targets need a fixed delta")


@dataclass(frozen=True)
class SweepRow:
    swept_name: str
    swept_value: float
    effective_m: int
    accountant: str
    noise_param: float
    alpha_used: float
    tau: float
    epsilon: float | None
    delta: float | None


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse the key = value sweep format; unknown keys are usage errors."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"sweep spec line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ValueError(f"sweep spec line {lineno}: duplicate key {key!r}")
        entries[key] = value

    known = {"mechanism", "sweep", "values", "accountants", "out",
             "q", "T", "m", "alpha", "tau", "epsilon", "delta", "sens_c"}
    unknown = set(entries) - known
    if unknown:
        raise ValueError(f"unknown sweep spec keys: {sorted(unknown)}")
    for required in ("mechanism", "sweep", "values", "accountants"):
        if required not in entries:
            raise ValueError(f"missing required key {required!r}")

    swept = entries["sweep"]
    if swept not in SWEPT_VARIABLES:
        raise ValueError(f"sweep must be one of {SWEPT_VARIABLES}, got {swept!r}")
    value_type = int if swept in _INT_KEYS else float
    values = tuple(value_type(tok) for tok in _tokens(entries["values"]))
    accountants = tuple(
        "lower_bound" if tok == "lower" else tok for tok in _tokens(entries["accountants"])
    )

    def opt(key, conv):
        return conv(entries[key]) if key in entries else None

    return SweepSpec(
        mechanism=entries["mechanism"],
        swept=swept,
        values=values,
        accountants=accountants,
        q=opt("q", float),
        iterations=opt("T", int),
        m=opt("m", int),
        alpha=opt("alpha", float),
        tau=opt("tau", float),
        epsilon=opt("epsilon", float),
        delta=opt("delta", float),
        sensitivity_c=int(entries["sens_c"]) if "sens_c" in entries else 1,
        out=entries.get("out"),
    )


def _tokens(value: str) -> list[str]:
    toks = [tok for tok in value.replace(",", " ").split() if tok]
    if not toks:
        raise ValueError(f"expected a non-empty list, got {value!r}")
    return toks


def _point_parameters(spec: SweepSpec, value):
    m = int(value) if spec.swept == "m" else spec.m
    q = float(value) if spec.swept == "q" else spec.q
    iterations = int(value) if spec.swept == "T" else spec.iterations
    tau = float(value) if spec.swept == "tau" else spec.tau
    epsilon = float(value) if spec.swept == "epsilon" else spec.epsilon
    if tau is not None:
        target = RgpGuarantee(m, spec.alpha, tau)
    else:
        target = GpGuarantee(m, epsilon, spec.delta)
    return m, q, iterations, target


def run_sweep_point(spec: SweepSpec, value, accountant: str) -> SweepRow:
    """Calibrate one (swept value, accountant) cell and re-account at the result."""
    m, q, iterations, target = _point_parameters(spec, value)
    internal = _ACCOUNTANT_INTERNAL[accountant]
    noise = calibrate(
        spec.mechanism,
        target,
        q=q,
        iterations=iterations,
        accountant=internal,
        sensitivity_c=spec.sensitivity_c,
    )
    mech = make_mechanism(spec.mechanism, noise, spec.sensitivity_c)
    metric, alpha_used = achieved_guarantee(
        mech, target, q=q, iterations=iterations, accountant=internal
    )
    if isinstance(target, RgpGuarantee):
        tau = metric
        epsilon = (
            rgp_to_gp(RgpGuarantee(m, alpha_used, tau), spec.delta).epsilon
            if spec.delta is not None
            else None
        )
    else:
        epsilon = metric
        tau = compose(round_tau(internal, mech, m, alpha_used, q), iterations)
    return SweepRow(
        swept_name=spec.swept,
        swept_value=value,
        effective_m=effective_group_size(m) if accountant == "baseline" else m,
        accountant=accountant,
        noise_param=noise,
        alpha_used=alpha_used,
        tau=tau,
        epsilon=epsilon,
        delta=spec.delta,
    )


def _run_task(args) -> tuple[int, SweepRow]:
    index, spec, value, accountant = args
    return index, run_sweep_point(spec, value, accountant)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """All sweep rows in deterministic order (value major, accountant minor)."""
    order = [name for name in ACCOUNTANT_ORDER if name in spec.accountants]
    tasks = [
        (i, spec, value, accountant)
        for i, (value, accountant) in enumerate(
            (v, a) for v in spec.values for a in order
        )
    ]
    if workers <= 1:
        return [_run_task(t)[1] for t in tasks]
    rows: dict[int, SweepRow] = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        for index, row in pool.map(_run_task, tasks):
            rows[index] = row
    return [rows[i] for i in range(len(tasks))]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form, stable across runs
    return str(value)


def write_sweep_csv(spec: SweepSpec, rows: Iterable[SweepRow], stream: TextIO) -> None:
    """Emit the provenance header and one row per sweep cell."""
    stream.write("# groupdp sweep\n")
    stream.write(f"# mechanism = {spec.mechanism}\n")
    stream.write(f"# sweep = {spec.swept}\n")
    stream.write(f"# values = {' '.join(_fmt(v) for v in spec.values)}\n")
    stream.write(f"# accountants = {' '.join(spec.accountants)}\n")
    for key, value in (
        ("q", spec.q),
        ("T", spec.iterations),
        ("m", spec.m),
        ("alpha", spec.alpha),
        ("tau", spec.tau),
        ("epsilon", spec.epsilon),
        ("delta", spec.delta),
        ("sens_c", spec.sensitivity_c),
    ):
        if value is not None:
            stream.write(f"# {key} = {_fmt(value)}\n")
    stream.write(
        "# baseline rdp source: tight subsampled-Gaussian formula for gaussian; "
        "m=1 subsampled bound for laplace/skellam/rr\n"
    )
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(
            ",".join(
                (
                    row.swept_name,
                    _fmt(row.swept_value),
                    str(row.effective_m),
                    row.accountant,
                    _fmt(row.noise_param),
                    _fmt(row.alpha_used),
                    _fmt(row.tau),
                    _fmt(row.epsilon),
                    _fmt(row.delta),
                )
            )
            + "\n"
        )
