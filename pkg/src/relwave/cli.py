"""Command-line front end: ``relwave <subcommand> [options]``.

Every run prints a one-line JSON summary on stdout and writes its artifacts
(CSV data plus a JSON manifest) atomically into the output directory.
Exit status: 0 on success, 2 for invalid input or configuration, 1 for
runtime failures such as the Fock dimension cap.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, as_vector, load_config, parse_method
from .dispersion import DISPERSION_COLUMNS, Branch, dispersion_table
from .errors import ConfigError, DomainError, RelwaveError
from .fock import make_fock, quantize_report
from .grid import ComplexField
from .io import config_hash, read_field_csv, write_csv, write_field_csv, write_json
from .observables import conservation_report
from .propagators import evolve_exact, evolve_truncated, schrodinger_reference
from .wavefield import (
    InitialData,
    gaussian_packet,
    plane_wave,
    random_state,
    reconstruct,
    single_branch,
    split,
    to_a_amplitudes,
)


class _Run:
    """Resolved settings and collected artifacts of one invocation."""

    def __init__(self, command: str, cfg: ScenarioConfig, out_dir: Path, settings: dict):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.settings = settings
        self.artifacts: list[str] = []
        self.params = cfg.units.params()

    @property
    def want_csv(self) -> bool:
        return "csv" in self.cfg.output.formats

    def csv(self, name, header, rows):
        if self.want_csv:
            write_csv(self.out_dir / name, header, rows)
            self.artifacts.append(name)

    def field(self, name, f: ComplexField):
        if self.want_csv:
            write_field_csv(self.out_dir / name, f)
            self.artifacts.append(name)

    def finish(self, summary: dict) -> dict:
        effective = {"command": self.command, "config": self.cfg.model_dump(mode="json"), "settings": self.settings}
        manifest = {
            "command": self.command,
            "version": __version__,
            "config_hash": config_hash(effective),
            "config": effective["config"],
            "settings": self.settings,
            "artifacts": list(self.artifacts),
            "summary": summary,
        }
        name = f"{self.command}.json"
        write_json(self.out_dir / name, manifest)
        return {"command": self.command, "status": "ok", "config_hash": manifest["config_hash"],
                "artifacts": self.artifacts + [name], **summary}


# -- state acquisition -------------------------------------------------------


def _state_from_config(cfg: ScenarioConfig, params) -> InitialData:
    st = cfg.state
    grid = cfg.grid.grid()
    if st.kind == "plane_wave":
        return plane_wave(as_vector(st.k0, grid.dim), st.branch or "plus", grid, params)
    if st.kind == "gaussian":
        return gaussian_packet(
            as_vector(st.x0, grid.dim), as_vector(st.k0, grid.dim), st.sigma, st.branch or "plus", grid, params, kmax=st.kmax
        )
    rng = np.random.default_rng(cfg.seed)
    return random_state(grid, rng, branch=st.branch, kmax=st.kmax, params=params)


def _acquire_state(args, run: _Run) -> InitialData:
    if args.input is None:
        if args.velocity is not None:
            raise ConfigError("--velocity requires --input")
        return _state_from_config(run.cfg, run.params)
    psi = read_field_csv(args.input)
    if args.velocity is not None:
        dot = read_field_csv(args.velocity)
        if dot.grid != psi.grid:
            raise ConfigError("--velocity grid differs from --input grid")
        return InitialData(psi, dot)
    branch = args.branch or run.cfg.state.branch or "plus"
    return single_branch(psi, branch, run.params)


# -- subcommands --------------------------------------------------------------


def cmd_dispersion(args, run: _Run) -> dict:
    kmax = args.kmax if args.kmax is not None else 3.0
    steps = args.steps if args.steps is not None else 7
    table = dispersion_table(kmax, steps, run.params)
    run.settings.update(kmax=kmax, steps=steps)
    run.csv("dispersion.csv", DISPERSION_COLUMNS, table)
    return {"rows": int(table.shape[0]), "kmax": float(kmax)}


def cmd_split(args, run: _Run) -> dict:
    data = _acquire_state(args, run)
    amps = split(data, run.params)
    a_plus, a_minus = to_a_amplitudes(amps)
    g = amps.grid
    axes = "xyz"[: g.dim]
    header = [f"k{a}" for a in axes] + ["re_aplus", "im_aplus", "re_aminus", "im_aminus"]
    rows = np.column_stack(
        [c.ravel() for c in g.k] + [a_plus.real.ravel(), a_plus.imag.ravel(), a_minus.real.ravel(), a_minus.imag.ravel()]
    )
    run.csv("split.csv", header, rows)
    psi, _ = reconstruct(amps, 0.0)
    err = float(np.max(np.abs(psi.values - data.psi0.physical().values)))
    return {"norm_plus": amps.norm("plus"), "norm_minus": amps.norm("minus"), "reconstruct_max_error": err}


def _times(t_final: float, snapshots: int) -> np.ndarray:
    return np.array([t_final]) if snapshots == 1 else np.linspace(0.0, t_final, snapshots)


def cmd_evolve(args, run: _Run) -> dict:
    data = _acquire_state(args, run)
    rc = run.cfg.run
    method_text = args.method or rc.method
    try:
        method, order = parse_method(method_text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    t_final = args.t if args.t is not None else rc.t_final
    snapshots = args.snapshots if args.snapshots is not None else rc.snapshots
    if snapshots < 1:
        raise ConfigError("--snapshots must be >= 1")
    run.settings.update(method=method_text, t_final=t_final, snapshots=snapshots)
    amps = split(data, run.params) if method == "exact" else None
    psi0 = data.psi0.physical()
    times, norms = _times(float(t_final), int(snapshots)), []
    for i, t in enumerate(times):
        if method == "exact":
            psi, _ = reconstruct(evolve_exact(amps, t), 0.0)
        elif method == "truncated":
            psi = evolve_truncated(psi0, t, order, run.params)
        else:
            psi = schrodinger_reference(psi0, t, run.params)
        psi = psi.physical()
        norms.append(psi.norm2())
        run.field(f"snapshot_{i:04d}.csv", psi)
    drift = float(np.max(np.abs(np.array(norms) - psi0.norm2())) / psi0.norm2())
    return {"method": method_text, "times": times.tolist(), "norms": norms, "norm_drift": drift}


def cmd_conserve(args, run: _Run) -> dict:
    data = _acquire_state(args, run)
    rc = run.cfg.run
    t_final = args.t if args.t is not None else rc.t_final
    steps = args.steps if args.steps is not None else rc.steps
    order = args.order if args.order is not None else rc.order
    run.settings.update(t_final=t_final, steps=steps, order=order)
    amps = split(data, run.params)
    report = conservation_report(amps, float(t_final), int(steps), int(order))
    run.csv("conservation.csv", report.columns(amps.grid.dim), report.as_array())
    return report.summary(amps.grid.dim)


def _parse_modes(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--modes must be a comma-separated list of numbers, got {text!r}") from None


def cmd_quantize(args, run: _Run) -> dict:
    fb = run.cfg.fock
    modes = _parse_modes(args.modes) if args.modes is not None else fb.modes
    n_max = args.nmax if args.nmax is not None else fb.n_max
    box = args.box if args.box is not None else fb.box
    run.settings.update(modes=modes, n_max=n_max, box=box)
    space = make_fock(modes, n_max, box)
    report = quantize_report(space, run.params)
    write_json(run.out_dir / "quantize_report.json", report)
    run.artifacts.append("quantize_report.json")
    comm = report["commutators"]
    return {
        "fock_dim": space.dim,
        "ccr_exact_max_deviation": comm["ccr_exact_max_deviation"],
        "cross_exact_max_deviation": comm["cross_exact_max_deviation"],
        "one_particle_max_deviation": report["one_particle"]["max_deviation"],
        "zero_point_energy": report["vacuum"]["zero_point_energy"],
        "complete_lattice": report["delta_function"]["complete_lattice"],
    }


COMMANDS = {
    "dispersion": cmd_dispersion,
    "split": cmd_split,
    "evolve": cmd_evolve,
    "conserve": cmd_conserve,
    "quantize": cmd_quantize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"relwave {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON scenario file")
    common.add_argument("--output-dir", help="directory for artifacts (default: config output.directory)")
    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--input", help="field CSV with columns x,re,im (default: state from config)")
    state.add_argument("--velocity", help="CSV of the time derivative on the same grid")
    state.add_argument("--branch", choices=[b.value for b in Branch], help="branch of --input when no --velocity is given")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dispersion", parents=[common], help="tabulate both dispersion branches")
    p.add_argument("--kmax", type=float)
    p.add_argument("--steps", type=int)

    sub.add_parser("split", parents=[common, state], help="decompose initial data into branch amplitudes")

    p = sub.add_parser("evolve", parents=[common, state], help="propagate a field and write snapshots")
    p.add_argument("--t", type=float)
    p.add_argument("--method", help="exact | truncated:<N> | schrodinger")
    p.add_argument("--snapshots", type=int)

    p = sub.add_parser("conserve", parents=[common, state], help="tabulate conserved totals and local residuals")
    p.add_argument("--t", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--order", type=int)

    p = sub.add_parser("quantize", parents=[common], help="check the truncated Fock-space algebra")
    p.add_argument("--modes", help="comma-separated 1-D wavenumbers")
    p.add_argument("--nmax", type=int)
    p.add_argument("--box", type=float, help="box length, enables the field-commutator table")
    return parser


def _emit(obj: dict, stream=None) -> None:
    print(json.dumps(obj, sort_keys=True, default=float), file=stream or sys.stdout)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        out_dir = Path(args.output_dir or cfg.output.directory)
        run = _Run(args.command, cfg, out_dir, {})
        if getattr(args, "input", None):
            run.settings.update(input=Path(args.input).name, velocity=args.velocity and Path(args.velocity).name, branch=args.branch)
        summary = COMMANDS[args.command](args, run)
        _emit(run.finish(summary))
        return 0
    except (ConfigError, DomainError) as exc:
        _emit({"command": args.command, "status": "invalid", "error": str(exc)})
        print(f"relwave: error: {exc}", file=sys.stderr)
        return 2
    except (RelwaveError, OSError, ArithmeticError) as exc:
        _emit({"command": args.command, "status": "failed", "error": str(exc)})
        print(f"relwave: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
