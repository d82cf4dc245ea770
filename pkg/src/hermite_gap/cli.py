"""Command-line front end: ``hermite-gap <verb> ...``."""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from . import checks
from .battery import builtin_names, resolve_domain, run_battery
from .errors import HermiteGapError
from .report import emit_report, normalize
from .solver1d import BC, SLProblem, solve_sl
from .solver2d import export_mode, mu1_odd, neumann_spectrum


class Settings:
    def __init__(self, h, tol, trunc_tol, seed, fmt, out):
        self.h, self.tol, self.trunc_tol, self.seed, self.fmt, self.out = h, tol, trunc_tol, seed, fmt, out


def _domain(ref: str):
    try:
        return resolve_domain(ref)
    except (FileNotFoundError, HermiteGapError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint="DOMAIN") from exc


def _emit_doc(cfg: Settings, doc: dict) -> None:
    text = json.dumps(normalize(doc), sort_keys=True, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _finish(ctx, cfg: Settings, reports) -> None:
    ctx.exit(emit_report(reports, cfg.fmt, cfg.out))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--h", "h", type=float, default=None, help="Finest mesh size (check defaults if omitted).")
@click.option("--tol", type=float, default=checks.TOL_2D, show_default=True, help="Inequality slack.")
@click.option("--trunc-tol", type=float, default=None, help="Truncation-loop tolerance (default 1e-3 * value).")
@click.option("--seed", type=int, default=7, show_default=True, help="Seed for random batteries and sampling.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
@click.pass_context
def main(ctx, h, tol, trunc_tol, seed, fmt, out):
    """Verify Gaussian-weighted Neumann eigenvalue inequalities numerically."""
    ctx.obj = Settings(h, tol, trunc_tol, seed, fmt, out)


@main.command()
@click.option("--a", "a", type=float, required=True)
@click.option("--b", "b", type=float, required=True)
@click.option("--bc", type=click.Choice(["neumann", "dirichlet"]), default="neumann", show_default=True)
@click.option("--grid-n", type=int, default=1024, show_default=True)
@click.option("--index", type=int, default=None, help="Eigenvalue index (default: first nontrivial).")
@click.pass_obj
def eig1d(cfg: Settings, a, b, bc, grid_n, index):
    """1-D Hermite eigenvalue on (A, B)."""
    if index is None:
        index = 1 if bc == "neumann" else 0
    pair = solve_sl(SLProblem(a, b, BC(bc), None, grid_n), index)
    _emit_doc(cfg, {"a": pair.problem.a, "b": pair.problem.b, "bc": bc, "index": index, "grid_n": grid_n,
                    "value": pair.value, "raw": pair.raw, "order": pair.order,
                    "extrapolated": pair.extrapolated, "levels": list(pair.levels),
                    "truncated": list(pair.problem.truncated)})


@main.command()
@click.argument("domain")
@click.option("--k", type=int, default=4, show_default=True, help="Number of eigenvalues.")
@click.option("--odd", is_flag=True, help="Odd spectrum (half domain, Dirichlet on the axis).")
@click.option("--mode-out", type=click.Path(dir_okay=False), default=None,
              help="Write finest mesh and eigenvectors in the ASCII mesh format.")
@click.pass_obj
def eig2d(cfg: Settings, domain, k, odd, mode_out):
    """Weighted Neumann (or odd) spectrum of a bounded DOMAIN."""
    dom = _domain(domain)
    h = cfg.h if cfg.h is not None else checks.DEFAULT_H
    try:
        spec = mu1_odd(dom, h, k=k) if odd else neumann_spectrum(dom, h, k=k)
    except HermiteGapError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    if mode_out:
        export_mode(spec, mode_out)
    _emit_doc(cfg, spec.to_dict())


@main.command()
@click.argument("which", type=click.Choice(["thm1", "thm2", "sw", "an", "gap"]))
@click.argument("domain")
@click.pass_context
def check(ctx, which, domain):
    """Run one inequality check on DOMAIN (built-in name, JSON file or inline JSON)."""
    cfg: Settings = ctx.obj
    dom = _domain(domain)
    hb = cfg.h if cfg.h is not None else checks.DEFAULT_H
    hu = cfg.h if cfg.h is not None else checks.UNBOUNDED_H
    if which == "thm1":
        rep = checks.check_thm1(dom, hb, cfg.tol)
    elif which == "thm2":
        rep = checks.check_thm2(dom, cfg.tol, hu, cfg.trunc_tol)
    elif which == "sw":
        rep = checks.check_sw(dom, cfg.tol, hb)
    elif which == "an":
        rep = checks.check_an(dom, cfg.tol, hb)
    else:
        rep = checks.check_gap(dom, cfg.tol, hb, cfg.trunc_tol)
    _finish(ctx, cfg, [rep])


@main.command()
@click.argument("what", type=click.Choice(["dumbbell"]))
@click.option("--eps", default="0.4,0.2,0.1,0.05", show_default=True, help="Comma-separated corridor widths.")
@click.option("--side", type=float, default=1.0, show_default=True)
@click.option("--corridor", type=float, default=1.0, show_default=True)
@click.pass_context
def sweep(ctx, what, eps, side, corridor):
    """Dumbbell degeneration sweep of the odd eigenvalue."""
    cfg: Settings = ctx.obj
    try:
        eps_list = [float(e) for e in eps.split(",") if e.strip()]
        rep = checks.dumbbell_sweep(eps_list, cfg.h if cfg.h is not None else checks.DEFAULT_H, side, corridor)
    except (ValueError, HermiteGapError) as exc:
        raise click.BadParameter(str(exc), param_hint="--eps") from exc
    _finish(ctx, cfg, [rep])


@main.command()
@click.argument("what", type=click.Choice(["jacobian"]))
@click.argument("domain")
@click.option("--n", "n", type=int, default=6, show_default=True, help="Truncation depth.")
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--r", "r", type=float, default=None, help="Fillet radius (default: half the curvature radius, else 0.25).")
@click.pass_context
def audit(ctx, what, domain, n, samples, r):
    """Reflection-Jacobian and weight-ratio audit on collar samples."""
    cfg: Settings = ctx.obj
    rep = checks.jacobian_audit(_domain(domain), n, samples, cfg.seed, r)
    _finish(ctx, cfg, [rep])


@main.command()
@click.option("--seed", type=int, default=None, help="Overrides the global --seed.")
@click.pass_context
def battery(ctx, seed):
    """Run every check on the built-in battery."""
    cfg: Settings = ctx.obj
    seed = cfg.seed if seed is None else seed
    _finish(ctx, cfg, run_battery(seed, cfg.h, cfg.tol, cfg.trunc_tol))


@main.command("domains")
def list_domains():
    """List the built-in domain names."""
    for name in builtin_names():
        click.echo(name)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
