"""Command-line entry point."""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from .config import RunConfig
from .errors import InvalidConfig, LabError
from .store import (CandidateCache, atomic_write_text, dumps, rows_csv, write_plot_data,
                 write_profile)
from .minima import candidates_dual, candidates_simultaneous, default_grid, profile
from .precision import ZetaContext

log = logging.getLogger("extremal_lab")


def _fail(exc: LabError, status: int) -> None:
    click.echo(json.dumps(exc.to_dict(), sort_keys=True, default=str), err=True)
    sys.exit(status)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InvalidConfig as exc:
            _fail(exc, 2)
        except LabError as exc:
            _fail(exc, 1)
    return wrapper


def _config_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="JSON config file; flags override its values."),
        click.option("--zeta", "zeta_spec", help="Target number, e.g. fib:1,2."),
        click.option("--n", type=int, help="Dimension."),
        click.option("--side", type=click.Choice(["simultaneous", "dual"])),
        click.option("--backend", help="brute, reduced, structured, joined with '+'."),
        click.option("--q-max", "q_max", type=float),
        click.option("--grid-step", "grid_step", type=float),
        click.option("--bits", "precision_bits", type=int),
        click.option("--h-max", "h_max", type=int),
        click.option("--x-max", "x_max", type=int),
        click.option("--generations", type=int),
        click.option("--cache-dir", "cache_dir", type=click.Path(file_okay=False)),
        click.option("--format", "output_format", type=click.Choice(["csv", "json", "both"])),
        click.option("--out", "out_dir", type=click.Path(file_okay=False)),
        click.option("--plot-data", is_flag=True, help="Also write one (q, L) file per level."),
        click.option("--tol-eq", "tol_eq", type=float),
        click.option("--eps-band", "eps_band", type=float),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _load(kw: dict) -> tuple[RunConfig, bool]:
    plot = kw.pop("plot_data", False)
    path = kw.pop("config_path", None)
    return RunConfig.from_sources(path, **kw), plot


def _ctx(cfg: RunConfig) -> ZetaContext:
    return ZetaContext.from_spec(cfg.zeta_spec, bits=cfg.precision_bits)


def _profile(cfg: RunConfig, ctx: ZetaContext, side: str, backend: str):
    cache = CandidateCache(cfg.resolved_cache_dir())
    key = cfg.key("zeta_spec", "n", "q_max", "grid_step", "precision_bits", "h_max", "x_max",
                  "window") + f"_{side}_{backend.replace('+', '-')}"
    if side == "dual":
        build = functools.partial(candidates_dual, ctx, cfg.n, cfg.dual_bound(), backend,
                                  q_max=cfg.q_max, step=cfg.grid_step)
    else:
        build = functools.partial(candidates_simultaneous, ctx, cfg.n, cfg.sim_bound(),
                                  window=cfg.window, backend=backend, q_max=cfg.q_max,
                                  step=cfg.grid_step)
    cands = cache.get_or_build(key, build)
    brute = backend == "brute"
    return profile(cands, default_grid(cfg.q_max, cfg.grid_step), allow_missing=brute,
                   zeta_spec=cfg.zeta_spec, bits=cfg.precision_bits)


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit(path: Path, text: str) -> None:
    atomic_write_text(path, text)
    click.echo(str(path))


@click.group()
@click.option("-v", "--verbose", count=True)
def main(verbose: int) -> None:
    """Successive minima and approximation exponents of extremal numbers."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_config_options
@_guard
def minima(**kw) -> None:
    """Compute one successive-minima profile."""
    cfg, plot = _load(kw)
    prof = _profile(cfg, _ctx(cfg), cfg.side, cfg.backend)
    stem = f"profile_{cfg.side}_n{cfg.n}"
    out = _out(cfg)
    if cfg.output_format in ("json", "both"):
        _emit(out / f"{stem}.json", dumps({
            "zeta": cfg.zeta_spec, "n": cfg.n, "side": cfg.side, "backend": cfg.backend,
            "precision_bits": cfg.precision_bits, "q": prof.grid,
            "L": prof.values.T, "witness_ids": prof.witnesses.T}))
    if cfg.output_format in ("csv", "both"):
        write_profile(prof, out / f"{stem}.csv")
        click.echo(str(out / f"{stem}.csv"))
    if plot:
        for p in write_plot_data(prof, out, stem):
            click.echo(str(p))


@main.command()
@_config_options
@_guard
def exponents(**kw) -> None:
    """Exponent report from a simultaneous and a dual profile."""
    from .exponents import exponent_report, transference_check

    cfg, plot = _load(kw)
    ctx = _ctx(cfg)
    sim_backend = "brute" if cfg.backend == "brute" else "reduced"
    sim = _profile(cfg, ctx, "simultaneous", sim_backend)
    dual = _profile(cfg, ctx, "dual", cfg.backend) if cfg.n > 1 else None
    rep = exponent_report(sim, dual)
    out = _out(cfg)
    _emit(out / f"exponents_n{cfg.n}.json", dumps(rep.to_dict()))
    checks = transference_check(rep, tol_eq=cfg.tolerances.tol_eq) if dual is not None else []
    _emit(out / f"transference_n{cfg.n}.csv",
          rows_csv(["check", "lower", "value", "upper", "pass"],
                   [(c.name, c.lower, c.value, c.upper, int(c.ok)) for c in checks]))
    for name, vals in (("lambda", rep.lam), ("lambda_hat", rep.lam_hat), ("w", rep.w),
                       ("w_hat", rep.w_hat)):
        click.echo(f"{name:<11}" + "  ".join(f"{v:.6f}" for v in vals))
    if plot:
        for prof in (sim, dual):
            if prof is not None:
                write_plot_data(prof, out, f"profile_{prof.side}_n{cfg.n}")


@main.command()
@_config_options
@_guard
def segments(**kw) -> None:
    """Phase segmentation of the three-dimensional dual profile."""
    from .graphlab import claims_csv, segment, verify_graph_claims

    cfg, plot = _load(kw)
    if cfg.n != 3 or cfg.side != "dual":
        raise InvalidConfig("segments needs --n 3 --side dual", n=cfg.n, side=cfg.side)
    prof = _profile(cfg, _ctx(cfg), "dual", cfg.backend)
    rep = segment(prof, eps_band=cfg.tolerances.eps_band)
    claims = verify_graph_claims(rep, slope_tol=cfg.tolerances.slope_tol,
                                 psi_tol=cfg.tolerances.psi_tol)
    out = _out(cfg)
    _emit(out / "segments.json", dumps(rep.to_dict()))
    _emit(out / "claims.csv", claims_csv(claims))
    if plot:
        write_plot_data(prof, out, "profile_dual_n3")
    click.echo(f"{sum(c.passed for c in claims)}/{len(claims)} claims pass")


@main.command()
@_config_options
@_guard
def roy(**kw) -> None:
    """Record quadratic polynomials up to --h-max (default 1e30)."""
    from .roy import extract_roy_sequence, growth_stats

    cfg, _ = _load(kw)
    h = cfg.h_max or 10**30
    seq = extract_roy_sequence(_ctx(cfg), h, eps_detect=cfg.tolerances.eps_detect)
    out = _out(cfg)
    _emit(out / "roy.json", seq.to_json())
    st = growth_stats(seq)
    _emit(out / "roy.csv", rows_csv(
        ["k", "height", "exponent", "derivative_ratio"],
        [(k, e.height, e.exponent, float(st.derivative_ratio[k]))
         for k, e in enumerate(seq.entries)]))


@main.command()
@_config_options
@_guard
def cubic(**kw) -> None:
    """Irreducible cubic witnesses and the small-height scan."""
    from .cubic import cubic_experiment, cubic_nonexistence_scan, witnesses_json
    from .roy import best_approx_polys, extract_roy_sequence

    cfg, _ = _load(kw)
    ctx = _ctx(cfg)
    h = cfg.h_max or 10**120
    seq = extract_roy_sequence(ctx, h, eps_detect=cfg.tolerances.eps_detect)
    best = best_approx_polys(ctx, h)
    ws = cubic_experiment(ctx, seq, best, min(cfg.generations, len(seq) - 2))
    out = _out(cfg)
    _emit(out / "cubic_witnesses.json", witnesses_json(ws))
    _emit(out / "cubic_summary.csv", rows_csv(
        ["k", "j", "height", "exponent_poly", "exponent_root", "selected"],
        [(w.k, w.j, w.S.height, w.exponent_poly, w.exponent_root, int(w.selected)) for w in ws]))
    scan = cubic_nonexistence_scan(ctx, 60, cfg.tolerances.eps_cubic)
    _emit(out / "cubic_scan.json", dumps([{"coeffs": list(P.coeffs), "height": P.height,
                                           "exponent": e} for P, e in scan]))


@main.command()
@click.option("--suite", "suites", multiple=True, default=["all"],
              type=click.Choice(["all", "paper-n2", "paper-n3", "paper-n4", "cubic",
                                 "properties"]))
@click.option("--zeta", "zeta_spec", default="fib:1,2")
@click.option("--cache-dir", "cache_dir", type=click.Path(file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@_guard
def verify(suites, zeta_spec, cache_dir, out_dir) -> None:
    """Run acceptance suites; exit status 0 iff every row passes."""
    import os

    from .config import CACHE_ENV
    from .suites import SUITES, Lab, LabConfig, run_suites

    names = SUITES if "all" in suites else tuple(dict.fromkeys(suites))
    cache = CandidateCache(os.environ.get(CACHE_ENV) or cache_dir)
    rows = run_suites(names, Lab(LabConfig(zeta_spec=zeta_spec), cache))
    for r in rows:
        click.echo(r.line())
    bad = sum(not r.passed for r in rows)
    click.echo(f"{len(rows) - bad}/{len(rows)} rows pass")
    if out_dir:
        atomic_write_text(Path(out_dir) / "verify.csv", rows_csv(
            ["criterion", "name", "measured", "lo", "hi", "pass", "note"],
            [(r.criterion, r.name, r.measured, r.lo, r.hi, int(r.passed), r.note) for r in rows]))
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
