"""Command-line entry point ``hdx``.

Every command writes a JSON report (and a manifest next to it) and prints a
single summary line.  Exit codes: 0 when the check passes, 1 when a bound or
verification fails, 2 on usage or input errors.
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction
from functools import wraps
from itertools import combinations
from pathlib import Path

import click
import numpy as np

from .cochains import DEFAULT_ENUMERATION_BUDGET, BudgetExceeded, Cochain, CochainError, coboundary, cochain_from_json, distance, weight
from .complex import ComplexError, color_restriction, complete_complex, link
from .groups import GroupError, group_from_name
from .io import RunManifest, complex_to_json, load_complex, read_json, write_json

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageFailure(Exception):
    """Invalid input detected after argument parsing."""


def _ints(text: str | None) -> list[int] | None:
    if text is None or text == "":
        return None
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageFailure(f"expected a comma separated list of integers, got {text!r}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageFailure(f"not a number: {text!r}") from None


def _number(x: Fraction):
    """Exact fractions stay exact in the summary when they are short."""
    return str(x) if isinstance(x, Fraction) else f"{x:.10g}"


def _finish(ctx: click.Context, report: dict, output: str, passed: bool, summary: str) -> None:
    manifest: RunManifest = ctx.obj["manifest"]
    path = write_json(output, report)
    manifest.outputs.append(str(path))
    manifest.finish()
    write_json(str(path) + ".manifest.json", manifest.to_json())
    click.echo(f"{manifest.command}: {'PASS' if passed else 'FAIL'} {summary} -> {path}")
    ctx.exit(EXIT_PASS if passed else EXIT_FAIL)


def command(group, name: str):
    """Register a command that records a manifest and maps input errors to exit code 2."""

    def deco(fn):
        @group.command(name)
        @click.pass_context
        @wraps(fn)
        def run(ctx, **kwargs):
            ctx.ensure_object(dict)
            full = ctx.command_path.split(" ", 1)[1] if " " in ctx.command_path else name
            ctx.obj["manifest"] = RunManifest(full, {k: v for k, v in kwargs.items()}, kwargs.get("seed"))
            try:
                fn(ctx, **kwargs)
            except (UsageFailure, ComplexError, CochainError, GroupError, BudgetExceeded, ValueError, FileNotFoundError) as exc:
                click.echo(f"{full}: ERROR {exc}", err=True)
                ctx.exit(EXIT_USAGE)

        return run

    return deco


def _load(ctx, path: str):
    ctx.obj["manifest"].add_input(path)
    return load_complex(path)


def _load_cochain(ctx, X, path: str) -> Cochain:
    ctx.obj["manifest"].add_input(path)
    return cochain_from_json(X, read_json(path))


@click.group()
def main() -> None:
    """Coboundary expansion experiments on simplicial complexes."""


# ------------------------------------------------------------------ gen
@main.group()
def gen() -> None:
    """Generate complexes, lattices and cochains."""


output_opt = click.option("-o", "--output", required=True, type=click.Path(dir_okay=False), help="Output JSON file.")


@command(gen, "complete")
@click.argument("n", type=int)
@click.argument("d", type=int)
@output_opt
def gen_complete(ctx, n, d, output):
    """All (d+1)-subsets of n vertices."""
    X = complete_complex(n, d)
    _finish(ctx, complex_to_json(X, {"kind": "complete", "n": n, "d": d}), output, True, f"faces={X.n_faces(d)}")


def _building(n: int, q: int, colors):
    from .lattice import order_complex, subspace_lattice

    L = subspace_lattice(n, q)
    cols = colors or list(range(1, n))
    return L, order_complex(L, cols), cols


@command(gen, "building")
@click.argument("n", type=int)
@click.argument("q", type=int)
@click.option("--colors", default=None, help="Subspace dimensions to keep (default 1..n-1).")
@output_opt
def gen_building(ctx, n, q, colors, output):
    """Order complex of the proper nonzero subspaces of F_q^n."""
    _, X, cols = _building(n, q, _ints(colors))
    src = {"kind": "building", "n": n, "q": q, "colors": cols}
    _finish(ctx, complex_to_json(X, src), output, True, f"vertices={X.vertex_count} top_faces={X.n_faces(X.dimension)}")


@command(gen, "lattice")
@click.argument("kind", type=click.Choice(["subspace", "boolean"]))
@click.argument("n", type=int)
@click.option("--q", default=2, show_default=True, type=int)
@output_opt
def gen_lattice(ctx, kind, n, q, output):
    """A geometric lattice file."""
    from .lattice import boolean_lattice, subspace_lattice

    L = subspace_lattice(n, q) if kind == "subspace" else boolean_lattice(n)
    data = L.to_json()
    data["kind"] = "lattice"
    _finish(ctx, data, output, True, f"elements={L.n_elements}")


@command(gen, "order-complex")
@click.argument("lattice_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--colors", default=None, help="Ranks to keep (default all proper ranks).")
@output_opt
def gen_order_complex(ctx, lattice_file, colors, output):
    """Order complex of a lattice file."""
    from .lattice import lattice_from_json, order_complex

    ctx.obj["manifest"].add_input(lattice_file)
    L = lattice_from_json(read_json(lattice_file))
    X = order_complex(L, _ints(colors))
    _finish(ctx, complex_to_json(X, {"kind": "order-complex", "lattice": lattice_file}), output, True, f"vertices={X.vertex_count}")


@command(gen, "restrict")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--colors", required=True, help="Colors to keep.")
@output_opt
def gen_restrict(ctx, complex_file, colors, output):
    """Color restriction of a partite complex."""
    X = _load(ctx, complex_file)
    Y = color_restriction(X, _ints(colors))
    _finish(ctx, complex_to_json(Y, {"kind": "restrict", "colors": _ints(colors)}), output, True, f"vertices={Y.vertex_count}")


@command(gen, "link")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--face", required=True, help="Vertices of the face.")
@output_opt
def gen_link(ctx, complex_file, face, output):
    """Link of a face."""
    X = _load(ctx, complex_file)
    Y = link(X, _ints(face))
    _finish(ctx, complex_to_json(Y, {"kind": "link", "face": _ints(face)}), output, True, f"vertices={Y.vertex_count}")


@command(gen, "cochain")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", required=True, type=int)
@click.option("--group", "group_name", default="Z2", show_default=True)
@click.option("--noise", default="0", show_default=True, help="Mass of faces to corrupt.")
@click.option("--seed", required=True, type=int)
@output_opt
def gen_cochain(ctx, complex_file, level, group_name, noise, seed, output):
    """A random coboundary with planted noise (a random cochain at level 0)."""
    X = _load(ctx, complex_file)
    f = planted_cochain(X, level, group_name, _fraction(noise), seed)
    _finish(ctx, f.to_json(), output, True, f"weight={_number(weight(f))}")


def planted_cochain(X, level: int, group_name: str, noise: Fraction, seed: int) -> Cochain:
    """``dg`` for a random ``g`` with faces changed until their mass reaches ``noise``."""
    G = group_from_name(group_name)
    rng = np.random.default_rng(seed)
    if level == 0:
        base = Cochain(X, 0, G, rng.integers(0, G.order, X.n_faces(0)))
    else:
        base = coboundary(Cochain(X, level - 1, G, rng.integers(0, G.order, X.n_faces(level - 1))))
    vals = base.values.copy()
    mass, den = X.mass(level), X.denominator(level)
    hit = 0
    for i in rng.permutation(vals.size):
        if Fraction(hit, den) >= noise:
            break
        vals[i] = (vals[i] + int(rng.integers(1, G.order))) % G.order
        hit += int(mass[i])
    return base.with_values(vals)


# ------------------------------------------------------------ expansion
budget_opt = click.option("--budget", default=DEFAULT_ENUMERATION_BUDGET, show_default=True, type=int, help="Enumeration cap.")
tol_opt = click.option("--tolerance", default=1e-9, show_default=True, type=float)


@command(main, "expansion")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", default=0, show_default=True, type=int)
@click.option("--group", "group_name", default="Z2", show_default=True)
@click.option("--mode", default="coboundary", show_default=True, type=click.Choice(["coboundary", "cosystolic"]))
@click.option("--method", default="exhaustive", show_default=True, type=click.Choice(["exhaustive", "randomized", "spectral"]))
@click.option("--trials", default=100, show_default=True, type=int)
@click.option("--seed", default=None, type=int, help="Required for --method randomized.")
@click.option("--target", default=None, help="Pass iff h >= target (spectral: lambda <= target).")
@budget_opt
@tol_opt
@output_opt
def cmd_expansion(ctx, complex_file, level, group_name, mode, method, trials, seed, target, budget, tolerance, output):
    """Coboundary/cosystolic constant or link spectra of a complex."""
    from .expansion import h_exhaustive, h_randomized, spectral_certificate

    X = _load(ctx, complex_file)
    if method == "spectral":
        cert = spectral_certificate(X, None if target is None else float(_fraction(target)), tolerance)
        ok = cert.passed is not False
        _finish(ctx, cert.to_json(), output, ok, f"lambda={cert.value:.10g}")
        return
    G = group_from_name(group_name)
    if method == "randomized":
        if seed is None:
            raise UsageFailure("--seed is required for randomized search")
        rep = h_randomized(X, level, G, trials, seed=seed, mode=mode, budget=budget)
    else:
        rep = h_exhaustive(X, level, G, mode, budget)
    ok = True
    if target is not None and rep.value is not None:
        ok = float(rep.value) >= float(_fraction(target)) - tolerance
    val = "none" if rep.value is None else _number(rep.value)
    _finish(ctx, rep.to_json(), output, ok, f"h={val} method={rep.method}")


# ----------------------------------------------------------- correction
@command(main, "correct")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("cochain_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--eta", required=True, help="Correction parameter in (0, 1].")
@click.option("--seed", default=0, show_default=True, type=int)
@budget_opt
@output_opt
def cmd_correct(ctx, complex_file, cochain_file, eta, seed, budget, output):
    """Run local correction and check contraction and local minimality."""
    from .correction import correct, is_locally_minimal

    X = _load(ctx, complex_file)
    f = _load_cochain(ctx, X, cochain_file)
    eta_f = _fraction(eta)
    ft, trace = correct(f, eta_f, budget=budget, seed=seed)
    trace.replay()
    dist = distance(f, ft)
    wdf = weight(coboundary(f))
    contract_ok = eta_f * dist <= wdf
    dft = coboundary(ft)
    minimal, viol = is_locally_minimal(dft, eta_f, budget, coboundary_of=ft if not f.group.is_abelian else None)
    report = trace.to_json()
    report["checks"] = {
        "eta_dist": str(eta_f * dist),
        "weight_df": str(wdf),
        "contraction": contract_ok,
        "locally_minimal": minimal,
        "violation": None if viol is None else str(viol),
    }
    ok = contract_ok and minimal
    _finish(ctx, report, output, ok, f"iterations={trace.iterations} dist={_number(dist)} wt_df={_number(wdf)}")


# ---------------------------------------------------------------- cones
def _view(lattice_file, building, flag_link, colors):
    from .lattice import building_flag_link, lattice_from_json, lattice_view, subspace_lattice

    cols = _ints(colors)
    if flag_link is not None:
        n, flag = flag_link
        if cols is None:
            raise UsageFailure("--flag-link needs --colors")
        return building_flag_link(n, _ints(flag), cols)
    if building is not None:
        n, q = building
        return lattice_view(subspace_lattice(n, q), cols)
    if lattice_file is not None:
        return lattice_view(lattice_from_json(read_json(lattice_file)), cols)
    raise UsageFailure("give one of --building, --lattice or --flag-link")


geometry_opts = [
    click.option("--building", nargs=2, type=int, default=None, help="N Q: subspaces of F_q^N."),
    click.option("--lattice", "lattice_file", default=None, type=click.Path(exists=True, dir_okay=False)),
    click.option("--flag-link", nargs=2, type=(int, str), default=None, help="N FLAG: link of a flag in the building of F_2^N."),
    click.option("--colors", default=None, help="Colors to keep."),
]


def _geometry_options(fn):
    for opt in reversed(geometry_opts):
        fn = opt(fn)
    return fn


@command(main, "cone")
@_geometry_options
@click.option("--level", "k", default=0, show_default=True, type=int)
@click.option("--no-suitability-check", is_flag=True, default=False)
@output_opt
def cmd_cone(ctx, building, lattice_file, flag_link, colors, k, no_suitability_check, output):
    """Build and verify an abelian cone on an order complex."""
    from .cones import build_cone, cone_to_bound, verify_cone
    from .lattice import SuitabilityConstants

    view = _view(lattice_file, building, flag_link, colors)
    consts = SuitabilityConstants.for_level(k)
    cone = build_cone(view, k, consts, check_suitable=not no_suitability_check)
    rep = verify_cone(cone, view, consts)
    k_top = len(view.colors) - 1
    radius_ok = rep.radius <= consts.D[k]
    bound = cone_to_bound(rep.radius, k_top, k, view.homogeneous) if rep.radius >= 1 and view.homogeneous else None
    report = {
        "kind": "cone",
        "level": k,
        "colors": list(view.colors),
        "report": rep.to_json(),
        "radius_limit": consts.D[k],
        "radius_ok": radius_ok,
        "expansion_bound": None if bound is None else str(bound),
        "cone": cone.to_json(),
    }
    ok = rep.valid and radius_ok and rep.vertex_bound_ok is not False and rep.color_bound_ok is not False
    _finish(ctx, report, output, ok, f"radius={rep.radius} limit={consts.D[k]} bound={bound}")


@command(main, "nacone")
@_geometry_options
@click.option("--max-diameter", default=9, show_default=True, type=int)
@output_opt
def cmd_nacone(ctx, building, lattice_file, flag_link, colors, max_diameter, output):
    """Build and verify a non-abelian cone on a three-colored order complex."""
    from .nacones import build_nonabelian_cone, nonabelian_cone_bound, verify_nonabelian_cone

    view = _view(lattice_file, building, flag_link, colors)
    if len(view.colors) != 3:
        raise UsageFailure("non-abelian cones need exactly three colors")
    cone = build_nonabelian_cone(view)
    rep = verify_nonabelian_cone(cone, view)
    bound = nonabelian_cone_bound(rep.diameter, 2) if rep.diameter >= 1 else None
    report = {
        "kind": "nacone",
        "colors": list(view.colors),
        "report": rep.to_json(),
        "max_diameter": max_diameter,
        "expansion_bound": None if bound is None else str(bound),
        "cone": cone.to_json(),
    }
    ok = rep.valid and rep.diameter <= max_diameter
    _finish(ctx, report, output, ok, f"diameter={rep.diameter} bound={bound}")


# ------------------------------------------------------------- decoding
@command(main, "decode")
@click.argument("complex_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("cochain_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--F", "color_sets", multiple=True, help="Candidate color set (repeatable; default all of size k+2).")
@click.option("--certify", default="exhaustive", show_default=True, type=click.Choice(["exhaustive", "nacone"]))
@click.option("--p", "p_value", default=None, help="Fraction of certified color sets (default: measured).")
@click.option("--seed", default=0, show_default=True, type=int)
@budget_opt
@tol_opt
@output_opt
def cmd_decode(ctx, complex_file, cochain_file, color_sets, certify, p_value, seed, budget, tolerance, output):
    """Decode a cochain to a nearby coboundary and check the distance bounds."""
    from .decoder import HypothesisViolation, certify_color_set, decode, select_good_F

    X = _load(ctx, complex_file)
    f = _load_cochain(ctx, X, cochain_file)
    if X.colors is None:
        raise UsageFailure("decoding needs a partite complex")
    k = f.level
    sets = [tuple(_ints(s)) for s in color_sets] or list(combinations(X.palette(), k + 2))
    if certify == "nacone":
        cands = [_nacone_certificate(X, F) for F in sets]
    else:
        cands = [certify_color_set(X, F, k, f.group, budget) for F in sets]
    try:
        good = select_good_F(X, f, cands, None if p_value is None else _fraction(p_value))
    except HypothesisViolation as exc:
        _finish(ctx, {"kind": "decode", "error": str(exc), "candidates": [c.to_json() for c in cands]}, output, False, str(exc))
        return
    g, rep = decode(X, f, good, budget=budget, seed=seed, tolerance=tolerance)
    report = rep.to_json()
    report["kind"] = "decode"
    report["g"] = g.to_json()
    report["color_set"] = good.to_json()
    ok = rep.passed and rep.verified and rep.disjunction_failures == 0
    _finish(ctx, report, output, ok, f"F={list(rep.F)} dist={float(rep.overall):.6g} bound={rep.bound:.6g} verified={rep.verified}")


def _nacone_certificate(X, F):
    """Certificate for ``X^F`` from a verified non-abelian cone; needs ``F`` to be every color."""
    from .decoder import LocalCertificate
    from .lattice import lattice_view, subspace_lattice
    from .nacones import build_nonabelian_cone, nonabelian_cone_bound, verify_nonabelian_cone

    src = getattr(X, "source", None) or {}
    if src.get("kind") != "building":
        raise UsageFailure("--certify nacone needs a complex generated by 'gen building'")
    if tuple(sorted(F)) != tuple(X.palette()) or len(F) != 3:
        raise UsageFailure("--certify nacone covers only F equal to all three colors")
    view = lattice_view(subspace_lattice(src["n"], src["q"]), list(F))
    rep = verify_nonabelian_cone(build_nonabelian_cone(view), view)
    beta = nonabelian_cone_bound(rep.diameter, 2) if rep.valid else None
    return LocalCertificate(tuple(sorted(F)), beta, rep.valid, "nonabelian cone", (("diameter", rep.diameter),))


# ---------------------------------------------------------- upper bound
@command(main, "upperbound")
@click.option("--complex", "complex_file", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--complete", nargs=2, type=int, default=None, help="N D: use the complete complex.")
@click.option("--level", default=1, show_default=True, type=int)
@click.option("--trials", default=10_000, show_default=True, type=int)
@click.option("--seed", required=True, type=int)
@budget_opt
@output_opt
def cmd_upperbound(ctx, complex_file, complete, level, trials, seed, budget, output):
    """Sample random cochains to exhibit a small expansion ratio."""
    from .expansion import random_upper_bound_experiment

    if complete is not None:
        X = complete_complex(*complete)
    elif complex_file is not None:
        X = _load(ctx, complex_file)
    else:
        raise UsageFailure("give --complex or --complete")
    rep = random_upper_bound_experiment(X, level, trials, seed, budget, stop_when_achieved=True)
    ok = rep.achieved or rep.frequencies_consistent()
    ratio = "none" if rep.best_ratio is None else f"{float(rep.best_ratio):.6g}"
    _finish(ctx, rep.to_json(), output, ok, f"ratio={ratio} target={rep.target:.6g} trials={rep.trials}")


# --------------------------------------------------------------- bounds
FORMULAS = {
    "local-to-global": ("beta", "lambda", "k"),
    "heavy-cosystole": ("beta", "lambda", "k"),
    "overlap": ("beta", "nu", "eps", "k"),
    "color-restriction": ("p", "beta", "k"),
    "cone": ("radius", "k_top", "k"),
    "nacone": ("radius", "k_top"),
}


def evaluate_formula(name: str, values: dict):
    from .cones import cone_to_bound
    from .expansion import heavy_cosystole_bound, local_to_global_bound, overlap_constant
    from .nacones import nonabelian_cone_bound

    need = FORMULAS[name]
    missing = [v for v in need if values.get(v) is None]
    if missing:
        raise UsageFailure(f"formula {name} needs --{' --'.join(m.replace('_', '-') for m in missing)}")
    v = {key: values[key] for key in need}
    if "k" in v:
        v["k"] = int(v["k"])
    if name == "local-to-global":
        return local_to_global_bound(v["beta"], v["lambda"], v["k"])
    if name == "heavy-cosystole":
        return heavy_cosystole_bound(v["beta"], v["lambda"], v["k"])
    if name == "overlap":
        return overlap_constant(v["beta"], v["nu"], v["eps"], v["k"])
    if name == "color-restriction":
        k = v["k"]
        return float(v["p"]) * float(v["beta"]) ** (k + 1) / (math.e * math.factorial(k + 2))
    if name == "cone":
        return cone_to_bound(int(v["radius"]), int(v["k_top"]), v["k"])
    return nonabelian_cone_bound(int(v["radius"]), int(v["k_top"]))


@command(main, "bounds")
@click.option("--formula", required=True, type=click.Choice(sorted(FORMULAS)))
@click.option("--beta", default=None)
@click.option("--lambda", "lam", default=None)
@click.option("--nu", default=None)
@click.option("--eps", default=None)
@click.option("--p", "p_value", default=None)
@click.option("--radius", default=None)
@click.option("--k-top", default=None)
@click.option("--k", default=None)
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False))
def cmd_bounds(ctx, formula, beta, lam, nu, eps, p_value, radius, k_top, k, output):
    """Evaluate a closed-form expansion bound (exact when the inputs are)."""
    raw = {"beta": beta, "lambda": lam, "nu": nu, "eps": eps, "p": p_value, "radius": radius, "k_top": k_top, "k": k}
    vals = {key: None if x is None else _fraction(x) for key, x in raw.items()}
    value = evaluate_formula(formula, vals)
    exact = isinstance(value, Fraction)
    report = {"kind": "bounds", "formula": formula, "inputs": {a: b for a, b in raw.items() if b is not None},
              "value": float(value), "value_exact": str(value) if exact else None}
    if output is None:
        click.echo(f"bounds {formula}: {float(value):.12g}" + (f" ({value})" if exact else ""))
        ctx.exit(EXIT_PASS)
    _finish(ctx, report, output, True, f"{formula}={float(value):.12g}" + (f" ({value})" if exact else ""))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
