"""Command-line front end.

Subcommands: make-state, analyze, filter-search, activate, lemma2-verify.
Reports are JSON (sorted keys, fixed layout) so identical inputs, seeds and
config produce byte-identical files.  Exit codes: 0 success, 1 suite failure,
2 input error, 3 unsupported dimension.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__, activation, belldiag, filtering
from .chsh import behavior_from_state, chsh_value, horodecki, optimal_measurements
from .numerics import DEFAULT_POLICY, NumericPolicy
from .qcore import Dims, DensityOperator, min_eigenvalue, partial_transpose
from .states import (
    bell_projectors,
    load_state,
    random_density,
    save_state,
    werner,
)

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_UNSUPPORTED_DIM = 3

PARTY_DIM_CAP = 16


def _policy_from_args(args) -> NumericPolicy:
    return NumericPolicy(
        eps_psd=args.tol_psd,
        eps_eq=args.tol_eq,
    )


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _emit(envelope: dict, args) -> None:
    blob = json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(blob)
        if args.format == "text":
            _print_text_summary(envelope)
    elif args.format == "text":
        _print_text_summary(envelope)
    else:
        sys.stdout.write(blob)


def _print_text_summary(envelope: dict) -> None:
    print(f"chshkit {envelope['version']} :: {envelope['command']}")
    for key, val in sorted(envelope["report"].items()):
        if isinstance(val, (dict, list)):
            continue
        print(f"  {key}: {val}")


def _envelope(command: str, args, report: dict, input_path=None, seed=None) -> dict:
    return {
        "tool": "chshkit",
        "version": __version__,
        "command": command,
        "seed": seed,
        "policy": _policy_from_args(args).as_dict(),
        "input_sha256": _sha256(input_path) if input_path else None,
        "report": report,
    }


def _load(path: str):
    try:
        return load_state(path)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        return None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot parse state file {path}: {exc}", file=sys.stderr)
        return None


def _dims_supported(rho) -> bool:
    return rho.dims.da <= PARTY_DIM_CAP and rho.dims.db <= PARTY_DIM_CAP


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_make_state(args) -> int:
    name = args.name
    try:
        if name.startswith("werner:"):
            rho = werner(float(name.split(":", 1)[1]))
        elif name.startswith("bell:"):
            idx = int(name.split(":", 1)[1])
            if idx not in (1, 2, 3, 4):
                raise ValueError("bell index must be 1..4")
            rho = DensityOperator(bell_projectors()[idx - 1].matrix, Dims.simple(2, 2))
        elif name == "product00":
            m = np.zeros((4, 4), dtype=complex)
            m[0, 0] = 1.0
            rho = DensityOperator(m, Dims.simple(2, 2))
        elif name.startswith("random:"):
            parts = name.split(":")
            da, db, seed = (int(parts[1]), int(parts[2]), int(parts[3]))
            rho = random_density(Dims.simple(da, db), seed)
        else:
            raise ValueError(
                "unknown state name (use werner:P, bell:I, product00, random:DA:DB:SEED)"
            )
    except (IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    save_state(args.out, rho, label=name)
    return EXIT_OK


def cmd_analyze(args) -> int:
    rho = _load(args.state_file)
    if rho is None:
        return EXIT_INPUT_ERROR
    pt_min = min_eigenvalue(partial_transpose(rho.matrix, rho.dims))
    report = {
        "party_dims": [list(rho.dims.a_factors), list(rho.dims.b_factors)],
        "trace": rho.trace,
        "min_eigenvalue": min_eigenvalue(rho.matrix),
        "pt_min_eigenvalue": pt_min,
        "ppt": pt_min >= -args.tol_psd,
        "entangled_npt": pt_min < -args.tol_psd,
    }
    if rho.dims.da == 2 and rho.dims.db == 2:
        hor = horodecki(rho)
        meas = optimal_measurements(rho)
        beh = behavior_from_state(rho, meas)
        value, relab = chsh_value(beh)
        report.update(
            {
                "horodecki": hor.as_dict(),
                "optimal_measurements": {
                    "alice": [[float(c) for c in v] for v in meas.alice],
                    "bob": [[float(c) for c in v] for v in meas.bob],
                },
                "behavior": [
                    [[[float(p) for p in row] for row in m] for m in t] for t in beh.table
                ],
                "chsh_value": value,
                "chsh_relabeling": relab.as_dict(),
            }
        )
    _emit(_envelope("analyze", args, report, args.state_file, seed=args.seed), args)
    return EXIT_OK


def cmd_filter_search(args) -> int:
    rho = _load(args.state_file)
    if rho is None:
        return EXIT_INPUT_ERROR
    if not _dims_supported(rho):
        print(f"error: party dimension exceeds the cap of {PARTY_DIM_CAP}", file=sys.stderr)
        return EXIT_UNSUPPORTED_DIM
    report = filtering.search_c_membership(
        rho,
        restarts=args.restarts,
        seed=args.seed,
        maxiter=args.maxiter,
        policy=_policy_from_args(args),
    )
    _emit(
        _envelope("filter-search", args, report.as_dict(), args.state_file, seed=args.seed),
        args,
    )
    return EXIT_OK


def cmd_activate(args) -> int:
    sigma = _load(args.state_file)
    if sigma is None:
        return EXIT_INPUT_ERROR
    if not _dims_supported(sigma):
        print(f"error: party dimension exceeds the cap of {PARTY_DIM_CAP}", file=sys.stderr)
        return EXIT_UNSUPPORTED_DIM
    config = activation.ActivationConfig(
        seed=args.seed,
        direct_restarts=args.restarts,
        solver_max_iter=args.solver_max_iter,
    )
    outcome = activation.activate(sigma, config, policy=_policy_from_args(args))
    _emit(
        _envelope("activate", args, outcome.document, args.state_file, seed=args.seed),
        args,
    )
    return EXIT_OK


def cmd_lemma2_verify(args) -> int:
    perturb = 1e-6 if args.inject_fault else 0.0
    checks = {}

    ext = belldiag.conv_n_extremality(args.grid, perturb=perturb)
    checks["extremality"] = {
        "pass": (
            abs(ext.min_first_component - (1.0 - math.sqrt(2.0))) < 1e-9
            and abs(ext.argmin_theta - math.pi / 4.0) <= (math.pi / 4.0) / args.grid + 1e-15
            and ext.unique_on_grid
            and ext.g_product_min >= -1e-12
        ),
        "detail": ext.as_dict(),
    }

    m0_ok, m0_detail = True, []
    expected_fixing = {(0, 1, 2, 3), (0, 2, 1, 3)}
    for eta in (0.0, 0.3, 0.5, 1.0):
        rep = belldiag.m0_family(eta)
        ok = rep.fixed_point_error < 1e-12 and set(rep.fixing_permutations) == expected_fixing
        m0_ok = m0_ok and ok
        m0_detail.append(rep.as_dict())
    checks["m0_family"] = {"pass": m0_ok, "detail": m0_detail}

    psi = belldiag.psi_separability(seed=args.seed)
    checks["psi_separability"] = {
        "pass": psi.ppt and psi.decomposition_residual < 1e-8,
        "detail": psi.as_dict(),
    }

    corpus = _decomposition_corpus(args.seed)
    corpus_detail, corpus_ok = [], True
    for label, m, expect in corpus:
        dec = belldiag.decompose_pDqG(m)
        ok = dec.status == belldiag.FEASIBLE and dec.residual < 1e-8
        if expect is not None:
            ok = ok and abs(dec.p - expect[0]) < 1e-6 and abs(dec.q - expect[1]) < 1e-6
        corpus_ok = corpus_ok and ok
        corpus_detail.append(
            {"label": label, "p": dec.p, "q": dec.q, "residual": dec.residual, "pass": ok}
        )
    checks["decompose_corpus"] = {"pass": corpus_ok, "detail": corpus_detail}

    all_pass = all(c["pass"] for c in checks.values())
    report = {"all_pass": all_pass, "grid": args.grid, "checks": checks}
    _emit(_envelope("lemma2-verify", args, report, seed=args.seed), args)
    return EXIT_OK if all_pass else EXIT_SUITE_FAILED


def _decomposition_corpus(seed: int):
    """Constructed separable maps with their trace tables; expectations where
    the decomposition weights are forced."""
    rng = np.random.default_rng(seed)
    corpus = [
        ("identity-matrix", np.eye(4), (1.0, 0.0)),
        ("g0-vertex", belldiag.G0, (0.0, 1.0)),
        ("m0-eta-0.5", belldiag.m0_matrix(0.5), (1.0, 0.0)),
    ]
    maps = [
        ("identity-embedding", belldiag.local_unitary_map(np.eye(2), np.eye(2))),
        ("x-conjugation", belldiag.local_unitary_map(belldiag.SX, np.eye(2))),
        ("hadamard-pair", belldiag.local_unitary_map(belldiag.HADAMARD, belldiag.HADAMARD)),
        ("prepare-z-pair", belldiag.prepare_map([0.5, 0.5, 0.0, 0.0])),
        ("prepare-mixture", belldiag.prepare_map([0.5, 0.25, 0.25, 0.0])),
        ("depolarizing-twirl", belldiag.pauli_channel(np.full((4, 4), 1.0 / 16.0))),
        ("m0-map-0.3", belldiag.m0_map(0.3)),
    ]
    weights = rng.dirichlet(np.ones(4))
    weights = 0.5 * weights + 0.125  # keep inside the separable polytope
    maps.append(("prepare-random", belldiag.prepare_map(weights)))
    for label, kmap in maps:
        m = belldiag.m_matrix(belldiag.omega_matrices(kmap))
        corpus.append((label, m.entries, None))
    return corpus


# ---------------------------------------------------------------------------
# parser / entry
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chshkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("state_file", help="input .qstate.json file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--tol-psd", type=float, default=DEFAULT_POLICY.eps_psd)
        p.add_argument("--tol-eq", type=float, default=DEFAULT_POLICY.eps_eq)

    p = sub.add_parser("make-state", help="write a named state to a .qstate.json file")
    p.add_argument("name", help="werner:P | bell:I | product00 | random:DA:DB:SEED")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_state)

    p = sub.add_parser("analyze", help="basic checks, PPT status, CHSH analysis")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("filter-search", help="search for a violation after local filtering")
    common(p)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--maxiter", type=int, default=600)
    p.set_defaults(func=cmd_filter_search)

    p = sub.add_parser("activate", help="search for an activating ancilla")
    common(p)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--solver-max-iter", type=int, default=4000)
    p.set_defaults(func=cmd_activate)

    p = sub.add_parser("lemma2-verify", help="run the Bell-diagonal cone suite")
    common(p, with_input=False)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_lemma2_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())
