"""Command-line front end.

Subcommands reproduce the figure-class computations as CSV/JSON artifacts:

  amp-scan     amplitude envelopes over m_z for a list of parameter cases
  photon-dist  outcome probability table for an initial state
  measure      Monte-Carlo measurement shots with posterior diagnostics
  wigner       spin Wigner function of the prior or a posterior state
  project      projective-limit collapse parameters and state
  validate     run the built-in invariant suite

Exit codes: 0 success, 2 configuration error, 3 resource cap, 4 numeric
domain error.  All outputs are deterministic given config + seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import density_from_state, wigner
from .approx import gaussian_model, project, projective_params
from .config import ExperimentConfig, build_params
from .errors import (ConfigError, DomainError, PreconditionError,
                     QndError, ResourceCapError)
from .numerics import HalfInt
from .povm import (PhotonOutcome, amplitude, outcome_distribution,
                   outcome_probability, posterior, sample_outcome)
from .spin_state import moments, state_to_json

HEADER = f"# qnd-povm v{__version__}, schema v1"


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_csv(path, fieldnames, rows, footer_comments=()):
    fh, owned = _open_out(path)
    try:
        fh.write(HEADER + "\n")
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow(row)
        for line in footer_comments:
            fh.write(f"# {line}\n")
    finally:
        if owned:
            fh.close()


def _write_json(path, payload):
    fh, owned = _open_out(path)
    try:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    finally:
        if owned:
            fh.close()


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_amp_scan(cfg: ExperimentConfig, args) -> int:
    if args.out is None:
        raise ConfigError("amp-scan writes one file per case; --out DIR is required")
    os.makedirs(args.out, exist_ok=True)
    for case in cfg.raw["cases"]:
        n = case["N"]
        params = build_params(case["params"], n)
        outcome = PhotonOutcome(case["outcome"]["n_c"], case["outcome"]["n_d"])
        two_j = n
        m_values = [HalfInt(t) for t in range(-two_j, two_j + 1, 2)]
        exact = np.array([amplitude(params, outcome, m) for m in m_values])
        peak = float(exact.max())
        normed = exact / peak if peak > 0 else exact
        try:
            model = gaussian_model(params, outcome)
        except DomainError:
            model = None
        rows = []
        for m, a, an in zip(m_values, exact, normed):
            if model is None:
                g = ""
            else:
                g = _fmt(math.exp(
                    model.log_prefactor
                    - (float(m) - model.m0) ** 2 / (2.0 * model.sigma2)
                ))
            rows.append([_fmt(float(m)), _fmt(a), _fmt(an), g])
        ext = "json" if args.format == "json" else "csv"
        path = os.path.join(args.out, f"{case['label']}.{ext}")
        if args.format == "json":
            _write_json(path, {
                "tool": "qnd-povm", "version": __version__, "schema": "v1",
                "columns": ["m_z", "A_exact", "A_exact_normalized", "A_gauss"],
                "rows": [[float(r[0]), float(r[1]), float(r[2]),
                          None if r[3] == "" else float(r[3])] for r in rows],
            })
        else:
            _write_csv(path, ["m_z", "A_exact", "A_exact_normalized", "A_gauss"], rows)
    return 0


def cmd_photon_dist(cfg: ExperimentConfig, args) -> int:
    params = cfg.params()
    state = cfg.initial_state()
    tol = args.mass_tol if args.mass_tol is not None else cfg.raw.get(
        "mass_tolerance", 1e-6)
    dist = outcome_distribution(params, state, tol,
                                max_total=cfg.raw.get("max_total"))
    rows = [[o.n_c, o.n_d, _fmt(p)] for o, p in dist.entries]
    footer = [f"captured_mass = {dist.captured_mass!r}",
              f"cutoff_total = {dist.cutoff_total}"]
    if args.format == "json":
        _write_json(args.out, {
            "tool": "qnd-povm", "version": __version__, "schema": "v1",
            "columns": ["n_c", "n_d", "p"],
            "rows": [[o.n_c, o.n_d, p] for o, p in dist.entries],
            "captured_mass": dist.captured_mass,
            "cutoff_total": dist.cutoff_total,
        })
    else:
        _write_csv(args.out, ["n_c", "n_d", "p"], rows, footer_comments=footer)
    return 0


def cmd_measure(cfg: ExperimentConfig, args) -> int:
    params = cfg.params()
    state = cfg.initial_state()
    tol = args.mass_tol if args.mass_tol is not None else cfg.raw.get(
        "mass_tolerance", 1e-9)
    seed = args.seed if args.seed is not None else cfg.raw.get("seed", 0)
    shots = cfg.raw["shots"]
    dump = cfg.raw.get("dump_posteriors", False)
    if dump and (args.out is None or args.out == "-"):
        raise ConfigError("dump_posteriors needs --out FILE to anchor the dump dir")
    dist = outcome_distribution(params, state, tol,
                                max_total=cfg.raw.get("max_total"))
    prior_m = moments(state)
    fh, owned = _open_out(args.out)
    try:
        for shot in range(shots):
            shot_seed = (int(seed) + shot) % (1 << 64)
            out = sample_outcome(dist, shot_seed)
            p = outcome_probability(params, out, state)
            if p <= 0.0:
                raise QndError(
                    f"sampled outcome ({out.n_c}, {out.n_d}) has zero "
                    f"probability (shot {shot}, seed {shot_seed})"
                )
            post = posterior(params, out, state)
            post_m = moments(post)
            ref = None
            if dump:
                dump_dir = args.out + ".posteriors"
                os.makedirs(dump_dir, exist_ok=True)
                ref = os.path.join(dump_dir, f"shot_{shot:06d}.json")
                with open(ref, "w", encoding="utf-8") as pf:
                    json.dump(state_to_json(post), pf, sort_keys=True)
            record = {
                "seed": shot_seed,
                "n_c": out.n_c,
                "n_d": out.n_d,
                "r": out.r if out.total > 0 else None,
                "log_prob": math.log(p),
                "mean_jz": post_m.mean_jz,
                "var_jz": post_m.var_jz,
                "squeezing_ratio": post_m.var_jz / prior_m.var_jz
                if prior_m.var_jz > 0 else None,
                "posterior_ref": ref,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    finally:
        if owned:
            fh.close()
    return 0


def cmd_wigner(cfg: ExperimentConfig, args) -> int:
    params = cfg.params()
    state = cfg.initial_state()
    if cfg.raw.get("state", "prior") == "posterior":
        oc = cfg.raw["outcome"]
        state = posterior(params, PhotonOutcome(oc["n_c"], oc["n_d"]), state)
    grid = cfg.raw.get("grid", {})
    n_theta = grid.get("n_theta", 181)
    n_phi = grid.get("n_phi", 361)
    rho = density_from_state(state, cfg.n_atoms / 2.0)
    wg = wigner(rho, n_theta=n_theta, n_phi=n_phi)
    if args.format == "json":
        _write_json(args.out, {
            "tool": "qnd-povm", "version": __version__, "schema": "v1",
            "columns": ["theta", "phi", "w"],
            "rows": [
                [float(t), float(p), float(wg.values[i, j])]
                for i, t in enumerate(wg.thetas)
                for j, p in enumerate(wg.phis)
            ],
        })
    else:
        rows = (
            [_fmt(t), _fmt(p), _fmt(wg.values[i, j])]
            for i, t in enumerate(wg.thetas)
            for j, p in enumerate(wg.phis)
        )
        _write_csv(args.out, ["theta", "phi", "w"], rows)
    return 0


def cmd_project(cfg: ExperimentConfig, args) -> int:
    params = cfg.params()
    state = cfg.initial_state()
    oc = cfg.raw["outcome"]
    outcome = PhotonOutcome(oc["n_c"], oc["n_d"])
    pp = projective_params(params, outcome)
    amp, collapsed = project(params, state, pp.u, pp.m0)
    _write_json(args.out, {
        "tool": "qnd-povm", "version": __version__, "schema": "v1",
        "u": pp.u, "v": pp.v, "m0": pp.m0,
        "xi_c": pp.xi_c, "xi_d": pp.xi_d,
        "xi_plus": pp.xi_plus, "xi_minus": pp.xi_minus,
        "amplitude": amp,
        "state": state_to_json(collapsed),
    })
    return 0


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    from .validate import run_all

    seed = args.seed if args.seed is not None else cfg.raw.get("seed", 20260810)
    results = run_all(seed=int(seed))
    fh, owned = _open_out(args.out)
    try:
        ok = True
        for name, passed, detail in results:
            ok &= passed
            fh.write(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}\n")
    finally:
        if owned:
            fh.close()
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnd-povm",
        description="QND measurement simulator for collective atomic spins",
    )
    parser.add_argument("--version", action="version",
                        version=f"qnd-povm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("amp-scan", "photon-dist", "measure", "wigner", "project",
                 "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to the JSON experiment config",
                       required=name != "validate")
        p.add_argument("--out", help="output path (directory for amp-scan); "
                       "stdout when omitted")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--mass-tol", type=float, dest="mass_tol",
                       help="override the distribution mass tolerance")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


_DISPATCH = {
    "amp-scan": cmd_amp_scan,
    "photon-dist": cmd_photon_dist,
    "measure": cmd_measure,
    "wigner": cmd_wigner,
    "project": cmd_project,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate" and args.config is None:
            cfg = ExperimentConfig.from_dict("validate", {})
        else:
            cfg = ExperimentConfig.load(args.command, args.config)
        return _DISPATCH[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc} (captured_mass={exc.captured_mass!r})",
              file=sys.stderr)
        return 3
    except (DomainError, PreconditionError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 4
    except QndError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
