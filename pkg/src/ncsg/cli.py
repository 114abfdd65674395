"""``ncsg <command> --config <path> [--out <path>] [--format json|csv] [--symbol <path>]``.

Exit codes: 0 success, 2 verdict failure, 1 error.  ``NCSG_THREADS`` caps the
BLAS/LAPACK thread pools (0 or unset = library default).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import io as ncio
from . import spectral as sp
from .config import SYMBOL_SCHEMA, load_config, validate
from .errors import NcsgError
from .fourier import analyze, l2_norm, norms, synthesize, ScalarField
from .group import TORUS, quadrature_grid
from .report import emit_report
from .symbol import (build_symbol, difference_op, ellipticity_check, extract_symbol, quantize_apply,
                     seminorm_report, _space_function)

COMMANDS = ("dual", "grid", "analyze", "synthesize", "quantize", "extract", "diff", "seminorms",
            "elliptic", "dmin", "gohberg", "compactness", "witness", "lemma-decay", "normality", "resolvent")

WITNESS_TOL = 1e-8


class Context:
    def __init__(self, cfg):
        self.cfg = cfg
        self.grid = quadrature_grid(cfg.group)
        self.group = self.grid.group
        self.dual = self.group.dual(cfg.lam)
        self._sigma = None

    @property
    def sigma(self):
        if self._sigma is None:
            self._sigma = build_symbol(self.cfg.symbol, self.grid, self.dual, lam=self.cfg.lam)
        return self._sigma

    def irrep(self, label):
        return self.group.irrep(tuple(label) if self.group.kind == TORUS else label[0])

    def field(self):
        text = self.cfg.analysis.field or ("cos(x1)" if self.group.kind == TORUS else "qw")
        return ScalarField(self.grid, _space_function(self.group, text)(self.grid.points))

    def xi_sequence(self, band, required=True, lam=None):
        """Configured sequence, or four levels spread below the witness margin."""
        if self.cfg.analysis.xi_sequence:
            return [self.irrep(lbl) for lbl in self.cfg.analysis.xi_sequence]
        lam = self.sigma.lam if lam is None else lam
        top = max(ir.level for ir in self.sigma.irreps if ir.weight <= lam * (1 + 1e-12)) - (band or 0)
        if top < 0:
            if not required:
                return []
            raise NcsgError(f"truncation too small for a witness profile of band {band}; "
                            "raise lambda or widen analysis.witness.radius")
        levels = sorted({max(0, round(top * f)) for f in (0.25, 0.5, 0.75, 1.0)})
        if self.group.kind == TORUS:
            return [self.irrep((L,) + (0,) * (self.group.dim - 1)) for L in levels]
        return [self.irrep((L,)) for L in levels]

    def shell_rows(self, dm, tails=None, floors=None):
        rows = []
        for r in dm.rows:
            row = {k: r[k] for k in ("shell_lo", "shell_hi", "d_min", "d_max")}
            row["tail_norm"] = (tails or {}).get(r["shell_lo"])
            row["s_k1"] = (floors or {}).get(r["shell_hi"])
            rows.append(row)
        return rows


def _coeff_list(c):
    return [{"label": list(ir.label), "re": b.real.tolist(), "im": b.imag.tolist()}
            for ir, b in zip(c.irreps, c.blocks)]


def run_command(command, cfg):
    """``(report dict, csv rows, exit code, summary line)``."""
    ctx = Context(cfg)
    a = cfg.analysis
    code = 0
    dm = None
    tails = floors = None
    if command == "dual":
        rep = {"group": cfg.group.to_dict(), "lambda": cfg.lam, "irreps": [ir.to_dict() for ir in ctx.dual],
               "basis_size": sum(ir.dim ** 2 for ir in ctx.dual)}
        line = f"dual: {len(ctx.dual)} irreps, basis size {rep['basis_size']}"
    elif command == "grid":
        rep = ctx.grid.to_dict(include_points=True)
        line = f"grid: {ctx.grid.size} points, exact level {ctx.grid.exact_level}"
    elif command in ("analyze", "synthesize"):
        f = ctx.field()
        c = analyze(f, ctx.dual, cfg.lam)
        if cfg.output.symbol_path:
            with open(cfg.output.symbol_path, "wb") as fh:
                fh.write(ncio.encode_coefficients(c, ctx.grid))
        if command == "analyze":
            rep = {"coefficients": _coeff_list(c), "l2": l2_norm(f), "ell2": norms(c)}
            line = f"l2={rep['l2']:.6f} ell2={rep['ell2']:.6f}"
        else:
            g = synthesize(c, ctx.grid)
            err = float(np.max(np.abs(g.values - f.values)))
            rep = {"values_re": g.values.real.tolist(), "values_im": g.values.imag.tolist(), "sup_error": err}
            line = f"synthesized {ctx.grid.size} values, sup error vs field {err:.3e}"
    elif command == "quantize":
        tf = quantize_apply(ctx.sigma, ctx.field())
        rep = {"values_re": tf.values.real.tolist(), "values_im": tf.values.imag.tolist(), "l2": l2_norm(tf)}
        line = f"quantized: l2={rep['l2']:.6f}"
    elif command == "extract":
        sig = ctx.sigma
        ex = extract_symbol(lambda v: quantize_apply(sig, v), ctx.grid, sig.irreps, lam=sig.lam, batched=True)
        err = max(float(np.max(np.abs(sig.at(ir) - ex.at(ir)))) for ir in sig.irreps)
        if cfg.output.symbol_path:
            ncio.write_symbol(ex, cfg.output.symbol_path)
        rep = {"max_error": err, "x_independent": ex.x_independent, "scalar": ex.scalar, "x_band": ex.x_band}
        line = f"extracted symbol, max error {err:.3e}"
    elif command == "diff":
        d = difference_op(ctx.sigma, a.q_index)
        ops = [float(np.max(np.linalg.svd(b, compute_uv=False)[..., 0])) for b in d.blocks]
        rep = {"q_index": a.q_index, "irreps": [ir.to_dict() for ir in d.irreps], "op_norms": ops}
        line = f"difference of order 1: max weighted norm {max(o * ir.weight for o, ir in zip(ops, d.irreps)):.6f}"
    elif command == "seminorms":
        rep = seminorm_report(ctx.sigma, a.alpha_max, a.beta_max, a.rho)
        line = " ".join(f"C[{k}]={v:.6g}" for k, v in rep["C"].items())
    elif command == "elliptic":
        rep = ellipticity_check(ctx.sigma, a.ellipticity_threshold, a.R)
        line = f"elliptic={str(rep['elliptic']).lower()} bound={rep['bound']:.6g}"
    elif command == "dmin":
        dm = sp.dmin_dmax(ctx.sigma, a.shells)
        rep = dm.to_dict()
        line = f"d_min={dm.d_min:.6f} d_max={dm.d_max:.6f}"
    elif command == "gohberg":
        lam_list = a.lambda_list or tuple(a.shells[1:])
        _, band = sp.profile_function(ctx.group, a.witness)
        xis = ctx.xi_sequence(band, False, max(lam_list))
        rep = sp.gohberg_check(ctx.sigma, lam_list, a.k_fixed, None, xis, a.witness,
                               a.gohberg_tol, a.shells)
        floors = {f["lambda"]: f["s_k1"] for f in rep["floors"]}
        code = 0 if rep["floor_ok"] else 2
        line = f"s_k1={rep['floors'][-1]['s_k1']:.6f} d_min={rep['d_min']:.6f} floor_ok={str(rep['floor_ok']).lower()}"
    elif command == "compactness":
        rep = sp.compactness_diagnostic(ctx.sigma, a.R_list, None, a.compactness_tol, a.shells)
        lows = list(a.shells[:-1])
        tails = dict(zip(lows, sp._tail_norms(ctx.sigma, ctx.sigma.lam, lows)[0]))
        line = f"verdict={rep['verdict']} d_max={rep['d_max']:.6f}"
    elif command == "witness":
        rows = []
        for ir in ctx.xi_sequence(0):
            k, x0 = sp._argmax_point(ctx.sigma, ir)
            wf = sp.witness(ctx.grid, a.witness, ir, x0)
            rows.append({"label": list(ir.label), "x_index": k, "norm": wf.norm, "u_norm": wf.u_norm,
                         "gap": wf.identity_gap})
        worst = max(r["gap"] for r in rows)
        code = 0 if worst <= WITNESS_TOL else 2
        rep = {"witnesses": rows, "max_gap": worst, "tol": WITNESS_TOL}
        line = f"witnesses={len(rows)} max_norm_gap={worst:.3e}"
    elif command == "lemma-decay":
        _, band = sp.profile_function(ctx.group, a.witness)
        rep = sp.lemma_decay_check(ctx.sigma, ctx.xi_sequence(band), a.witness)
        slope = rep["slope"]
        line = f"slope={'n/a' if slope is None else format(slope, '.4f')} monotone={str(rep['monotone_decreasing']).lower()}"
    elif command == "normality":
        rep = sp.essential_normality_check(ctx.sigma, None, a.R_list)
        slope = rep["slope"]
        line = f"commutator_norm={rep['commutator_norm']:.6g} slope={'n/a' if slope is None else format(slope, '.4f')}"
    elif command == "resolvent":
        if a.resolvent_lambda is not None:
            lam_c = complex(*a.resolvent_lambda)
        else:
            lam_c = sp.dmin_dmax(ctx.sigma, a.shells).d_max + 1.0
        rep = sp.resolvent_bound(ctx.sigma, lam_c, a.R, a.shells)
        code = 2 if rep["outside_disc"] and not rep["ok"] else 0
        line = f"ok={str(rep['ok']).lower()} sup_inverse_norm={rep['sup_inverse_norm']:.6g}"
    else:
        raise NcsgError(f"unknown command {command!r}")
    rows = []
    if cfg.output.format == "csv":
        dm = dm or sp.dmin_dmax(ctx.sigma, a.shells)
        rows = ctx.shell_rows(dm, tails, floors)
    rep = dict(rep, command=command)
    return rep, rows, code, line


def _symbol_override(path):
    if ncio.is_container(path):
        return {"family": "file", "path": path}
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    validate(spec, SYMBOL_SCHEMA)
    return spec


def _thread_limit():
    n = int(os.environ.get("NCSG_THREADS", "0") or 0)
    if n <= 0:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def build_parser():
    p = argparse.ArgumentParser(prog="ncsg", description="Matrix-symbol diagnostics on T^n and SU(2).")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--symbol", help="SymbolSpec JSON or NCSYM1 container")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            override = _symbol_override(args.symbol) if args.symbol else None
            cfg = load_config(args.config, override)
            fmt = args.format or cfg.output.format
            out = args.out or cfg.output.path
            cfg = type(cfg)(cfg.group, cfg.lam, cfg.symbol, cfg.analysis,
                            type(cfg.output)(out, fmt, cfg.output.symbol_path))
            rep, rows, code, line = run_command(args.command, cfg)
            if out:
                emit_report(rep, fmt, out, rows)
    except (NcsgError, ValueError, OSError, KeyError) as exc:
        print(f"ncsg {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
