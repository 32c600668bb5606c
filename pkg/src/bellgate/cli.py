"""Batch command-line surface.

Five subcommands expose the library: evolve (propagator of a parameter
file), blocks (frame decomposition and reduced parameters), synth
(pulse prescription cards and CNOT families), compile (Bell-grammar
compilation of computational circuits), fidelity-sweep (perturbation
reports for a solved card).

All output is deterministic for fixed inputs and seed: floats print
with 17 significant digits, complex entries as {"re":…, "im":…},
angles are radians.  Exit codes: 0 success, 2 input error, 3
numerical or solver failure; failures write one JSON error object to
stderr.  Formats are defined per subcommand: evolve supports json and
csv, synth supports json always and csv for --family, fidelity-sweep
supports json and csv, blocks and compile are json only.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import calib, fidelity
from .bellframe import bell_frame, closed_form_block, reduced_params, to_blocks
from .errors import BellgateError, SolverFailure
from .gates import Circuit, GateId, compile_circuit, matrix_of
from .jsonio import complex_to_doc, dumps, format_float
from .model import PhysicalParams, evolve
from .spinlin import dist_phase_invariant, dist_unitary

__all__ = ["main", "DEFAULT_SEED"]

DEFAULT_SEED = 7

_SYNTH_TAGS = ("S_phi_q2", "S_phi_q1", "H_q2", "H_q1", "CNOT_12", "CNOT_21")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _matrix_doc(m: np.ndarray) -> list:
    return [[complex_to_doc(z) for z in row] for row in m]


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _build_parser() -> _Parser:
    parser = _Parser(prog="bellgate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tol-structural", type=float, default=1e-10)
        p.add_argument("--tol-synthesis", type=float, default=calib.ACCEPT_TOL)
        p.add_argument("--out", default=None, help="write output to a file instead of stdout")

    p = sub.add_parser("evolve", help="propagator of a parameter file")
    p.add_argument("params", help="PhysicalParams JSON file")
    common(p)

    p = sub.add_parser("blocks", help="Bell-frame decomposition of a propagator")
    p.add_argument("params", help="PhysicalParams JSON file")
    p.add_argument("--cross-h", type=int, default=None, choices=(1, 2, 3),
                   help="also report the off-block residual in this frame")
    common(p)

    p = sub.add_parser("synth", help="solve a pulse prescription card")
    p.add_argument("gate", choices=_SYNTH_TAGS)
    p.add_argument("--phi", type=float, default=None, help="phase angle, radians")
    p.add_argument("--m", default="1", help="winding number, or a..b range with --family")
    p.add_argument("--m-prime", type=int, default=0)
    p.add_argument("--route", choices=("printed", "alternate"), default="printed")
    p.add_argument("--family", action="store_true",
                   help="emit the asymptotic CNOT family instead of one card")
    p.add_argument("--field-scale", type=float, default=1.0)
    common(p)

    p = sub.add_parser("compile", help="compile a computational circuit to Bell grammar")
    p.add_argument("circuit", help="Circuit JSON file")
    common(p)

    p = sub.add_parser("fidelity-sweep", help="perturbation reports for a solved card")
    p.add_argument("card", help="PrescriptionCard JSON file")
    p.add_argument("--states", type=int, default=64)
    p.add_argument("--steps", default="1e-2,5e-3,2.5e-3",
                   help="comma-separated coordinate steps")
    common(p)

    return parser


def _cmd_evolve(args) -> str:
    p = PhysicalParams.from_json(_read(args.params))
    u = evolve(p)
    if args.format == "csv":
        lines = ["row,col,re,im"]
        for r in range(4):
            for c in range(4):
                lines.append(
                    f"{r},{c},{format_float(u[r, c].real)},{format_float(u[r, c].imag)}"
                )
        return "\n".join(lines) + "\n"
    doc = {
        "params": json.loads(p.to_json()),
        "unitary": _matrix_doc(u),
        "unitarity_residual": dist_unitary(u),
    }
    return dumps(doc, indent=2) + "\n"


def _cmd_blocks(args) -> str:
    if args.format == "csv":
        raise ValueError("blocks only supports --format json")
    p = PhysicalParams.from_json(_read(args.params))
    frame = bell_frame(p.h)
    b1, b2, off = to_blocks(evolve(p), frame)
    rps = reduced_params(p, frame)
    reduced = []
    for rp, blk in zip(rps, (b1, b2)):
        rebuilt = closed_form_block(rp, frame)
        reduced.append(
            {
                "block": rp.block,
                "delta_plus": rp.delta_plus,
                "delta_minus": rp.delta_minus,
                "b": rp.b,
                "j": rp.j,
                "closed_form_residual": float(np.max(np.abs(rebuilt - blk))),
            }
        )
    doc = {
        "frame": json.loads(frame.to_json()),
        "block1": _matrix_doc(b1),
        "block2": _matrix_doc(b2),
        "offblock_norm": off,
        "within_structural_tol": bool(off <= args.tol_structural),
        "reduced": reduced,
        "cross": None,
    }
    if args.cross_h is not None:
        _, _, cross_off = to_blocks(evolve(p), bell_frame(args.cross_h))
        doc["cross"] = {"h": args.cross_h, "offblock_norm": cross_off}
    return dumps(doc, indent=2) + "\n"


def _parse_m_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty winding range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _family_b_abs(card: calib.PrescriptionCard) -> float:
    rp1, _ = reduced_params(card.solved, bell_frame(card.targets.h))
    return abs(rp1.b)


def _cmd_synth(args) -> str:
    gate = GateId(tag=args.gate, phi=args.phi)
    if args.family:
        cards = [
            calib.cnot_family(gate, m=m, field_scale=args.field_scale)
            for m in _parse_m_range(args.m)
        ]
        if args.format == "csv":
            lines = ["gate,h,m,m_prime,field_scale,t,b_abs,realized_error"]
            for card in cards:
                lines.append(
                    ",".join(
                        [
                            card.targets.gate.tag,
                            str(card.targets.h),
                            str(card.targets.m),
                            str(card.targets.m_prime),
                            format_float(args.field_scale),
                            format_float(card.solved.t),
                            format_float(_family_b_abs(card)),
                            format_float(card.realized_error),
                        ]
                    )
                )
            return "\n".join(lines) + "\n"
        doc = {
            "field_scale": args.field_scale,
            "family": [
                dict(json.loads(calib.emit_card(card)), b_abs=_family_b_abs(card))
                for card in cards
            ],
        }
        return dumps(doc, indent=2) + "\n"
    if args.format == "csv":
        raise ValueError("synth only supports --format csv together with --family")
    tg = calib.prescription_targets(
        gate, m=int(args.m), m_prime=args.m_prime, route=args.route
    )
    opts = calib.SolverOptions(seed=args.seed, accept_tol=args.tol_synthesis)
    card = calib.solve_physical(tg, opts)
    return calib.emit_card(card) + "\n"


def _cmd_compile(args) -> str:
    if args.format == "csv":
        raise ValueError("compile only supports --format json")
    circuit = Circuit.from_json(_read(args.circuit))
    compiled = compile_circuit(circuit)
    residual = dist_phase_invariant(matrix_of(compiled), matrix_of(circuit))
    doc = {
        "compiled": json.loads(compiled.to_json()),
        "equivalence_residual": residual,
    }
    return dumps(doc, indent=2) + "\n"


def _cmd_fidelity_sweep(args) -> str:
    card = calib.parse_card(_read(args.card))
    steps = [float(s) for s in args.steps.split(",") if s.strip() != ""]
    frame = bell_frame(card.targets.h)
    states = fidelity.sample_states(frame, n=args.states, seed=args.seed)
    reports = fidelity.sensitivity_sweep(card, states, steps)
    g = card.targets.gate
    if args.format == "csv":
        phi_s = "" if g.phi is None else format_float(g.phi)
        m_s = "" if card.targets.m is None else str(card.targets.m)
        lines = ["gate,phi,m,state_id,param,dp,f2_exact,f2_second_order,cubic_residual"]
        for rep in reports:
            step = rep.dp.dp[fidelity.PARAM_NAMES.index(rep.param)]
            lines.append(
                ",".join(
                    [
                        g.tag,
                        phi_s,
                        m_s,
                        str(rep.state_id),
                        rep.param,
                        format_float(step),
                        format_float(rep.f2_exact),
                        format_float(rep.f2_second_order),
                        format_float(rep.cubic_residual),
                    ]
                )
            )
        return "\n".join(lines) + "\n"
    doc = {
        "gate": g.tag,
        "phi": g.phi,
        "m": card.targets.m,
        "reports": [
            {
                "state_id": rep.state_id,
                "param": rep.param,
                "dp": list(rep.dp.dp),
                "f2_exact": rep.f2_exact,
                "f2_second_order": rep.f2_second_order,
                "cubic_residual": rep.cubic_residual,
                "per_parameter_gradient": list(rep.per_parameter_gradient),
            }
            for rep in reports
        ],
        "ranking": [[name, val] for name, val in fidelity.rank_parameters(reports)],
    }
    return dumps(doc, indent=2) + "\n"


_HANDLERS = {
    "evolve": _cmd_evolve,
    "blocks": _cmd_blocks,
    "synth": _cmd_synth,
    "compile": _cmd_compile,
    "fidelity-sweep": _cmd_fidelity_sweep,
}


def _emit_error(kind: str, exc: Exception) -> None:
    sys.stderr.write(dumps({"error": {"type": kind, "message": str(exc)}}) + "\n")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _emit_error("usage", exc)
        return 2
    try:
        text = _HANDLERS[args.command](args)
    except SolverFailure as exc:
        _emit_error("solver", exc)
        return 3
    except BellgateError as exc:
        _emit_error("numerical", exc)
        return 3
    except (ValueError, KeyError, TypeError, OSError) as exc:
        _emit_error("input", exc)
        return 2
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
