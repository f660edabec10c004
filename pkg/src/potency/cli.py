"""Command-line front end.

Exit codes: 0 ok, 1 I/O or usage, 2 validation failure, 3 precondition,
4 verification failure.  All JSON output uses sorted keys.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import graph as G
from .errors import CapExceededError, MalformedInputError, PreconditionError, VerificationError
from .groups import DEFAULT_ORDER_CAP, FiniteGroup, validate_group
from .surgery import SurgerySpec, find_cut_shift_base, glue_cayley_copies, layered_surgery, make_proper_step
from .witness import (
    cut_shift_witness,
    hpotency_witness,
    quasipotency_witness,
    uab_potency_witness,
    verify_witness_dict,
)
from .words import FactorSystem, Letter, cyclic_reduce, reduce, word_from_json

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- input helpers ----------------------------------------------------------

_BUILTIN = {
    "cyclic": FiniteGroup.cyclic,
    "dihedral": FiniteGroup.dihedral,
    "symmetric": FiniteGroup.symmetric,
}


def _read_json(arg: str):
    text = arg.strip()
    if text.startswith(("[", "{")):
        return json.loads(text)
    with open(arg) as fh:
        return json.load(fh)


def load_group(arg: str) -> FiniteGroup:
    """Group from a JSON file, or ``cyclic:n`` / ``dihedral:n`` / ``symmetric:n`` / ``quaternion``."""
    if arg == "quaternion":
        return FiniteGroup.quaternion()
    kind, sep, num = arg.partition(":")
    if sep and kind in _BUILTIN:
        try:
            return _BUILTIN[kind](int(num))
        except ValueError:
            raise UsageError(f"bad group spec {arg!r}")
    return FiniteGroup.from_dict(_read_json(arg))


def load_fs(arg: str) -> FactorSystem:
    """Factor system from a JSON file, or a comma list of builtin groups.

    In the list form ``free:r`` adds r infinite cyclic free generators.
    """
    if not os.path.exists(arg) and not arg.lstrip().startswith("{"):
        groups, rank = [], 0
        for part in arg.split(","):
            if part.startswith("free:"):
                rank += int(part[5:])
            else:
                groups.append(load_group(part))
        return FactorSystem(groups, free_rank=rank)
    return FactorSystem.from_dict(_read_json(arg))


def load_word(arg: str):
    """Word as JSON ``[{"factor":..,"elem":..}]``, a JSON file, or ``0:1,1:1``."""
    if arg.lstrip().startswith("[") or os.path.exists(arg):
        return word_from_json(_read_json(arg))
    try:
        return tuple(Letter(*map(int, part.split(":"))) for part in arg.split(",") if part)
    except (TypeError, ValueError):
        raise UsageError(f"bad word {arg!r}")


def load_graph(arg: str) -> G.ActionGraph:
    return G.ActionGraph.from_dict(_read_json(arg))


def parse_marks(arg: str):
    """``v:k,v:k`` or a JSON list of {"vertex","factor"}."""
    if arg.lstrip().startswith("["):
        return tuple((int(m["vertex"]), int(m["factor"])) for m in json.loads(arg))
    try:
        return tuple(tuple(map(int, part.split(":"))) for part in arg.split(",") if part)
    except ValueError:
        raise UsageError(f"bad marks {arg!r}")


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _emit(args, payload, dot: str | None = None):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if dot is not None and getattr(args, "dot", None):
        with open(args.dot, "w") as fh:
            fh.write(dot)


def _graph_or_base(args, fs):
    if args.graph:
        return load_graph(args.graph)
    return G.base_graph_direct_product(fs, args.cap)


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    data = _read_json(args.path)
    if "successors" in data:
        if not args.fs:
            raise UsageError("validating a graph needs --fs")
        rep = G.validate_action_graph(load_fs(args.fs), G.ActionGraph.from_dict(data))
        kind = "graph"
    elif "factors" in data:
        rep = FactorSystem.from_dict(data).validate()
        kind = "factor_system"
    elif "table" in data:
        rep = validate_group(FiniteGroup.from_dict(data))
        kind = "group"
    elif "permutations" in data:
        ok, msg = verify_witness_dict(data)
        _emit(args, {"kind": "witness", "ok": ok, "message": msg})
        return EXIT_OK if ok else EXIT_INVALID
    else:
        raise MalformedInputError("unrecognised input record")
    _emit(args, {"kind": kind, **rep.to_dict()})
    return EXIT_OK if rep else EXIT_INVALID


def cmd_base_graph(args) -> int:
    fs = load_fs(args.fs)
    g = G.base_graph_direct_product(fs, args.cap)
    _emit(args, g.to_dict(), g.to_dot(fs))
    return EXIT_OK


def cmd_trace(args) -> int:
    fs = load_fs(args.fs)
    u = reduce(fs, load_word(args.word))
    if not u:
        raise UsageError("word is empty after reduction")
    core, _ = cyclic_reduce(fs, u)
    g = _graph_or_base(args, fs)
    if args.vertex is not None:
        reports = [G.trace_u_cycle(fs, g, core, args.vertex)]
    else:
        total = G.word_perm(fs, g, core)
        seen, reports = set(), []
        for v in range(g.vertex_count):
            if v in seen:
                continue
            rep = G.trace_u_cycle(fs, g, core, v)
            reports.append(rep)
            w = v
            for _ in range(rep.length):
                seen.add(w)
                w = int(total[w])
    _emit(args, {"cycles": [r.to_dict() for r in reports]})
    return EXIT_OK


def cmd_surgery(args) -> int:
    if args.kind == "glue":
        if args.n is None:
            raise UsageError("glue needs --n")
        A, B = load_group(args.A), load_group(args.B)
        res = glue_cayley_copies(A, B, args.a, args.b, args.n)
        _emit(args, {"candidate": res.candidate, "attempts": res.attempts, "graph": res.graph.to_dict()},
              res.graph.to_dot(res.fs))
        return EXIT_OK
    fs = load_fs(args.fs)
    if args.kind == "cut-shift" and not args.graph:
        if args.word is None:
            raise UsageError("cut-shift needs --word")
        found = find_cut_shift_base(fs, load_word(args.word))
        if found is None:
            raise PreconditionError("no base quotient without 1-near vertices found")
        g = found[0]
    else:
        g = _graph_or_base(args, fs)
    if args.kind == "layered":
        if args.t is None or args.marks is None:
            raise UsageError("layered needs --t and --marks")
        out = layered_surgery(fs, g, SurgerySpec(args.t, parse_marks(args.marks)))
        payload = out.to_dict()
    elif args.kind == "proper-step":
        u, _ = cyclic_reduce(fs, reduce(fs, load_word(args.word)))
        res = make_proper_step(fs, g, u)
        out = res.graph
        payload = {
            "graph": out.to_dict(),
            "site": list(res.site),
            "marks": [list(m) for m in res.marks],
            "length": res.length,
            "notes": [str(x) for x in res.notes],
        }
    else:  # cut-shift
        if args.word is None or args.n is None:
            raise UsageError("cut-shift needs --word and --n")
        w = cut_shift_witness(fs, g, load_word(args.word), args.vertex or 0, args.n)
        out = w.graph
        payload = {"graph": out.to_dict(), "transcript": w.transcript}
    _emit(args, payload, out.to_dot(fs))
    return EXIT_OK


def cmd_witness(args) -> int:
    if args.n is None:
        raise UsageError("witness needs --n")
    if args.kind == "uab":
        w = uab_potency_witness(load_group(args.A), load_group(args.B), args.a, args.b, args.n)
    else:
        fs = load_fs(args.fs)
        u = load_word(args.word)
        if args.kind == "quasi":
            base = load_graph(args.graph) if args.graph else None
            w = quasipotency_witness(fs, u, args.n, base, args.cap)
        else:
            w = hpotency_witness(fs, u, args.n, args.cap)
    _emit(args, w.to_dict(), w.graph.to_dot(w.fs))
    return EXIT_OK


def cmd_verify(args) -> int:
    ok, msg = verify_witness_dict(_read_json(args.path))
    _emit(args, {"ok": ok, "message": msg})
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_export_dot(args) -> int:
    fs = load_fs(args.fs) if args.fs else None
    text = load_graph(args.graph).to_dot(fs)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="potency", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fs=True):
        if fs:
            sp.add_argument("--fs", help="factor system JSON or e.g. cyclic:2,cyclic:3")
        sp.add_argument("--cap", type=_positive, default=DEFAULT_ORDER_CAP)
        sp.add_argument("--out")

    sp = sub.add_parser("validate", help="validate a group, factor system, graph or witness")
    sp.add_argument("path")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("base-graph", help="Cayley graph of the direct product of the factors")
    common(sp)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_base_graph)

    sp = sub.add_parser("trace", help="u-cycles with crossing counts")
    common(sp)
    sp.add_argument("--graph")
    sp.add_argument("--word", required=True)
    sp.add_argument("--vertex", type=int)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("surgery", help="graph surgeries")
    sp.add_argument("kind", choices=["layered", "proper-step", "cut-shift", "glue"])
    common(sp)
    sp.add_argument("--graph")
    sp.add_argument("--word")
    sp.add_argument("--vertex", type=int)
    sp.add_argument("--t", type=_positive)
    sp.add_argument("--marks")
    sp.add_argument("--n", type=_positive)
    sp.add_argument("--A")
    sp.add_argument("--B")
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=1)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_surgery)

    sp = sub.add_parser("witness", help="certified permutation quotient")
    sp.add_argument("kind", choices=["quasi", "hpotent", "uab"])
    common(sp)
    sp.add_argument("--graph", help="base graph (required with an amalgam)")
    sp.add_argument("--word")
    sp.add_argument("--n", type=_positive)
    sp.add_argument("--A")
    sp.add_argument("--B")
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=1)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("verify", help="re-check a witness JSON")
    sp.add_argument("path")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export-dot", help="graph JSON to Graphviz")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--fs")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_dot)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("witness", "surgery") and args.kind in ("quasi", "hpotent", "layered", "proper-step", "cut-shift"):
            if not args.fs:
                raise UsageError(f"{args.kind} needs --fs")
        if getattr(args, "kind", None) in ("uab", "glue") and not (args.A and args.B):
            raise UsageError(f"{args.kind} needs --A and --B")
        if getattr(args, "kind", None) in ("quasi", "hpotent", "proper-step") and not args.word:
            raise UsageError(f"{args.kind} needs --word")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, json.JSONDecodeError, MalformedInputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PreconditionError, CapExceededError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        if exc.transcript:
            print(json.dumps(exc.transcript, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
