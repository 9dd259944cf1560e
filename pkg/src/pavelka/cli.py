"""Command-line front end.

Exit codes: 0 positive result, 1 negative result, 2 budget or fuel
exhausted, 3 input error.  ``--json`` switches to one JSON record per
line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .clbridge import CLTheory, reduce, translate_formula
from .domains import format_interval
from .errors import (
    BudgetExhausted, FlagViolation, InconsistentStream, InvalidStep, OracleContradiction,
)
from .henkin import SemanticOracle, as_existential, build_model, classical_extract, extend, model_degree
from .kernel.proof import check_proof, parse_proof, print_proof
from .kernel.theory import TheoryHandle
from .parser import (
    ParseError, TheoryFile, format_rational, parse_formula, parse_rational, parse_theory,
    print_theory, read_one, to_sexpr,
)
from .search import (
    SearchBudget, compare_degrees, decide_complete, degree_stream, enumerate_theorems, prove,
)
from .search.saturate import ENV_BUDGET
from .semantics import check_moduli, models, parse_structure, print_structure, sentence_value
from .syntax import SignatureError, constants_of, elaborate

OK, NEGATIVE, EXHAUSTED, INPUT_ERROR = 0, 1, 2, 3
DEFAULT_STREAM_STEPS = 4096


class InputError(Exception):
    pass


class Out:
    def __init__(self, as_json: bool, stream=None):
        self.as_json = as_json
        self.stream = stream or sys.stdout

    def emit(self, text: str, **record):
        if self.as_json:
            self.stream.write(json.dumps(record, sort_keys=True) + "\n")
        else:
            self.stream.write(text + "\n")
        self.stream.flush()

    def proof(self, p):
        if self.as_json:
            self.emit("", kind="certificate", proof=print_proof(p))
        else:
            self.stream.write(print_proof(p))


# ------------------------------------------------------------- inputs

def _read(path):
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def _theory_file(path) -> TheoryFile:
    try:
        return parse_theory(_read(path))
    except ParseError as e:
        raise InputError(f"{path}:{e}") from None


def _theory(path) -> TheoryHandle:
    return TheoryHandle.from_file(_theory_file(path))


def _structure(path):
    try:
        return parse_structure(_read(path))
    except ParseError as e:
        raise InputError(f"{path}:{e}") from None


def _require_interpreted(M, tf, where):
    have = M.signature()
    sig = tf.signature
    missing = [r for r, k in sig.relations.items() if have.relations.get(r) != k]
    missing += [f for f, k in sig.functions.items() if have.functions.get(f) != k]
    missing += [c for a in tf.axioms for c in sorted(constants_of(a)) if c not in M.consts]
    if missing:
        raise InputError(f"{where}: structure does not interpret {sorted(set(missing))}")


def _formula(text, sig):
    try:
        return elaborate(parse_formula(text, sig))
    except (ParseError, SignatureError) as e:
        raise InputError(f"formula: {e}") from None


def _rational(text):
    try:
        return parse_rational(read_one(text))
    except (ParseError, ValueError, ZeroDivisionError):
        raise InputError(f"bad rational {text!r}") from None


def _budget_value(args):
    if args.budget is not None:
        return args.budget
    raw = os.environ.get(ENV_BUDGET)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise InputError(f"{ENV_BUDGET} must be an integer") from None
    return None


def _search_budget(args):
    n = _budget_value(args)
    if n is None:
        return None
    if n <= 0:
        raise InputError("budget must be positive")
    return SearchBudget(max_steps=args.max_steps, max_candidates=n, ticks=n)


# ----------------------------------------------------------- commands

def cmd_parse(args, out):
    text = _read(args.file)
    try:
        head = read_one(text)
        kind = str(head[0]) if isinstance(head, list) and head else ""
        if kind == "theory":
            out.emit(print_theory(parse_theory(text)).rstrip(), kind="theory", ok=True)
        elif kind == "structure":
            out.emit(print_structure(parse_structure(text)).rstrip(), kind="structure", ok=True)
        elif kind == "proof":
            out.emit(print_proof(parse_proof(text)).rstrip(), kind="proof", ok=True)
        else:
            raise InputError(f"{args.file}: expected theory, structure or proof")
    except ParseError as e:
        raise InputError(f"{args.file}:{e}") from None
    return OK


def cmd_check(args, out):
    T = _theory(args.theory)
    try:
        p = parse_proof(_read(args.proof), T.signature)
    except ParseError as e:
        raise InputError(f"{args.proof}:{e}") from None
    try:
        concl = check_proof(p, T)
    except InvalidStep as e:
        out.emit(str(e), kind="invalid", step=e.index, reason=e.reason)
        return INPUT_ERROR
    out.emit(to_sexpr(concl), kind="conclusion", formula=to_sexpr(concl), steps=len(p))
    return OK


def cmd_prove(args, out):
    T = _theory(args.theory)
    phi = _formula(args.formula, T.signature)
    p = prove(T, phi, _search_budget(args))
    if p is None:
        out.emit("exhausted", kind="verdict", answer="exhausted")
        return EXHAUSTED
    out.emit("proved", kind="verdict", answer="proved", steps=len(p))
    if args.certificate:
        out.proof(p)
    return OK


def _stream_lines(out, st, width, steps, certificate, exhaust=False):
    """Print each tightening; ``exhaust`` keeps pulling after the target width."""
    last = None
    reached = False
    for _ in range(steps):
        try:
            ev = st.next_event()
        except StopIteration:
            break
        iv = ev.interval
        if last is None or iv != last:
            out.emit(format_interval(iv), kind="interval", lo=format_rational(iv.lo),
                     hi=format_rational(iv.hi))
            if certificate and ev.certificate:
                for p in ev.certificate:
                    out.proof(p)
        last = iv
        if iv.width <= width:
            reached = True
            if not exhaust:
                return OK
    return OK if reached else EXHAUSTED


def cmd_degree(args, out):
    T = _theory(args.theory)
    phi = _formula(args.formula, T.signature)
    width = _rational(args.precision)
    if width <= 0:
        raise InputError("precision must be positive")
    steps = _budget_value(args) or DEFAULT_STREAM_STEPS
    st = degree_stream(T, phi, erratum=args.erratum)
    try:
        return _stream_lines(out, st, width, steps, args.certificate, exhaust=args.erratum)
    except InconsistentStream as e:
        out.emit(f"inconsistent-stream {e}", kind="error", error="inconsistent-stream",
                 message=str(e))
        return NEGATIVE


def cmd_compare(args, out):
    T = _theory(args.theory)
    phi, psi = _formula(args.phi, T.signature), _formula(args.psi, T.signature)
    v = compare_degrees(T, phi, psi, _search_budget(args))
    out.emit(v.answer, kind="verdict", answer=v.answer)
    if v.proof is not None and args.certificate:
        out.proof(v.proof)
    return EXHAUSTED if v.answer == "exhausted" else OK


def cmd_decide(args, out):
    T = _theory(args.theory)
    phi = _formula(args.formula, T.signature)
    try:
        v = decide_complete(T, phi, _search_budget(args))
    except FlagViolation as e:
        out.emit(f"flag-violation {e}", kind="error", error="flag-violation", message=str(e))
        return INPUT_ERROR
    out.emit(v.answer, kind="verdict", answer=v.answer)
    if v.proof is not None and args.certificate:
        out.proof(v.proof)
    return {"true": OK, "false": NEGATIVE}.get(v.answer, EXHAUSTED)


def cmd_eval(args, out):
    M = _structure(args.structure)
    phi = _formula(args.formula, M.signature())
    v = sentence_value(M, phi)
    out.emit(format_rational(v), kind="value", value=format_rational(v))
    return OK


def cmd_models(args, out):
    M = _structure(args.structure)
    tf = _theory_file(args.theory)
    _require_interpreted(M, tf, args.structure)
    res = models(M, tf.axioms)
    if res.ok:
        out.emit("yes", kind="verdict", answer="yes")
        return OK
    worst = to_sexpr(res.worst_axiom)
    out.emit(f"no {format_rational(res.falsity)} {worst}", kind="verdict", answer="no",
             falsity=format_rational(res.falsity), axiom=worst)
    return NEGATIVE


def cmd_check_moduli(args, out):
    M = _structure(args.structure)
    tf = _theory_file(args.theory)
    res = check_moduli(M, tf.moduli)
    if res.ok:
        out.emit("yes", kind="verdict", answer="yes")
        return OK
    fr = format_rational
    at = " ".join("(" + " ".join(a) + ")" for a in res.args)
    out.emit(f"no {res.symbol} i={res.position} eps={fr(res.eps)} q={fr(res.q)} r={fr(res.r)} at {at}",
             kind="verdict", answer="no", symbol=res.symbol, position=res.position,
             eps=fr(res.eps), q=fr(res.q), r=fr(res.r), args=[list(a) for a in res.args])
    return NEGATIVE


def cmd_henkin(args, out):
    tf = _theory_file(args.theory)
    T = TheoryHandle.from_file(tf)
    kind, _, where = args.oracle.partition(":")
    if kind != "model" or not where:
        raise InputError("--oracle must be model:PATH")
    oracle = SemanticOracle(_structure(where))
    seeds = [_formula(s, T.signature.with_fresh()) for s in args.seed_sentence]
    # existential axioms go first so that they get witnesses early
    seeds += [a for a in T.axioms if as_existential(a) is not None and a not in seeds]
    try:
        T2, trace = extend(T, oracle, args.steps, seeds=seeds, audit=_search_budget(args))
    except OracleContradiction as e:
        out.emit(f"oracle-contradiction {e}", kind="error", error="oracle-contradiction")
        return NEGATIVE
    new = T2.axioms[len(T.axioms):]
    tf2 = TheoryFile(f"{tf.name}_star", T2.signature, list(T2.axioms), set(T2.flags),
                     dict(tf.moduli), tf.congruence)
    notes = {}
    for s in trace.steps:
        if s.added is not None and s.added in new:
            notes.setdefault(T2.axioms.index(s.added), f"{s.action} at step {s.n}")
    text = print_theory(tf2, notes)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.stream.write(text)
    if args.trace:
        with open(args.trace, "w") as fh:
            for s in trace.steps:
                rec = {"n": s.n, "action": s.action, "phi": to_sexpr(s.phi), "psi": to_sexpr(s.psi)}
                if s.added is not None:
                    rec["added"] = to_sexpr(s.added)
                if s.fresh:
                    rec["fresh"] = list(s.fresh)
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    out.emit(f"added {len(new)} fresh {' '.join(trace.fresh_constants()) or '-'}",
             kind="summary", added=len(new), fresh=list(trace.fresh_constants()),
             provenance=trace.provenance)
    return OK


def _model_from(path, check_flags=True):
    T = _theory(path)
    try:
        return build_model(T, check_flags=check_flags)
    except (FlagViolation, ValueError) as e:
        raise InputError(str(e)) from None


def cmd_build(args, out):
    M = _model_from(args.theory, check_flags=not args.no_flag_check)
    manifest = {"theory": os.path.abspath(args.theory), "universe": list(M.universe),
                "check_flags": not args.no_flag_check}
    if args.out:
        Path(args.out).write_text(json.dumps(manifest, indent=1) + "\n")
    out.emit("universe " + " ".join(M.universe), kind="model", universe=list(M.universe))
    return OK


def cmd_query(args, out):
    try:
        manifest = json.loads(_read(args.model))
        M = _model_from(manifest["theory"], manifest.get("check_flags", True))
    except (ValueError, KeyError) as e:
        raise InputError(f"{args.model}: not a model manifest ({e})") from None
    width = _rational(args.precision)
    steps = _budget_value(args) or DEFAULT_STREAM_STEPS
    worst = OK
    for line in sys.stdin:
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        phi = _formula(line, M.theory.signature)
        code = _stream_lines(out, model_degree(M, phi), width, steps, False)
        out.emit(".", kind="end", sentence=to_sexpr(phi), exhausted=code == EXHAUSTED)
        worst = max(worst, code)
    return worst


def cmd_extract(args, out):
    M = _model_from(args.theory, check_flags=False)
    phi = _formula(args.formula, M.theory.signature)
    try:
        v = classical_extract(M, phi, fuel=args.fuel)
    except FlagViolation as e:
        raise InputError(str(e)) from None
    except BudgetExhausted:
        out.emit("exhausted", kind="verdict", answer="exhausted")
        return EXHAUSTED
    out.emit("true" if v else "false", kind="verdict", answer=v)
    return OK if v else NEGATIVE


def cmd_reduce_cl(args, out):
    tf = _theory_file(args.theory)
    try:
        T = CLTheory.from_file(tf)
    except ValueError as e:
        raise InputError(str(e)) from None
    H = reduce(T)
    finite, _ = H._pack_streams()
    axioms = [translate_formula(a) for a in T.axioms] + list(finite)
    comments = {}
    for sym, i, eps, q, r, f in H.ul_instances_with_eps(args.max_den):
        comments[len(axioms)] = (f"UL {sym} i={i} eps={format_rational(eps)} "
                                 f"q={format_rational(q)} r={format_rational(r)}")
        axioms.append(f)
    tf2 = TheoryFile(f"{tf.name}_rpl", tf.signature, axioms, set(tf.flags), dict(tf.moduli),
                     tf.congruence)
    out.stream.write(print_theory(tf2, comments))
    return OK


def cmd_enum(args, out):
    T = _theory(args.theory)
    n = _budget_value(args) or 50
    b = SearchBudget(max_steps=args.max_steps, max_candidates=n)
    for ev in enumerate_theorems(T, b):
        out.emit(f"{ev.ordinal} {to_sexpr(ev.formula)}", kind="theorem", ordinal=ev.ordinal,
                 formula=to_sexpr(ev.formula), steps=len(ev.proof))
        if args.certificate:
            out.proof(ev.proof)
    return OK


# ------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not "budget exhausted"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pavelka", description="Rational Pavelka logic workbench")
    ap.add_argument("--json", action="store_true", help="one JSON record per line")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, budget=True, cert=False):
        if budget:
            p.add_argument("--budget", type=int, default=None,
                           help=f"work budget (overrides ${ENV_BUDGET})")
            p.add_argument("--max-steps", type=int, default=8, help="proof length bound")
        if cert:
            p.add_argument("--certificate", action="store_true", help="print checked proofs")
        p.add_argument("--seed", type=int, default=0, help="accepted for reproducibility")

    p = sub.add_parser("parse", help="parse and pretty-print a .thy/.str/.prf file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("check", help="check a proof against a theory")
    p.add_argument("theory")
    p.add_argument("proof")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("prove", help="search for a proof")
    p.add_argument("theory")
    p.add_argument("formula")
    common(p, cert=True)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("degree", help="stream the provability degree")
    p.add_argument("theory")
    p.add_argument("formula")
    p.add_argument("--precision", default="1/64")
    p.add_argument("--erratum", action="store_true", help="use the transposed update rule")
    common(p, cert=True)
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("compare", help="compare two provability degrees")
    p.add_argument("theory")
    p.add_argument("phi")
    p.add_argument("psi")
    common(p, cert=True)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("decide", help="decide a sentence in a complete theory")
    p.add_argument("theory")
    p.add_argument("formula")
    common(p, cert=True)
    p.set_defaults(fn=cmd_decide)

    p = sub.add_parser("eval", help="falsity of a sentence in a finite structure")
    p.add_argument("structure")
    p.add_argument("formula")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("models", help="does a structure satisfy a theory")
    p.add_argument("structure")
    p.add_argument("theory")
    p.set_defaults(fn=cmd_models)

    p = sub.add_parser("check-moduli", help="check declared moduli on a structure")
    p.add_argument("structure")
    p.add_argument("theory")
    p.set_defaults(fn=cmd_check_moduli)

    p = sub.add_parser("henkin", help="oracle-driven Henkin extension")
    p.add_argument("theory")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--oracle", required=True, help="model:PATH")
    p.add_argument("--seed-sentence", action="append", default=[],
                   help="sentence placed first in the enumeration (repeatable)")
    p.add_argument("--out", help="write the extended theory here")
    p.add_argument("--trace", help="write the trace log (JSON lines) here")
    common(p)
    p.set_defaults(fn=cmd_henkin)

    p = sub.add_parser("build", help="build a term model and write a manifest")
    p.add_argument("theory")
    p.add_argument("--out", help="manifest path")
    p.add_argument("--no-flag-check", action="store_true")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("query", help="stdin sentences to interval lines")
    p.add_argument("model", help="manifest written by build")
    p.add_argument("--precision", default="1/64")
    common(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("extract", help="classical truth value from a classical theory")
    p.add_argument("theory")
    p.add_argument("formula")
    p.add_argument("--fuel", type=int, default=256)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("reduce-cl", help="translate a continuous-logic theory")
    p.add_argument("theory")
    p.add_argument("--max-den", type=int, default=4)
    p.set_defaults(fn=cmd_reduce_cl)

    p = sub.add_parser("enum-theorems", help="list theorems in enumeration order")
    p.add_argument("theory")
    common(p, cert=True)
    p.set_defaults(fn=cmd_enum)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = Out(args.json)
    try:
        if getattr(args, "max_steps", 1) <= 0:
            raise InputError("--max-steps must be positive")
        return args.fn(args, out)
    except InputError as e:
        msg = str(e)
        if args.json:
            out.emit("", kind="error", error="input", message=msg)
        else:
            print(f"error: {msg}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

