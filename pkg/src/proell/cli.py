"""Command-line front end.

Exit codes: 0 success (unipotent / consistent), 1 bad input, 2 non-unipotent,
3 hypothesis unmet or equivariance failure, 4 a proven cap or inclusion
was violated (a bug).
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import itertools
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

from . import linalg
from .eigenlift import (
    CapViolation,
    HypothesisUnmet,
    check_semisimple,
    integral_period,
    lift_eigenvector,
    sweep_periods,
)
from .filtration import check_w_iadic_inclusions, convergence_report
from .galois import Endomorphism, sigma_cyclotomic, sigma_ihara
from .ncseries import Alphabet, GroupWord, NcSeries, Word, magnus_embed
from .padics import DEFAULT_PRECISION, PadicScalar, working_precision
from .reps import (
    MatrixRep,
    bound_N,
    certify_pipeline,
    evaluate_series,
    is_trivial_mod,
    is_unipotent,
    triviality_level,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NON_UNIPOTENT = 2
EXIT_HYPOTHESIS = 3
EXIT_VIOLATION = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is taken by "non-unipotent"
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    ell: int
    precision: int
    seed: int
    fmt: str | None


# -- parsing helpers -------------------------------------------------------


def parse_weights(text: str) -> tuple[int, ...]:
    try:
        ws = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad weight list {text!r}") from exc
    if not ws or any(w not in (1, 2) for w in ws):
        raise UsageError("weights must be a comma list of 1s and 2s")
    return ws


def make_alphabet(rank: int | None, weights: str | None) -> Alphabet:
    if weights:
        ws = parse_weights(weights)
        names = tuple(f"x{i + 1}" for i in range(len(ws)))
        return Alphabet(names, ws)
    return Alphabet.punctured(rank or 1)


def _letter(alphabet: Alphabet, name: str) -> int:
    if name in alphabet.names:
        return alphabet.names.index(name)
    try:
        i = int(name)
    except ValueError as exc:
        raise UsageError(f"unknown letter {name!r}") from exc
    if not 0 <= i < alphabet.rank:
        raise UsageError(f"letter index {i} out of range")
    return i


def parse_group_word(alphabet: Alphabet, text: str) -> GroupWord:
    """``"c1^4 c2^-1"``; letters by name or 0-based index."""
    letters = []
    for tok in text.replace("*", " ").split():
        name, _, exp = tok.partition("^")
        letters.append((_letter(alphabet, name), int(exp) if exp else 1))
    return GroupWord.parse(alphabet, letters)


def parse_word(alphabet: Alphabet, text: str) -> Word:
    """Monomial ``T_{i1} ... T_{ik}`` written as letters separated by spaces."""
    return tuple(_letter(alphabet, t) for t in text.replace("*", " ").split())


def parse_action(spec: str, alphabet: Alphabet, ell: int, truncation: int, seed: int) -> Endomorphism:
    """``cyclotomic:q``, ``ihara:q:<words;...>``, ``ihara:q:random`` or a JSON file."""
    if spec.startswith("cyclotomic:"):
        return sigma_cyclotomic(int(spec.split(":", 1)[1]), alphabet, ell, truncation)
    if spec.startswith("ihara:"):
        parts = spec.split(":", 2)
        q = int(parts[1])
        if len(parts) < 3 or parts[2] == "random":
            conj = random_conjugators(alphabet, random.Random(seed))
        else:
            chunks = parts[2].split(";")
            if len(chunks) != alphabet.rank:
                raise UsageError("give one conjugator per generator, separated by ';'")
            conj = [parse_group_word(alphabet, c) for c in chunks]
        return sigma_ihara(q, conj, alphabet, ell, truncation)
    try:
        with open(spec) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read action {spec!r}: {exc}") from exc
    return Endomorphism.from_json(data, truncation)


def random_conjugators(alphabet: Alphabet, rng: random.Random, length: int = 3) -> list[GroupWord]:
    out = []
    for _ in range(alphabet.rank):
        letters = [(rng.randrange(alphabet.rank), rng.choice([-2, -1, 1, 2])) for _ in range(rng.randint(1, length))]
        out.append(GroupWord.parse(alphabet, letters))
    return out


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path!r}: {exc}") from exc


def load_rep(path: str) -> MatrixRep:
    data = load_json(path)
    if isinstance(data.get("alphabet"), list) and all(isinstance(x, str) for x in data["alphabet"]):
        # bare name lists are weight-2 letters, as for punctured lines
        data = dict(data, alphabet={"names": data["alphabet"], "weights": [2] * len(data["alphabet"])})
    return MatrixRep.from_json(data)


# -- output ----------------------------------------------------------------


def _plain(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return "inf" if x == float("inf") else x
    if isinstance(x, PadicScalar):
        return str(x.rational_guess())
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def emit(data: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    data = _plain(data)
    if fmt == "json":
        out.write(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k in sorted(data):
            v = data[k]
            w.writerow([k, json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v])
    else:
        for k in sorted(data):
            v = data[k]
            out.write(f"{k}: {json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}\n")


def matrix_strings(m) -> list[list[str]]:
    return [[str(x.rational_guess()) for x in row] for row in m]


# -- commands --------------------------------------------------------------


def cmd_bound(args, cfg: RunConfig) -> int:
    try:
        spec = bound_N(cfg.ell, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    emit(spec.to_json(), cfg.fmt or "json")
    return EXIT_OK


PERIOD_HEADER = ["i", "m", "b", "v_bound", "c_bound"]


@functools.lru_cache(maxsize=4)
def _period_action(q: int, rank: int, ell: int, m_max: int) -> Endomorphism:
    alphabet = Alphabet.punctured(rank)
    return sigma_cyclotomic(q, alphabet, ell, (m_max - 1) // 2 + 1)


def _period_row(job: tuple[int, int, int, int, int, int, int]) -> list:
    q, rank, ell, prec, m_max, i, m = job
    with working_precision(prec):
        return integral_period(_period_action(q, rank, ell, m_max), i, m).row()


def cmd_sweep_periods(args, cfg: RunConfig) -> int:
    fmt = cfg.fmt or "csv"
    i_max = args.n_max - 1 if args.i_max is None else args.i_max
    alphabet = Alphabet.punctured(args.rank)
    e = sigma_cyclotomic(args.q, alphabet, cfg.ell, (args.n_max - 1) // 2 + 1)
    if args.jobs and args.jobs > 1:
        jobs = [
            (args.q, args.rank, cfg.ell, cfg.precision, args.n_max, i, m)
            for i in range(i_max + 1)
            for m in range(i + 1, args.n_max + 1)
        ]
        pool = ProcessPoolExecutor(max_workers=args.jobs)
        rows: Iterable[list] = pool.map(_period_row, jobs)
    else:
        pool = None
        rows = (rec.row() for rec in sweep_periods(e, i_max, args.n_max))
    try:
        if fmt == "csv":
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(PERIOD_HEADER)
            for row in rows:
                w.writerow(row)
                sys.stdout.flush()
        else:
            table = [dict(zip(PERIOD_HEADER, row)) for row in rows]
            emit({"q": args.q, "rank": args.rank, "ell": cfg.ell, "periods": table}, fmt)
    finally:
        if pool is not None:
            pool.shutdown()
    return EXIT_OK


def _action_from_args(args, cfg: RunConfig, alphabet: Alphabet) -> Endomorphism:
    return parse_action(args.action, alphabet, cfg.ell, args.truncation, cfg.seed)


def cmd_lift(args, cfg: RunConfig) -> int:
    alphabet = make_alphabet(args.rank, args.weights)
    e = _action_from_args(args, cfg, alphabet)
    seed = parse_word(alphabet, args.seed_word)
    lf = lift_eigenvector(e, seed, args.truncation)
    out = lf.to_json()
    out["display"] = repr(lf.lift)
    if args.r is not None:
        out["convergence"] = convergence_report(lf.lift, args.r).to_json()
    emit(out, cfg.fmt or "json")
    return EXIT_OK


def cmd_semisimple(args, cfg: RunConfig) -> int:
    alphabet = make_alphabet(args.rank, args.weights)
    e = _action_from_args(args, cfg, alphabet)
    rep = check_semisimple(e, args.truncation)
    emit(rep.to_json(), cfg.fmt or "json")
    return EXIT_OK if rep.diagonalizable else EXIT_VIOLATION


def _diagonal_targets(q: int, dim: int) -> list[list[list[int]]]:
    entries = [q**j for j in range(dim + 1)]
    out = []
    for diag in itertools.product(entries, repeat=dim):
        out.append([[diag[i] if i == j else 0 for j in range(dim)] for i in range(dim)])
    return out


def _certify(args, cfg: RunConfig, rep: MatrixRep) -> tuple[int, dict]:
    e = parse_action(args.action, rep.alphabet, rep.prime, args.truncation, cfg.seed)
    if args.target:
        targets = [load_json(args.target)]
    elif isinstance(e.q, int):
        targets = _diagonal_targets(e.q, rep.dim)
    else:
        raise UsageError("give --target for actions without an integer q")
    report = None
    for t in targets:
        report = certify_pipeline(rep, e, t, args.N)
        if report.equivariant:
            break
    out = report.to_json()
    out["targets_tried"] = len(targets)
    if not report.equivariant:
        out["message"] = "not arithmetic-compatible with supplied action"
        return EXIT_HYPOTHESIS, out
    code = EXIT_OK if report.status == "unipotent" else EXIT_NON_UNIPOTENT
    return code, out


def cmd_check_rep(args, cfg: RunConfig) -> int:
    rep = load_rep(args.rep)
    trivial = is_trivial_mod(rep, args.N)
    unip, cert = is_unipotent(rep)
    out: dict[str, Any] = {
        "prime": rep.prime,
        "dim": rep.dim,
        "N": args.N,
        "trivial_mod_N": trivial,
        "triviality_level": triviality_level(rep),
        "unipotent": unip,
        "certificate": cert.to_json(),
    }
    code = EXIT_OK if unip else EXIT_NON_UNIPOTENT
    if args.action:
        try:
            code, out["certify"] = _certify(args, cfg, rep)
        except HypothesisUnmet as exc:
            out["certify"] = {"status": "hypothesis-unmet", "message": str(exc)}
            code = EXIT_HYPOTHESIS
    emit(out, cfg.fmt or "json")
    return code


def cmd_certify(args, cfg: RunConfig) -> int:
    rep = load_rep(args.rep)
    try:
        code, out = _certify(args, cfg, rep)
    except HypothesisUnmet as exc:
        out, code = {"status": "hypothesis-unmet", "message": str(exc)}, EXIT_HYPOTHESIS
    emit(out, cfg.fmt or "json")
    return code


def cmd_eval_series(args, cfg: RunConfig) -> int:
    rep = load_rep(args.rep)
    if args.series:
        a = NcSeries.from_json(load_json(args.series))
        direct = None
    elif args.word:
        w = parse_group_word(rep.alphabet, args.word)
        a = magnus_embed(w, args.truncation, rep.prime)
        direct = rep.evaluate_word(w)
    else:
        raise UsageError("give --series or --word")
    try:
        ev = evaluate_series(rep, a, args.r)
    except HypothesisUnmet as exc:
        emit({"status": "hypothesis-unmet", "message": str(exc)}, cfg.fmt or "json")
        return EXIT_HYPOTHESIS
    out = {
        "matrix": matrix_strings(ev.matrix),
        "tail_exponent": ev.tail_exponent,
        "gauss_exponent": ev.gauss_exponent,
        "valuation": ev.valuation,
        "triviality_level": ev.m,
        "r": ev.r,
    }
    if direct is not None:
        out["direct"] = matrix_strings(direct)
        out["difference_valuation"] = linalg.matrix_valuation(linalg.matsub(ev.matrix, direct))
    emit(out, cfg.fmt or "json")
    return EXIT_OK


def cmd_w_check(args, cfg: RunConfig) -> int:
    alphabet = make_alphabet(args.rank, args.weights)
    res = check_w_iadic_inclusions(alphabet, args.n, args.max_degree)
    out = {
        "ok": res.ok,
        "n": res.n,
        "max_degree": res.max_degree,
        "checked": res.checked,
        "weights": list(alphabet.weights),
        "witness": None if res.witness is None else list(res.witness),
        "failed": res.failed,
    }
    emit(out, cfg.fmt or "json")
    return EXIT_OK if res.ok else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, suppress: bool) -> None:
        # subcommands accept the same flags; SUPPRESS keeps them from
        # overwriting values given before the subcommand name
        def d(x):
            return argparse.SUPPRESS if suppress else x

        parser.add_argument("--ell", type=int, default=d(3), help="the prime (default 3)")
        parser.add_argument("--precision", type=int, default=d(DEFAULT_PRECISION), help="absolute ell-adic precision")
        parser.add_argument("--seed", type=int, default=d(0), help="RNG seed for random fixtures (default 0)")
        parser.add_argument("--format", choices=["json", "csv", "text"], default=d(None), dest="fmt")

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, True)
    p = _Parser(
        prog="proell",
        description="Weight filtrations, eigenvector lifts and unipotence checks for free pro-ell groups.",
    )
    global_flags(p, False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", parents=[common], help="least N for the punctured line")
    b.add_argument("--q", type=int, required=True)
    b.set_defaults(func=cmd_bound)

    for name in ("sweep-periods", "periods"):
        s = sub.add_parser(name, parents=[common], help="integral period table (CSV)")
        s.add_argument("--q", type=int, required=True)
        s.add_argument("--rank", type=int, default=1)
        s.add_argument("--n-max", type=int, default=8, help="largest level m")
        s.add_argument("--i-max", type=int, default=None)
        s.add_argument("--jobs", type=int, default=1)
        s.set_defaults(func=cmd_sweep_periods)

    def action_args(sp, default_trunc: int) -> None:
        sp.add_argument("--rank", type=int, default=1)
        sp.add_argument("--weights", default=None, help="comma list of letter weights, e.g. 1,1,2")
        sp.add_argument("--action", default="cyclotomic:4", help="cyclotomic:q, ihara:q[:words|random] or a JSON file")
        sp.add_argument("--truncation", type=int, default=default_trunc)

    lf = sub.add_parser("lift", parents=[common], help="lift a graded class to an eigenvector")
    action_args(lf, 6)
    lf.add_argument("--seed-word", required=True, help="monomial, e.g. 'c1 c2'")
    lf.add_argument("--r", type=Fraction, default=None, help="attach a convergence report at radius r")
    lf.set_defaults(func=cmd_lift)

    ss = sub.add_parser("semisimple", parents=[common], help="diagonalizability of the action")
    action_args(ss, 4)
    ss.set_defaults(func=cmd_semisimple)

    def rep_args(sp) -> None:
        sp.add_argument("--rep", required=True, help="rep JSON {alphabet, dim, images, prime}")
        sp.add_argument("--N", type=int, default=1)
        sp.add_argument("--target", default=None, help="JSON integer matrix M")
        sp.add_argument("--truncation", type=int, default=6)

    cr = sub.add_parser("check-rep", parents=[common], help="triviality and unipotence of a rep")
    rep_args(cr)
    cr.add_argument("--action", default=None)
    cr.set_defaults(func=cmd_check_rep)

    ce = sub.add_parser("certify", parents=[common], help="run the certification pipeline")
    rep_args(ce)
    ce.add_argument("--action", required=True)
    ce.set_defaults(func=cmd_certify)

    ev = sub.add_parser("eval-series", parents=[common], help="evaluate a series under a rep")
    ev.add_argument("--rep", required=True)
    ev.add_argument("--series", default=None, help="series JSON")
    ev.add_argument("--word", default=None, help="group word, e.g. 'c1 c2^-1'")
    ev.add_argument("--truncation", type=int, default=6)
    ev.add_argument("--r", type=Fraction, default=Fraction(1))
    ev.set_defaults(func=cmd_eval_series)

    wc = sub.add_parser("w-check", parents=[common], help="check I^n in W^-n and W^-(2n+1) in I^n")
    wc.add_argument("--rank", type=int, default=2)
    wc.add_argument("--weights", default=None)
    wc.add_argument("--n", type=int, required=True)
    wc.add_argument("--max-degree", type=int, default=None)
    wc.set_defaults(func=cmd_w_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(args.command, args.ell, args.precision, args.seed, args.fmt)
    try:
        with working_precision(cfg.precision):
            return args.func(args, cfg)
    except (CapViolation, AssertionError) as exc:
        print(f"proell: invariant violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except HypothesisUnmet as exc:
        print(f"proell: hypothesis unmet: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (UsageError, ValueError, ArithmeticError) as exc:
        print(f"proell: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run(argv: list[str]) -> tuple[int, str, str]:
    """Run in-process, capturing stdout and stderr (for tests)."""
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else EXIT_INPUT
    finally:
        sys.stdout, sys.stderr = old
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
