"""Command-line front end: ``mixchar <task> --config job.json``.

Exit codes: 0 success, 1 configuration error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from mixchar.binomial import (
    BinSeries,
    InvariantViolation,
    classify_analyticity,
    lambda_character,
    lambda_series,
    mahler_transform,
)
from mixchar.coeffrings import INF, ActionError, check_automorphism, check_local_analyticity
from mixchar.complexes import UnsupportedPresentation, cohomology
from mixchar.config import (
    ConfigError,
    build_element,
    build_group,
    build_matrices,
    build_ring,
    build_scalar,
    load_config,
    resolve_precision,
)
from mixchar.distributions import DistElem, ModuleError, bch_table, mul_dist
from mixchar.iwasawa import check_action_relations
from mixchar.padic import InsufficientPrecision, PadicInt
from mixchar.selftest import run_selftest

TASKS = ("bch", "mul", "mahler", "classify", "cohomology", "check-action", "lambda")


def _v(x) -> str:
    return "inf" if x == INF else str(x)


def _csv(rows: list) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _key(n) -> str:
    return ",".join(map(str, n))


class Job:
    def __init__(self, cfg: dict, task: str, N=None, D=None, threads: int = 1):
        self.cfg = cfg
        self.task = task
        self.prec = resolve_precision(cfg, N, D)
        self.threads = threads
        self.ring = build_ring(cfg["ring"])
        self.params = cfg.get("params", {})

    def group(self):
        return build_group(self.ring, self.cfg.get("group"), self.prec.N)

    def scalar(self, value):
        return build_scalar(self.ring, value, self.prec.N)

    # each task returns (csv_text, json_obj, exit_code, summary)
    def run(self):
        return getattr(self, "task_" + self.task.replace("-", "_"))()

    def task_bch(self):
        pres = self.group()
        h = self.params.get("h", 0)
        N = self.prec.N if self.prec.explicit_N else None
        table = bch_table(pres, h, self.prec.D, N=N, threads=self.threads)
        fails = table.failures()
        code = 2 if fails else 0
        summary = f"{len(table.entries)} entries, {len(fails)} certificate failures"
        return table.to_csv(), table.to_json(), code, summary

    def task_mul(self):
        pres = self.group()
        N, D = self.prec.N, self.prec.D
        if "x" not in self.params or "y" not in self.params:
            raise ConfigError("mul needs params.x and params.y")
        x = build_element(pres, self.params["x"], N, D)
        y = build_element(pres, self.params["y"], N, D)
        if "h" in self.params:
            h = self.params["h"]
            z = mul_dist(DistElem(x, h), DistElem(y, h)).elem
        else:
            z = x * y
        rows = [["k", "coefficient", "val"]]
        rows += [[_key(k), z.terms[k].to_str(), _v(z.terms[k].val())] for k in z.support()]
        return _csv(rows), z.to_json(), 0, f"{len(z.terms)} terms"

    def _series(self):
        N, D = self.prec.N, self.prec.D
        if "coefficients" in self.params:
            coeffs = {
                tuple(int(a) for a in k.split(",")): self.scalar(v)
                for k, v in self.params["coefficients"].items()
            }
            d = len(next(iter(coeffs))) if coeffs else 1
            return BinSeries(self.ring, d, coeffs, "Bin", 0, D)
        if "t" in self.params:
            return lambda_series(self.ring, self.scalar(self.params["t"]), N, D)
        if "values" in self.params:
            return mahler_transform([self.scalar(v) for v in self.params["values"]])
        raise ConfigError("need params.coefficients, params.t or params.values")

    def task_mahler(self):
        N, D = self.prec.N, self.prec.D
        if "values" in self.params:
            values = [self.scalar(v) for v in self.params["values"]]
        elif "t" in self.params:
            t = self.scalar(self.params["t"])
            values = [lambda_character(self.ring, t, x, N) for x in range(D + 1)]
        else:
            raise ConfigError("mahler needs params.values or params.t")
        s = mahler_transform(values)
        rows = [["n", "coefficient", "val"]]
        rows += [[_key(n), s.coeffs[n].to_str(), _v(s.coeffs[n].val())] for n in sorted(s.coeffs)]
        return _csv(rows), s.to_json(), 0, f"{len(s.coeffs)} nonzero coefficients"

    def task_classify(self):
        s = self._series()
        rep = classify_analyticity(s, self.params.get("h", 0), self.params.get("window", 4))
        rows = [["weight", "margin_upper", "margin_lower"]]
        for (t, mu), (_, ml) in zip(rep.margins_upper, rep.margins_lower):
            rows.append([t, _v(mu), _v(ml)])
        out = rep.as_dict()
        out["summary"] = rep.summary()
        return _csv(rows), out, 0, rep.summary()

    def task_cohomology(self):
        pres = self.group()
        N = self.prec.N
        if "matrices" in self.params:
            mats = build_matrices(self.ring, self.params["matrices"], N)
        else:
            mats = [[[self.ring.one(N)]] for _ in range(pres.d)]
        rep = cohomology(
            pres, mats, N,
            self.params.get("coefficient_algebra", "continuous"),
            self.params.get("h", 0),
            self.params.get("slice_K", 2),
        )
        rows = [["degree", "divisors"]]
        for deg in rep.degrees:
            rows.append([deg["degree"], " ".join(f"{self.ring.p}^{e}" for e in deg["divisors"])])
        code = 0 if rep.euler_ok else 2
        return _csv(rows), rep.as_dict(), code, "H^i " + "; ".join(r[1] or "0" for r in rows[1:])

    def task_check_action(self):
        pres = self.group()
        N = self.prec.N
        act = pres.action
        local = check_local_analyticity(act, N)
        samples = [self.ring.uniformizer(N), self.ring.from_int(1, N) + self.ring.uniformizer(N)]
        mult = check_automorphism(act, [(a, b) for a in samples for b in samples])
        rels = check_action_relations(pres, samples)
        ok = local.passed and mult and rels
        out = {"local_analyticity": local.as_dict(), "multiplicative": mult,
               "relations": rels, "passed": ok}
        rows = [["check", "passed"], ["local_analyticity", local.passed],
                ["multiplicative", mult], ["relations", rels]]
        return _csv(rows), out, 0 if ok else 2, "passed" if ok else "failed"

    def task_lambda(self):
        N = self.prec.N
        if "t" not in self.params:
            raise ConfigError("lambda needs params.t")
        t = self.scalar(self.params["t"])
        points = self.params.get("points", list(range(self.prec.D + 1)))
        rows = [["x", "value", "val"]]
        out = []
        for x in points:
            v = lambda_character(self.ring, t, x, N)
            rows.append([str(PadicInt.parse(x, self.ring.p)), v.to_str(), _v(v.val())])
            out.append({"x": str(x), "value": v.to_str()})
        return _csv(rows), {"t": t.to_str(), "N": N, "values": out}, 0, f"{len(out)} values"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixchar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        sp = sub.add_parser(task)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("-N", type=int)
        sp.add_argument("-D", type=int)
        sp.add_argument("--threads", type=int, default=1)
    st = sub.add_parser("selftest")
    st.add_argument("--json", action="store_true")
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _selftest(args) -> int:
    results = run_selftest(inject_fault=args.inject_fault)
    ok = all(r for _, r in results)
    if args.json:
        sys.stdout.write(_json({"passed": ok, "checks": [{"name": n, "passed": r} for n, r in results]}))
    else:
        for name, r in results:
            print(f"{'PASS' if r else 'FAIL'} {name}")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return _selftest(args)
    try:
        cfg = load_config(args.config)
        if cfg.get("task", args.command) != args.command:
            raise ConfigError(f"config task {cfg['task']!r} does not match command {args.command!r}")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        job = Job(cfg, args.command, args.N, args.D, args.threads)
        out = cfg.get("output", {})
        fmt = args.format or out.get("format", "csv")
        path = args.out or out.get("path")
        text_csv, obj, code, summary = job.run()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (UnsupportedPresentation, ModuleError, ActionError, InsufficientPrecision,
            ValueError) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    _emit(text_csv if fmt == "csv" else _json(obj), path)
    print(summary, file=sys.stderr if not path else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
