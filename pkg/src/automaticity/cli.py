"""Batch command line front-end.

Exit codes: 0 success (including diagnostics whose hypotheses fail),
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from . import automata, bounds, constructions
from .membership import DEFAULT_LIMIT_CAP, ResourceError, build_oracle, is_prime_u64
from .residuals import census as run_census
from .residuals import check_brun_titchmarsh, check_partition_identity

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ["q", "n", "m", "N", "sum_sizes", "max_size", "construction_size",
                 "lower", "upper", "error"]
CENSUS_COLUMNS = ["w_value", "w_digits", "class_id", "residual_cardinality"]


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    argv: list[str]
    config: dict | None = None
    outputs: list[str] = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    software_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def write(self, outdir: Path) -> Path:
        path = outdir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(obj):
    """Replace non-finite floats, which JSON cannot carry, by strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _validate_set(ctx, param, value):
    if value in ("primes", "squares") or value.startswith("file:"):
        return value
    if value.startswith("class:"):
        try:
            r, mod = value[len("class:"):].split(",")
            int(r), int(mod)
        except ValueError:
            raise click.BadParameter("expected class:r,mod") from None
        return value
    raise click.BadParameter("expected primes, squares, class:r,mod or file:PATH")


def _oracle(set_spec: str, limit: int, limit_cap: int):
    try:
        return build_oracle(set_spec, limit, limit_cap=limit_cap)
    except (OSError, ValueError, IndexError, ResourceError) as exc:
        click.echo(f"error: cannot build oracle for {set_spec!r}: {exc}", err=True)
        sys.exit(1)


set_option = click.option("--set", "set_spec", default="primes", show_default=True,
                          callback=_validate_set,
                          help="primes | squares | class:r,mod | file:PATH")
outdir_option = click.option("--outdir", type=click.Path(file_okay=False, path_type=Path),
                             default=None, help="directory for output files and manifest")
limit_cap_option = click.option("--limit-cap", type=int, default=DEFAULT_LIMIT_CAP,
                                show_default=True, help="largest oracle size allowed")


class _RecordingGroup(click.Group):
    """Remembers the argument list so manifests can replay the run."""

    last_argv: list[str] = []

    def main(self, args=None, *a, **kw):
        self.last_argv = list(sys.argv[1:] if args is None else args)
        return super().main(args, *a, **kw)


@click.group(cls=_RecordingGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Automaticity of integer sets in base q."""


def _finish_outputs(name, params, outdir: Path | None, files: dict[str, str], config=None):
    """Write data files (if an outdir is given) plus a manifest listing them."""
    if outdir is None:
        return
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, text in files.items():
        (outdir / fname).write_text(text)
        written.append(fname)
    RunManifest(name, params, main.last_argv, config, written).write(outdir)


# --------------------------------------------------------------------- census

def census_csv(cen) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CENSUS_COLUMNS)
    w.writerows(cen.rows())
    return buf.getvalue()


@main.command()
@click.option("--base", "q", type=click.IntRange(min=2), required=True)
@click.option("--n", type=click.IntRange(min=2), required=True)
@click.option("--m", type=click.IntRange(min=1), required=True)
@set_option
@click.option("--mode", type=click.Choice(["paper", "full"]), default="paper", show_default=True)
@click.option("--filter", "word_filter", type=click.Choice(["all", "coprime"]), default="all",
              show_default=True)
@click.option("--K", "K", type=click.IntRange(min=2), default=None,
              help="multiplicity threshold (default ceil(ln ln q^n), at least 2)")
@click.option("--out", type=click.Choice(["csv", "json"]), default="csv", show_default=True,
              help="csv writes the per-word table and the summary; json only the summary")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--checks/--no-checks", default=True, show_default=True,
              help="attach partition-identity and Brun-Titchmarsh checks where they apply")
@outdir_option
@limit_cap_option
def census(q, n, m, set_spec, mode, word_filter, K, out, jobs, checks, outdir, limit_cap):
    """Residual-set census of the words of length n-m."""
    if m >= n:
        raise click.UsageError("need m < n")
    oracle = _oracle(set_spec, q**n, limit_cap)
    cen = run_census(q, n, m, oracle, mode, word_filter, K, jobs=jobs)
    summary = cen.summary()
    summary["set"] = set_spec
    if checks and set_spec == "primes" and mode == "paper":
        if word_filter == "all":
            summary["partition_identity"] = check_partition_identity(cen, oracle).to_dict()
        else:
            summary["brun_titchmarsh"] = check_brun_titchmarsh(cen).to_dict()
    text = _dump(summary)
    files = {"census_summary.json": text}
    if out == "csv":
        files["census.csv"] = census_csv(cen)
    _finish_outputs("census", {"base": q, "n": n, "m": m, "set": set_spec, "mode": mode,
                               "filter": word_filter, "K": cen.K, "out": out}, outdir, files)
    click.echo(text, nl=False)


# ------------------------------------------------------------------ automaton

@main.command()
@click.argument("action", type=click.Choice(["trie", "sandwich", "exact", "construct-squares",
                                             "construct-primes", "verify"]))
@click.option("--base", "q", type=click.IntRange(min=2), required=True)
@click.option("--n", type=click.IntRange(min=0), required=True, help="length budget")
@click.option("--m", type=click.IntRange(min=1), default=None,
              help="split for construct-primes (default n // 2)")
@set_option
@click.option("--guard-max-states", type=int, default=automata.EXACT_MAX_STATES,
              show_default=True)
@click.option("--dfa", "dfa_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="automaton JSON for verify")
@outdir_option
@limit_cap_option
def automaton(action, q, n, m, set_spec, guard_max_states, dfa_path, outdir, limit_cap):
    """Build, bound, or verify length-bounded automata."""
    params = {"action": action, "base": q, "n": n, "set": set_spec}
    files: dict[str, str] = {}
    dfa = None
    if action == "construct-squares":
        if q < 3 or not is_prime_u64(q):
            raise click.UsageError(f"construct-squares needs an odd prime base, got {q}")
        if n < 2 or n % 2:
            raise click.UsageError("construct-squares needs an even n >= 2")
        dfa, rep = _guarded(constructions.build_squares_automaton, q, n)
        result = rep.to_dict()
    elif action == "construct-primes":
        m = n // 2 if m is None else m
        if not 0 < m < n:
            raise click.UsageError("construct-primes needs 0 < m < n")
        params["m"] = m
        oracle = _oracle("primes", q**n, limit_cap)
        dfa, rep = _guarded(constructions.build_primes_automaton, q, n, m, oracle)
        result = rep.to_dict()
    else:
        oracle = _oracle(set_spec, q**n, limit_cap)
        if action == "trie":
            dfa = automata.build_trie(oracle, q, n)
            rep = automata.verify(dfa, oracle, n)
            result = {"trie_size": dfa.size, "verify": rep.to_dict()}
        elif action == "sandwich":
            trie = automata.build_trie(oracle, q, n)
            dfa = automata.greedy_minimize(trie)
            rep = automata.verify(dfa, oracle, n)
            if not rep.passed:
                _fail(f"greedy automaton failed verification: {rep.to_dict()}")
            lower = automata.distinguishability_lower_bound(oracle, q, n)
            sw = automata.SizeSandwich(lower, dfa.size, trie.size)
            result = {**sw.to_dict(), "consistent": sw.consistent(), "verify": rep.to_dict()}
        elif action == "exact":
            guard = automata.ExactGuard(max_states=guard_max_states)
            res = automata.exact_minimal_size(oracle, q, n, guard)
            result = res.to_dict()
            if res.witness is not None:
                rep = automata.verify(res.witness, oracle, n)
                if not rep.passed:
                    _fail(f"exact witness failed verification: {rep.to_dict()}")
                dfa = res.witness
        else:  # verify
            if dfa_path is None:
                raise click.UsageError("verify needs --dfa PATH")
            try:
                dfa = automata.LayeredDFA.load(dfa_path)
            except (OSError, ValueError, KeyError) as exc:
                _fail(f"cannot read automaton {dfa_path}: {exc}")
            if dfa.q != q:
                raise click.UsageError(f"automaton base {dfa.q} != --base {q}")
            rep = automata.verify(dfa, oracle, n)
            result = {"state_count": dfa.size, "verify": rep.to_dict()}
            text = _dump(result)
            _finish_outputs("automaton", params, outdir, {"report.json": text})
            click.echo(text, nl=False)
            sys.exit(0 if rep.passed else 1)
    text = _dump(result)
    files["report.json"] = text
    if dfa is not None:
        files["automaton.json"] = json.dumps(dfa.to_json()) + "\n"
    _finish_outputs("automaton", params, outdir, files)
    click.echo(text, nl=False)


def _guarded(fn, *args):
    try:
        return fn(*args)
    except constructions.ConstructionError as exc:
        _fail(str(exc))


def _fail(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(1)


# --------------------------------------------------------------------- bounds

def _parse_number(text: str):
    """Integers stay exact (so 2**64-sized inputs survive); '2^64' and '1e19' are accepted."""
    text = text.strip()
    if "^" in text:
        b, e = text.split("^", 1)
        return int(b) ** int(e)
    try:
        return int(text)
    except ValueError:
        return float(text)


class Number(click.ParamType):
    name = "number"

    def convert(self, value, param, ctx):
        if isinstance(value, (int, float)):
            return value
        try:
            return _parse_number(value)
        except ValueError:
            self.fail(f"{value!r} is not a number", param, ctx)


NUMBER = Number()


@main.command("bounds")
@click.argument("action", type=click.Choice(["ck", "select", "theorem1", "lasteq", "eq1",
                                             "mertens", "subsetbound", "lemma2"]))
@click.option("--x", type=NUMBER, default=None)
@click.option("--y", type=NUMBER, default=None)
@click.option("--z", type=NUMBER, default=None)
@click.option("--k", type=int, default=None)
@click.option("--base", "q", type=click.IntRange(min=2), default=2, show_default=True)
@click.option("--n", type=int, default=None)
@click.option("--m", type=int, default=None)
@click.option("--words", default=None, help="comma-separated word values for lemma2")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True),
              default=None, help="key = value file; flags below override it")
@click.option("--c", type=float, default=None)
@click.option("--D1", "D1", type=float, default=None)
@click.option("--D2", "D2", type=float, default=None)
@click.option("--C0", "C0", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--product-tolerance", type=float, default=None)
@click.option("--prime-cutoff-cap", type=int, default=None)
@outdir_option
def bounds_cmd(action, x, y, z, k, q, n, m, words, config_path, c, D1, D2, C0, rho,
               product_tolerance, prime_cutoff_cap, outdir):
    """Evaluate an analytic bound and print one JSON object."""
    try:
        cfg = bounds.load_config(config_path, c=c, D1=D1, D2=D2, C0=C0, rho=rho,
                                 product_tolerance=product_tolerance,
                                 prime_cutoff_cap=prime_cutoff_cap)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None

    def need(**kw):
        missing = [name for name, v in kw.items() if v is None]
        if missing:
            raise click.UsageError(f"bounds {action} needs --{', --'.join(missing)}")

    inputs = {"action": action}
    try:
        if action == "theorem1":
            need(x=x)
            inputs.update(x=bounds._jsonable(x), c=cfg.c)
            out = {"value": bounds.theorem1_lower(x, cfg),
                   "ln_value": bounds.theorem1_log(x, cfg.c)}
        elif action == "ck":
            need(k=k, x=x, y=y)
            inputs.update(k=k, q=q, x=bounds._jsonable(x), y=bounds._jsonable(y))
            out = {"value": bounds.ck_bound(k, q, x, y, cfg)}
        elif action == "select":
            need(x=x)
            out = bounds.select_parameters(x, q, cfg).to_dict()
        elif action == "lasteq":
            need(x=x)
            out = bounds.lasteq_lower(x, q, cfg).to_dict()
        elif action == "mertens":
            need(z=z)
            inputs.update(z=z)
            val = bounds.mertens_product(z)
            out = {"value": val, "ratio_to_ln_z": val / math.log(z)}
        elif action == "subsetbound":
            need(m=m)
            out = constructions.subset_count_bound(q, m).to_dict()
            if n is not None:
                out["theorem3_log2"] = constructions.theorem3_log2(q, n, m)
        elif action == "lemma2":
            need(n=n, m=m, words=words)
            ws = [int(v) for v in words.split(",")]
            inputs.update(q=q, n=n, m=m, words=ws)
            out = bounds.lemma2_rhs(ws, q, n, m, cfg).to_dict()
        else:  # eq1
            need(n=n, m=m)
            oracle = _oracle("primes", q**n, max(DEFAULT_LIMIT_CAP, q**n))
            cen = run_census(q, n, m, oracle, "paper", "coprime", k)
            out = bounds.eq1_check(cen, cfg).to_dict()
        result = {"inputs": inputs, "config": asdict(cfg), "result": out}
    except bounds.DomainError as exc:
        result = {"inputs": inputs, "config": asdict(cfg), "domain": str(exc)}
    text = _dump(_clean(result))
    _finish_outputs("bounds", inputs, outdir, {"bounds.json": text}, asdict(cfg))
    click.echo(text, nl=False)


# ---------------------------------------------------------------------- sweep

def sweep_row(q: int, n: int, m: int, set_spec: str, sandwich: bool, limit_cap: int) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(q=q, n=n, m=m)
    try:
        oracle = build_oracle(set_spec, q**n, limit_cap=limit_cap)
        cen = run_census(q, n, m, oracle)
        row.update(N=cen.N, sum_sizes=cen.sum_sizes, max_size=cen.max_size)
        if set_spec == "squares" and n % 2 == 0 and q > 2 and is_prime_u64(q):
            _, rep = constructions.build_squares_automaton(q, n, oracle)
            row["construction_size"] = rep.state_count
        elif set_spec == "primes":
            _, rep = constructions.build_primes_automaton(q, n, m, oracle)
            row["construction_size"] = rep.state_count
        if sandwich:
            trie = automata.build_trie(oracle, q, n)
            row["upper"] = automata.greedy_minimize(trie).size
            row["lower"] = automata.distinguishability_lower_bound(oracle, q, n)
    except Exception as exc:  # recorded per row; the command exits 1
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return row


@main.command()
@click.option("--base", "q", type=click.IntRange(min=2), required=True)
@click.option("--n-min", type=int, required=True)
@click.option("--n-max", type=int, required=True)
@click.option("--n-step", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--m", type=click.IntRange(min=1), default=None,
              help="fixed split (default n // 2 per row)")
@set_option
@click.option("--sandwich/--no-sandwich", default=True, show_default=True,
              help="compute lower and greedy upper bounds at budget n")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@outdir_option
@limit_cap_option
def sweep(q, n_min, n_max, n_step, m, set_spec, sandwich, jobs, outdir, limit_cap):
    """One CSV row per n in the range, in ascending n."""
    grid = [(q, n, m if m is not None else n // 2) for n in range(n_min, n_max + 1, n_step)]
    args = [(gq, gn, gm, set_spec, sandwich, limit_cap) for gq, gn, gm in grid]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(sweep_row, *zip(*args)))
    else:
        rows = [sweep_row(*a) for a in args]
    buf = io.StringIO()
    w = csv.DictWriter(buf, SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    text = buf.getvalue()
    _finish_outputs("sweep", {"base": q, "n_min": n_min, "n_max": n_max, "n_step": n_step,
                              "m": m, "set": set_spec, "sandwich": sandwich},
                    outdir, {"sweep.csv": text})
    click.echo(text, nl=False)
    if any(r["error"] for r in rows):
        sys.exit(1)


# --------------------------------------------------------------------- replay

@main.command()
@click.argument("manifest", type=click.Path(dir_okay=False, exists=True, path_type=Path))
def replay(manifest):
    """Re-run the command recorded in a manifest."""
    data = json.loads(manifest.read_text())
    argv = data["argv"]
    if not argv or argv[0] == "replay":
        raise click.UsageError("manifest holds no replayable command")
    main.main(args=argv, standalone_mode=True)


if __name__ == "__main__":
    main()
