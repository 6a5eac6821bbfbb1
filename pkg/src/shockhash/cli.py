"""Command-line front end.

Subcommands: build a hash function from a key file or a synthetic corpus,
verify a descriptor against its key source, run the experiment suite, and
benchmark the kernel backends.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 duplicate keys,
5 verification failure.
"""

import argparse
import csv
import math
import sys
import time

from . import experiments, recsplit
from ._kernels import BACKEND_NAME, HAS_COMPILED, get_backend
from .errors import DuplicateKeyError, FormatError, InvalidParameterError, ShockHashError
from .keys import synthetic_keys
from .shockhash import MODE_IDS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DUPLICATE = 4
EXIT_VERIFY = 5


def _parse_n_range(text):
    """'16' -> [16]; '6..20' -> [6, 8, ..., 20] (step 2 like the plots);
    '6..20..1' -> explicit step."""
    parts = text.split("..")
    if len(parts) == 1:
        return [int(parts[0])]
    lo = int(parts[0])
    hi = int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 2
    if step < 1 or hi < lo:
        raise InvalidParameterError(f"bad range {text!r}")
    return list(range(lo, hi + 1, step))


def _load_keys(args):
    if args.synthetic is not None:
        return synthetic_keys(args.synthetic, args.gen_seed)
    with open(args.input, "rb") as f:
        data = f.read()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def _add_key_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="newline-delimited key file")
    src.add_argument("--synthetic", type=int, metavar="COUNT", help="generate COUNT synthetic keys")
    p.add_argument("--gen-seed", type=int, default=0, help="synthetic key generator seed")


def cmd_build(args):
    keys = _load_keys(args)
    mode = MODE_IDS[args.mode]
    desc = recsplit.build(keys, args.b, args.n, mode)
    blob = desc.serialize()
    with open(args.out, "wb") as f:
        f.write(blob)
    st = desc.stats()
    n_keys = st["n_keys"]
    print(f"keys: {n_keys}")
    print(f"config: n={args.n} b={args.b} mode={args.mode} backend={BACKEND_NAME}")
    print(f"total bits: {st['total_bits']}  bits/key: {st['bits_per_key']:.4f}")
    print(
        "decomposition: seed stream {s} + offsets {o} + retrieval {r} + header {h} bits".format(
            s=st["seed_stream_bits"], o=st["bucket_offset_bits"], r=st["retrieval_bits"], h=st["header_bits"]
        )
    )
    secs = st["build_seconds"]
    print(f"construction: {secs:.3f} s  ({n_keys / secs:,.0f} keys/s)")
    print(f"descriptor written to {args.out} ({len(blob)} bytes)")
    return EXIT_OK


def cmd_verify(args):
    with open(args.descriptor, "rb") as f:
        blob = f.read()
    keys = _load_keys(args)
    try:
        desc = recsplit.MphfDescriptor.deserialize(blob)
        if len(keys) != desc.n_keys:
            print(f"verification failed: descriptor covers {desc.n_keys} keys, source has {len(keys)}", file=sys.stderr)
            return EXIT_VERIFY
        ok, offender = desc.verify(keys)
    except ShockHashError as e:
        # A corrupted descriptor shows up as a decode error; that is a
        # verification failure, not a usage problem.
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    if not ok:
        where = f" (offending key: {offender!r})" if offender is not None else ""
        print(f"verification failed: queries are not a permutation of 0..{desc.n_keys - 1}{where}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"verified: {desc.n_keys} keys map exactly onto 0..{desc.n_keys - 1}")
    return EXIT_OK


def _emit_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def cmd_experiment(args):
    seed = args.experiment_seed
    if args.kind == "trials":
        ns = _parse_n_range(args.n)
        rows = experiments.trial_statistics(ns, args.mode, args.reps, seed)
        print(",".join(experiments.CSV_HEADER))
        for r in rows:
            print(f"{r.n},{r.mode},{r.reps},{r.mean_seed:.6g},{r.mean_log2_seed:.6g},{r.overhead_bits:.6g},{r.wall_time_s:.3f}")
        if args.csv:
            experiments.write_csv(rows, args.csv)
    elif args.kind == "filter":
        ns = _parse_n_range(args.n)
        out = []
        print("n,pass_rate,upper_bound,trials")
        for n in ns:
            rate = experiments.mc_filter_pass(n, args.trials, seed)
            bound = experiments.filter_pass_bound(n)
            print(f"{n},{rate:.6g},{bound:.6g},{args.trials}")
            out.append([n, f"{rate:.6g}", f"{bound:.6g}", args.trials])
        if args.csv:
            _emit_csv(args.csv, ["n", "pass_rate", "upper_bound", "trials"], out)
    elif args.kind == "enumerate":
        ns = _parse_n_range(args.n)
        out = []
        print("n,pf_probability,mean_orientations,bound_sqrt,bound_const")
        for n in ns:
            p = experiments.exact_pseudoforest_probability(n)
            mo = experiments.exact_mean_orientations(n)
            b1, b2 = experiments.pf_probability_lower_bounds(n)
            print(f"{n},{float(p):.10g},{float(mo):.10g},{b1:.10g},{b2:.10g}")
            out.append([n, f"{float(p):.10g}", f"{float(mo):.10g}", f"{b1:.10g}", f"{b2:.10g}"])
        if args.csv:
            _emit_csv(args.csv, ["n", "pf_probability", "mean_orientations", "bound_sqrt", "bound_const"], out)
    else:  # component
        ns = _parse_n_range(args.n)
        out = []
        print("n,mc_factor,exact_recurrence,trials")
        for n in ns:
            est = experiments.mc_component_factor(n, args.trials, seed)
            exact = experiments.d_recurrence(n)
            print(f"{n},{est:.6g},{exact:.6g},{args.trials}")
            out.append([n, f"{est:.6g}", f"{exact:.6g}", args.trials])
        if args.csv:
            _emit_csv(args.csv, ["n", "mc_factor", "exact_recurrence", "trials"], out)
    return EXIT_OK


def cmd_bench(args):
    from .keys import synthetic_hashed

    names = ["pure"] + (["compiled"] if HAS_COMPILED else [])
    rows = []
    print(f"backends available: {', '.join(names)} (active: {BACKEND_NAME})")
    print("backend,op,n,reps,seconds,per_leaf_us")
    for name in names:
        kern = get_backend(name)
        for op in ("plain", "rotate"):
            reps = args.reps
            t0 = time.perf_counter()
            for rep in range(reps):
                hi, lo = synthetic_hashed(args.n, 0xBE7C4 + rep)
                hi = [int(x) for x in hi]
                lo = [int(x) for x in lo]
                if op == "plain":
                    kern.search_plain(hi, lo, args.n, 1 << 40)
                else:
                    kern.search_rotate(hi, lo, args.n, 0, 1 << 40)
            dt = time.perf_counter() - t0
            print(f"{name},{op},{args.n},{reps},{dt:.3f},{dt / reps * 1e6:.1f}")
            rows.append([name, op, args.n, reps, f"{dt:.3f}", f"{dt / reps * 1e6:.1f}"])
    if args.csv:
        _emit_csv(args.csv, ["backend", "op", "n", "reps", "seconds", "per_leaf_us"], rows)
    return EXIT_OK


def make_parser():
    p = argparse.ArgumentParser(prog="shockhash", description="Minimal perfect hashing via overloaded cuckoo tables")
    sub = p.add_subparsers(dest="command", required=True)

    pb = sub.add_parser("build", help="build a hash function descriptor")
    _add_key_source(pb)
    pb.add_argument("--b", type=int, default=2000, help="expected bucket size")
    pb.add_argument("--n", type=int, default=30, help="leaf size (1..64)")
    pb.add_argument("--mode", choices=sorted(MODE_IDS), default="rotate")
    pb.add_argument("--out", required=True, help="descriptor output path")
    pb.set_defaults(func=cmd_build)

    pv = sub.add_parser("verify", help="verify a descriptor against its keys")
    pv.add_argument("descriptor", help="descriptor file")
    _add_key_source(pv)
    pv.set_defaults(func=cmd_verify)

    pe = sub.add_parser("experiment", help="run validation experiments")
    pe.add_argument("kind", choices=["trials", "filter", "enumerate", "component"])
    pe.add_argument("--n", required=True, help="leaf size or range like 6..20")
    pe.add_argument("--mode", choices=["plain", "rotate", "rotate-cached", "bruteforce"], default="plain")
    pe.add_argument("--reps", type=int, default=1000)
    pe.add_argument("--trials", type=int, default=100000)
    pe.add_argument("--csv", help="also write results to this CSV file")
    pe.add_argument("--experiment-seed", type=int, default=0)
    pe.set_defaults(func=cmd_experiment)

    pn = sub.add_parser("bench", help="compare kernel backends")
    pn.add_argument("--n", type=int, default=20)
    pn.add_argument("--reps", type=int, default=200)
    pn.add_argument("--csv", help="also write results to this CSV file")
    pn.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DuplicateKeyError as e:
        lines = ", ".join(str(i + 1) for i in (e.lines or [])[:10])
        print(f"error: duplicate keys (lines: {lines})", file=sys.stderr)
        return EXIT_DUPLICATE
    except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (InvalidParameterError, FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ShockHashError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
