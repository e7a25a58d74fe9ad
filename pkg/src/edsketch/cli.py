"""Command-line front end.

Commands:

* ``sketch FILE``       — write a sketch of a file (bytes are symbols).
* ``recover SKA SKB``   — recover distance + edit script from two sketches.
* ``diff FILEA FILEB``  — sketch both files in-process and recover.
* ``ed FILEA FILEB``    — exact edit distance by dynamic programming.
* ``calibrate``         — measure the scheme's empirical constants.

Exit codes: 0 success, 2 constraint violation, 3 distance above the
budget (LARGE), 4 incompatible sketches.
"""

import argparse
import json
import sys

from . import align, calibrate
from .fingerprint import InputTooLong
from .pipeline import (ConstraintViolated, IncompatibleSketch, deserialize,
                       ed_recover, ed_sketch, serialize, serialized_size)

EXIT_OK = 0
EXIT_CONSTRAINT = 2
EXIT_LARGE = 3
EXIT_INCOMPATIBLE = 4


def _parse_seed(text: str) -> bytes:
    try:
        seed = bytes.fromhex(text)
    except ValueError:
        raise SystemExit("--seed must be hexadecimal")
    if len(seed) != 32:
        raise SystemExit("--seed must encode exactly 32 bytes")
    return seed


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="edsketch",
        description="Sketch byte strings; recover edit distance and the "
                    "canonical edit script from sketch pairs.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, need_seed):
        p.add_argument("--k", type=int, required=True,
                       help="edit-distance budget")
        p.add_argument("--n", type=int, default=1024,
                       help="length bound (power of two, strict upper bound)")
        p.add_argument("--seed", required=need_seed,
                       help="shared public randomness, 32 bytes hex")
        p.add_argument("--gap", type=float, default=1.5,
                       help="fingerprint gap factor P")
        p.add_argument("--profile", choices=("paper", "desk"), default="desk")

    p = sub.add_parser("sketch", help="sketch one file")
    p.add_argument("file")
    common(p, need_seed=True)
    p.add_argument("--out", help="output path (default FILE.edsk)")

    p = sub.add_parser("recover", help="recover from two sketch files")
    p.add_argument("sketch_a")
    p.add_argument("sketch_b")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("diff", help="sketch two files in-process and recover")
    p.add_argument("file_a")
    p.add_argument("file_b")
    common(p, need_seed=False)
    p.add_argument("--verify", action="store_true",
                   help="cross-check the verdict against the exact oracle")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("ed", help="exact edit distance (dynamic programming)")
    p.add_argument("file_a")
    p.add_argument("file_b")

    p = sub.add_parser("calibrate", help="measure empirical constants")
    p.add_argument("--n", type=int, nargs="*", default=[256, 1024])
    p.add_argument("--kprime", type=int, nargs="*", default=[64])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0,
                   help="integer seed for the calibration RNG")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return top


def _read_file(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise SystemExit(f"cannot read {path}: {exc.strerror}")


def _verdict_payload(verdict) -> dict:
    if verdict.large:
        return {"verdict": "LARGE"}
    return {"verdict": "ok", "distance": verdict.distance,
            "edges": sorted(e.text() for e in verdict.edges)}


def _emit_verdict(verdict, fmt: str) -> int:
    payload = _verdict_payload(verdict)
    if fmt == "json":
        print(json.dumps(payload))
    elif verdict.large:
        print("LARGE")
    else:
        print(verdict.distance)
        for line in payload["edges"]:
            print(line)
    return EXIT_LARGE if verdict.large else EXIT_OK


def cmd_sketch(args) -> int:
    data = _read_file(args.file)
    seed = _parse_seed(args.seed)
    sk = ed_sketch(data, args.k, args.n, seed, P=args.gap,
                   profile=args.profile)
    out = args.out or args.file + ".edsk"
    with open(out, "wb") as f:
        serialize(sk, f)
    print(f"{out}: {serialized_size(sk)} bytes "
          f"(k={args.k}, n={args.n}, profile={args.profile})")
    return EXIT_OK


def _load_sketch(path: str):
    with open(path, "rb") as f:
        return deserialize(f)


def cmd_recover(args) -> int:
    sk_a = _load_sketch(args.sketch_a)
    sk_b = _load_sketch(args.sketch_b)
    return _emit_verdict(ed_recover(sk_a, sk_b), args.format)


def cmd_diff(args) -> int:
    xa = _read_file(args.file_a)
    xb = _read_file(args.file_b)
    seed = _parse_seed(args.seed) if args.seed else b"\x00" * 32
    sk_a = ed_sketch(xa, args.k, args.n, seed, P=args.gap,
                     profile=args.profile)
    sk_b = ed_sketch(xb, args.k, args.n, seed, P=args.gap,
                     profile=args.profile)
    verdict = ed_recover(sk_a, sk_b)
    code = _emit_verdict(verdict, args.format)
    if args.verify:
        true = align.edit_distance(xa, xb)
        if verdict.large:
            ok = true > args.k
        else:
            path = align.canonical_alignment(xa, xb)
            want = frozenset(align.costly_annotated(xa, xb, path))
            ok = verdict.distance == true and verdict.edges == want
        print(f"verify: exact distance {true}, "
              f"{'consistent' if ok else 'MISMATCH'}")
        if not ok:
            return EXIT_CONSTRAINT
    return code


def cmd_ed(args) -> int:
    print(align.edit_distance(_read_file(args.file_a), _read_file(args.file_b)))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    rows = []
    for n in args.n:
        for kp in args.kprime:
            c, r2, _ = calibrate.c_split_fit(n, kp, (1, 2, 4, 8),
                                             args.trials, args.seed)
            ceh = calibrate.c_eh_estimate(n, kp, (1, 2, 4),
                                          max(5, args.trials // 5), args.seed)
            rows.append({"n": n, "kprime": kp, "c_split": round(c, 4),
                         "r2": round(r2, 4), "c_eh": round(ceh, 4)})
    gaps = []
    for kind in ("anchored", "cgk"):
        for n in args.n:
            t = max(2, n // 64)
            p_hat = calibrate.fingerprint_gap(kind, t, n,
                                              max(10, args.trials // 2),
                                              args.seed)
            gaps.append({"fingerprint": kind, "t": t, "n": n,
                         "p_hat": p_hat, "trials": max(10, args.trials // 2)})
    if args.format == "json":
        print(json.dumps({"decomposition": rows, "fingerprints": gaps}))
    else:
        for r in rows:
            print(f"n={r['n']} k'={r['kprime']} c_split={r['c_split']} "
                  f"R2={r['r2']} c_EH={r['c_eh']}")
        for g in gaps:
            print(f"{g['fingerprint']} t={g['t']} n={g['n']} "
                  f"P_hat={g['p_hat']} trials={g['trials']}")
    return EXIT_OK


_DISPATCH = {"sketch": cmd_sketch, "recover": cmd_recover, "diff": cmd_diff,
             "ed": cmd_ed, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ConstraintViolated, InputTooLong, ValueError) as exc:
        if isinstance(exc, IncompatibleSketch):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INCOMPATIBLE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
