"""Command-line surface: enhance, inspect, verify, loss.

Every command prints a line-oriented ``key=value`` summary on success and
exits nonzero with a one-line diagnostic on any validation failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import verify as verify_mod
from .bundle import load_weights
from .losses import LossConfig, si_sdr, total_loss
from .model import ModelConfig, hdf_enhance, macs_per_second, param_count
from .runconfig import RunConfig, load_run_config
from .spectral import istft, stft
from .wavio import read_wav, write_wav


def _load_config(path: str | None) -> RunConfig:
    return load_run_config(path) if path else RunConfig()


def cmd_enhance(args) -> int:
    rc = _load_config(args.config)
    w = read_wav(args.infile)
    bundle = load_weights(args.weights, rc.model)
    spec = stft(w, rc.stft)
    out = hdf_enhance(spec, bundle, rc.model)
    y = istft(out, rc.stft)
    write_wav(args.outfile, y)
    print(f"input={args.infile}")
    print(f"output={args.outfile}")
    print(f"frames={spec.frame_count}")
    print(f"samples={len(y)}")
    return 0


def cmd_inspect(args) -> int:
    rc = _load_config(args.config)
    bundle = load_weights(args.weights, rc.model)
    for name in sorted(bundle.tensors):
        shape = "x".join(str(d) for d in bundle.tensors[name].shape)
        print(f"layer.{name}={shape}")
    print(f"params_total={param_count(rc.model)}")
    print(f"macs_per_second={macs_per_second(rc.model, rc.stft):.4g}")
    return 0


def cmd_verify(args) -> int:
    results = verify_mod.run_all(seed=args.seed)
    for name, ok in results.items():
        print(f"{name}={'pass' if ok else 'fail'}")
    return 0 if all(results.values()) else 1


def cmd_loss(args) -> int:
    rc = _load_config(args.config)
    ref = read_wav(args.ref)
    est = read_wav(args.est)
    n = min(len(ref), len(est))
    ref.samples, est.samples = ref.samples[:n], est.samples[:n]
    s = stft(ref, rc.stft)
    e = stft(est, rc.stft)
    print(f"total_loss={total_loss(s, e, rc.loss):.6g}")
    print(f"si_sdr_db={si_sdr(ref, est):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdfnet", description="Two-stage deep-filtering speech enhancement"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="denoise a WAV file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("inspect", help="print layer table and cost summary")
    p.add_argument("--weights", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("verify", help="run the oracle/property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("loss", help="spectral loss and SI-SDR between two WAVs")
    p.add_argument("--ref", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_loss)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
