#!/usr/bin/env python3
"""Run the full toy two-stage training protocol and export engine weights.

Prints line-oriented key=value progress and final held-out SI-SDR numbers.
"""

import argparse

from hdftrain.data import SyntheticDataset
from hdftrain.export import export_weights
from hdftrain.train import TrainSettings, evaluate_si_sdr, train_joint, train_stage1


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--utterances", type=int, default=96)
    parser.add_argument("--heldout", type=int, default=12)
    parser.add_argument("--stage1-epochs", type=int, default=30)
    parser.add_argument("--joint-epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="trained.hdfw", help="exported weight bundle")
    args = parser.parse_args()

    train_ds = SyntheticDataset(args.utterances, seed=args.seed + 10)
    held = SyntheticDataset(args.heldout, seed=args.seed + 999)

    ck1 = train_stage1(
        train_ds,
        train_settings=TrainSettings(
            epochs=args.stage1_epochs, batch_size=args.batch_size, seed=args.seed
        ),
    )
    for e, (tr, va) in enumerate(
        zip(ck1["history"]["train_loss"], ck1["history"]["val_loss"])
    ):
        print(f"stage1.epoch{e}.train_loss={tr:.4f} val_loss={va:.4f}")
    r1 = evaluate_si_sdr(ck1, held, use_stage1_only=True)
    print(f"stage1.heldout_si_sdr_db={r1['enhanced_si_sdr_db']:.2f}")

    ck2 = train_joint(
        train_ds,
        ck1,
        TrainSettings(epochs=args.joint_epochs, batch_size=args.batch_size, seed=args.seed),
    )
    for e, (tr, va) in enumerate(
        zip(ck2["history"]["train_loss"], ck2["history"]["val_loss"])
    ):
        print(f"joint.epoch{e}.train_loss={tr:.4f} val_loss={va:.4f}")
    r2 = evaluate_si_sdr(ck2, held)
    print(f"noisy_si_sdr_db={r2['noisy_si_sdr_db']:.2f}")
    print(f"joint.heldout_si_sdr_db={r2['enhanced_si_sdr_db']:.2f}")
    print(f"improvement_db={r2['improvement_db']:.2f}")

    export_weights(ck2, args.out)
    print(f"weights={args.out}")


if __name__ == "__main__":
    main()
