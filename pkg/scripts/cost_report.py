#!/usr/bin/env python3
"""Print parameter and MAC budgets for the default and ablation configurations."""

from hdfnet.model import ModelConfig, macs_per_second, param_count

GRID = [
    ("proposed (TDF, FDF)", ModelConfig()),
    ("CRM / CRM", ModelConfig(stage1_mode="CRM", stage2_mode="CRM")),
    ("CRM / FDF", ModelConfig(stage1_mode="CRM", stage2_mode="FDF")),
    ("TDF / CRM", ModelConfig(stage1_mode="TDF", stage2_mode="CRM")),
    ("TDF / TDF", ModelConfig(stage1_mode="TDF", stage2_mode="TDF")),
    ("FDF / TDF", ModelConfig(stage1_mode="FDF", stage2_mode="TDF")),
    ("single-stage DF", ModelConfig(single_stage=True, stage1_mode="DF")),
]


def main():
    for name, cfg in GRID:
        params = param_count(cfg)
        macs = macs_per_second(cfg)
        print(f"{name:22s} params={params / 1e6:.3f}M macs={macs / 1e9:.3f}G/s")


if __name__ == "__main__":
    main()
