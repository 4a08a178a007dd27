"""Two-stage training protocol at toy scale.

Stage 1 is trained alone on the coarse estimate S1; joint training then
fine-tunes both stages end-to-end on S = S1 + S2 and refuses to run without
a stage-1 checkpoint. Optimizer: AdamW at 5e-4, exponential decay 0.98 per
epoch, gradient L2-norm clipping at 5. Convergence at toy scale uses
5-epoch validation-loss patience (recorded in the checkpoint history).
"""

from __future__ import annotations

import copy
import time
from dataclasses import asdict, dataclass

import numpy as np
import torch

from . import dsp
from .data import SyntheticDataset
from .model import ModelSettings, TwoStageModel


@dataclass
class TrainSettings:
    lr: float = 5e-4
    lr_decay: float = 0.98
    grad_clip: float = 5.0
    epochs: int = 20
    batch_size: int = 8
    patience: int = 5
    val_fraction: float = 0.15
    seed: int = 0


def spectrogram_tensors(dataset: SyntheticDataset) -> tuple[torch.Tensor, torch.Tensor]:
    """Precompute complex spectrograms for every utterance: (noisy, clean)."""
    noisy, clean = [], []
    for i in range(len(dataset)):
        u = dataset[i]
        noisy.append(dsp.stft(u.noisy))
        clean.append(dsp.stft(u.clean))
    to_t = lambda a: torch.tensor(np.stack(a), dtype=torch.complex64)
    return to_t(noisy), to_t(clean)


def clip_gradients(parameters, max_norm: float) -> tuple[float, float]:
    """Clip in place; returns (pre-clip, post-clip) global L2 norms."""
    params = [p for p in parameters if p.grad is not None]
    pre = float(torch.nn.utils.clip_grad_norm_(params, max_norm))
    post = float(torch.linalg.vector_norm(torch.stack([p.grad.norm() for p in params])))
    return pre, post


def _loss_for(model: TwoStageModel, xn, xc, stage: str) -> torch.Tensor:
    stage1_only = stage == "stage1"
    s1, s = model(xn, stage1_only=stage1_only)
    return dsp.total_loss(xc, s1 if stage1_only else s)


def _run(model, params, xn, xc, ts: TrainSettings, stage: str) -> dict:
    n = xn.shape[0]
    n_val = max(1, int(n * ts.val_fraction))
    gen = torch.Generator().manual_seed(ts.seed)
    perm = torch.randperm(n, generator=gen)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    opt = torch.optim.AdamW(params, lr=ts.lr)
    sched = torch.optim.lr_scheduler.ExponentialLR(opt, gamma=ts.lr_decay)
    history = {
        "stage": stage,
        "train_loss": [],
        "val_loss": [],
        "grad_norm_preclip": [],
        "lr": [],
        "convergence": f"{ts.patience}-epoch validation-loss patience",
    }
    best_val, best_state, stale = float("inf"), None, 0
    for epoch in range(ts.epochs):
        model.train()
        order = train_idx[torch.randperm(len(train_idx), generator=gen)]
        losses, norms = [], []
        for lo in range(0, len(order), ts.batch_size):
            idx = order[lo : lo + ts.batch_size]
            opt.zero_grad()
            loss = _loss_for(model, xn[idx], xc[idx], stage)
            loss.backward()
            pre, _ = clip_gradients(params, ts.grad_clip)
            opt.step()
            losses.append(float(loss.detach()))
            norms.append(pre)
        sched.step()
        model.eval()
        with torch.no_grad():
            val = float(_loss_for(model, xn[val_idx], xc[val_idx], stage))
        history["train_loss"].append(float(np.mean(losses)))
        history["val_loss"].append(val)
        history["grad_norm_preclip"].append(float(np.mean(norms)))
        history["lr"].append(sched.get_last_lr()[0])
        if val < best_val - 1e-6:
            best_val, stale = val, 0
            best_state = copy.deepcopy(model.state_dict())
        else:
            stale += 1
            if stale >= ts.patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    return history


def _checkpoint(model: TwoStageModel, stage: str, history: dict) -> dict:
    return {
        "stage": stage,
        "model_settings": asdict(model.settings),
        "state_dict": {k: v.clone() for k, v in model.state_dict().items()},
        "history": history,
    }


def train_stage1(
    dataset: SyntheticDataset,
    model_settings: ModelSettings = ModelSettings(),
    train_settings: TrainSettings = TrainSettings(),
) -> dict:
    torch.manual_seed(train_settings.seed)
    model = TwoStageModel(model_settings)
    xn, xc = spectrogram_tensors(dataset)
    history = _run(
        model, list(model.stage1.parameters()), xn, xc, train_settings, "stage1"
    )
    return _checkpoint(model, "stage1", history)


def train_joint(
    dataset: SyntheticDataset,
    stage1_checkpoint: dict | None,
    train_settings: TrainSettings = TrainSettings(),
) -> dict:
    if not stage1_checkpoint or stage1_checkpoint.get("stage") != "stage1":
        raise ValueError("joint training requires a completed stage-1 checkpoint")
    settings = ModelSettings(**stage1_checkpoint["model_settings"])
    torch.manual_seed(train_settings.seed + 1)
    model = TwoStageModel(settings)
    model.load_state_dict(stage1_checkpoint["state_dict"])
    xn, xc = spectrogram_tensors(dataset)
    history = _run(model, list(model.parameters()), xn, xc, train_settings, "joint")
    ckpt = _checkpoint(model, "joint", history)
    ckpt["history"]["stage1_history"] = stage1_checkpoint["history"]
    return ckpt


def model_from_checkpoint(ckpt: dict) -> TwoStageModel:
    model = TwoStageModel(ModelSettings(**ckpt["model_settings"]))
    model.load_state_dict(ckpt["state_dict"])
    model.eval()
    return model


def evaluate_si_sdr(ckpt: dict, dataset: SyntheticDataset, use_stage1_only=False) -> dict:
    """Mean SI-SDR (dB) of noisy input and enhanced output against clean."""
    model = model_from_checkpoint(ckpt)
    noisy_scores, enhanced_scores = [], []
    with torch.no_grad():
        for i in range(len(dataset)):
            u = dataset[i]
            xn = torch.tensor(dsp.stft(u.noisy), dtype=torch.complex64)[None]
            s1, s = model(xn)
            est = (s1 if use_stage1_only else s)[0].numpy().astype(np.complex128)
            wav = dsp.istft(est)
            n = min(len(wav), len(u.clean))
            noisy_scores.append(dsp.si_sdr(u.clean[:n], u.noisy[:n]))
            enhanced_scores.append(dsp.si_sdr(u.clean[:n], wav[:n]))
    return {
        "noisy_si_sdr_db": float(np.mean(noisy_scores)),
        "enhanced_si_sdr_db": float(np.mean(enhanced_scores)),
        "improvement_db": float(np.mean(enhanced_scores) - np.mean(noisy_scores)),
    }
