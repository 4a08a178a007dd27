"""Human-readable key-value run configuration.

Format: one ``key = value`` pair per line, ``#`` comments, dotted prefixes
``model.``, ``stft.``, ``loss.`` plus bare path keys. Unknown keys are
rejected. Defaults reproduce the standard pipeline settings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from .losses import LossConfig
from .model import ModelConfig
from .spectral import StftParams


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    stft: StftParams = field(default_factory=StftParams)
    loss: LossConfig = field(default_factory=LossConfig)
    weights_path: str = ""
    input_path: str = ""
    output_path: str = ""


_PATH_KEYS = ("weights_path", "input_path", "output_path")


def _coerce(raw: str, kind):
    if kind is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean {raw!r}")
    return kind(raw)


def parse_run_config(text: str) -> RunConfig:
    sections = {
        "model": (ModelConfig, {}),
        "stft": (StftParams, {}),
        "loss": (LossConfig, {}),
    }
    field_types = {
        name: {f.name: f.type for f in fields(cls)} for name, (cls, _) in sections.items()
    }
    paths: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _PATH_KEYS:
            paths[key] = raw
            continue
        if "." not in key:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        section, name = key.split(".", 1)
        if section not in sections or name not in field_types[section]:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        kind = field_types[section][name]
        if isinstance(kind, str):  # postponed annotations
            kind = {"int": int, "float": float, "str": str, "bool": bool}[kind]
        sections[section][1][name] = _coerce(raw, kind)
    return RunConfig(
        model=ModelConfig(**sections["model"][1]),
        stft=StftParams(**sections["stft"][1]),
        loss=LossConfig(**sections["loss"][1]),
        **paths,
    )


def load_run_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(fh.read())


def format_run_config(rc: RunConfig) -> str:
    lines = []
    for section, obj in (("model", rc.model), ("stft", rc.stft), ("loss", rc.loss)):
        for key, value in asdict(obj).items():
            lines.append(f"{section}.{key} = {value}")
    for key in _PATH_KEYS:
        value = getattr(rc, key)
        if value:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def save_run_config(rc: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_run_config(rc))
