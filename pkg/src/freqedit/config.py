"""Strict JSON run-configuration parsing.

Unknown keys are errors, not warnings: a silent typo in alpha0 or
k_sharp invalidates an experiment. Parse errors carry the JSON line
number where available and the key path otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from .corrector import PRESETS, FreqEditConfig
from .editsim import EditSession, INTERVENTIONS, Scene, Sprite, Texture, default_scene
from .flow import Degradation, EditCondition, uniform_schedule


class ConfigError(ValueError):
    pass


def _check_keys(d: dict, allowed, path: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}; allowed keys are {sorted(allowed)}")


def _texture(d: dict, path: str) -> Texture:
    allowed = {f.name for f in fields(Texture)}
    _check_keys(d, allowed, path)
    if "color" in d:
        d = {**d, "color": tuple(d["color"])}
    try:
        return Texture(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _scene(d: dict, path: str) -> Scene:
    _check_keys(d, {"height", "width", "background", "sprites", "seed"}, path)
    sprites = []
    for i, s in enumerate(d.get("sprites", [])):
        _check_keys(s, {"rect", "texture"}, f"{path}.sprites[{i}]")
        sprites.append(Sprite(rect=tuple(s["rect"]),
                              texture=_texture(s.get("texture", {}), f"{path}.sprites[{i}].texture")))
    try:
        return Scene(
            height=d.get("height", 64),
            width=d.get("width", 64),
            background=_texture(d.get("background", {}), f"{path}.background"),
            sprites=tuple(sprites),
            seed=d.get("seed", 0),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _turn(d: dict, path: str) -> EditCondition:
    allowed = {"kind", "rect", "scale", "offset", "shift", "texture", "gamma", "noise_sigma"}
    _check_keys(d, allowed, path)
    try:
        return EditCondition(
            kind=d.get("kind", "identity"),
            rect=tuple(d["rect"]) if "rect" in d else None,
            scale=tuple(d["scale"]) if "scale" in d else None,
            offset=tuple(d["offset"]) if "offset" in d else None,
            shift=tuple(d["shift"]) if "shift" in d else None,
            texture=_texture(d["texture"], f"{path}.texture") if "texture" in d else None,
            degradation=Degradation(gamma=d.get("gamma", 1.0),
                                    noise_sigma=d.get("noise_sigma", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _freqedit_cfg(d: dict, path: str) -> FreqEditConfig:
    allowed = {f.name for f in fields(FreqEditConfig)} | {"preset"}
    _check_keys(d, allowed, path)
    d = dict(d)
    preset = d.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"{path}.preset: unknown preset {preset!r}, expected one of {sorted(PRESETS)}")
        d = {**PRESETS[preset], **d}
    try:
        return FreqEditConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class EmitFlags:
    csv: bool = True
    png_per_turn: bool = False
    svg_plot: bool = False


@dataclass(frozen=True)
class RunConfig:
    scene: Scene
    turns: tuple[EditCondition, ...]
    mode: str = "baseline"
    freqedit: FreqEditConfig = field(default_factory=FreqEditConfig)
    steps: int = 28
    seed: int = 0
    intervention: str = "none"
    emit: EmitFlags = field(default_factory=EmitFlags)
    out_dir: str | None = None

    def session(self) -> EditSession:
        from .editsim import render_scene
        return EditSession(
            x1=render_scene(self.scene),
            turns=self.turns,
            mode=self.mode,
            cfg=self.freqedit,
            seed=self.seed,
            schedule=uniform_schedule(self.steps),
            intervention=self.intervention,
        )


def parse_config(d: dict) -> RunConfig:
    allowed = {"scene", "turns", "mode", "freqedit", "steps", "seed",
               "intervention", "emit", "out_dir"}
    _check_keys(d, allowed, "config")
    if "turns" not in d or not d["turns"]:
        raise ConfigError("config.turns: at least one turn is required")
    mode = d.get("mode", "baseline")
    if mode not in ("baseline", "freqedit"):
        raise ConfigError(f"config.mode: expected 'baseline' or 'freqedit', got {mode!r}")
    intervention = d.get("intervention", "none")
    if intervention not in INTERVENTIONS:
        raise ConfigError(f"config.intervention: expected one of {INTERVENTIONS}, got {intervention!r}")
    steps = d.get("steps", 28)
    if not isinstance(steps, int) or steps < 1:
        raise ConfigError(f"config.steps: expected a positive integer, got {steps!r}")
    emit_d = d.get("emit", {})
    _check_keys(emit_d, {"csv", "png_per_turn", "svg_plot"}, "config.emit")
    scene = _scene(d["scene"], "config.scene") if "scene" in d else default_scene()
    return RunConfig(
        scene=scene,
        turns=tuple(_turn(t, f"config.turns[{i}]") for i, t in enumerate(d["turns"])),
        mode=mode,
        freqedit=_freqedit_cfg(d.get("freqedit", {}), "config.freqedit"),
        steps=steps,
        seed=d.get("seed", 0),
        intervention=intervention,
        emit=EmitFlags(**emit_d),
        out_dir=d.get("out_dir"),
    )


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level config must be a JSON object")
    return parse_config(data)
