"""Self-verification suite: every acceptance check behind `freqedit verify`.

Each criterion is a function returning (passed, detail). Checks are
closed-form or property-based against the synthetic flow models, so the
whole suite runs in well under a minute at 64x64 resolution.
"""

from __future__ import annotations

import math
from dataclasses import replace
from functools import lru_cache

import numpy as np

from . import wavelet
from .corrector import FreqEditConfig, alpha_map, inject_adaptive, inject_uniform
from .editsim import EditSession, ablation_grid, default_scene, render_scene, run_session, variant_name
from .flow import (Degradation, EditCondition, OracleModel, Schedule, SamplerState,
                   VelocityModel, euler_step, lossy_target, reference_velocity, sample,
                   uniform_schedule)
from .grids import bilateral_filter, unsharp_mask
from .metrics import hf_ratio, psnr, ssim


def _bank():
    return wavelet.db4_filters()


def _random_grids(seed: int, count: int, shape=(16, 16, 3)):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal(shape) for _ in range(count)]


def check_perfect_reconstruction():
    bank = _bank()
    worst = 0.0
    for g in _random_grids(101, 100):
        rec = wavelet.idwt2(wavelet.dwt2(g, bank), bank)
        worst = max(worst, float(np.max(np.abs(rec - g))))
    return worst < 1e-10, f"max round-trip error {worst:.3e} (tol 1e-10)"


def check_parseval():
    bank = _bank()
    try:
        bank.validate()
    except ValueError as exc:
        return False, f"filter-bank invariant violated: {exc}"
    worst = 0.0
    for g in _random_grids(101, 100):
        e = wavelet.band_energy(wavelet.dwt2(g, bank))
        total = e["ll"] + e["d2"] + e["d1"]
        src = float(np.sum(g ** 2))
        worst = max(worst, abs(total - src) / src)
    return worst < 1e-9, f"max relative energy mismatch {worst:.3e} (tol 1e-9); taps valid at 1e-12"


def check_vanishing_moments():
    bank = _bank()
    h, w = 16, 32
    u = np.arange(w) / (w - 1)
    rows = 0.3 + 0.5 * u - 0.7 * u ** 2 + 0.9 * u ** 3
    g = np.tile(rows[None, :, None], (h, 1, 1))
    p = wavelet.dwt2(g, bank)
    interior = (w - len(bank.lo_analysis)) // 2 + 1  # x-indices with non-wrapping support
    worst = max(float(np.max(np.abs(b[:, :interior, :]))) for b in p.d1)
    return worst < 1e-8, f"max interior level-1 detail coefficient {worst:.3e} (tol 1e-8)"


def check_reference_velocity_landing():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        t_i = float(rng.uniform(0.05, 0.95))
        sched = Schedule((1.0, t_i, 0.0))
        z = rng.standard_normal((8, 8, 1))
        z_ref0 = rng.standard_normal((8, 8, 1))
        state = SamplerState(z=z, step_index=1, schedule=sched)
        v_ref = reference_velocity(z_ref0, state)
        landed = euler_step(state, v_ref)
        worst = max(worst, float(np.max(np.abs(landed.z - z_ref0))))
    return worst < 1e-12, f"max landing error over 50 states {worst:.3e} (tol 1e-12)"


class _TimeOnlyModel(VelocityModel):
    """State-independent velocity; isolates the compensation algebra."""

    def __init__(self, field: np.ndarray):
        self.field = field

    def eval(self, z, t, context, cond):
        return (0.5 + t) * self.field


def check_path_compensation_equivalence():
    rng = np.random.default_rng(11)
    field = rng.standard_normal((16, 16, 3))
    model = _TimeOnlyModel(field)
    context = rng.standard_normal((16, 16, 3))
    z1 = rng.standard_normal((16, 16, 3))
    sched = uniform_schedule(28)
    cond = EditCondition()
    pure = sample(model, z1, sched, context, cond)
    worst = 0.0
    bank = _bank()
    from .corrector import FreqEditCorrector
    for n in (1, 2, 4):
        cfg = FreqEditConfig(comp_period=n, lambda_q=0.0)
        hook = FreqEditCorrector(cfg, context, context, model, bank)
        corrected = sample(model, z1, sched, context, cond, corrector=hook)
        worst = max(worst, float(np.max(np.abs(corrected - pure))))
    return worst < 1e-10, f"max endpoint difference over n in (1,2,4): {worst:.3e} (tol 1e-10)"


def check_noop_identity():
    bank = _bank()
    x1 = render_scene(default_scene())
    sched = uniform_schedule(28)
    cfg = FreqEditConfig(alpha0=0.0, uniform_alpha=0.0, lambda_q=0.0)
    rng = np.random.default_rng(5)
    z1 = rng.standard_normal(x1.shape)
    worst = 0.0
    from .corrector import FreqEditCorrector
    for gamma in (1.0, 0.7):  # exact and lossy synthetic models
        cond = EditCondition(degradation=Degradation(gamma=gamma))
        model = OracleModel(lambda ctx, c: lossy_target(ctx, c, bank, seed=3))
        base = sample(model, z1, sched, x1, cond)
        hook = FreqEditCorrector(cfg, x1, x1, model, bank)
        corr = sample(model, z1, sched, x1, cond, corrector=hook)
        worst = max(worst, float(np.max(np.abs(corr - base))))
    return worst < 1e-12, f"max corrected-vs-baseline difference {worst:.3e} (tol 1e-12)"


def check_low_band_conservation():
    bank = _bank()
    cfg = FreqEditConfig()
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(50):
        v_edit = rng.standard_normal((16, 16, 3))
        v_ref = rng.standard_normal((16, 16, 3))
        for out in (inject_uniform(v_edit, v_ref, 1.7, bank),
                    inject_adaptive(v_edit, v_ref, cfg, bank)):
            d = np.max(np.abs(wavelet.dwt2(out, bank).ll2 - wavelet.dwt2(v_edit, bank).ll2))
            worst = max(worst, float(d))
    return worst < 1e-10, f"max low-band drift over 50 pairs, both injectors: {worst:.3e} (tol 1e-10)"


def _identity_turns(gamma: float, count: int = 10):
    return tuple(EditCondition(degradation=Degradation(gamma=gamma)) for _ in range(count))


@lru_cache(maxsize=None)
def _degradation_records(mode: str, intervention: str = "none"):
    session = EditSession(
        x1=render_scene(default_scene()),
        turns=_identity_turns(0.7),
        mode=mode,
        cfg=FreqEditConfig(),  # alpha0=1.6, k=2.0, n=4, inject_frac=0.3, lambda=0.3
        seed=0,
        schedule=uniform_schedule(28),
        intervention=intervention,
    )
    return run_session(session)


def check_degradation_law():
    records = _degradation_records("baseline")
    worst = 0.0
    for rec in records:
        expected = 0.7 ** rec.turn
        worst = max(worst, abs(rec.vs_original.hf_ratio / expected - 1.0))
    return worst < 1e-3, f"max relative deviation from 0.7^T: {worst:.3e} (tol 1e-3)"


def check_correction_efficacy():
    base = _degradation_records("baseline")
    freq = _degradation_records("freqedit")
    final = freq[-1].vs_original.hf_ratio
    floor = 10.0 * 0.7 ** 10
    ok_final = final >= floor
    ok_every = all(f.vs_original.hf_ratio >= b.vs_original.hf_ratio
                   for f, b in zip(freq, base) if f.turn >= 2)
    ok = ok_final and ok_every
    return ok, (f"turn-10 hf ratio {final:.4f} vs floor {floor:.4f}; "
                f"dominates baseline at turns >= 2: {ok_every}")


def check_intervention_directions():
    bank = _bank()
    x1 = render_scene(default_scene())
    e0 = wavelet.hf_energy(x1, bank)
    e_up = wavelet.hf_energy(unsharp_mask(x1), bank)
    e_dn = wavelet.hf_energy(bilateral_filter(x1), bank)
    ok_dir = e_up >= 1.05 * e0 and e_dn <= 0.95 * e0
    worst = 0.0
    for intervention in ("unsharp", "bilateral"):
        for rec in _degradation_records("baseline", intervention):
            worst = max(worst, abs(rec.vs_original.hf_ratio / 0.7 ** rec.turn - 1.0))
    ok = ok_dir and worst < 1e-3
    return ok, (f"hf energy: unsharp x{e_up / e0:.3f}, bilateral x{e_dn / e0:.3f} "
                f"(need >=1.05 / <=0.95); chain decay deviation {worst:.3e} (tol 1e-3)")


def check_metric_goldens():
    bank = _bank()
    a = np.full((16, 16, 3), 0.4)
    b = np.full((16, 16, 3), 0.5)
    err_psnr = abs(psnr(a, b) - 20.0)
    p, q = 0.5, 0.25
    c1 = 0.01 ** 2
    closed = (2 * p * q + c1) / (p * p + q * q + c1)
    err_ssim = abs(ssim(np.full((16, 16, 3), p), np.full((16, 16, 3), q)) - closed)
    self_ssim = ssim(render_scene(default_scene()), render_scene(default_scene()))
    x1 = render_scene(default_scene())
    cond = EditCondition(degradation=Degradation(gamma=0.7))
    err_hf = abs(hf_ratio(lossy_target(x1, cond, bank), x1, bank) - 0.7)
    ok = err_psnr < 1e-9 and err_ssim < 1e-9 and self_ssim == 1.0 and err_hf < 1e-6
    return ok, (f"psnr err {err_psnr:.2e} (1e-9), ssim closed-form err {err_ssim:.2e} (1e-9), "
                f"ssim(a,a)={self_ssim}, hf-ratio err {err_hf:.2e} (1e-6)")


def check_alpha_peaks():
    rng = np.random.default_rng(3)
    v = rng.standard_normal((16, 16, 3))
    results = []
    for alpha0, k in ((1.6, 2.0), (2.0, 1.6)):
        cfg = FreqEditConfig(alpha0=alpha0, k_sharp=k)
        peak = float(alpha_map(v, v, cfg).max())
        results.append(abs(peak - alpha0 * (math.exp(k) - 1.0)))
    worst = max(results)
    return worst < 1e-6, (f"peak errors vs alpha0*(e^k - 1) "
                          f"(10.2224 and 7.9061): {worst:.3e} (tol 1e-6)")


def check_cli_determinism():
    import tempfile
    from pathlib import Path

    from .cli import cmd_run
    from .config import parse_config

    cfg = parse_config({
        "mode": "baseline",
        "steps": 28,
        "seed": 0,
        "turns": [{"kind": "identity", "gamma": 0.7}] * 3,
    })
    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in ("a", "b"):
            out = Path(tmp) / name
            code = cmd_run(cfg, out)
            if code != 0:
                return False, f"cmd_run exited {code}"
            outputs.append((out / "metrics.csv").read_bytes())
    ok = outputs[0] == outputs[1]
    return ok, f"metrics.csv byte-identical across two runs: {ok}"


def check_ablation_ordering():
    session = EditSession(
        x1=render_scene(default_scene()),
        turns=_identity_turns(0.7),
        mode="freqedit",
        cfg=FreqEditConfig(),
        seed=0,
        schedule=uniform_schedule(28),
    )
    grid = ablation_grid(session)
    full = grid[variant_name(True, True, True)][-1].vs_original.hf_ratio
    singles = {
        "adaptive-off": grid[variant_name(False, True, True)][-1].vs_original.hf_ratio,
        "compensation-off": grid[variant_name(True, False, True)][-1].vs_original.hf_ratio,
        "guidance-off": grid[variant_name(True, True, False)][-1].vs_original.hf_ratio,
    }
    ok = all(full >= v - 1e-12 for v in singles.values())
    detail = ", ".join(f"{k}={v:.4f}" for k, v in singles.items())
    return ok, f"full variant turn-10 hf ratio {full:.4f} >= singles ({detail})"


CRITERIA = (
    ("wavelet-perfect-reconstruction", check_perfect_reconstruction),
    ("parseval-orthonormality", check_parseval),
    ("vanishing-moments", check_vanishing_moments),
    ("reference-velocity-landing", check_reference_velocity_landing),
    ("path-compensation-equivalence", check_path_compensation_equivalence),
    ("no-op-identity", check_noop_identity),
    ("low-band-conservation", check_low_band_conservation),
    ("degradation-law", check_degradation_law),
    ("correction-efficacy", check_correction_efficacy),
    ("frequency-intervention-directions", check_intervention_directions),
    ("metric-goldens", check_metric_goldens),
    ("alpha-peak-arithmetic", check_alpha_peaks),
    ("cli-determinism", check_cli_determinism),
    ("ablation-ordering", check_ablation_ordering),
)


def run_all(report=print) -> int:
    """Run every criterion; report one line each; return the failure count."""
    failures = 0
    for idx, (name, fn) in enumerate(CRITERIA, start=1):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        if not ok:
            failures += 1
        report(f"[{'PASS' if ok else 'FAIL'}] {idx:02d} {name}: {detail}")
    return failures
