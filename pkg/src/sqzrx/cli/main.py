"""Command-line orchestration: simulate, calibrate, reconstruct,
keyrate, report, sweep.

All stages hand artifacts to each other through files inside the run
directory (``--out``):

    signal.sqzt / vacuum.sqzt / electronic.sqzt   raw traces
    manifest.txt                                  ground truth + config echo
    ensemble.sqzq (ensemble1/2.sqzq)              quadrature ensembles
    record.txt, frames.csv                        reconstruction results
    covariance.txt                                4x4 covariance (x1 p1 x2 p2)
    keyrate.txt, keyrate.csv                      key-rate reports
    sweep.csv                                     detuning sweep
    fig_psd/fig_detuning/fig_polarization/fig_frames .png, summary.txt

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical-model error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from ..dsp.ensemble import QuadratureEnsemble
from ..dsp.pipeline import reconstruct
from ..dsp.qio import read_ensemble, write_ensemble
from ..dsp.spectrum import welch_psd
from ..errors import (AmbiguousRotation, ConfigError, DataError, SqzrxError)
from ..gaussian.covariance import (CovMatrix4, dump_covariance,
                                   estimate_covariance, load_covariance)
from ..qkd.rates import KeyRateReport, KeyScenario, key_rates
from ..simkit.analysis import boxcar_band_average_db
from ..simkit.channel import apply_channel
from ..simkit.detect import calibration_traces, heterodyne_detect
from ..simkit.models import JonesChannel, PilotPlan, ReceiverModel, SqueezerModel
from ..simkit.scenarios import (lossy_thermal_arm, split_balanced,
                                solve_squeezer_for_band_targets)
from ..simkit.synth import add_pilots, synthesize_squeezed_field, vacuum_field
from ..simkit.traceio import read_trace, write_trace
from .config import RunConfig

HETERODYNE_SCENARIOS = ("link10km", "rf_het")


# --------------------------------------------------------------------------
# model builders

def build_squeezer(cfg: RunConfig) -> SqueezerModel:
    if cfg["squeezer.pump_ratio"] >= 0.0:
        return SqueezerModel(
            pump_ratio=cfg["squeezer.pump_ratio"],
            bandwidth_gamma=cfg["squeezer.gamma"],
            escape_efficiency=cfg["squeezer.escape_efficiency"],
            rms_phase_noise=cfg["squeezer.rms_phase_noise"])
    model = solve_squeezer_for_band_targets(
        10.0 ** (-cfg["squeezer.squeezing_db"] / 10.0),
        10.0 ** (cfg["squeezer.antisqueezing_db"] / 10.0),
        cfg["squeezer.bandwidth"], gamma=cfg["squeezer.gamma"])
    if cfg["squeezer.rms_phase_noise"] > 0.0:
        model = SqueezerModel(model.pump_ratio, model.bandwidth_gamma,
                              model.escape_efficiency,
                              cfg["squeezer.rms_phase_noise"])
    return model


def build_receiver(cfg: RunConfig, detuning: float | None = None
                   ) -> ReceiverModel:
    return ReceiverModel(
        lo_detuning=cfg["receiver.lo_detuning"] if detuning is None
        else detuning,
        lo_linewidth=cfg["receiver.lo_linewidth"],
        adc_rate=cfg["receiver.adc_rate"],
        adc_bits=cfg["receiver.adc_bits"],
        clock_ppm=cfg["receiver.clock_ppm"],
        electronic_noise_db=cfg["receiver.electronic_noise_db"],
        detector_efficiency=cfg["receiver.detector_efficiency"],
        signal_bandwidth=cfg["receiver.signal_bandwidth"])


def build_pilots(cfg: RunConfig) -> PilotPlan:
    return PilotPlan(frequencies=list(cfg["pilot.frequencies"]),
                     powers=list(cfg["pilot.powers"]))


def build_jones(cfg: RunConfig) -> JonesChannel:
    return JonesChannel(loss_db=cfg["channel.loss_db"],
                        theta=cfg["channel.theta"], phi=cfg["channel.phi"])


def passive_covariance_model(vsx: float, vsp: float, t1: float, w1: float,
                             t2: float, w2: float) -> np.ndarray:
    """Analytic (x1, p1, x2, p2) covariance of the split-source link:
    balanced splitting of a squeezed source followed by independent lossy
    arms admixing thermal environments."""
    cov = np.zeros((4, 4))
    for q, vs in ((0, vsx), (1, vsp)):
        shared, corr = 0.5 * (vs + 1.0), 0.5 * (vs - 1.0)
        cov[q, q] = t1 * shared + (1.0 - t1) * w1
        cov[2 + q, 2 + q] = t2 * shared + (1.0 - t2) * w2
        cov[q, 2 + q] = cov[2 + q, q] = np.sqrt(t1 * t2) * corr
    return cov


# --------------------------------------------------------------------------
# artifact helpers

def _path(out: str, name: str) -> str:
    return os.path.join(out, name)


def _require(out: str, name: str) -> str:
    path = _path(out, name)
    if not os.path.exists(path):
        raise DataError(f"missing input file: {path} "
                        f"(run the producing stage first)")
    return path


def _write_manifest(out: str, cfg: RunConfig, traces: dict) -> None:
    with open(_path(out, "manifest.txt"), "w") as f:
        f.write("# sqzrx run manifest\n[ground_truth]\n")
        for name, trace in traces.items():
            for key in sorted(trace.metadata):
                f.write(f"{name}.{key} = {trace.metadata[key]}\n")
        f.write("\n[config]\n")
        f.write(cfg.as_text())


def load_record(path: str) -> dict:
    """Parse a reconstruction record written by ReconstructionRecord.as_text."""
    out = {}
    for line in open(path):
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("frame_") or key == "pilot_freqs":
            out[key] = [float(v) for v in value.split(",") if v]
        else:
            out[key] = float(value)
    return out


# --------------------------------------------------------------------------
# stages

def _simulate_heterodyne(cfg: RunConfig, out: str) -> None:
    seeds = cfg.stage_seeds()
    rx = build_receiver(cfg)
    pilots = build_pilots(cfg)
    duration = cfg["run.frames"] * cfg["run.frame_duration"]
    field = synthesize_squeezed_field(build_squeezer(cfg), duration,
                                      rx.adc_rate, seeds[0])
    field = add_pilots(field, pilots, rx.adc_rate)
    ex, ey = apply_channel(field, build_jones(cfg), seeds[1])
    channels = (ex, ey) if cfg["run.scenario"] == "link10km" else ex
    signal = heterodyne_detect(channels, pilots, rx, seeds[2],
                               inject_pilots=False,
                               metadata={"channel_loss_db": cfg["channel.loss_db"],
                                         "channel_theta": cfg["channel.theta"],
                                         "channel_phi": cfg["channel.phi"]})
    vacuum, electronic = calibration_traces(
        rx, cfg["run.calibration_duration"], seeds[3])
    write_trace(_path(out, "signal.sqzt"), signal)
    write_trace(_path(out, "vacuum.sqzt"), vacuum)
    write_trace(_path(out, "electronic.sqzt"), electronic)
    _write_manifest(out, cfg, {"signal": signal, "vacuum": vacuum,
                               "electronic": electronic})


def _simulate_passive(cfg: RunConfig, out: str) -> None:
    seeds = cfg.stage_seeds()
    n = cfg["passive.n_symbols"]
    rng = np.random.default_rng(seeds[4])
    x = rng.standard_normal(n) * np.sqrt(cfg["passive.source_sq_var"])
    p = rng.standard_normal(n) * np.sqrt(cfg["passive.source_asq_var"])
    source = (x + 1j * p) * 0.5 ** 0.5
    arm1, arm2 = split_balanced(source, seeds[5])
    arm1 = lossy_thermal_arm(arm1, cfg["passive.arm1_transmissivity"],
                             cfg["passive.arm1_thermal"], seeds[6])
    arm2 = lossy_thermal_arm(arm2, cfg["passive.arm2_transmissivity"],
                             cfg["passive.arm2_thermal"], seeds[7])
    for name, arm in (("ensemble1", arm1), ("ensemble2", arm2)):
        ens = QuadratureEnsemble(
            x=np.sqrt(2.0) * np.real(arm), p=np.sqrt(2.0) * np.imag(arm),
            normalization="snu", samples_per_state=1,
            bandwidth=cfg["squeezer.bandwidth"])
        write_ensemble(_path(out, name + ".sqzq"), ens)
    with open(_path(out, "manifest.txt"), "w") as f:
        f.write("# sqzrx run manifest\n[config]\n")
        f.write(cfg.as_text())


def cmd_simulate(cfg: RunConfig, args) -> None:
    if cfg["run.scenario"] == "passive_qkd":
        _simulate_passive(cfg, args.out)
    else:
        _simulate_heterodyne(cfg, args.out)


def cmd_calibrate(cfg: RunConfig, args) -> None:
    if cfg["run.scenario"] == "passive_qkd":
        raise ConfigError("calibrate applies to heterodyne scenarios only")
    seeds = cfg.stage_seeds()
    rx = build_receiver(cfg)
    vacuum, electronic = calibration_traces(
        rx, cfg["run.calibration_duration"], seeds[3])
    write_trace(_path(args.out, "vacuum.sqzt"), vacuum)
    write_trace(_path(args.out, "electronic.sqzt"), electronic)
    with open(_path(args.out, "calibration.txt"), "w") as f:
        f.write("# sqzrx calibration summary\n")
        for name, trace in (("vacuum", vacuum), ("electronic", electronic)):
            var = float(np.var(trace.physical(0)))
            f.write(f"{name}_variance = {var:.6e}\n")


def _reconstruct_once(cfg: RunConfig, signal, vacuum, electronic,
                      track_phase: bool, decorrelate: bool):
    """One pipeline pass; on an ambiguous rotation angle (near-symmetric
    quadratures, e.g. vacuum input) fall back to no decorrelation."""
    try:
        return reconstruct(
            signal, vacuum, electronic,
            tx_pilot_freqs=list(cfg["pilot.frequencies"]),
            approx_detuning=cfg["receiver.lo_detuning"],
            samples_per_state=cfg["run.samples_per_state"],
            n_frames=cfg["run.frames"],
            track_phase=track_phase, decorrelate=decorrelate), decorrelate
    except AmbiguousRotation:
        if not decorrelate:
            raise
        return reconstruct(
            signal, vacuum, electronic,
            tx_pilot_freqs=list(cfg["pilot.frequencies"]),
            approx_detuning=cfg["receiver.lo_detuning"],
            samples_per_state=cfg["run.samples_per_state"],
            n_frames=cfg["run.frames"],
            track_phase=track_phase, decorrelate=False), False


def cmd_reconstruct(cfg: RunConfig, args) -> None:
    out = args.out
    if cfg["run.scenario"] == "passive_qkd":
        ens1 = read_ensemble(_require(out, "ensemble1.sqzq"))
        ens2 = read_ensemble(_require(out, "ensemble2.sqzq"))
        cov = estimate_covariance(ens1, ens2)
        with open(_path(out, "covariance.txt"), "w") as f:
            f.write(dump_covariance(cov))
        return
    signal = read_trace(_require(out, "signal.sqzt"))
    vacuum = read_trace(_require(out, "vacuum.sqzt"))
    electronic = read_trace(_require(out, "electronic.sqzt"))
    (ensemble, record), decorrelated = _reconstruct_once(
        cfg, signal, vacuum, electronic,
        track_phase=cfg["dsp.track_phase"],
        decorrelate=cfg["dsp.decorrelate"])
    write_ensemble(_path(out, "ensemble.sqzq"), ensemble)
    with open(_path(out, "record.txt"), "w") as f:
        f.write(record.as_text())
        f.write(f"decorrelated = {int(decorrelated)}\n")
    with open(_path(out, "frames.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", "squeezing_db", "antisqueezing_db"])
        for k, (sq, asq) in enumerate(zip(record.frame_squeezing_db,
                                          record.frame_antisqueezing_db)):
            writer.writerow([k, f"{sq:.4f}", f"{asq:.4f}"])
    if args.stages:
        stage_flags = {"stage_frequency": (False, False),
                       "stage_phase": (True, False),
                       "stage_rotation": (True, True)}
        for name, (track, deco) in stage_flags.items():
            (stage_ens, _), _ = _reconstruct_once(
                cfg, signal, vacuum, electronic,
                track_phase=track, decorrelate=deco)
            write_ensemble(_path(out, name + ".sqzq"), stage_ens)


def _covariance_for_keyrate(cfg: RunConfig, out: str) -> CovMatrix4:
    cov_path = _path(out, "covariance.txt")
    if os.path.exists(cov_path):
        return load_covariance(open(cov_path).read())
    record_path = _path(out, "record.txt")
    if not os.path.exists(record_path):
        raise DataError(f"missing input file: {cov_path} (or {record_path} "
                        f"for a model-based covariance)")
    # Model bridge for single-receiver runs: undo the measured channel loss
    # to recover the source variances, then evaluate the analytic
    # split-source covariance with the configured arm parameters.
    record = load_record(record_path)
    t_ch = 10.0 ** (-cfg["channel.loss_db"] / 10.0)
    v_sq = 10.0 ** (np.mean(record["frame_squeezing_db"]) / 10.0)
    v_asq = 10.0 ** (np.mean(record["frame_antisqueezing_db"]) / 10.0)
    vsx = 1.0 + (v_sq - 1.0) / t_ch
    vsp = 1.0 + (v_asq - 1.0) / t_ch
    if vsx <= 0.0:
        raise DataError("measured squeezing implies a negative source variance")
    entries = passive_covariance_model(
        vsx, vsp,
        cfg["passive.arm1_transmissivity"], cfg["passive.arm1_thermal"],
        cfg["passive.arm2_transmissivity"], cfg["passive.arm2_thermal"])
    n = max(10 ** 5, len(read_ensemble(_path(out, "ensemble.sqzq")))
            if os.path.exists(_path(out, "ensemble.sqzq")) else 10 ** 5)
    se = np.abs(entries) * np.sqrt(2.0 / n) + 1e-12
    return CovMatrix4(entries=entries, ci=se, n_symbols=n)


def cmd_keyrate(cfg: RunConfig, args) -> None:
    cov = _covariance_for_keyrate(cfg, args.out)
    betas = args.beta if args.beta else cfg["qkd.beta"]
    reports = [key_rates(cov, KeyScenario(beta=beta),
                         arm2_loss_db=cfg["qkd.arm2_loss_db"])
               for beta in betas]
    with open(_path(args.out, "keyrate.txt"), "w") as f:
        for report in reports:
            f.write(report.as_text() + "\n")
    with open(_path(args.out, "keyrate.csv"), "w") as f:
        f.write(KeyRateReport.CSV_HEADER + "\n")
        for report in reports:
            f.write(report.as_csv_row() + "\n")


def cmd_sweep(cfg: RunConfig, args) -> None:
    """LO-detuning sweep: simulate + reconstruct one short run per
    detuning, recording measured and model band-averaged squeezing."""
    if cfg["run.scenario"] == "passive_qkd":
        raise ConfigError("sweep applies to heterodyne scenarios only")
    seeds = cfg.stage_seeds()
    model = build_squeezer(cfg)
    pilots = build_pilots(cfg)
    jones = build_jones(cfg)
    sps = cfg["run.samples_per_state"]
    duration = cfg["run.sweep_duration"]
    rows = []
    for detuning in cfg["run.detunings"]:
        rx = build_receiver(cfg, detuning=detuning)
        field = synthesize_squeezed_field(model, duration, rx.adc_rate,
                                          seeds[0])
        field = add_pilots(field, pilots, rx.adc_rate)
        ex, ey = apply_channel(field, jones, seeds[1])
        channels = (ex, ey) if cfg["run.scenario"] == "link10km" else ex
        signal = heterodyne_detect(channels, pilots, rx, seeds[2],
                                   inject_pilots=False)
        vacuum, electronic = calibration_traces(rx, duration, seeds[3])
        try:
            pair = reconstruct(signal, vacuum, electronic,
                               tx_pilot_freqs=list(cfg["pilot.frequencies"]),
                               approx_detuning=detuning,
                               samples_per_state=sps, n_frames=1,
                               decorrelate=False)
        except AmbiguousRotation:  # pragma: no cover - decorrelate is off
            raise
        _, record = pair
        measured = float(np.mean(record.frame_squeezing_db))
        expected = boxcar_band_average_db(
            detuning, model, sps, adc_rate=rx.adc_rate,
            transmissivity=jones.transmissivity,
            pilot_freqs=list(cfg["pilot.frequencies"]))
        rows.append((detuning, measured, expected))
    with open(_path(args.out, "sweep.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["detuning_hz", "measured_db", "expected_db"])
        for detuning, measured, expected in rows:
            writer.writerow([f"{detuning:.0f}", f"{measured:.4f}",
                             f"{expected:.4f}"])


def cmd_report(cfg: RunConfig, args) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = args.out
    warnings = []
    summary = ["# sqzrx run summary"]

    def warn(text):
        warnings.append(text)
        print(f"warning: {text}", file=sys.stderr)

    # --- fig_psd: signal vs vacuum trace PSD
    sig_path, vac_path = _path(out, "signal.sqzt"), _path(out, "vacuum.sqzt")
    if os.path.exists(sig_path) and os.path.exists(vac_path):
        signal, vacuum = read_trace(sig_path), read_trace(vac_path)
        nfft = min(2 ** 14, len(signal.channels[0]))
        fig, ax = plt.subplots(figsize=(6, 4))
        for trace, label in ((signal, "signal"), (vacuum, "vacuum")):
            f, pxx = welch_psd(trace.physical(0).astype(np.float64), nfft,
                               trace.sample_rate)
            ax.semilogy(f / 1e6, pxx, label=label, lw=0.8)
        ax.set_xlabel("frequency (MHz)")
        ax.set_ylabel("PSD (SNU/Hz)")
        ax.legend()
        fig.savefig(_path(out, "fig_psd.png"), dpi=120)
        plt.close(fig)
    else:
        warn("fig_psd skipped: signal.sqzt/vacuum.sqzt not found")

    # --- fig_detuning: measured sweep points over the model curve
    model = build_squeezer(cfg)
    jones = build_jones(cfg)
    detunings = np.asarray(cfg["run.detunings"], dtype=float)
    expected = [boxcar_band_average_db(
        d, model, cfg["run.samples_per_state"],
        adc_rate=cfg["receiver.adc_rate"],
        transmissivity=jones.transmissivity,
        pilot_freqs=list(cfg["pilot.frequencies"])) for d in detunings]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(detunings / 1e6, expected, "k--", label="model")
    sweep_path = _path(out, "sweep.csv")
    if os.path.exists(sweep_path):
        with open(sweep_path, newline="") as f:
            rows = list(csv.DictReader(f))
        ax.plot([float(r["detuning_hz"]) / 1e6 for r in rows],
                [float(r["measured_db"]) for r in rows], "o", label="measured")
    else:
        warn("fig_detuning: sweep.csv not found; model curve only")
    ax.set_xlabel("LO detuning (MHz)")
    ax.set_ylabel("band-averaged squeezing (dB)")
    ax.legend()
    fig.savefig(_path(out, "fig_detuning.png"), dpi=120)
    plt.close(fig)

    # --- fig_polarization and fig_frames from the reconstruction record
    record_path = _path(out, "record.txt")
    if os.path.exists(record_path):
        record = load_record(record_path)
        fig, ax = plt.subplots(figsize=(5, 4))
        names = ["theta", "phi"]
        ax.bar(names, [record["theta_hat"], record["phi_hat"]],
               color="tab:blue", label="recovered")
        ax.plot(names, [cfg["channel.theta"], cfg["channel.phi"]], "k_",
                markersize=24, label="configured")
        ax.set_ylabel("angle (rad)")
        ax.set_title(f"residual Y power: "
                     f"{record.get('residual_y_power_db', 0.0):+.2f} dB "
                     f"vs vacuum")
        ax.legend()
        fig.savefig(_path(out, "fig_polarization.png"), dpi=120)
        plt.close(fig)

        sq = record.get("frame_squeezing_db", [])
        asq = record.get("frame_antisqueezing_db", [])
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(range(len(sq)), sq, "o-", label="squeezed")
        ax.plot(range(len(asq)), asq, "s-", label="anti-squeezed")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_xlabel("frame")
        ax.set_ylabel("band-averaged variance (dB SNU)")
        ax.legend()
        fig.savefig(_path(out, "fig_frames.png"), dpi=120)
        plt.close(fig)

        summary.append(f"carrier_freq = {record['carrier_freq']:.3f} Hz")
        summary.append(f"clock_ratio = {record['clock_ratio']:.9f}")
        summary.append(f"theta_hat = {record['theta_hat']:.4f} rad")
        summary.append(f"phi_hat = {record['phi_hat']:.4f} rad")
        if sq:
            summary.append(f"mean_squeezing_db = {np.mean(sq):.3f}")
            summary.append(f"mean_antisqueezing_db = {np.mean(asq):.3f}")
    else:
        warn("fig_polarization/fig_frames skipped: record.txt not found")

    keyrate_path = _path(out, "keyrate.csv")
    if os.path.exists(keyrate_path):
        with open(keyrate_path, newline="") as f:
            for row in csv.DictReader(f):
                summary.append(
                    f"beta={float(row['beta']):.2f}: "
                    f"K_X={float(row['K_X']):.3e} "
                    f"K_P={float(row['K_P']):.3e} "
                    f"K_XP={float(row['K_XP']):.3e} bits/symbol")

    for text in warnings:
        summary.append(f"warning: {text}")
    with open(_path(out, "summary.txt"), "w") as f:
        f.write("\n".join(summary) + "\n")


# --------------------------------------------------------------------------
# entry point

COMMANDS = {
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "reconstruct": cmd_reconstruct,
    "keyrate": cmd_keyrate,
    "report": cmd_report,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqzrx",
        description="Squeezed-light receiver toolkit: simulation, DSP "
                    "reconstruction, and passive-QKD key rates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="key=value configuration file")
        p.add_argument("--seed", metavar="N", type=int, default=None,
                       help="master seed (overrides run.seed)")
        p.add_argument("--out", metavar="DIR", default="run",
                       help="run directory for all artifacts")
        p.add_argument("--scenario", default=None,
                       choices=["link10km", "rf_het", "passive_qkd"],
                       help="scenario preset (overrides run.scenario)")
        p.add_argument("--frames", metavar="N", type=int, default=None,
                       help="frame count (overrides run.frames)")
        p.add_argument("--beta", metavar="LIST", default=None,
                       help="comma-separated reconciliation efficiencies")
        p.add_argument("--stages", action="store_true",
                       help="emit per-stage ensembles (reconstruct only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.seed is not None:
            overrides["run.seed"] = args.seed
        if args.frames is not None:
            overrides["run.frames"] = args.frames
        if args.scenario is not None:
            overrides["run.scenario"] = args.scenario
        if args.beta is not None:
            try:
                args.beta = [float(v) for v in args.beta.split(",") if v]
            except ValueError as exc:
                raise ConfigError(f"--beta: cannot parse {args.beta!r}") from exc
        cfg = RunConfig.load(args.config, overrides)
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SqzrxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0
