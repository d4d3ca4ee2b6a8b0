"""Command-line interface: ``dtb simulate|rom|dtb|invert|image|verify``.

Exit codes: 0 success, 2 validation error, 3 numerical failure (including a
failed verification check). ``DTB_THREADS`` caps BLAS/OpenMP threads; it
only takes effect when set before numpy is first imported, which is the case
for the ``dtb`` console script.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .errors import DtbError, NumericalError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "BLIS_NUM_THREADS")

log = logging.getLogger("dtb")


def apply_thread_cap(environ=os.environ) -> int | None:
    value = environ.get("DTB_THREADS")
    if not value:
        return None
    try:
        threads = int(value)
    except ValueError:
        raise ValidationError(f"DTB_THREADS must be a positive integer, got {value!r}") from None
    if threads < 1:
        raise ValidationError(f"DTB_THREADS must be a positive integer, got {value!r}")
    for var in _THREAD_VARS:
        environ[var] = str(threads)
    return threads


# --------------------------------------------------------------------------
# config handling


def _config(args, required: bool = True):
    from . import io

    if args.config is None:
        if required:
            raise ValidationError("--config is required for this command")
        return None
    cfg = io.load_config(io.resolve_config(args.config))
    for key in ("n", "tau", "solver", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    # flag overrides go through the schema too
    io.validate_config(cfg)
    return cfg


def _output(args, cfg, command: str, suffix: str) -> Path:
    if args.out:
        return Path(args.out)
    if cfg and command in cfg.get("outputs", {}):
        return Path(cfg["outputs"][command])
    stem = cfg.get("name", "dtb") if cfg else Path(args.data).stem
    return Path(f"{stem}_{command}{suffix}")


def _reference_medium(cfg):
    from . import models

    return models.medium_from_spec(cfg["reference"]) if "reference" in cfg else models.reference_from_spec(cfg["medium"])


def _synthesize(cfg, medium, tau: float, two_n: int):
    from . import forward, models

    pulse = models.pulse_from_spec(cfg["pulse"])
    return forward.simulate(medium, pulse, tau, two_n, cfg.get("solver", "spectral"), cfg.get("substeps"))


def _reference_for(data, cfg):
    """Reference frames in the acquisition of ``data`` (its tau and frame count)."""
    return _synthesize(cfg, _reference_medium(cfg), data.tau, data.two_n)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# --------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    import numpy as np

    from . import forward, io, models

    cfg = _config(args)
    medium = _reference_medium(cfg) if args.reference else models.medium_from_spec(cfg["medium"])
    data = _synthesize(cfg, medium, cfg["tau"], 2 * cfg["n"])
    if cfg["noise"] > 0:
        rng = np.random.default_rng(cfg["seed"])
        g = rng.standard_normal(data.frames.shape)
        g = 0.5 * (g + g.transpose(0, 2, 1))
        data = forward.DataSet(data.frames + cfg["noise"] * np.max(np.abs(data.frames)) * g, data.tau)
    out = io.write_container(_output(args, cfg, "simulate", ".dtbd"), data)
    _emit({"output": str(out), "m": data.m, "two_n": data.two_n, "tau": data.tau, "d0": data.frames[0].tolist()})
    return EXIT_OK


def cmd_rom(args) -> int:
    import numpy as np

    from . import io, mimo, siso

    data = io.read_container(args.data)
    n = args.n if args.n is not None else data.two_n // 2
    use_mimo = args.mimo or data.m > 1
    report = {"data": str(args.data), "m": data.m, "n": n, "tau": data.tau, "mimo": use_mimo}
    d0 = float(np.max(np.abs(data.frames[0])))
    if use_mimo:
        rom = mimo.build_rom(data, n)
        fac = mimo.consistent_factor(rom)
        fitted = mimo.rom_data(rom, 2 * n)
        p = rom.p_tilde
        report.update(
            p_tilde={"diagonal": [p.block(i, i).tolist() for i in range(n)],
                     "off_diagonal": [p.block(i, i + 1).tolist() for i in range(n - 1)]},
            gamma=[g.tolist() for g in fac.gammas],
            gamma_hat=[g.tolist() for g in fac.gamma_hats],
            q=[q.tolist() for q in fac.q_blocks],
            factor_residual=mimo.factor_residual(rom, fac),
        )
    else:
        rom = siso.build_rom(data, n)
        fac = siso.factorize(rom)
        fitted = siso.rom_data(rom, 2 * n)
        report.update(
            p_tilde={"diagonal": np.diag(rom.p_tilde).tolist(), "off_diagonal": np.diag(rom.p_tilde, 1).tolist()},
            gamma=fac.gammas.tolist(),
            gamma_hat=fac.gamma_hats.tolist(),
            q=[[[1.0]]] * n,
        )
    residuals = np.max(np.abs(fitted.frames - data.frames[: 2 * n]), axis=(1, 2)) / d0
    report.update(off_band=rom.off_band, data_match=float(residuals.max()), data_match_per_frame=residuals.tolist())
    out = io.atomic_write(_output(args, None, "rom", ".json"), json.dumps(report, indent=2) + "\n")
    _emit({"output": str(out), "data_match": report["data_match"], "off_band": report["off_band"]})
    return EXIT_OK


def cmd_dtb(args) -> int:
    from . import dtb, io

    cfg = _config(args)
    data = io.read_container(args.data)
    reference = _reference_for(data, cfg)
    result = dtb.dtb_transform(data, reference, args.n, True if args.mimo else None)
    out = io.write_container(_output(args, cfg, "dtb", ".dtbd"), result.frames)
    csv_path = out.with_suffix(".csv")
    io.write_csv(csv_path, *io.traces_csv(result.frames))
    _emit({"output": str(out), "traces": str(csv_path), "rom_order": result.rom_order, "mimo": result.mimo})
    return EXIT_OK


def cmd_invert(args) -> int:
    import numpy as np

    from . import forward, inversion, io, models

    cfg = _config(args)
    data = io.read_container(args.data)
    if data.m != 1:
        raise ValidationError("impedance estimation needs single-sensor (1D) data")
    reference = _reference_for(data, cfg)
    if cfg["normalize"] == "unit_grid":
        scale = forward.unit_grid_scale(models.pulse_from_spec(cfg["pulse"]), data.tau, reference.scalar[0])
        data, reference = data.scaled(scale), reference.scaled(scale)
    n = args.n if args.n is not None else min(cfg["n"], data.two_n // 2)
    est = inversion.impedance_from_data(data, reference, n)
    rows = np.column_stack([est.primary_nodes, est.primary_values, est.dual_nodes, est.dual_values])
    out = io.write_csv(_output(args, cfg, "invert", ".csv"), ["T_j", "sigma_j", "T_hat_j", "sigma_hat_j"], rows)
    _emit({"output": str(out), "n": n, "normalize": cfg["normalize"]})
    return EXIT_OK


def cmd_image(args) -> int:
    import numpy as np

    from . import dtb, forward, inversion, io, models

    cfg = _config(args)
    if cfg["medium"]["dimension"] != 2:
        raise ValidationError("imaging needs a 2D config")
    data = io.read_container(args.data)
    ref_medium = _reference_medium(cfg)
    reference = _reference_for(data, cfg)
    frames = data
    if args.transform == "dtb":
        frames = dtb.dtb_transform(data, reference, args.n).frames
    scattered = forward.DataSet(frames.frames - reference.frames, data.tau)
    image = inversion.rtm_image(scattered, ref_medium)
    out = io.write_csv(_output(args, cfg, "image", ".csv"), [f"c{j}" for j in range(image.shape[1])], image.values)
    report = {"image": str(out), "transform": args.transform, "shape": list(image.shape)}
    supports = models.supports_from_spec(cfg["medium"])
    if supports:
        report["off_support_fraction"] = inversion.off_support_fraction(image, supports)
        report["peak_distances"] = [inversion.peak_distance(image, s) for s in supports]
    report["max_abs"] = float(np.max(np.abs(image.values)))
    io.atomic_write(out.with_suffix(".json"), json.dumps(report, indent=2) + "\n")
    _emit(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import checks, io, models

    cfg = _config(args)
    t0 = time.perf_counter()
    medium = models.medium_from_spec(cfg["medium"])
    ref_medium = _reference_medium(cfg)
    pulse = models.pulse_from_spec(cfg["pulse"])
    results = checks.invariant_suite(medium, ref_medium, pulse, cfg["tau"], cfg["n"], born=not args.skip_born)
    judged = [r.passed for r in results if r.passed is not None]
    summary = {
        "config": cfg.get("name", args.config),
        "checks": [r.as_dict() for r in results],
        "all_passed": all(judged),
        "seconds": time.perf_counter() - t0,
    }
    if args.out:
        io.atomic_write(Path(args.out), json.dumps(summary, indent=2) + "\n")
    _emit(summary)
    return EXIT_OK if summary["all_passed"] else EXIT_NUMERICAL


def cmd_configs(args) -> int:
    from . import io

    print("\n".join(io.bundled_config_names()))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", help="JSON run config (path or bundled name)")
    p.add_argument("--out", help="output path")
    p.add_argument("--n", type=int, help="ROM order")
    p.add_argument("--tau", type=float, help="sampling interval override")
    p.add_argument("--mimo", action="store_true", help="force the block ROM")
    p.add_argument("--solver", choices=("spectral", "fdtd"), help="forward solver")
    p.add_argument("--seed", type=int, help="RNG seed (u64)")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtb", description="Data-to-Born transform toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize data for a config")
    _common(p)
    p.add_argument("--reference", action="store_true", help="simulate the reference medium instead")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rom", help="ROM report for a data container")
    p.add_argument("data")
    _common(p, config=False)
    p.set_defaults(func=cmd_rom, config=None)

    p = sub.add_parser("dtb", help="map data to Born-like data")
    p.add_argument("data")
    _common(p)
    p.set_defaults(func=cmd_dtb)

    p = sub.add_parser("invert", help="impedance estimates from 1D data")
    p.add_argument("data")
    _common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("image", help="reverse-time-migration image")
    p.add_argument("data")
    _common(p)
    p.add_argument("--transform", choices=("dtb", "none"), default="dtb", help="image DtB output or raw data")
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("verify", help="run the invariant suite on a config")
    _common(p)
    p.add_argument("--skip-born", action="store_true", help="omit the Born comparison")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("configs", help="list bundled configs")
    p.set_defaults(func=cmd_configs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        apply_thread_cap()
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
            raise ValidationError("--seed must fit in an unsigned 64-bit integer")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DtbError as exc:  # pragma: no cover - every concrete error derives from one of the above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
