"""Command-line interface: ``mcdetect {detect,compare,fractal,generate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import fractal, synthetic
from .errors import InputError, McdetectError, ParamError
from .image_io import mask_to_gray, read_pgm, write_pgm
from .morphology import PRESETS
from .pipeline import PipelineConfig, compare_thresholds, detect_clusters

log = logging.getLogger("mcdetect")

EXIT_OK, EXIT_INPUT, EXIT_PARAM = 0, 1, 2


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    defaults = PipelineConfig()
    se_names = sorted(PRESETS)
    p.add_argument("--threshold-mode", choices=("hurst", "fudge"), default=defaults.threshold_mode)
    p.add_argument("--fudge", type=float, default=defaults.fudge_factor, help="fixed threshold factor (default 0.5)")
    p.add_argument("--topo-dim", type=int, choices=(2, 3), default=defaults.topo_dim)
    p.add_argument("--sobel-scale", type=float, default=defaults.sobel_scale,
                   help="automatic cutoff = scale * mean gradient magnitude")
    p.add_argument("--min-area", type=int, default=defaults.min_cluster_area)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=defaults.connectivity)
    p.add_argument("--hurst-floor", type=float, default=defaults.hurst_floor)
    p.add_argument("--dimension-source", choices=("raw", "closed"), default=defaults.dimension_source)
    p.add_argument("--se-pre", choices=se_names, default=defaults.pre_se)
    p.add_argument("--se-post", choices=se_names, default=defaults.post_se)
    p.add_argument("--se-smooth", choices=se_names, default=defaults.smooth_se)
    p.add_argument("--se-outline", choices=se_names, default=defaults.outline_se)


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        threshold_mode=args.threshold_mode,
        fudge_factor=args.fudge,
        topo_dim=args.topo_dim,
        sobel_scale=args.sobel_scale,
        pre_se=args.se_pre,
        post_se=args.se_post,
        smooth_se=args.se_smooth,
        outline_se=args.se_outline,
        min_cluster_area=args.min_area,
        connectivity=args.connectivity,
        hurst_floor=args.hurst_floor,
        dimension_source=args.dimension_source,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    parser = argparse.ArgumentParser(prog="mcdetect", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="segment clusters and write a result directory")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("compare", parents=[common], help="run Hurst and fudge thresholds side by side")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("fractal", parents=[common], help="print fractal dimension, Hurst coefficient and fit quality")
    p.add_argument("input", type=Path)
    p.add_argument("--topo-dim", type=int, choices=(2, 3), default=3)
    p.add_argument("--hurst-floor", type=float, default=fractal.HURST_FLOOR)
    p.add_argument("--binary", action="store_true", help="treat nonzero pixels as a mask and use plain box counting")
    p.add_argument("--csv", action="store_true", help="also print the scale series as CSV")

    p = sub.add_parser("generate", parents=[common], help="write a synthetic fixture as PGM")
    p.add_argument("kind", choices=("carpet", "fbm", "phantom"))
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", type=int, default=5, help="carpet order")
    p.add_argument("--hurst", type=float, default=0.5, help="fBm roughness")
    p.add_argument("--size", type=int, default=None, help="fBm side (2^n+1) or phantom side")
    p.add_argument("--blobs", "-k", type=int, default=5, help="phantom blob count")
    p.add_argument("--truth", type=Path, default=None, help="write phantom ground truth JSON here")
    return parser


def _detect(args) -> int:
    image = read_pgm(args.input)
    result = detect_clusters(image, _config(args))
    result.save(args.output)
    log.info("%d clusters, D=%.4f H=%.4f -> %s", len(result.clusters), result.estimate.dimension,
             result.estimate.hurst, args.output)
    return EXIT_OK


def _compare(args) -> int:
    image = read_pgm(args.input)
    report = compare_thresholds(image, _config(args))
    report.save(args.output)
    log.info("xor=%d edges=%s clusters=%s", report.xor_pixel_count, report.edge_pixel_counts, report.cluster_counts)
    return EXIT_OK


def _fractal(args) -> int:
    image = read_pgm(args.input)
    if args.binary:
        est = fractal.estimate_mask(image > 0, args.topo_dim, args.hurst_floor)
    else:
        est = fractal.estimate_surface(image, args.topo_dim, args.hurst_floor)
    print(f"dimension {est.dimension:.6f}")
    print(f"hurst {est.hurst:.6f}")
    print(f"fit_r2 {est.fit_r2:.6f}")
    if args.csv:
        sys.stdout.write(est.series.to_csv())
    return EXIT_OK


def _generate(args) -> int:
    if args.kind == "carpet":
        image = mask_to_gray(synthetic.generate_sierpinski_carpet(args.order))
    elif args.kind == "fbm":
        image = synthetic.generate_fbm_surface(args.hurst, args.size or 257, args.seed)
    else:
        image, truth = synthetic.generate_phantom(args.blobs, args.size or 256, args.seed)
        if args.truth is not None:
            args.truth.write_text(json.dumps(truth.to_dict(), indent=2) + "\n")
    write_pgm(args.output, image)
    return EXIT_OK


COMMANDS = {"detect": _detect, "compare": _compare, "fractal": _fractal, "generate": _generate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except ParamError as exc:
        log.error("%s", exc)
        return EXIT_PARAM
    except McdetectError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
