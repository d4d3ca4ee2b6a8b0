"""Invariant suite and Born comparison on the layered 1D model."""
from _common import parser, save

from dtb import checks, experiments


def main():
    args = parser(__doc__).parse_args()
    run = experiments.Run.bundled("layered_1d")
    suite = checks.invariant_suite(run.medium, run.reference_medium, run.pulse, run.tau, run.n,
                                   measured=run.measured, reference=run.reference)
    save(args.out, "layered_1d", {
        "rom": experiments.rom_accuracy(run),
        "born": experiments.born_discrepancy(run),
        "checks": [r.as_dict() for r in suite],
    })


if __name__ == "__main__":
    main()
