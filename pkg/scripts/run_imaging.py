"""RTM images of the two-inclusion model from raw and DtB-transformed data."""
from pathlib import Path

from _common import parser, save

from dtb import experiments, inversion, io


def main():
    args = parser(__doc__).parse_args()
    run = experiments.Run.bundled("two_inclusion_2d")
    for label, frames in (("raw", run.measured), ("dtb", run.transformed), ("born", run.born)):
        img = inversion.rtm_image(frames - run.reference, run.reference_medium)
        io.write_csv(Path(args.out) / f"image_{label}.csv", [f"c{j}" for j in range(img.shape[1])], img.values)
    save(args.out, "imaging", {**experiments.imaging_comparison(run), "born": experiments.born_discrepancy(run)})


if __name__ == "__main__":
    main()
