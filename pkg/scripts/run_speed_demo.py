"""Echo counts per receiver for the variable-speed, constant-density model, with traces as CSV."""
from pathlib import Path

from _common import parser, save

from dtb import experiments, io


def main():
    args = parser(__doc__).parse_args()
    run = experiments.Run.bundled("speed_demo_2d")
    counts = experiments.echo_counts(run)
    src = counts["source"]
    for label, frames in (("raw", run.measured), ("dtb", run.transformed)):
        scattered = (frames - run.reference).frames[:, src, :]
        rows = [[k * run.tau, *scattered[k]] for k in range(scattered.shape[0])]
        io.write_csv(Path(args.out) / f"speed_demo_{label}.csv",
                     ["t"] + [f"r{j}" for j in range(scattered.shape[1])], rows)
    save(args.out, "speed_demo", counts)


if __name__ == "__main__":
    main()
