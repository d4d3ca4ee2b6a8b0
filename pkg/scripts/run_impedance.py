"""Impedance estimates on the smooth 1D model at n = 100 and n = 200, with the estimate table as CSV."""
from pathlib import Path

import numpy as np
from _common import parser, save

from dtb import experiments, inversion, io, models


def main():
    args = parser(__doc__).parse_args()
    coarse = experiments.Run.bundled("smooth_1d")
    runs = [coarse, experiments.Run(experiments.refined_config(coarse.config, 2))]
    summary = []
    for run in runs:
        summary.append(experiments.impedance_recovery(run))
        s = run.unit_scale
        est = inversion.impedance_from_data(run.measured.scaled(s), run.reference.scaled(s), run.n)
        truth = models.true_profile(run.config["medium"])
        rows = np.column_stack([est.primary_nodes, est.primary_values, truth(est.primary_nodes),
                                est.dual_nodes, est.dual_values, truth(est.dual_nodes)])
        io.write_csv(Path(args.out) / f"impedance_n{run.n}.csv",
                     ["T_j", "sigma_j", "true_j", "T_hat_j", "sigma_hat_j", "true_hat_j"], rows)
    save(args.out, "impedance", {"runs": summary})


if __name__ == "__main__":
    main()
