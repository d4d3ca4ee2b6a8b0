"""DtB-to-Born discrepancy of a smooth 1D model as tau is halved twice."""
from _common import parser, save

from dtb import experiments


def main():
    p = parser(__doc__)
    p.add_argument("--factors", type=int, nargs="+", default=[1, 2, 4])
    args = p.parse_args()
    save(args.out, "tau_convergence", experiments.tau_sweep(experiments.TauSweep(factors=tuple(args.factors))))


if __name__ == "__main__":
    main()
