"""What multiplicative noise does to a law that blows up at t = 100.

One Euler-Maruyama path at a time, then a thousand at once, then the
question the barometer has to answer: does noisy hyperbolic growth
still look super-exponential from inside a finite window?
"""

from blowuplab import (
    EnsembleSpec,
    em_path,
    hyperbolic_sde_model,
    run_ensemble,
    volatility_masking_scan,
)

K = 0.01


def describe(path) -> str:
    if path.exploded:
        return f"explodes at t = {path.explosion_step_time:.2f}"
    if path.absorbed:
        return f"is absorbed at t = {path.absorption_time:.2f}"
    return f"survives with A(200) = {path.values[-1]:.3f}"


def main() -> None:
    print(f"dA = {K}*A^2 dt + sigma*A^2 dW, A0 = 1, horizon 200 periods")
    print()
    for sigma in (0.0, 0.05, 0.1):
        path = em_path(hyperbolic_sde_model(K, sigma), 1.0, 0.01, 200.0,
                       seed=(42, 0))
        print(f"  sigma = {sigma:<5g} the seed-42 path {describe(path)}")
    print()

    for sigma in (0.05, 0.1):
        spec = EnsembleSpec(model=hyperbolic_sde_model(K, sigma), A0=1.0,
                            dt=0.01, t_end=200.0, n_paths=1000,
                            master_seed=42)
        stats = run_ensemble(spec, workers=4)
        survived = 1.0 - stats.exploded_fraction - stats.absorbed_fraction
        line = (f"  sigma = {sigma:<5g} of 1000 paths: "
                f"{stats.exploded_fraction:6.1%} exploded, "
                f"{stats.absorbed_fraction:6.1%} absorbed, "
                f"{survived:6.1%} alive at the horizon")
        if stats.quantiles is not None:
            line += (f"; exploded-path median t = {stats.quantiles[50]:.1f}"
                     f" (deterministic: 100)")
        print(line)
    print()

    print("masking scan: fraction of surviving paths the barometer still")
    print("flags as super-exponential over the trailing 64 samples:")
    template = EnsembleSpec(model=None, A0=1.0, dt=0.01, t_end=80.0,
                            n_paths=300, master_seed=2718)
    points = volatility_masking_scan(K, [0.0, K, 2 * K, 5 * K, 10 * K],
                                     template, window=64, record_points=320,
                                     workers=4)
    for point in points:
        print(f"  sigma = {point.sigma:<5g} flagged "
              f"{point.n_flagged:3d}/{point.n_analyzed:3d} "
              f"= {point.flagged_fraction:6.1%}")
    print()
    print("raising the noise hides the curvature from the trend test, and")
    print("the ensembles above show it does more than hide: enough noise")
    print("keeps most paths from ever reaching the pole the noiseless law")
    print("hits at t = 100.")


if __name__ == "__main__":
    main()
