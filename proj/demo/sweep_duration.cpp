// Peak root stress of a quintic 90-degree swing as the swing duration shrinks,
// and the shortest duration that keeps stress and jerk within limits.

#include "flexpath/safety.hpp"

#include <cstdio>
#include <numbers>

int main()
{
    using namespace flexpath;

    // Aluminium strip, 300 mm x 20 mm x 1 mm.
    BeamModel strip;
    strip.E = 70e9;
    strip.I = 0.02 * 1e-9 / 12.0;
    strip.rho = 2700.0 * 0.02 * 1e-3;
    strip.L = 0.3;
    strip.h = 0.5e-3;
    strip.sigma_yield = 95e6;
    strip.n_nodes = 41;

    const ModalResult modal = modal_analysis(strip, 3);
    std::printf("first natural frequency: %.2f Hz\n", modal.omega[0] / (2.0 * std::numbers::pi));

    auto swing = [](double T) {
        return make_rest_to_rest(Generator::Quintic, std::numbers::pi / 2, 0.0, 0.1, T);
    };
    std::printf("%8s %14s %14s\n", "T [s]", "peak |sigma|", "theta jerk");
    for (double T : {2.0, 1.0, 0.5, 0.25, 0.125}) {
        SimulationOptions opt;
        opt.dt = std::min(T / 400.0, 2.0 * std::numbers::pi / modal.omega[0] / 40.0);
        const SimulationResult sim = simulate(strip, swing(T), opt);
        const JerkMaxima jerk = max_jerk(swing(T), 1001);
        std::printf("%8.3f %12.3f MPa %14.1f\n", T, sim.sigma.cwiseAbs().maxCoeff() / 1e6, jerk.theta.value);
    }

    SafetyLimits limits;
    limits.sigma_max = strip.sigma_yield / 2.0;
    limits.jerk_max_theta = 2000.0;
    limits.jerk_max_r = 500.0;
    const SearchResult best = min_time_search(swing, strip, limits, 0.05, 5.0);
    std::printf("shortest admissible swing: %.4f s (%zu durations simulated)\n", best.T_star, best.scan.size());
    return 0;
}
