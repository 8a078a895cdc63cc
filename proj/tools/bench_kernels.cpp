// Timing comparison of the OpenMP kernels against their serial reference:
// transition-graph construction on a Duffing box and the equilibrium
// shooting scan.  Outputs are checked for equality, not just timed.

#include <chrono>
#include <cstdio>

#include "semiflow/cellgraph.hpp"
#include "semiflow/chafee.hpp"
#include "semiflow/flow.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace semiflow;

namespace {

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at build time\n");
#endif

    {
        const DuffingFlowSystem sys(1e-2);
        const std::vector<double> lo{-1.6, -1.2}, hi{1.6, 1.2};
        const std::vector<std::size_t> res{96, 96};
        const CellComplex complex = make_complex(lo, hi, res);
        const double eps = complex.cell_diameter();
        TransitionGraph serial, parallel;
        const double ts = seconds([&] {
            serial = build_transition_graph(sys, complex, 0.5, eps, 3, 1, 7, ExecMode::serial);
        });
        const double tp = seconds([&] {
            parallel =
                build_transition_graph(sys, complex, 0.5, eps, 3, 1, 7, ExecMode::parallel);
        });
        const bool same = serial.edges == parallel.edges &&
                          serial.center_edges == parallel.center_edges;
        std::printf("transition graph  (%zu cells, %zu edges)\n", complex.cell_count(),
                    serial.edge_count());
        std::printf("  serial   %8.3f s\n", ts);
        std::printf("  parallel %8.3f s   speedup %.2fx   identical: %s\n", tp,
                    tp > 0.0 ? ts / tp : 0.0, same ? "yes" : "NO");
        if (!same) return 1;
    }

    {
        const ReactionProfile profile = cubic_profile(50.0);
        EquilibriumSet serial, parallel;
        const double ts = seconds(
            [&] { serial = find_equilibria(profile, 200, 0.0, 600, 1e-10, ExecMode::serial); });
        const double tp = seconds([&] {
            parallel = find_equilibria(profile, 200, 0.0, 600, 1e-10, ExecMode::parallel);
        });
        const bool same = serial.shooting_slopes == parallel.shooting_slopes &&
                          serial.profiles == parallel.profiles;
        std::printf("equilibrium scan  (%zu roots)\n", serial.profiles.size());
        std::printf("  serial   %8.3f s\n", ts);
        std::printf("  parallel %8.3f s   speedup %.2fx   identical: %s\n", tp,
                    tp > 0.0 ? ts / tp : 0.0, same ? "yes" : "NO");
        if (!same) return 1;
    }
    return 0;
}
