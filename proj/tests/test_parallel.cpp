// Serial and parallel executions of the sampled kernels must produce
// identical results (bitwise), since all randomness is counter-keyed.

#include <cmath>
#include <vector>

#include "semiflow/cellgraph.hpp"
#include "semiflow/chafee.hpp"
#include "semiflow/duffing.hpp"
#include "semiflow/flow.hpp"
#include "semiflow/omega.hpp"

#include "test_support.hpp"

using namespace semiflow;

namespace {

bool same_graph(const TransitionGraph& a, const TransitionGraph& b) {
    if (a.edges != b.edges) return false;
    if (a.center_edges != b.center_edges) return false;
    if (a.active != b.active || a.escaped != b.escaped) return false;
    return a.dispersion == b.dispersion;
}

void test_transition_graph_modes_agree() {
    const DuffingFlowSystem sys(1e-2);
    const double lo[] = {0.0, -0.75}, hi[] = {1.5, 0.75};
    const std::size_t res[] = {24, 24};
    const CellComplex complex = make_complex(lo, hi, res);
    const CellFilter band = [](const CellComplex& c, std::size_t cell) {
        const auto ctr = c.center(cell);
        return duffing_in_band({ctr[0], ctr[1]});
    };
    const auto serial =
        build_transition_graph(sys, complex, 0.5, 0.05, 3, 1, 7, ExecMode::serial, band);
    const auto parallel =
        build_transition_graph(sys, complex, 0.5, 0.05, 3, 1, 7, ExecMode::parallel, band);
    CHECK(same_graph(serial, parallel));
    CHECK(serial.edge_count() > 0);
}

void test_equilibria_modes_agree() {
    const auto p = cubic_profile(50.0);
    const auto serial = find_equilibria(p, 80, 0.0, 120, 1e-8, ExecMode::serial);
    const auto parallel = find_equilibria(p, 80, 0.0, 120, 1e-8, ExecMode::parallel);
    CHECK(serial.profiles.size() == parallel.profiles.size());
    CHECK(serial.shooting_slopes == parallel.shooting_slopes);
    CHECK(serial.residuals == parallel.residuals);
    for (std::size_t i = 0; i < serial.profiles.size(); ++i)
        CHECK(serial.profiles[i] == parallel.profiles[i]);
}

void test_probe_connections_modes_agree() {
    const CallbackFlowSystem sys(
        2,
        [](std::span<const double> s, std::span<double> out) {
            out[0] = -s[0];
            out[1] = -s[1];
        },
        1e-2);
    IsolatedSetCatalog catalog;
    catalog.sets.push_back({"zero", {{0.0, 0.0}}, 0.3});
    const auto serial = probe_connections(catalog, sys, 8, 0.5, 20.0, 1e-2, 31,
                                          ExecMode::serial);
    const auto parallel = probe_connections(catalog, sys, 8, 0.5, 20.0, 1e-2, 31,
                                            ExecMode::parallel);
    CHECK(serial.unresolved == parallel.unresolved);
    CHECK(serial.edges.size() == parallel.edges.size());
    CHECK(serial.witnesses.size() == parallel.witnesses.size());
    for (std::size_t i = 0; i < serial.witnesses.size(); ++i) {
        const auto& a = serial.witnesses[i];
        const auto& b = parallel.witnesses[i];
        CHECK(a.start == b.start);
        CHECK(a.left_from == b.left_from);
        CHECK(a.settled == b.settled);
        CHECK(a.seed == b.seed && a.policy == b.policy);
    }
}

} // namespace

int main() {
    RUN_TEST(test_transition_graph_modes_agree);
    RUN_TEST(test_equilibria_modes_agree);
    RUN_TEST(test_probe_connections_modes_agree);
    return testkit::summary();
}
