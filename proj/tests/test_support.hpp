#pragma once

// Minimal always-on check harness shared by the unit test binaries, plus the
// independent oracles used by more than one suite (dense-grid sup search and
// the boolean-closure recurrence oracle).

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace testkit {

inline int g_failures = 0;
inline const char* g_test = "";

// Always-on requirement: never compiled out in Release.
#define CHECK(cond)                                                                     \
    do {                                                                                \
        if (!(cond)) {                                                                  \
            std::cerr << "[FAIL] " << testkit::g_test << " " << __FILE__ << ":"         \
                      << __LINE__ << "  " << #cond << "\n";                             \
            ++testkit::g_failures;                                                      \
        }                                                                               \
    } while (0)

#define CHECK_MSG(cond, msg)                                                            \
    do {                                                                                \
        if (!(cond)) {                                                                  \
            std::cerr << "[FAIL] " << testkit::g_test << " " << __FILE__ << ":"         \
                      << __LINE__ << "  " << #cond << "  (" << msg << ")\n";            \
            ++testkit::g_failures;                                                      \
        }                                                                               \
    } while (0)

#define CHECK_CLOSE(a, b, tol)                                                          \
    do {                                                                                \
        const double va_ = (a);                                                         \
        const double vb_ = (b);                                                         \
        if (!(std::fabs(va_ - vb_) <= (tol))) {                                         \
            std::cerr << "[FAIL] " << testkit::g_test << " " << __FILE__ << ":"         \
                      << __LINE__ << "  |" << #a << " - " << #b << "| = "               \
                      << std::fabs(va_ - vb_) << " > " << (tol) << "  (" << va_         \
                      << " vs " << vb_ << ")\n";                                        \
            ++testkit::g_failures;                                                      \
        }                                                                               \
    } while (0)

#define CHECK_THROWS(stmt, ex_type)                                                     \
    do {                                                                                \
        bool caught_ = false;                                                           \
        try {                                                                           \
            stmt;                                                                       \
        } catch (const ex_type&) {                                                      \
            caught_ = true;                                                             \
        } catch (const std::exception& e_) {                                            \
            std::cerr << "[FAIL] " << testkit::g_test << " " << __FILE__ << ":"         \
                      << __LINE__ << "  wrong exception type: " << e_.what() << "\n";   \
            ++testkit::g_failures;                                                      \
            caught_ = true;                                                             \
        }                                                                               \
        if (!caught_) {                                                                 \
            std::cerr << "[FAIL] " << testkit::g_test << " " << __FILE__ << ":"         \
                      << __LINE__ << "  expected " << #ex_type << " from: " << #stmt    \
                      << "\n";                                                          \
            ++testkit::g_failures;                                                      \
        }                                                                               \
    } while (0)

inline void run_test(const char* name, const std::function<void()>& fn) {
    g_test = name;
    const int before = g_failures;
    try {
        fn();
    } catch (const std::exception& e) {
        std::cerr << "[FAIL] " << name << "  unexpected exception: " << e.what() << "\n";
        ++g_failures;
    }
    std::cout << (g_failures == before ? "[ ok ] " : "[FAIL] ") << name << "\n";
}

#define RUN_TEST(fn) testkit::run_test(#fn, fn)

inline int summary() {
    if (g_failures == 0) {
        std::cout << "all checks passed\n";
        return 0;
    }
    std::cerr << g_failures << " check(s) failed\n";
    return 1;
}

// ---- shared oracles -------------------------------------------------------

// Dense-grid lower bound for sup_y { fbar(y) - (level/2)(y-x)^2 } over
// [lo, hi].  A grid maximum never exceeds the true supremum, so callers can
// demand  impl >= oracle - eps  exactly and  |impl - oracle| <= coarse tol.
inline double grid_sup_envelope(const std::function<double(double)>& fbar, int level,
                                double x, double lo, double hi, double step,
                                const std::vector<double>& knots = {}) {
    double best = -1e300;
    const double n2 = 0.5 * static_cast<double>(level);
    for (double y = lo; y <= hi; y += step) {
        const double v = fbar(y) - n2 * (y - x) * (y - x);
        if (v > best) best = v;
    }
    for (const double y : knots) {
        if (y < lo || y > hi) continue;
        const double v = fbar(y) - n2 * (y - x) * (y - x);
        if (v > best) best = v;
    }
    return best;
}

// Nodes with a returning directed path (length >= 1), by boolean closure.
// Quadratic-cubic and exhaustive; only for small graphs.
inline std::vector<std::uint32_t> closure_recurrent(
    const std::vector<std::vector<std::uint32_t>>& adj) {
    const std::size_t n = adj.size();
    std::vector<std::uint8_t> reach(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto j : adj[i]) reach[i * n + j] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i * n + k]) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (reach[k * n + j]) reach[i * n + j] = 1;
        }
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (reach[i * n + i]) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

inline double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    if (a.size() != b.size()) return 1e300;
    return m;
}

} // namespace testkit
