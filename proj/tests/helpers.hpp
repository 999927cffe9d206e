#pragma once

// Shared statistical oracles and scratch-space utilities for the test
// binaries. Reference special functions come from boost.math so the checks
// stay independent of the library under test.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#ifdef __unix__
#include <sys/wait.h>
#endif

namespace testutil {

inline double digamma(double x) { return boost::math::digamma(x); }
inline double trigamma(double x) { return boost::math::trigamma(x); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // with 1/(n-1)
    std::size_t n = 0;
    double se_mean() const { return std::sqrt(var / static_cast<double>(n)); }
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(m.n - 1);
    return m;
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous cdf.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        d = std::max(d, std::max(F - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - F));
    }
    return d;
}

/// Composite Simpson rule; panels is rounded up to even.
template <typename F>
double simpson(F f, double a, double b, int panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 != 0 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Fresh empty scratch directory, stable per tag.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("socmap-test-" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

#ifdef SOCMAP_BIN
/// Run the CLI binary with the given argument string; returns the exit code.
inline int run_cli(const std::string& args) {
    const std::string cmd = std::string(SOCMAP_BIN) + " " + args;
    const int rc = std::system(cmd.c_str());
#ifdef __unix__
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
#endif
    return rc;
}
#endif

}  // namespace testutil
