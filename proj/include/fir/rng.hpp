#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace fir {

// Deterministic RNG built on mt19937_64 with hand-rolled output
// transforms. The standard leaves uniform_int_distribution and
// normal_distribution implementation-defined; rolling our own keeps
// seeded runs reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream derived from (seed, index); replicates that
    // each own a stream are invariant to scheduling order.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(mix(seed) + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer on [0, n) by rejection.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % un;
        std::uint64_t r;
        do { r = gen_(); } while (r >= limit);
        return static_cast<int>(r % un);
    }

    // Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd normal_vector(int n) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = normal();
        return z;
    }

    // Index draw from a normalized PMF by CDF inversion.
    int sample_pmf(const Eigen::VectorXd& w) {
        const double u = uniform();
        double acc = 0.0;
        const int n = static_cast<int>(w.size());
        for (int i = 0; i < n; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    // First k entries of a Fisher-Yates shuffle of {0, ..., n-1}.
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + uniform_int(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fir
