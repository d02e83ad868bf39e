#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "tactictraj/tensor.hpp"

namespace tactictraj {

/// Deterministic, platform-independent random stream.
///
/// Draws are produced by hashing (seed, counter) with the splitmix64 finalizer,
/// so the stream is a pure function of the seed and the draw index; substreams
/// are derived by hashing a tag into the seed rather than by splitting state.
/// Gaussians use the Acklam inverse-normal-CDF approximation (|rel err| < 1.2e-9),
/// which needs only sqrt/log from libm.
class SeededRng {
public:
    static constexpr const char* kAlgorithmId = "splitmix64-acklam-icdf/v1";

    explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }

    std::uint64_t next_u64() { return mix(seed_ + kGamma * ++counter_); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); never returns an endpoint.
    double uniform_open() {
        const double u = uniform();
        return u == 0.0 ? 0x1.0p-54 : u;
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Modulo bias is < n / 2^64, far below any tolerance used here.
        return next_u64() % n;
    }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal draw via inverse-CDF.
    double gaussian() { return inverse_normal_cdf(uniform_open()); }

    /// Independent stream derived from this seed and a tag; counter starts at 0.
    SeededRng substream(std::uint64_t tag) const {
        return SeededRng(mix(seed_ ^ mix(tag + 0x632BE59BD9B4E019ULL)));
    }

    Tensor gaussian_tensor(std::vector<std::size_t> shape) {
        Tensor t(std::move(shape));
        for (double& v : t.data()) v = gaussian();
        return t;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    static double inverse_normal_cdf(double p) {
        // Acklam's rational approximation, central + tail branches.
        static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                       -2.759285104469687e+02, 1.383577518672690e+02,
                                       -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                       -1.556989798598866e+02, 6.680131188771972e+01,
                                       -1.328068155288572e+01};
        static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                       -2.400758277161838e+00, -2.549732539343734e+00,
                                       4.374664141464968e+00,  2.938163982698783e+00};
        static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                       2.445134137142996e+00, 3.754408661907416e+00};
        constexpr double p_low = 0.02425;
        if (p < p_low) {
            const double q = std::sqrt(-2.0 * std::log(p));
            return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        if (p > 1.0 - p_low) {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                   ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace tactictraj
