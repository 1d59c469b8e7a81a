#pragma once

#include <cstdint>
#include <random>

#include "quatlag/types.hpp"

namespace quatlag {

// splitmix64 step; used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG wrapper. std::normal_distribution is implementation-defined,
// so gaussians are produced by an explicit Box-Muller transform to keep runs
// byte-for-byte reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Derive a child seed for stream `index` of a base seed.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t index) {
        std::uint64_t s = base ^ (0xd1342543de82ef95ULL * (index + 1));
        return splitmix64(s);
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, hi].
    double uniform(double hi) { return uniform01() * hi; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Box-Muller; reject u1 == 0 to keep log() finite.
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vec3 gaussian3() {
        Vec3 v;
        for (int i = 0; i < 3; ++i) v[i] = gaussian();
        return v;
    }

    Vec4 gaussian4() {
        Vec4 v;
        for (int i = 0; i < 4; ++i) v[i] = gaussian();
        return v;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace quatlag
