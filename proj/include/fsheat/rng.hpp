#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace fsheat {

// Counter-based random stream.  A stream is identified by a 64-bit key
// derived from (master seed, id_a, id_b); every draw hashes the key together
// with a running counter through the splitmix64 finalizer.  Draws therefore
// depend only on (key, counter), so simulations partitioned across threads
// by path id reproduce the single-threaded output bit for bit.
class RngStream {
public:
    RngStream(std::uint64_t master, std::uint64_t id_a, std::uint64_t id_b = 0) {
        std::uint64_t s = master;
        s = mix(s + 0x9E3779B97F4A7C15ULL * (id_a + 1));
        s = mix(s + 0xC2B2AE3D27D4EB4FULL * (id_b + 1));
        key_ = mix(s);
    }

    std::uint64_t next_u64() {
        return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
    }

    // Uniform on (0, 1), never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (branch-free, fixed consumption of two
    // uniforms per pair; the spare is cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fsheat
