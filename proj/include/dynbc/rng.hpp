#ifndef DYNBC_RNG_HPP
#define DYNBC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>

// Self-contained deterministic RNG: splitmix64 seeding + xoshiro256++ core +
// Marsaglia polar normals. Byte-identical results on every platform, which
// std::normal_distribution does not guarantee.

namespace dynbc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 0x9e3779b97f4a7c15ULL) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Per-path stream: mixes a master seed with a path counter.
    Xoshiro256pp(std::uint64_t master_seed, std::uint64_t stream) {
        std::uint64_t sm = master_seed ^ (0xd1342543de82ef95ULL * (stream + 1));
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0,1].
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1p-53; }
    // Uniform in [0,1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }

    // Standard normal, 128-layer ziggurat (Marsaglia-Tsang tables).
    double normal() {
        const Zig& z = zig();
        for (;;) {
            const std::int32_t hz = static_cast<std::int32_t>(next() >> 32);
            const int iz = hz & 127;
            if (std::abs(hz) < z.kn[iz]) return hz * z.wn[iz];

            if (iz == 0) {
                // tail beyond r
                double x, y;
                do {
                    x = -std::log(uniform_pos()) / z.r;
                    y = -std::log(uniform_pos());
                } while (y + y < x * x);
                return hz > 0 ? z.r + x : -(z.r + x);
            }
            const double x = hz * z.wn[iz];
            if (z.fn[iz] + uniform() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x))
                return x;
        }
    }

private:
    struct Zig {
        double r;
        std::int32_t kn[128];
        double wn[128], fn[128];
        Zig() {
            r = 3.442619855899;
            const double m1 = 2147483648.0;
            const double vn = 9.91256303526217e-3;
            double dn = r, tn = r;
            const double q = vn / std::exp(-0.5 * dn * dn);
            kn[0] = static_cast<std::int32_t>((dn / q) * m1);
            kn[1] = 0;
            wn[0] = q / m1;
            wn[127] = dn / m1;
            fn[0] = 1.0;
            fn[127] = std::exp(-0.5 * dn * dn);
            for (int i = 126; i >= 1; --i) {
                dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
                kn[i + 1] = static_cast<std::int32_t>((dn / tn) * m1);
                tn = dn;
                fn[i] = std::exp(-0.5 * dn * dn);
                wn[i] = dn / m1;
            }
        }
    };
    static const Zig& zig() {
        static const Zig z;
        return z;
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

} // namespace dynbc

#endif
