#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "nsexp/error.hpp"

namespace nsexp {

/// Integer lattice mode k on the 2π-periodic torus. The zero mode is not a
/// valid wave vector for fields in H (zero average), but the type itself can
/// hold it so that sums m + l can be formed and tested.
struct WaveVector {
    int k1 = 0;
    int k2 = 0;
    int k3 = 0;

    constexpr WaveVector() = default;
    constexpr WaveVector(int a, int b, int c) : k1(a), k2(b), k3(c) {}

    [[nodiscard]] constexpr bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0; }

    /// |k|^2, the Stokes eigenvalue carried by this mode.
    [[nodiscard]] constexpr std::int64_t eigenvalue() const {
        return std::int64_t{k1} * k1 + std::int64_t{k2} * k2 + std::int64_t{k3} * k3;
    }

    /// Lexicographically positive: the stored representative of a Hermitian pair.
    [[nodiscard]] constexpr bool is_canonical() const {
        if (k1 != 0) return k1 > 0;
        if (k2 != 0) return k2 > 0;
        return k3 > 0;
    }

    [[nodiscard]] constexpr WaveVector canonical() const { return is_canonical() ? *this : -*this; }

    [[nodiscard]] constexpr int max_abs() const {
        auto a = [](int x) { return x < 0 ? -x : x; };
        int m = a(k1);
        if (a(k2) > m) m = a(k2);
        if (a(k3) > m) m = a(k3);
        return m;
    }

    [[nodiscard]] constexpr std::array<double, 3> as_real() const {
        return {static_cast<double>(k1), static_cast<double>(k2), static_cast<double>(k3)};
    }

    constexpr WaveVector operator-() const { return {-k1, -k2, -k3}; }
    friend constexpr WaveVector operator+(WaveVector a, WaveVector b) {
        return {a.k1 + b.k1, a.k2 + b.k2, a.k3 + b.k3};
    }
    friend constexpr WaveVector operator-(WaveVector a, WaveVector b) {
        return {a.k1 - b.k1, a.k2 - b.k2, a.k3 - b.k3};
    }
    friend constexpr auto operator<=>(const WaveVector&, const WaveVector&) = default;

    [[nodiscard]] std::string to_string() const {
        return "(" + std::to_string(k1) + "," + std::to_string(k2) + "," + std::to_string(k3) + ")";
    }
};

/// Rejects the zero mode; used wherever a field entry is created.
inline void require_nonzero(WaveVector k) {
    if (k.is_zero()) throw InvalidInput("wave vector (0,0,0) is not allowed (zero-average fields only)");
}

}  // namespace nsexp
