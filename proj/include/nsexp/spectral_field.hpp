#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "nsexp/error.hpp"
#include "nsexp/wave_vector.hpp"

namespace nsexp {

using Complex = std::complex<double>;
using Vec3 = std::array<Complex, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(Complex s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
    a[0] += b[0];
    a[1] += b[1];
    a[2] += b[2];
    return a;
}
inline Vec3 conj(const Vec3& a) { return {std::conj(a[0]), std::conj(a[1]), std::conj(a[2])}; }

/// Bilinear (non-conjugating) dot product with a real wave vector.
inline Complex dot(const Vec3& a, WaveVector k) {
    return a[0] * static_cast<double>(k.k1) + a[1] * static_cast<double>(k.k2) +
           a[2] * static_cast<double>(k.k3);
}

inline double norm2(const Vec3& a) { return std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]); }

inline double max_abs(const Vec3& a) {
    return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Fourier coefficients of a real, zero-average trigonometric-polynomial
/// vector field. One representative per Hermitian pair is stored (the
/// lexicographically positive k); the coefficient at -k is the conjugate.
/// Entries are kept sorted by wave vector so iteration order is fixed.
class SpectralField {
public:
    struct Entry {
        WaveVector k;
        Vec3 c;
    };

    SpectralField() = default;

    /// Builds from (k, c) pairs with arbitrary sign of k. Entries for the same
    /// Hermitian pair are summed after mapping to the canonical representative.
    static SpectralField from_entries(std::span<const Entry> entries) {
        std::map<WaveVector, Vec3> acc;
        for (const auto& e : entries) {
            require_nonzero(e.k);
            if (e.k.is_canonical())
                acc[e.k] += e.c;
            else
                acc[-e.k] += conj(e.c);
        }
        return from_map(acc);
    }

    static SpectralField from_entries(std::initializer_list<Entry> entries) {
        return from_entries(std::span<const Entry>(entries.begin(), entries.size()));
    }

    /// Takes canonical-keyed entries; keys must be canonical and nonzero.
    static SpectralField from_map(const std::map<WaveVector, Vec3>& canonical) {
        SpectralField f;
        f.entries_.reserve(canonical.size());
        for (const auto& [k, c] : canonical) {
            require_nonzero(k);
            if (!k.is_canonical()) throw InvalidInput("non-canonical key " + k.to_string());
            f.entries_.push_back({k, c});
        }
        return f;
    }

    /// Takes entries already sorted by strictly increasing canonical key.
    static SpectralField from_sorted(std::vector<Entry> entries) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            require_nonzero(entries[i].k);
            if (!entries[i].k.is_canonical()) throw InvalidInput("non-canonical key " + entries[i].k.to_string());
            if (i > 0 && !(entries[i - 1].k < entries[i].k)) throw InvalidInput("entries not strictly sorted");
        }
        SpectralField f;
        f.entries_ = std::move(entries);
        return f;
    }

    [[nodiscard]] std::span<const Entry> entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

    /// Coefficient at any nonzero k (conjugate for the non-stored half).
    [[nodiscard]] Vec3 at(WaveVector k) const {
        const WaveVector c = k.canonical();
        auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                                   [](const Entry& e, WaveVector key) { return e.k < key; });
        if (it == entries_.end() || it->k != c) return Vec3{};
        return k.is_canonical() ? it->c : conj(it->c);
    }

    [[nodiscard]] bool contains(WaveVector k) const {
        const WaveVector c = k.canonical();
        return std::binary_search(entries_.begin(), entries_.end(), Entry{c, {}},
                                  [](const Entry& a, const Entry& b) { return a.k < b.k; });
    }

    /// Both members of every stored Hermitian pair.
    [[nodiscard]] std::vector<Entry> full_support() const {
        std::vector<Entry> out;
        out.reserve(2 * entries_.size());
        for (const auto& e : entries_) {
            out.push_back(e);
            out.push_back({-e.k, conj(e.c)});
        }
        return out;
    }

    /// Canonical keys whose coefficient is not exactly zero.
    [[nodiscard]] std::vector<WaveVector> support() const {
        std::vector<WaveVector> out;
        for (const auto& e : entries_)
            if (max_abs(e.c) != 0.0) out.push_back(e.k);
        return out;
    }

    [[nodiscard]] double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, nsexp::max_abs(e.c));
        return m;
    }

    [[nodiscard]] bool is_zero() const { return max_abs_coeff() == 0.0; }

    /// Drops entries whose coefficients are exactly zero.
    [[nodiscard]] SpectralField pruned() const {
        SpectralField f;
        for (const auto& e : entries_)
            if (nsexp::max_abs(e.c) != 0.0) f.entries_.push_back(e);
        return f;
    }

    /// Applies fn(k, c) -> Vec3 to every stored entry; support unchanged.
    template <class Fn>
    [[nodiscard]] SpectralField map_entries(Fn&& fn) const {
        SpectralField f;
        f.entries_.reserve(entries_.size());
        for (const auto& e : entries_) f.entries_.push_back({e.k, fn(e.k, e.c)});
        return f;
    }

    /// Keeps entries for which pred(k) holds.
    template <class Pred>
    [[nodiscard]] SpectralField filter(Pred&& pred) const {
        SpectralField f;
        for (const auto& e : entries_)
            if (pred(e.k)) f.entries_.push_back(e);
        return f;
    }

    /// a*x + b*y over the union of supports (real scalars keep realness).
    static SpectralField combine(double a, const SpectralField& x, double b, const SpectralField& y) {
        SpectralField f;
        f.entries_.reserve(x.size() + y.size());
        auto ix = x.entries_.begin();
        auto iy = y.entries_.begin();
        while (ix != x.entries_.end() || iy != y.entries_.end()) {
            if (iy == y.entries_.end() || (ix != x.entries_.end() && ix->k < iy->k)) {
                f.entries_.push_back({ix->k, a * ix->c});
                ++ix;
            } else if (ix == x.entries_.end() || iy->k < ix->k) {
                f.entries_.push_back({iy->k, b * iy->c});
                ++iy;
            } else {
                f.entries_.push_back({ix->k, a * ix->c + b * iy->c});
                ++ix;
                ++iy;
            }
        }
        return f;
    }

    friend SpectralField operator+(const SpectralField& x, const SpectralField& y) { return combine(1.0, x, 1.0, y); }
    friend SpectralField operator-(const SpectralField& x, const SpectralField& y) { return combine(1.0, x, -1.0, y); }
    friend SpectralField operator*(double s, const SpectralField& x) {
        return x.map_entries([s](WaveVector, const Vec3& c) { return s * c; });
    }
    SpectralField& operator+=(const SpectralField& y) { return *this = *this + y; }

    /// Coefficientwise equality including support (exact).
    friend bool operator==(const SpectralField& x, const SpectralField& y) {
        if (x.entries_.size() != y.entries_.size()) return false;
        for (std::size_t i = 0; i < x.entries_.size(); ++i)
            if (x.entries_[i].k != y.entries_[i].k || x.entries_[i].c != y.entries_[i].c) return false;
        return true;
    }

private:
    std::vector<Entry> entries_;
};

/// Largest coefficient difference over the union of supports.
inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    return (a - b).max_abs_coeff();
}

}  // namespace nsexp
