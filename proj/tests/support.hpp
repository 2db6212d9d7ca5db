#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "chbu/error.hpp"
#include "chbu/numerics/rational.hpp"

namespace chbu::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }

    // Uniform over {k/den : lo*den <= k <= hi*den} with den drawn in [1, max_den].
    Rational rational(const Rational& lo, const Rational& hi, long max_den = 64) {
        long den = integer(1, max_den);
        mpz_class a = ceil(lo * Rational(den)), b = floor(hi * Rational(den));
        if (a > b) return lo;
        long k = integer(a.get_si(), b.get_si());
        return Rational(k, den);
    }

    Rational unit(long max_den = 64) { return rational(0, 1, max_den); }

    bool coin() { return integer(0, 1) == 1; }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

template <class F>
std::optional<Errc> error_code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline Rational q(const char* s) { return Rational::parse(s); }

}  // namespace chbu::testing
