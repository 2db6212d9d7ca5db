#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "chbu/numerics/rational.hpp"

namespace chbu {

// Piece coefficients in the shifted basis c0 + c1 (t - p) + c2 (t - p)^2,
// where p is the left breakpoint of the piece.
using Coeffs = std::array<Rational, 3>;

struct Interval {
    Rational lo;
    Rational hi;

    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    bool within(const Interval& outer) const { return outer.lo <= lo && hi <= outer.hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

class PiecewisePoly {
public:
    PiecewisePoly() = default;
    // Throws InvalidArgument unless breakpoints ascend strictly, the piece count
    // matches, and (for integral form) the function is continuous.
    PiecewisePoly(std::vector<Rational> breakpoints, std::vector<Coeffs> pieces, bool integral_form = false);

    static PiecewisePoly constant(const Rational& lo, const Rational& hi, const Rational& c);

    const std::vector<Rational>& breakpoints() const { return breakpoints_; }
    const std::vector<Coeffs>& pieces() const { return pieces_; }
    bool integral_form() const { return integral_form_; }
    const Rational& lo() const { return breakpoints_.front(); }
    const Rational& hi() const { return breakpoints_.back(); }
    std::size_t piece_count() const { return pieces_.size(); }
    int degree() const;

    // Index of the piece used to evaluate at t (right piece at interior
    // breakpoints, left piece at the last breakpoint).
    std::size_t piece_index(const Rational& t) const;

    Rational eval(const Rational& t) const;
    double eval_double(double t) const;

    // Value of the antiderivative of piece s between its left end and left+h.
    static Rational piece_integral(const Coeffs& c, const Rational& h);

    // The same function described on a refined breakpoint list (superset of
    // the current breakpoints, same span).
    PiecewisePoly refined(const std::vector<Rational>& breakpoints) const;

    // Extends by zero to a wider span.
    PiecewisePoly extended(const Rational& lo, const Rational& hi) const;

    // Merges adjacent pieces that describe the same polynomial.
    PiecewisePoly simplified() const;

    PiecewisePoly derivative() const;
    PiecewisePoly scaled_domain(const Rational& factor) const;

    friend bool operator==(const PiecewisePoly&, const PiecewisePoly&) = default;

private:
    std::vector<Rational> breakpoints_;
    std::vector<Coeffs> pieces_;
    bool integral_form_ = false;
};

// Re-expresses a shifted-basis polynomial around a new anchor q = p + h.
Coeffs rebase(const Coeffs& c, const Rational& h);

Rational eval_poly(const PiecewisePoly& f, const Rational& t);
PiecewisePoly integrate(const PiecewisePoly& f);
Rational definite_integral(const PiecewisePoly& f, const Rational& a, const Rational& b);

// Pointwise sum; both operands are extended by zero to the union span.
PiecewisePoly add(const PiecewisePoly& a, const PiecewisePoly& b);

// Accumulates density contributions of the two kinds used by the gadgets
// (constant height, or a ramp slope * (t - left)) on sub-intervals of a span.
class DensityBuilder {
public:
    DensityBuilder(Rational lo, Rational hi);

    DensityBuilder& constant(const Rational& a, const Rational& b, const Rational& height);
    DensityBuilder& ramp(const Rational& a, const Rational& b, const Rational& slope);

    PiecewisePoly build() const;

private:
    struct Part {
        Rational a, b;
        Coeffs c;
    };
    Rational lo_, hi_;
    std::vector<Part> parts_;
};

}  // namespace chbu
