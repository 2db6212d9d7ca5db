#include "chbu/numerics/piecewise.hpp"

#include <algorithm>
#include <cmath>

#include "chbu/error.hpp"

namespace chbu {

namespace {

void sort_unique(std::vector<Rational>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

Rational eval_piece(const Coeffs& c, const Rational& h) { return c[0] + h * (c[1] + h * c[2]); }

}  // namespace

Coeffs rebase(const Coeffs& c, const Rational& h) {
    return {c[0] + h * (c[1] + h * c[2]), c[1] + Rational(2) * c[2] * h, c[2]};
}

PiecewisePoly::PiecewisePoly(std::vector<Rational> breakpoints, std::vector<Coeffs> pieces, bool integral_form)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)), integral_form_(integral_form) {
    if (breakpoints_.size() < 2) fail(Errc::InvalidArgument, "piecewise polynomial needs at least two breakpoints");
    if (pieces_.size() + 1 != breakpoints_.size())
        fail(Errc::InvalidArgument, "piece count must equal breakpoint count minus one");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
        if (!(breakpoints_[i - 1] < breakpoints_[i]))
            fail(Errc::InvalidArgument, "breakpoints must be strictly ascending");
    if (integral_form_) {
        for (std::size_t s = 0; s + 1 < pieces_.size(); ++s) {
            Rational left = eval_piece(pieces_[s], breakpoints_[s + 1] - breakpoints_[s]);
            if (left != pieces_[s + 1][0])
                fail(Errc::InvalidArgument,
                     "integral-form function is discontinuous at " + breakpoints_[s + 1].str());
        }
    }
}

PiecewisePoly PiecewisePoly::constant(const Rational& lo, const Rational& hi, const Rational& c) {
    return PiecewisePoly({lo, hi}, {Coeffs{c, 0, 0}});
}

int PiecewisePoly::degree() const {
    int d = 0;
    for (const auto& c : pieces_) {
        if (!c[2].is_zero()) return 2;
        if (!c[1].is_zero()) d = 1;
    }
    return d;
}

std::size_t PiecewisePoly::piece_index(const Rational& t) const {
    if (t < lo() || t > hi()) fail(Errc::OutOfDomain, t.str() + " outside [" + lo().str() + ", " + hi().str() + "]");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
    return std::min(idx == 0 ? 0 : idx - 1, pieces_.size() - 1);
}

Rational PiecewisePoly::eval(const Rational& t) const {
    std::size_t s = piece_index(t);
    return eval_piece(pieces_[s], t - breakpoints_[s]);
}

double PiecewisePoly::eval_double(double t) const {
    // Binary search over double images of the breakpoints; only used in
    // solver loops where exactness is not required.
    std::size_t lo = 0, hi = breakpoints_.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (breakpoints_[mid].to_double() <= t) lo = mid;
        else hi = mid;
    }
    const Coeffs& c = pieces_[lo];
    double h = t - breakpoints_[lo].to_double();
    return c[0].to_double() + h * (c[1].to_double() + h * c[2].to_double());
}

Rational PiecewisePoly::piece_integral(const Coeffs& c, const Rational& h) {
    return h * (c[0] + h * (c[1] / Rational(2) + h * c[2] / Rational(3)));
}

PiecewisePoly PiecewisePoly::refined(const std::vector<Rational>& bps) const {
    std::vector<Rational> all = bps;
    all.insert(all.end(), breakpoints_.begin(), breakpoints_.end());
    sort_unique(all);
    if (all.front() != lo() || all.back() != hi()) fail(Errc::InvalidArgument, "refinement must keep the span");
    std::vector<Coeffs> pieces;
    std::size_t s = 0;
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        while (breakpoints_[s + 1] <= all[i]) ++s;
        pieces.push_back(rebase(pieces_[s], all[i] - breakpoints_[s]));
    }
    return PiecewisePoly(std::move(all), std::move(pieces), integral_form_);
}

PiecewisePoly PiecewisePoly::extended(const Rational& new_lo, const Rational& new_hi) const {
    if (new_lo > lo() || new_hi < hi()) fail(Errc::InvalidArgument, "extension must contain the span");
    std::vector<Rational> bps;
    std::vector<Coeffs> pieces;
    if (new_lo < lo()) {
        bps.push_back(new_lo);
        pieces.push_back(Coeffs{0, 0, 0});
    }
    bps.insert(bps.end(), breakpoints_.begin(), breakpoints_.end());
    pieces.insert(pieces.end(), pieces_.begin(), pieces_.end());
    if (new_hi > hi()) {
        bps.push_back(new_hi);
        pieces.push_back(Coeffs{0, 0, 0});
    }
    return PiecewisePoly(std::move(bps), std::move(pieces));
}

PiecewisePoly PiecewisePoly::simplified() const {
    std::vector<Rational> bps{breakpoints_[0]};
    std::vector<Coeffs> pieces{pieces_[0]};
    for (std::size_t s = 1; s < pieces_.size(); ++s) {
        Rational len = breakpoints_[s] - bps.back();
        if (rebase(pieces.back(), len) == pieces_[s]) continue;
        bps.push_back(breakpoints_[s]);
        pieces.push_back(pieces_[s]);
    }
    bps.push_back(hi());
    return PiecewisePoly(std::move(bps), std::move(pieces), integral_form_);
}

PiecewisePoly PiecewisePoly::derivative() const {
    std::vector<Coeffs> d;
    d.reserve(pieces_.size());
    for (const auto& c : pieces_) d.push_back(Coeffs{c[1], Rational(2) * c[2], 0});
    return PiecewisePoly(breakpoints_, std::move(d));
}

PiecewisePoly PiecewisePoly::scaled_domain(const Rational& factor) const {
    if (factor.sign() <= 0) fail(Errc::InvalidArgument, "domain scale factor must be positive");
    std::vector<Rational> bps;
    for (const auto& b : breakpoints_) bps.push_back(b * factor);
    std::vector<Coeffs> pieces;
    for (const auto& c : pieces_) pieces.push_back(Coeffs{c[0], c[1] / factor, c[2] / (factor * factor)});
    return PiecewisePoly(std::move(bps), std::move(pieces), integral_form_);
}

Rational eval_poly(const PiecewisePoly& f, const Rational& t) { return f.eval(t); }

PiecewisePoly integrate(const PiecewisePoly& f) {
    std::vector<Coeffs> out;
    Rational acc = 0;
    for (std::size_t s = 0; s < f.piece_count(); ++s) {
        const Coeffs& c = f.pieces()[s];
        if (!c[2].is_zero()) fail(Errc::DegreeTooHigh, "piece " + std::to_string(s) + " has degree 2");
        out.push_back(Coeffs{acc, c[0], c[1] / Rational(2)});
        acc += PiecewisePoly::piece_integral(c, f.breakpoints()[s + 1] - f.breakpoints()[s]);
    }
    return PiecewisePoly(f.breakpoints(), std::move(out), true);
}

Rational definite_integral(const PiecewisePoly& f, const Rational& a, const Rational& b) {
    if (a > b) fail(Errc::InvalidArgument, "definite_integral needs a <= b");
    if (a < f.lo() || b > f.hi())
        fail(Errc::OutOfDomain, "[" + a.str() + ", " + b.str() + "] leaves the domain");
    Rational total = 0;
    const auto& bp = f.breakpoints();
    for (std::size_t s = 0; s < f.piece_count(); ++s) {
        const Rational& p = bp[s];
        Rational x = max(a, p), y = min(b, bp[s + 1]);
        if (!(x < y)) continue;
        total += PiecewisePoly::piece_integral(f.pieces()[s], y - p) -
                 PiecewisePoly::piece_integral(f.pieces()[s], x - p);
    }
    return total;
}

PiecewisePoly add(const PiecewisePoly& a, const PiecewisePoly& b) {
    Rational lo = min(a.lo(), b.lo()), hi = max(a.hi(), b.hi());
    PiecewisePoly ea = (a.lo() == lo && a.hi() == hi) ? a : a.extended(lo, hi);
    PiecewisePoly eb = (b.lo() == lo && b.hi() == hi) ? b : b.extended(lo, hi);
    std::vector<Rational> all = ea.breakpoints();
    all.insert(all.end(), eb.breakpoints().begin(), eb.breakpoints().end());
    sort_unique(all);
    PiecewisePoly ra = ea.refined(all), rb = eb.refined(all);
    std::vector<Coeffs> sum;
    for (std::size_t s = 0; s < ra.piece_count(); ++s) {
        const Coeffs& x = ra.pieces()[s];
        const Coeffs& y = rb.pieces()[s];
        sum.push_back(Coeffs{x[0] + y[0], x[1] + y[1], x[2] + y[2]});
    }
    return PiecewisePoly(std::move(all), std::move(sum)).simplified();
}

DensityBuilder::DensityBuilder(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (!(lo_ < hi_)) fail(Errc::InvalidArgument, "empty density span");
}

DensityBuilder& DensityBuilder::constant(const Rational& a, const Rational& b, const Rational& height) {
    if (a < lo_ || b > hi_ || !(a < b)) fail(Errc::InvalidArgument, "density part outside span");
    parts_.push_back(Part{a, b, Coeffs{height, 0, 0}});
    return *this;
}

DensityBuilder& DensityBuilder::ramp(const Rational& a, const Rational& b, const Rational& slope) {
    if (a < lo_ || b > hi_ || !(a < b)) fail(Errc::InvalidArgument, "density part outside span");
    parts_.push_back(Part{a, b, Coeffs{0, slope, 0}});
    return *this;
}

PiecewisePoly DensityBuilder::build() const {
    std::vector<Rational> bps{lo_, hi_};
    for (const auto& p : parts_) {
        bps.push_back(p.a);
        bps.push_back(p.b);
    }
    sort_unique(bps);
    std::vector<Coeffs> pieces;
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        Coeffs c{0, 0, 0};
        for (const auto& p : parts_) {
            if (p.a <= bps[i] && bps[i + 1] <= p.b) {
                Coeffs r = rebase(p.c, bps[i] - p.a);
                for (int k = 0; k < 3; ++k) c[k] += r[k];
            }
        }
        pieces.push_back(c);
    }
    return PiecewisePoly(std::move(bps), std::move(pieces)).simplified();
}

}  // namespace chbu
