#include "chbu/numerics/rational.hpp"

#include <ostream>

#include "chbu/error.hpp"

namespace chbu {

namespace {

bool valid_integer_text(std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

}  // namespace

Rational::Rational(long num, long den) {
    if (den == 0) fail(Errc::InvalidArgument, "zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) fail(Errc::InvalidArgument, "division by zero");
    v_ /= o.v_;
    return *this;
}

Rational Rational::parse(std::string_view text) {
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
    if (!valid_integer_text(num, true) || !valid_integer_text(den, false))
        fail(Errc::ParseError, "not a rational \"" + std::string(text) + "\"");
    std::string n(num);
    if (n[0] == '+') n.erase(0, 1);
    mpz_class zn(n, 10), zd(std::string(den), 10);
    if (zd == 0) fail(Errc::ParseError, "zero denominator in \"" + std::string(text) + "\"");
    mpq_class q(zn, zd);
    q.canonicalize();
    return Rational(q);
}

std::string Rational::str() const {
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::size_t Rational::hash() const {
    std::size_t h = std::hash<std::string>{}(v_.get_num().get_str(16));
    return h ^ (std::hash<std::string>{}(v_.get_den().get_str(16)) * 1099511628211ull);
}

Rational abs(const Rational& x) { return x.sign() < 0 ? -x : x; }
Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational pow2(long exponent) {
    mpz_class p = 1;
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent < 0 ? -exponent : exponent));
    if (exponent >= 0) return Rational(p);
    return Rational(mpq_class(mpz_class(1), p));
}

long ceil_log2(const Rational& x) {
    if (x.sign() <= 0) fail(Errc::InvalidArgument, "ceil_log2 of non-positive value");
    mpz_class c = ceil(x);
    long k = static_cast<long>(mpz_sizeinbase(c.get_mpz_t(), 2));
    // 2^(k-1) <= c < 2^k; tighten when c is an exact power of two.
    if (c == 1) k = 0;
    else if (mpz_popcount(c.get_mpz_t()) == 1) k -= 1;
    while (pow2(k - 1) >= x) --k;
    while (pow2(k) < x) ++k;
    return k;
}

mpz_class ceil(const Rational& x) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), x.mpq().get_num_mpz_t(), x.mpq().get_den_mpz_t());
    return r;
}

mpz_class floor(const Rational& x) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), x.mpq().get_num_mpz_t(), x.mpq().get_den_mpz_t());
    return r;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace chbu
