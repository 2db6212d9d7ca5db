#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "chbu/bu/borsuk_ulam.hpp"

namespace chbu {

namespace {

template <class T>
int label_of(std::span<const T> g, auto magnitude, auto nonnegative) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
        if (magnitude(g[best]) < magnitude(g[i])) best = i;
    int l = static_cast<int>(best) + 1;
    return nonnegative(g[best]) ? l : -l;
}

Rational linf(std::span<const Rational> a, std::span<const Rational> b) {
    Rational r = 0;
    for (std::size_t i = 0; i < a.size(); ++i) r = max(r, abs(a[i] - b[i]));
    return r;
}

std::vector<Rational> negated(const std::vector<Rational>& x) {
    std::vector<Rational> r;
    for (const auto& v : x) r.push_back(-v);
    return r;
}

class Search {
public:
    Search(const BUInstance& bu, const Rational& eps, const Rational& lambda, const TuckerOptions& opts)
        : cc_(bu.map), d_(bu.dimension), eps_(eps), lambda_(lambda) {
        mesh_ = std::max<long>(1, ceil(lambda / eps).get_si());
        side_ = static_cast<std::size_t>(mesh_) + 1;
        cells_ = 1;
        for (std::size_t k = 0; k < d_; ++k) cells_ *= side_;
        if (cells_ > opts.max_vertices)
            fail(Errc::DimensionTooLarge, "mesh 1/" + std::to_string(mesh_) + " is too fine for an exhaustive scan");
        threads_ = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
        stats_.mesh = mesh_;
    }

    TuckerResult run() {
        for (unsigned mask = 0; mask < (1u << d_); ++mask) {
            // Facet sign pattern with a nonnegative first coordinate.
            std::vector<int> sigma(d_ + 1, 1);
            for (std::size_t k = 0; k < d_; ++k) sigma[k + 1] = (mask >> k) & 1u ? -1 : 1;
            if (auto r = scan_facet(sigma)) return TuckerResult{std::move(*r), stats_};
        }
        fail(Errc::NoCertifiedEdge, "no complementary edge could be certified at mesh 1/" + std::to_string(mesh_));
    }

private:
    using Outcome = std::variant<ApproxSolution, LipschitzWitness>;

    // u_0..u_{d-1} packed; u_d is implied by the sum.
    std::size_t index(const std::vector<long>& u) const {
        std::size_t idx = 0;
        for (std::size_t k = d_; k-- > 0;) idx = idx * side_ + static_cast<std::size_t>(u[k]);
        return idx;
    }

    void unpack(std::size_t idx, std::vector<long>& u) const {
        long sum = 0;
        for (std::size_t k = 0; k < d_; ++k) {
            u[k] = static_cast<long>(idx % side_);
            idx /= side_;
            sum += u[k];
        }
        u[d_] = mesh_ - sum;
    }

    std::vector<Rational> point(const std::vector<int>& sigma, const std::vector<long>& u) const {
        std::vector<Rational> x;
        for (std::size_t k = 0; k <= d_; ++k) x.push_back(Rational(sigma[k] * u[k], mesh_));
        return x;
    }

    std::vector<Rational> gap(const std::vector<Rational>& x) const {
        auto a = cc_.outputs(x), b = cc_.outputs(negated(x));
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    }

    static Rational norm(const std::vector<Rational>& g) {
        Rational r = 0;
        for (const auto& v : g) r = max(r, abs(v));
        return r;
    }

    // Label in double; recomputed exactly when the argmax or the sign is
    // too close to call.  Returns 0 for an exact zero of g.
    int label(const std::vector<int>& sigma, const std::vector<long>& u, std::vector<double>& xs,
              std::vector<double>& scratch, std::vector<double>& fa, std::vector<double>& fb) const {
        for (std::size_t k = 0; k <= d_; ++k) xs[k] = static_cast<double>(sigma[k] * u[k]) / static_cast<double>(mesh_);
        cc_.outputs(xs, scratch, fa);
        for (auto& v : xs) v = -v;
        cc_.outputs(xs, scratch, fb);
        double top = -1, second = -1;
        for (std::size_t i = 0; i < d_; ++i) {
            fa[i] -= fb[i];
            double m = std::fabs(fa[i]);
            if (m > top) {
                second = top;
                top = m;
            } else if (m > second) {
                second = m;
            }
        }
        double slack = 1e-9 * (1.0 + top);
        if (top > slack && (d_ == 1 || top - second > slack))
            return label_of<double>(std::span<const double>(fa.data(), d_), [](double v) { return std::fabs(v); },
                                    [](double v) { return v >= 0; });
        auto g = gap(point(sigma, u));
        if (norm(g).is_zero()) return 0;
        return tucker_label(g);
    }

    std::optional<Outcome> scan_facet(const std::vector<int>& sigma) {
        std::vector<signed char> labels(cells_, 0);
        std::atomic<bool> zero_found{false};
        std::size_t zero_idx = 0;
        std::mutex mu;
        std::atomic<std::size_t> count{0};
        auto worker = [&](unsigned w) {
            std::vector<long> u(d_ + 1);
            std::vector<double> xs(d_ + 1), scratch, fa(d_), fb(d_);
            std::size_t local = 0;
            for (std::size_t idx = w; idx < cells_; idx += threads_) {
                unpack(idx, u);
                if (u[d_] < 0) continue;
                int l = label(sigma, u, xs, scratch, fa, fb);
                ++local;
                if (l == 0) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!zero_found || idx < zero_idx) zero_idx = idx;
                    zero_found = true;
                }
                labels[idx] = static_cast<signed char>(l);
            }
            count += local;
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < threads_; ++w) pool.emplace_back(worker, w);
        worker(0);
        for (auto& t : pool) t.join();
        stats_.vertices += count;
        if (zero_found) {
            std::vector<long> u(d_ + 1);
            unpack(zero_idx, u);
            return ApproxSolution{point(sigma, u), Rational(0)};
        }

        std::vector<long> u(d_ + 1), v(d_ + 1);
        for (std::size_t idx = 0; idx < cells_; ++idx) {
            unpack(idx, u);
            if (u[d_] < 0) continue;
            int l = labels[idx];
            for (unsigned delta = 1; delta < (1u << d_); ++delta) {
                auto bit = [&](std::size_t k) { return static_cast<long>((delta >> k) & 1u); };
                bool inside = true;
                v[0] = u[0] + bit(0);
                for (std::size_t k = 1; k < d_; ++k) v[k] = u[k] + bit(k) - bit(k - 1);
                v[d_] = u[d_] - bit(d_ - 1);
                for (std::size_t k = 0; k <= d_; ++k) inside = inside && v[k] >= 0;
                if (!inside || labels[index(v)] != -l) continue;
                ++stats_.candidate_edges;
                if (auto r = certify(point(sigma, u), point(sigma, v))) return r;
            }
        }
        return std::nullopt;
    }

    std::optional<Outcome> certify(const std::vector<Rational>& x, const std::vector<Rational>& y) const {
        auto gx = gap(x), gy = gap(y);
        if (tucker_label(gx) != -tucker_label(gy)) return std::nullopt;
        Rational rx = norm(gx), ry = norm(gy);
        if (rx <= eps_ || ry <= eps_) return rx <= ry ? ApproxSolution{x, rx} : ApproxSolution{y, ry};
        for (const auto& [a, b] : {std::pair{x, y}, std::pair{negated(x), negated(y)}}) {
            Rational ratio = linf(cc_.outputs(a), cc_.outputs(b)) / linf(a, b);
            if (ratio > lambda_) return LipschitzWitness{a, b, ratio};
        }
        return std::nullopt;
    }

    CompiledCircuit cc_;
    std::size_t d_;
    Rational eps_, lambda_;
    long mesh_ = 1;
    std::size_t side_ = 2;
    std::size_t cells_ = 1;
    unsigned threads_ = 1;
    TuckerStats stats_;
};

}  // namespace

int tucker_label(std::span<const double> g) {
    return label_of<double>(g, [](double v) { return std::fabs(v); }, [](double v) { return v >= 0; });
}

int tucker_label(std::span<const Rational> g) {
    return label_of<Rational>(g, [](const Rational& v) { return abs(v); }, [](const Rational& v) { return v.sign() >= 0; });
}

TuckerResult tucker_solve(const BUInstance& bu, const Rational& eps, const Rational& lambda, const TuckerOptions& opts) {
    const std::size_t d = bu.dimension;
    if (d == 0) fail(Errc::InvalidArgument, "dimension must be positive");
    if (bu.map.inputs.size() != d + 1 || bu.map.outputs.size() != d)
        fail(Errc::ArityMismatch, "map must have d+1 inputs and d outputs");
    if (d > opts.max_dimension)
        fail(Errc::DimensionTooLarge, "dimension " + std::to_string(d) + " exceeds the search limit " +
                                          std::to_string(opts.max_dimension) + "; supply a solution and verify it");
    if (eps.sign() <= 0 || lambda.sign() <= 0) fail(Errc::InvalidArgument, "eps and lambda must be positive");
    return Search(bu, eps, lambda, opts).run();
}

}  // namespace chbu
