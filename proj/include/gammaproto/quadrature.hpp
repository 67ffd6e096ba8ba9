#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "gammaproto/error.hpp"

namespace gammaproto {

struct QuadratureSpec {
    double horizon = 20.0;    // truncation of exponentially damped integrands, units of T1
    double rel_tol = 1e-6;
    double grid_step = 0.01;  // tabulation step, units of T1

    void validate() const;
};

// Gauss-Legendre rule on [-1, 1]. Nodes come from the Golub-Welsch eigenproblem
// and are polished by Newton iteration on the Legendre recurrence.
template <typename Scalar = double>
class GaussLegendre {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit GaussLegendre(int n) : nodes_(n), weights_(n) {
        if (n < 1) throw DomainError("GaussLegendre: order must be positive");
        Matrix jacobi = Matrix::Zero(n, n);
        for (int k = 1; k < n; ++k) {
            const Scalar beta = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
            jacobi(k, k - 1) = beta;
            jacobi(k - 1, k) = beta;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
        nodes_ = solver.eigenvalues();
        for (int i = 0; i < n; ++i) {
            Scalar x = nodes_(i);
            Scalar dp = 0;
            for (int it = 0; it < 3; ++it) {
                auto [p, d] = legendre_with_derivative(n, x);
                x -= p / d;
                dp = d;
            }
            dp = legendre_with_derivative(n, x).second;
            nodes_(i) = x;
            weights_(i) = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
        }
    }

    int size() const { return static_cast<int>(nodes_.size()); }
    const Vector& nodes() const { return nodes_; }
    const Vector& weights() const { return weights_; }

    // W(j, k) = integral from -1 to nodes(j) of the k-th Lagrange basis polynomial,
    // so W * f gives the running integral of f sampled at the nodes.
    Matrix integration_matrix() const {
        const int n = size();
        Matrix vander(n, n), running(n, n);
        for (int j = 0; j < n; ++j) {
            const Scalar x = nodes_(j);
            std::vector<Scalar> p(n + 1);
            p[0] = 1;
            if (n >= 1) p[1] = x;
            for (int k = 1; k < n; ++k) p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1);
            for (int k = 0; k < n; ++k) {
                vander(j, k) = p[k];
                // integral of P_0 is x + 1; of P_k is (P_{k+1} - P_{k-1}) / (2k + 1)
                running(j, k) = k == 0 ? x + 1 : (p[k + 1] - p[k - 1]) / Scalar(2 * k + 1);
            }
        }
        return vander.transpose().colPivHouseholderQr().solve(running.transpose()).transpose();
    }

    template <typename F>
    auto integrate(F&& f, Scalar a, Scalar b) const {
        const Scalar half = (b - a) / 2;
        const Scalar mid = (a + b) / 2;
        using R = std::decay_t<decltype(f(mid))>;
        R sum = R(0);
        for (int i = 0; i < size(); ++i) sum += weights_(i) * f(mid + half * nodes_(i));
        return sum * half;
    }

private:
    static std::pair<Scalar, Scalar> legendre_with_derivative(int n, Scalar x) {
        Scalar p0 = 1, p1 = x;
        for (int k = 1; k < n; ++k) {
            const Scalar p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
            p0 = p1;
            p1 = p2;
        }
        const Scalar pn = n == 0 ? Scalar(1) : p1;
        const Scalar pm = n == 0 ? Scalar(0) : p0;
        return {pn, n * (x * pn - pm) / (x * x - 1)};
    }

    Vector nodes_;
    Vector weights_;
};

template <typename R>
struct IntegrationResult {
    R value{};
    double error = 0.0;
    bool converged = false;
    int intervals = 0;
};

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_intervals = 20000;
    int order = 10;
};

const GaussLegendre<double>& gauss_legendre(int n);

namespace detail {

template <typename R>
double magnitude(const R& v) {
    return std::abs(v);
}

} // namespace detail

// Globally adaptive bisection: each interval is estimated by the order-n rule on
// its two halves and its error by the difference to the rule on the whole.
// `breakpoints` split the initial partition so that jumps never fall inside a panel.
template <typename F>
auto integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt,
                        std::span<const double> breakpoints = {}) {
    using R = std::decay_t<decltype(f(a))>;
    const auto& rule = gauss_legendre(opt.order);

    struct Piece {
        double lo, hi;
        R value;
        double error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto evaluate = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        const R whole = rule.integrate(f, lo, hi);
        const R halves = rule.integrate(f, lo, mid) + rule.integrate(f, mid, hi);
        return Piece{lo, hi, halves, detail::magnitude(R(halves - whole))};
    };

    IntegrationResult<R> result;
    if (!(b > a)) {
        result.converged = true;
        return result;
    }

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Piece> queue;
    R total = R(0);
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Piece p = evaluate(cuts[i], cuts[i + 1]);
        total += p.value;
        error += p.error;
        queue.push(p);
    }
    while (error > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)) &&
           static_cast<int>(queue.size()) < opt.max_intervals) {
        Piece worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            queue.push(worst);
            break;
        }
        Piece left = evaluate(worst.lo, mid);
        Piece right = evaluate(mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    result.value = total;
    result.error = error;
    result.intervals = static_cast<int>(queue.size());
    result.converged = error <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
    return result;
}

// Same as integrate_adaptive but throws QuadratureError when the tolerance is not met.
template <typename F>
auto integrate_or_throw(F&& f, double a, double b, const AdaptiveOptions& opt, const char* what,
                        std::span<const double> breakpoints = {}) {
    auto r = integrate_adaptive(std::forward<F>(f), a, b, opt, breakpoints);
    if (!r.converged) throw QuadratureError(std::string(what) + ": adaptive quadrature did not converge", r.error);
    return r.value;
}

} // namespace gammaproto
