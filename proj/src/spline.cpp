#include "csdflow/spline.hpp"

#include "csdflow/errors.hpp"

#include <array>
#include <cmath>

namespace csdflow {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussX = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Solves the cyclic tridiagonal system with sub/super diagonals a, c and
// diagonal b (a[0] couples to x[n-1], c[n-1] to x[0]) by Sherman-Morrison.
std::vector<double> solve_cyclic(std::vector<double> a, std::vector<double> b,
                                 std::vector<double> c, std::vector<double> d) {
    const std::size_t n = b.size();
    const double alpha = c[n - 1];
    const double beta = a[0];
    const double gamma = -b[0];
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;

    auto thomas = [&](std::vector<double> rhs) {
        std::vector<double> cp(n), dp(n);
        cp[0] = c[0] / b[0];
        dp[0] = rhs[0] / b[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
        }
        std::vector<double> x(n);
        x[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    };

    std::vector<double> x = thomas(std::move(d));
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> zv = thomas(u);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + zv[0] + beta * zv[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * zv[i];
    return x;
}

} // namespace

PeriodicCubicSpline::PeriodicCubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    const std::size_t n = values_.size();
    if (n < 3 || knots_.size() != n + 1) fail(ErrorKind::TooFewNodes, "periodic spline needs >= 3 points");
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = knots_[i + 1] - knots_[i];
        if (!(h[i] > 0.0)) fail(ErrorKind::DegenerateGeometry, "spline knots must increase strictly");
    }
    std::vector<double> a(n), b(n), c(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n;
        const std::size_t ip = (i + 1) % n;
        a[i] = h[im];
        b[i] = 2.0 * (h[im] + h[i]);
        c[i] = h[i];
        d[i] = 6.0 * ((values_[ip] - values_[i]) / h[i] - (values_[i] - values_[im]) / h[im]);
    }
    second_ = solve_cyclic(std::move(a), std::move(b), std::move(c), std::move(d));
}

double PeriodicCubicSpline::value(std::size_t seg, double t) const {
    const std::size_t n = values_.size();
    const std::size_t next = seg + 1 == n ? 0 : seg + 1;
    const double h = knots_[seg + 1] - knots_[seg];
    const double A = (knots_[seg + 1] - t) / h;
    const double B = 1.0 - A;
    return A * values_[seg] + B * values_[next] +
           ((A * A * A - A) * second_[seg] + (B * B * B - B) * second_[next]) * h * h / 6.0;
}

double PeriodicCubicSpline::derivative(std::size_t seg, double t) const {
    const std::size_t n = values_.size();
    const std::size_t next = seg + 1 == n ? 0 : seg + 1;
    const double h = knots_[seg + 1] - knots_[seg];
    const double A = (knots_[seg + 1] - t) / h;
    const double B = 1.0 - A;
    return (values_[next] - values_[seg]) / h - (3.0 * A * A - 1.0) / 6.0 * h * second_[seg] +
           (3.0 * B * B - 1.0) / 6.0 * h * second_[next];
}

namespace {

std::vector<double> chord_knots(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> t(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double dx = x[j] - x[i], dy = y[j] - y[i];
        t[i + 1] = t[i] + std::sqrt(dx * dx + dy * dy);
    }
    return t;
}

} // namespace

ClosedCurveSpline::ClosedCurveSpline(std::span<const double> x, std::span<const double> y, std::size_t measured)
    : ClosedCurveSpline(chord_knots(x, y), x, y, measured) {}

ClosedCurveSpline::ClosedCurveSpline(std::vector<double> knots, std::span<const double> x,
                                     std::span<const double> y, std::size_t measured)
    : sx_(knots, std::vector<double>(x.begin(), x.end())),
      sy_(std::move(knots), std::vector<double>(y.begin(), y.end())) {
    if (measured == 0 || measured > segments()) measured = segments();
    seg_length_.resize(measured);
    for (std::size_t s = 0; s < measured; ++s) seg_length_[s] = partial_length(s, knot(s + 1));
}

double ClosedCurveSpline::speed(std::size_t seg, double t) const {
    const double dx = sx_.derivative(seg, t), dy = sy_.derivative(seg, t);
    return std::sqrt(dx * dx + dy * dy);
}

double ClosedCurveSpline::partial_length(std::size_t seg, double t) const {
    const double a = knot(seg);
    const double half = 0.5 * (t - a);
    const double mid = 0.5 * (t + a);
    double sum = 0.0;
    for (std::size_t q = 0; q < kGaussX.size(); ++q) sum += kGaussW[q] * speed(seg, mid + half * kGaussX[q]);
    return sum * half;
}

double ClosedCurveSpline::invert(std::size_t seg, double target) const {
    const double a = knot(seg);
    const double b = knot(seg + 1);
    const double len = seg_length_[seg];
    if (target <= 0.0) return a;
    if (target >= len) return b;
    double lo = a, hi = b;
    double t = a + (b - a) * target / len;
    for (int it = 0; it < 50; ++it) {
        const double f = partial_length(seg, t) - target;
        if (std::abs(f) < 1e-15 * (1.0 + len)) break;
        if (f > 0.0) hi = t; else lo = t;
        const double v = speed(seg, t);
        double next = t - f / v;
        // Quadratic convergence: one more update lands at rounding level.
        if (std::abs(f) < 1e-8 * len && next > lo && next < hi) return next;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
    }
    return t;
}

} // namespace csdflow
