#include "csdflow/discrete.hpp"

#include "csdflow/errors.hpp"

#include <cstddef>

namespace csdflow::discrete {

namespace {

// Value of f at (possibly ghost) index j in [-4, n+3].
inline double ghost(std::span<const double> f, std::ptrdiff_t j, Topology topology,
                    double sign) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    if (j >= 0 && j < n) return f[static_cast<std::size_t>(j)];
    if (topology == Topology::Ring) {
        j = ((j % n) + n) % n;
        return f[static_cast<std::size_t>(j)];
    }
    // Mirror through the pole node: f(-j) = sign * f(j).
    if (j < 0) return sign * f[static_cast<std::size_t>(-j)];
    return sign * f[static_cast<std::size_t>(2 * (n - 1) - j)];
}

template <bool WithSecond>
void diff_impl(std::span<const double> f, Topology topology, Parity parity, std::span<double> du,
               std::span<double> duu) {
    const std::size_t n = f.size();
    if (n < 5) fail(ErrorKind::TooFewNodes, "finite differences need at least 5 nodes");
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    constexpr double c12 = 1.0 / 12.0;

    auto stencil = [&](std::size_t i, double fm2, double fm1, double f0, double fp1, double fp2) {
        // Difference form, so constants differentiate to exactly zero.
        du[i] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) * c12;
        if constexpr (WithSecond) duu[i] = (16.0 * (fp1 + fm1 - 2.0 * f0) - (fp2 + fm2 - 2.0 * f0)) * c12;
    };

    for (std::size_t i = 2; i + 2 < n; ++i) stencil(i, f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
        const auto j = static_cast<std::ptrdiff_t>(i);
        stencil(i, ghost(f, j - 2, topology, sign), ghost(f, j - 1, topology, sign), f[i],
                ghost(f, j + 1, topology, sign), ghost(f, j + 2, topology, sign));
    }
}

template <bool WithSecond>
void diff8_impl(std::span<const double> f, Topology topology, Parity parity, std::span<double> du,
                std::span<double> duu) {
    const std::size_t n = f.size();
    if (n < 9) fail(ErrorKind::TooFewNodes, "eighth-order differences need at least 9 nodes");
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    static constexpr double d1[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    static constexpr double d2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    const auto sn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        const bool inner = i >= 4 && i + 4 < sn;
        auto at = [&](std::ptrdiff_t j) { return inner ? f[static_cast<std::size_t>(j)] : ghost(f, j, topology, sign); };
        const double f0 = f[static_cast<std::size_t>(i)];
        double a = 0.0, b = 0.0;
        for (std::ptrdiff_t m = 1; m <= 4; ++m) {
            const double fp = at(i + m), fm = at(i - m);
            a += d1[m - 1] * (fp - fm);
            b += d2[m] * (fp + fm - 2.0 * f0);
        }
        du[static_cast<std::size_t>(i)] = a;
        if constexpr (WithSecond) duu[static_cast<std::size_t>(i)] = b;
    }
}

} // namespace

void diff(std::span<const double> f, Topology topology, Parity parity, std::span<double> du,
          std::span<double> duu, int order) {
    if (order == 8)
        diff8_impl<true>(f, topology, parity, du, duu);
    else
        diff_impl<true>(f, topology, parity, du, duu);
}

void diff1(std::span<const double> f, Topology topology, Parity parity, std::span<double> du, int order) {
    if (order == 8)
        diff8_impl<false>(f, topology, parity, du, {});
    else
        diff_impl<false>(f, topology, parity, du, {});
}

std::vector<double> quadrature_weights(std::size_t n, Topology topology) {
    std::vector<double> w(n, 0.0);
    if (topology == Topology::Ring) {
        for (auto& x : w) x = 1.0;
        return w;
    }
    if (n < 4) fail(ErrorKind::TooFewNodes, "quadrature needs at least 4 nodes");
    const std::size_t intervals = n - 1;
    // Simpson over an even number of leading intervals.
    const std::size_t simpson = intervals % 2 == 0 ? intervals : intervals - 3;
    for (std::size_t i = 0; i + 2 <= simpson; i += 2) {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
    }
    if (simpson != intervals) {
        const std::size_t i = simpson;
        w[i] += 3.0 / 8.0;
        w[i + 1] += 9.0 / 8.0;
        w[i + 2] += 9.0 / 8.0;
        w[i + 3] += 3.0 / 8.0;
    }
    return w;
}

} // namespace csdflow::discrete
