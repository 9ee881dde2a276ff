#include "entangle/stats.hpp"

#include <cmath>
#include <limits>

namespace entangle {

namespace {

// Lentz's continued fraction for the incomplete beta.
double beta_cf(double a, double b, double x)
{
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidArgument("incomplete_beta: a and b must be positive");
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof)
{
    if (!(dof > 0.0))
        throw InvalidArgument("student_t_two_sided: dof must be positive");
    if (std::isinf(t))
        return 0.0;
    if (std::isnan(t))
        return std::numeric_limits<double>::quiet_NaN();
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

std::vector<double> benjamini_hochberg(const std::vector<double>& p)
{
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> adj(n);
    double running = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const std::size_t i = order[k];
        running = std::min(running, p[i] * static_cast<double>(n) / static_cast<double>(k + 1));
        adj[i] = std::max(std::min(running, 1.0), p[i]);
    }
    return adj;
}

} // namespace entangle
