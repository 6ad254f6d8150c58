#include "heisenvar/heis_core.hpp"

namespace heisenvar {

namespace {
void check_same_n(const GroupPoint& a, const GroupPoint& b, const char* op) {
    if (a.n() != b.n())
        throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}
}  // namespace

GroupPoint compose(const GroupPoint& a, const GroupPoint& b) {
    check_same_n(a, b, "compose");
    const std::size_t n = a.n();
    std::vector<double> x(n), y(n);
    double twist = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = a.x[j] + b.x[j];
        y[j] = a.y[j] + b.y[j];
        twist += a.y[j] * b.x[j] - a.x[j] * b.y[j];
    }
    return GroupPoint(std::move(x), std::move(y), a.t + b.t + 2.0 * twist);
}

GroupPoint inverse(const GroupPoint& a) {
    std::vector<double> x(a.n()), y(a.n());
    for (std::size_t j = 0; j < a.n(); ++j) {
        x[j] = -a.x[j];
        y[j] = -a.y[j];
    }
    return GroupPoint(std::move(x), std::move(y), -a.t);
}

GroupPoint dilate(double lambda, const GroupPoint& p) {
    if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
    std::vector<double> x(p.n()), y(p.n());
    for (std::size_t j = 0; j < p.n(); ++j) {
        x[j] = lambda * p.x[j];
        y[j] = lambda * p.y[j];
    }
    return GroupPoint(std::move(x), std::move(y), lambda * lambda * p.t);
}

GroupPoint left_translate(const GroupPoint& origin, const GroupPoint& p) {
    return compose(origin, p);
}

double gauge(const GroupPoint& p) {
    double z2 = 0.0;
    for (std::size_t j = 0; j < p.n(); ++j) z2 += p.x[j] * p.x[j] + p.y[j] * p.y[j];
    return std::pow(z2 * z2 + p.t * p.t, 0.25);
}

GroupPoint scaled_translate(double lambda, const GroupPoint& xi0, const GroupPoint& xi) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("scaled_translate: lambda must be positive");
    check_same_n(xi0, xi, "scaled_translate");
    return dilate(1.0 / lambda, compose(inverse(xi0), xi));
}

}  // namespace heisenvar
