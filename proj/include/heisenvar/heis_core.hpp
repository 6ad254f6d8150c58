#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace heisenvar {

// Scaling data of H^n: homogeneous dimension Q = 2n+2 and the critical
// exponent 2* = 2Q/(Q-2).  For the grid modules n is always 1 (Q = 4, 2* = 4).
struct GroupParams {
    int n = 1;

    explicit GroupParams(int n_ = 1) : n(n_) {
        if (n < 1) throw std::invalid_argument("GroupParams: n must be >= 1");
    }
    int q() const { return 2 * n + 2; }
    double crit_exp() const {
        const double Q = q();
        return 2.0 * Q / (Q - 2.0);
    }
};

// A point (x, y, t) of H^n.  x and y have length n.
struct GroupPoint {
    std::vector<double> x;
    std::vector<double> y;
    double t = 0.0;

    GroupPoint() : x(1, 0.0), y(1, 0.0), t(0.0) {}
    GroupPoint(std::vector<double> x_, std::vector<double> y_, double t_)
        : x(std::move(x_)), y(std::move(y_)), t(t_) {
        if (x.size() != y.size() || x.empty())
            throw std::invalid_argument("GroupPoint: x and y must share a positive length");
    }
    // n = 1 convenience
    GroupPoint(double x1, double y1, double t_) : x(1, x1), y(1, y1), t(t_) {}

    std::size_t n() const { return x.size(); }
    double x1() const { return x[0]; }
    double y1() const { return y[0]; }

    static GroupPoint identity(std::size_t n = 1) {
        return GroupPoint(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0);
    }
};

GroupPoint compose(const GroupPoint& a, const GroupPoint& b);
GroupPoint inverse(const GroupPoint& a);
GroupPoint dilate(double lambda, const GroupPoint& p);
GroupPoint left_translate(const GroupPoint& origin, const GroupPoint& p);
double gauge(const GroupPoint& p);

// delta_{1/lambda}(xi0^{-1} o xi): the coordinate map under which a bubble
// with parameters (lambda, xi0) is the pullback of the canonical extremal.
GroupPoint scaled_translate(double lambda, const GroupPoint& xi0, const GroupPoint& xi);

// ---- n = 1 fast paths used by the grid modules -----------------------------

struct Point3 {
    double x = 0.0, y = 0.0, t = 0.0;
};

inline Point3 compose3(const Point3& a, const Point3& b) {
    return {a.x + b.x, a.y + b.y, a.t + b.t + 2.0 * (a.y * b.x - a.x * b.y)};
}

inline Point3 inverse3(const Point3& a) { return {-a.x, -a.y, -a.t}; }

inline Point3 dilate3(double lambda, const Point3& p) {
    return {lambda * p.x, lambda * p.y, lambda * lambda * p.t};
}

inline double gauge3(const Point3& p) {
    const double z2 = p.x * p.x + p.y * p.y;
    return std::pow(z2 * z2 + p.t * p.t, 0.25);
}

// delta_{1/lambda}(xi0^{-1} o xi)
inline Point3 scaled_translate3(double lambda, const Point3& xi0, const Point3& xi) {
    return dilate3(1.0 / lambda, compose3(inverse3(xi0), xi));
}

inline Point3 to_point3(const GroupPoint& p) {
    if (p.n() != 1) throw std::invalid_argument("to_point3: n must be 1");
    return {p.x1(), p.y1(), p.t};
}

inline GroupPoint to_group_point(const Point3& p) { return GroupPoint(p.x, p.y, p.t); }

}  // namespace heisenvar
