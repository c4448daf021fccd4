#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stefan {

// Shape-preserving cubic interpolant on a uniform grid (Fritsch-Carlson
// slope limiting).  Monotone data stays monotone, and positive data is not
// dragged below zero by overshoot, which matters when the interpolated
// quantity is a population density.
class MonotoneCubic {
  public:
    MonotoneCubic(double x0, double x1, std::vector<double> values)
        : x0_(x0), x1_(x1), y_(std::move(values)) {
        if (y_.size() < 2) throw std::invalid_argument("MonotoneCubic: need at least 2 samples");
        if (!(x1_ > x0_)) throw std::invalid_argument("MonotoneCubic: empty interval");
        const std::size_t n = y_.size() - 1;
        const double h = (x1_ - x0_) / static_cast<double>(n);
        std::vector<double> delta(n);
        for (std::size_t i = 0; i < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / h;
        slope_.assign(n + 1, 0.0);
        slope_[0] = delta[0];
        slope_[n] = delta[n - 1];
        for (std::size_t i = 1; i < n; ++i) {
            if (delta[i - 1] * delta[i] > 0.0) {
                // harmonic mean keeps the interpolant monotone on this cell pair
                slope_[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
            } else {
                slope_[i] = 0.0;
            }
        }
        // limit the one-sided end slopes as well
        for (std::size_t i : {std::size_t{0}, n}) {
            const double d = (i == 0) ? delta[0] : delta[n - 1];
            if (slope_[i] * d <= 0.0)
                slope_[i] = 0.0;
            else if (std::abs(slope_[i]) > 3.0 * std::abs(d))
                slope_[i] = 3.0 * d;
        }
    }

    double operator()(double x) const {
        const std::size_t n = y_.size() - 1;
        const double h = (x1_ - x0_) / static_cast<double>(n);
        double s = (x - x0_) / h;
        s = std::clamp(s, 0.0, static_cast<double>(n));
        std::size_t i = static_cast<std::size_t>(std::min(s, static_cast<double>(n - 1)));
        const double t = s - static_cast<double>(i);
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
    }

  private:
    double x0_;
    double x1_;
    std::vector<double> y_;
    std::vector<double> slope_;
};

inline std::vector<double> linspace(double a, double b, std::size_t count) {
    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i)
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    return x;
}

// Composite trapezoid on a uniform grid with spacing h.
inline double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

}  // namespace stefan
