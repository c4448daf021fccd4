#pragma once

#include <cmath>
#include <stdexcept>

namespace stefan {

// Boundary operator at x = 0: B[u] = alpha*u - beta*u_x with alpha, beta >= 0.
// Coefficients are normalized so alpha + beta = 1; (1,0) is Dirichlet and
// (0,1) Neumann.  The moving end x = h(t) always carries u = 0.
class BoundaryOperator {
  public:
    BoundaryOperator(double alpha, double beta) {
        if (alpha < 0.0 || beta < 0.0)
            throw std::invalid_argument("BoundaryOperator: coefficients must be nonnegative");
        const double s = alpha + beta;
        if (!(s > 0.0))
            throw std::invalid_argument("BoundaryOperator: alpha and beta cannot both vanish");
        alpha_ = alpha / s;
        beta_ = beta / s;
    }

    static BoundaryOperator dirichlet() { return {1.0, 0.0}; }
    static BoundaryOperator neumann() { return {0.0, 1.0}; }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool is_dirichlet() const { return beta_ == 0.0; }
    bool is_neumann() const { return alpha_ == 0.0; }

  private:
    double alpha_;
    double beta_;
};

}  // namespace stefan
