#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

double svc_dual_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(q * alpha) - alpha.sum();
}

Eigen::MatrixXd signed_gram(const Eigen::MatrixXd& k, const std::vector<int>& y) {
  Eigen::MatrixXd q = k;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) q(i, j) *= y[i] * y[j];
  }
  return q;
}

Eigen::VectorXd project_feasible(const Eigen::VectorXd& v, const std::vector<int>& y, double c) {
  const Eigen::Index n = v.size();
  auto clipped = [&](double lambda) {
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = std::clamp(v(i) - lambda * y[i], 0.0, c);
    return a;
  };
  auto residual = [&](double lambda) {
    Eigen::VectorXd a = clipped(lambda);
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += y[i] * a(i);
    return s;
  };
  // residual is non-increasing in lambda.
  double span = v.cwiseAbs().maxCoeff() + c + 1.0;
  double lo = -span;
  double hi = span;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return clipped(0.5 * (lo + hi));
}

QpSolution projected_gradient_qp(const Eigen::MatrixXd& q, const std::vector<int>& y, double c,
                                 int max_iterations, double tolerance) {
  const Eigen::Index n = q.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;
  auto grad = [&](const Eigen::VectorXd& a) {
    return Eigen::VectorXd(q * a - Eigen::VectorXd::Ones(n));
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = x;
  double t = 1.0;
  QpSolution out;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = project_feasible(z - step * grad(z), y, c);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart the momentum when it points uphill.
    if ((z - next).dot(next - x) > 0.0) {
      t_next = 1.0;
      z = next;
    } else {
      z = next + ((t - 1.0) / t_next) * (next - x);
    }
    double moved = (next - x).norm();
    x = next;
    t = t_next;
    out.iterations = it + 1;
    if (moved <= tolerance * (1.0 + c)) {
      // Fixed-point check at x itself, without momentum.
      Eigen::VectorXd again = project_feasible(x - step * grad(x), y, c);
      if ((again - x).norm() <= tolerance * (1.0 + c)) break;
    }
  }
  out.alpha = x;
  out.objective = svc_dual_objective(q, x);
  return out;
}

QpSolution enumerate_qp(const Eigen::MatrixXd& q, const std::vector<int>& y, double c) {
  const int n = static_cast<int>(q.rows());
  if (n > 9) throw std::invalid_argument("enumerate_qp: too many variables");
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  QpSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  const double feas_tol = 1e-9 * (1.0 + c);

  std::vector<int> state(static_cast<std::size_t>(n));
  for (int code = 0; code < total; ++code) {
    int rest = code;
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = rest % 3;  // 0: at 0, 1: at C, 2: free
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
    }
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) alpha(i) = c;
    }
    const int f = static_cast<int>(free_idx.size());
    if (f > 0) {
      // [Q_FF y_F; y_F' 0] [a_F; b] = [e_F - Q_FB a_B; -y_B' a_B]
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      double fixed_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (state[static_cast<std::size_t>(i)] != 2) fixed_sum += y[static_cast<std::size_t>(i)] * alpha(i);
      }
      for (int r = 0; r < f; ++r) {
        int i = free_idx[static_cast<std::size_t>(r)];
        for (int s = 0; s < f; ++s) kkt(r, s) = q(i, free_idx[static_cast<std::size_t>(s)]);
        kkt(r, f) = y[static_cast<std::size_t>(i)];
        kkt(f, r) = y[static_cast<std::size_t>(i)];
        double fixed = 0.0;
        for (int j = 0; j < n; ++j) {
          if (state[static_cast<std::size_t>(j)] != 2) fixed += q(i, j) * alpha(j);
        }
        rhs(r) = 1.0 - fixed;
      }
      rhs(f) = -fixed_sum;
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
      Eigen::VectorXd sol = cod.solve(rhs);
      if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
      for (int r = 0; r < f; ++r) alpha(free_idx[static_cast<std::size_t>(r)]) = sol(r);
    }
    bool feasible = true;
    double eq = 0.0;
    for (int i = 0; i < n; ++i) {
      if (alpha(i) < -feas_tol || alpha(i) > c + feas_tol) feasible = false;
      eq += y[static_cast<std::size_t>(i)] * alpha(i);
    }
    if (!feasible || std::abs(eq) > feas_tol) continue;
    alpha = alpha.cwiseMax(0.0).cwiseMin(c);
    double obj = svc_dual_objective(q, alpha);
    if (obj < best.objective) {
      best.objective = obj;
      best.alpha = alpha;
    }
  }
  return best;
}

Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a, int max_sweeps) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index r = p + 1; r < n; ++r) off += a(p, r) * a(p, r);
    }
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index r = p + 1; r < n; ++r) {
        if (a(p, r) == 0.0) continue;
        // Rotation angle zeroing a(p, r) (Golub & Van Loan, sym.schur2).
        double theta = (a(r, r) - a(p, p)) / (2.0 * a(p, r));
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double cs = 1.0 / std::sqrt(1.0 + t * t);
        double sn = t * cs;
        for (Eigen::Index k = 0; k < n; ++k) {
          double akp = a(k, p);
          double akr = a(k, r);
          a(k, p) = cs * akp - sn * akr;
          a(k, r) = sn * akp + cs * akr;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double apk = a(p, k);
          double ark = a(r, k);
          a(p, k) = cs * apk - sn * ark;
          a(r, k) = sn * apk + cs * ark;
        }
      }
    }
  }
  Eigen::VectorXd d = a.diagonal();
  std::sort(d.data(), d.data() + d.size(), std::greater<>());
  return d;
}

Eigen::VectorXd singular_values_via_gram(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd g = m.transpose() * m;
  Eigen::VectorXd ev = jacobi_eigenvalues(g);
  return ev.cwiseMax(0.0).cwiseSqrt();
}

double linear_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x(i) * z(i);
  return s;
}

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& z, double gamma) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) d2 += (x(i) - z(i)) * (x(i) - z(i));
  return std::exp(-gamma * d2);
}

double poly_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& z, double gamma, double coef0,
                   int degree) {
  return std::pow(gamma * linear_kernel(x, z) + coef0, degree);
}

}  // namespace oracle
