#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "reachmap/types.hpp"

namespace reachmap {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;        // fallback for components without an entry below
  Eigen::VectorXd abs_tol_vec;   // optional per-component absolute tolerances
  double max_step = 0.0;         // 0 = no cap
  std::size_t max_steps = 10'000'000;
};

// Piecewise-quintic interpolant built from the accepted steps of a
// Dormand-Prince 5(4) integration. Valid on [t_begin, t_end]; queries are
// clamped to that span within a small slack and rejected outside it.
class DenseOutput {
 public:
  DenseOutput() = default;

  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  Eigen::Index dim() const { return y0_.size(); }
  bool empty_span() const { return steps_.empty(); }

  // Accepted step boundaries, including both span endpoints.
  const std::vector<double>& step_times() const { return times_; }

  Eigen::VectorXd at(double t) const {
    Eigen::VectorXd y(dim());
    eval_block(t, 0, dim(), y.data());
    return y;
  }

  // Evaluates components [offset, offset+len) of the interpolant at t.
  void eval_block(double t, Eigen::Index offset, Eigen::Index len, double* out) const {
    if (steps_.empty()) {
      for (Eigen::Index i = 0; i < len; ++i) out[i] = y0_[offset + i];
      return;
    }
    const Step& s = steps_[locate(t)];
    const double th = std::clamp((t - s.t) / s.h, 0.0, 1.0);
    const double th1 = 1.0 - th;
    for (Eigen::Index i = 0; i < len; ++i) {
      const Eigen::Index k = offset + i;
      out[i] = s.c1[k] + th * (s.c2[k] + th1 * (s.c3[k] + th * (s.c4[k] + th1 * s.c5[k])));
    }
  }

  double eval_component(double t, Eigen::Index i) const {
    double v;
    eval_block(t, i, 1, &v);
    return v;
  }

 private:
  struct Step {
    double t, h;
    Eigen::VectorXd c1, c2, c3, c4, c5;
  };

  std::size_t locate(double t) const {
    const double slack = 1e-9 * (1.0 + std::abs(t1_ - t0_));
    if (t < t0_ - slack || t > t1_ + slack)
      throw Error("dense output query outside the integrated span");
    // times_[k] is the start of step k; times_.back() == t1_.
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t idx = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(idx, steps_.size() - 1);
  }

  double t0_ = 0.0, t1_ = 0.0;
  Eigen::VectorXd y0_;
  std::vector<Step> steps_;
  std::vector<double> times_;

  template <class Rhs>
  friend struct Dopri5;
};

enum class IntegrationStatus { ok, step_underflow, max_steps_exceeded };

struct IntegrationResult {
  DenseOutput dense;        // valid on [t0, t_reached] even on failure
  IntegrationStatus status = IntegrationStatus::ok;
  double t_reached = 0.0;
  std::size_t n_steps = 0;  // accepted steps
  std::size_t n_rhs = 0;

  bool ok() const { return status == IntegrationStatus::ok; }
};

namespace dopri5_detail {
// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dopri5_detail

template <class Rhs>
struct Dopri5 {
  Rhs rhs;
  IntegratorOptions opt;

  IntegrationResult run(double t0, const Eigen::VectorXd& y0, double t_end) {
    using namespace dopri5_detail;
    const Eigen::Index n = y0.size();

    IntegrationResult res;
    res.dense.t0_ = t0;
    res.dense.t1_ = t0;
    res.dense.y0_ = y0;
    res.dense.times_.push_back(t0);
    res.t_reached = t0;

    if (t_end < t0) throw Error("integration span must be forward in time");
    const double span = t_end - t0;
    if (span == 0.0) {
      res.dense.t1_ = t_end;
      return res;
    }

    Eigen::VectorXd y = y0, ynew(n), ystage(n), err(n);
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

    auto weight = [&](Eigen::Index i, double a, double b) {
      const double atol =
          (opt.abs_tol_vec.size() == n) ? opt.abs_tol_vec[i] : opt.abs_tol;
      return atol + opt.rel_tol * std::max(std::abs(a), std::abs(b));
    };

    rhs(t0, y, k1);
    ++res.n_rhs;

    double h = initial_step(t0, y, k1, span);
    double t = t0;
    bool last_rejected = false;

    while (t < t_end) {
      if (res.n_steps + 1 > opt.max_steps) {
        res.status = IntegrationStatus::max_steps_exceeded;
        return res;
      }
      const double h_floor = 1e-14 * std::max(std::abs(t), span);
      if (h < h_floor || t + h == t) {
        res.status = IntegrationStatus::step_underflow;
        return res;
      }
      if (t + h > t_end) h = t_end - t;

      // Stages
      ystage = y + h * (a21 * k1);
      rhs(t + c2 * h, ystage, k2);
      ystage = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ystage, k3);
      ystage = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ystage, k4);
      ystage = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ystage, k5);
      ystage = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ystage, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs(t + h, ynew, k7);
      res.n_rhs += 6;

      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        err_norm = std::max(err_norm, std::abs(err[i]) / weight(i, y[i], ynew[i]));

      if (err_norm <= 1.0) {
        // Accept; store dense coefficients.
        DenseOutput::Step st;
        st.t = t;
        st.h = h;
        st.c1 = y;
        st.c2 = ynew - y;
        st.c3 = h * k1 - st.c2;
        st.c4 = st.c2 - h * k7 - st.c3;
        st.c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        res.dense.steps_.push_back(std::move(st));

        t += h;
        y = ynew;
        k1 = k7;  // FSAL
        ++res.n_steps;
        res.t_reached = t;
        res.dense.t1_ = t;
        res.dense.times_.push_back(t);

        double fac = 0.9 * std::pow(std::max(err_norm, 1e-30), -0.2);
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
        h *= fac;
        last_rejected = false;
      } else {
        h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 1.0);
        last_rejected = true;
      }
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    }
    return res;
  }

 private:
  double initial_step(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                      double span) {
    const Eigen::Index n = y0.size();
    auto wnorm = [&](const Eigen::VectorXd& v) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double atol =
            (opt.abs_tol_vec.size() == n) ? opt.abs_tol_vec[i] : opt.abs_tol;
        const double w = v[i] / (atol + opt.rel_tol * std::abs(y0[i]));
        s += w * w;
      }
      return std::sqrt(s / static_cast<double>(n));
    };

    const double d0 = wnorm(y0);
    const double d1 = wnorm(f0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    Eigen::VectorXd y1 = y0 + h0 * f0, f1(n);
    rhs(t0 + h0, y1, f1);
    const double d2 = wnorm(f1 - f0) / h0;

    double h1;
    if (std::max(d1, d2) <= 1e-15)
      h1 = std::max(1e-6 * span, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1, d2), 0.2);

    double h = std::min({100.0 * h0, h1, span});
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    return h;
  }
};

// Integrates dy/dt = rhs(t, y) from t0 to t_end (t_end >= t0) and returns the
// dense solution plus failure information. Never throws on stepper failure;
// the partial solution up to t_reached stays usable.
template <class Rhs>
IntegrationResult integrate_dense(Rhs&& rhs, double t0, const Eigen::VectorXd& y0, double t_end,
                                  const IntegratorOptions& opt = {}) {
  Dopri5<std::decay_t<Rhs>> stepper{std::forward<Rhs>(rhs), opt};
  return stepper.run(t0, y0, t_end);
}

}  // namespace reachmap
