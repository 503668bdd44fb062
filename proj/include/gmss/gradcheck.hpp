#pragma once

// Central-difference gradient verification. A builder closure reconstructs
// the scalar loss from scratch on a fresh tape, so perturbed forward passes
// see exactly the graph the analytic backward pass differentiated.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gmss/autodiff.hpp"
#include "gmss/errors.hpp"
#include "gmss/matrix.hpp"

namespace gmss {

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_err = 0.0;
  GradCheckEntry worst;
  std::vector<GradCheckEntry> failures;  // entries above tolerance

  bool ok(double tol) const { return max_rel_err <= tol; }
};

// rel err = |a - n| / max(|a|, |n|, floor). The floor keeps near-zero
// gradient pairs from reporting spurious blowups: central differences on a
// coordinate with true gradient 0 still see roundoff of ulp(loss)/(2 eps),
// which is ~1e-11 for an O(1) loss at eps 1e-5. Gradients above the floor
// are still compared in fully relative terms.
inline double grad_rel_err(double analytic, double numeric, double floor = 1e-5) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// `build` must evaluate the loss as a function of the current param values.
// Checks every coordinate of every param unless `stride` skips (stride n
// checks indices 0, n, 2n, ... per tensor; 1 checks all).
inline GradCheckReport grad_check(
    std::vector<ParamTensor*> params,
    const std::function<double()>& build_loss_value,
    const std::function<void()>& build_loss_backward, double eps = 1e-5,
    double tol = 1e-6, std::size_t stride = 1) {
  if (stride == 0) throw ContractError("grad_check: stride must be positive");
  for (ParamTensor* p : params) p->zero_grad();
  build_loss_backward();

  GradCheckReport rep;
  for (ParamTensor* p : params) {
    for (std::size_t i = 0; i < p->data.size(); i += stride) {
      const double orig = p->data[i];
      p->data[i] = orig + eps;
      const double up = build_loss_value();
      p->data[i] = orig - eps;
      const double down = build_loss_value();
      p->data[i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      GradCheckEntry e{p->name, i, analytic, numeric, grad_rel_err(analytic, numeric)};
      ++rep.checked;
      if (e.rel_err > rep.max_rel_err) {
        rep.max_rel_err = e.rel_err;
        rep.worst = e;
      }
      if (e.rel_err > tol) rep.failures.push_back(e);
    }
  }
  return rep;
}

// Convenience wrapper: one closure that builds the graph and returns the
// loss Var plus the tape it lives on.
struct BuiltLoss {
  Tape tape;
  Var loss;
};

inline GradCheckReport grad_check_fn(
    std::vector<ParamTensor*> params,
    const std::function<Var(Tape&)>& build, double eps = 1e-5, double tol = 1e-6,
    std::size_t stride = 1) {
  auto value = [&]() {
    Tape t;
    Var l = build(t);
    const Matrix& v = t.value(l);
    if (v.rows() != 1 || v.cols() != 1)
      throw ContractError("grad_check: loss must be 1x1, got " + v.shape_str());
    return v[0];
  };
  auto backward = [&]() {
    Tape t;
    Var l = build(t);
    t.backward(l);
  };
  return grad_check(std::move(params), value, backward, eps, tol, stride);
}

}  // namespace gmss
