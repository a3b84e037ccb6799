#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Core>

namespace opfbench {

// Every branch quantity of the polar model (active/reactive flow at either
// end, squared current magnitude at either end) has the form
//
//   F = a_i vi^2 + a_j vj^2 + vi vj (c cos d + s sin d),  d = ti - tj - shift
//
// so one template with its first and second derivatives covers them all, and
// weighted sums of templates are again templates. Local variable order is
// (ti, tj, vi, vj).
template <typename Scalar>
struct FlowTemplate {
  Scalar a_i{0}, a_j{0}, c{0}, s{0};

  FlowTemplate& operator+=(const FlowTemplate& o) {
    a_i += o.a_i;
    a_j += o.a_j;
    c += o.c;
    s += o.s;
    return *this;
  }

  friend FlowTemplate operator*(Scalar w, const FlowTemplate& t) {
    return {w * t.a_i, w * t.a_j, w * t.c, w * t.s};
  }
};

template <typename Scalar>
struct BranchState {
  Scalar vi, vj, cos_d, sin_d;

  BranchState(Scalar ti, Scalar tj, Scalar vi_, Scalar vj_, Scalar shift) : vi{vi_}, vj{vj_} {
    using std::cos, std::sin;
    Scalar d = ti - tj - shift;
    cos_d = cos(d);
    sin_d = sin(d);
  }
};

template <typename Scalar>
Scalar flow_value(const FlowTemplate<Scalar>& f, const BranchState<Scalar>& b) {
  return f.a_i * b.vi * b.vi + f.a_j * b.vj * b.vj + b.vi * b.vj * (f.c * b.cos_d + f.s * b.sin_d);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> flow_gradient(const FlowTemplate<Scalar>& f, const BranchState<Scalar>& b) {
  Scalar h = f.c * b.cos_d + f.s * b.sin_d;
  Scalar dh = -f.c * b.sin_d + f.s * b.cos_d;
  Eigen::Matrix<Scalar, 4, 1> g;
  g << b.vi * b.vj * dh, -b.vi * b.vj * dh, 2 * f.a_i * b.vi + b.vj * h, 2 * f.a_j * b.vj + b.vi * h;
  return g;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> flow_hessian(const FlowTemplate<Scalar>& f, const BranchState<Scalar>& b) {
  Scalar h = f.c * b.cos_d + f.s * b.sin_d;
  Scalar dh = -f.c * b.sin_d + f.s * b.cos_d;
  Scalar vv = b.vi * b.vj;
  Eigen::Matrix<Scalar, 4, 4> H;
  H << -vv * h, vv * h, b.vj * dh, b.vi * dh,
       vv * h, -vv * h, -b.vj * dh, -b.vi * dh,
       b.vj * dh, -b.vj * dh, 2 * f.a_i, h,
       b.vi * dh, -b.vi * dh, h, 2 * f.a_j;
  return H;
}

// Templates for one branch given its series admittance y = g + ib, total
// charging bc and transformer T = t e^{i shift} on the from side.
template <typename Scalar>
struct BranchTemplates {
  FlowTemplate<Scalar> p_from, q_from, p_to, q_to, i2_from, i2_to;
  Scalar shift;

  BranchTemplates(std::complex<Scalar> y, Scalar bc, std::complex<Scalar> T) {
    using std::abs, std::arg;
    Scalar g = y.real(), b = y.imag(), t = abs(T);
    shift = arg(T);
    Scalar t2 = t * t;
    Scalar bh = b + bc / 2;
    p_from = {g / t2, 0, -g / t, -b / t};
    q_from = {-bh / t2, 0, b / t, -g / t};
    p_to = {0, g, -g / t, b / t};
    q_to = {0, -bh, b / t, g / t};
    // K = (y + i bc/2) conj(y)
    Scalar y2 = g * g + b * b;
    Scalar kr = y2 + b * bc / 2, ki = g * bc / 2;
    Scalar ysh2 = g * g + bh * bh;
    i2_from = {ysh2 / (t2 * t2), y2 / t2, -2 * kr / (t2 * t), 2 * ki / (t2 * t)};
    i2_to = {y2 / t2, ysh2, -2 * kr / t, -2 * ki / t};
  }
};

}  // namespace opfbench
