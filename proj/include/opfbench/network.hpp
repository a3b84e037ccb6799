#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "opfbench/matpower_io.hpp"

namespace opfbench {

using Complex = std::complex<double>;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All quantities are per unit on the system base; angles in radians.
struct Bus {
  int id = 0;
  double v_min = 0.9, v_max = 1.1;
  Complex demand;
  Complex shunt;  // drawn power is |V|^2 conj(shunt)
  double base_kv = 0;
  bool reference = false;
};

// `id` is the row index in the source gen table.
struct Gen {
  int id = 0;
  int bus = 0;
  double p_min = 0, p_max = 0;
  double q_min = 0, q_max = 0;
  double c2 = 0, c1 = 0, c0 = 0;
  double pg_setpoint = 0;
};

// `id` is the row index in the source branch table.
struct Branch {
  int id = 0;
  int from = 0, to = 0;
  double r = 0, x = 0;
  Complex series_admittance;
  double charging = 0;
  Complex transformer{1, 0};
  std::optional<double> s_max;
  std::optional<double> i_max;  // falls back to s_max when absent
  double angle_min = 0, angle_max = 0;

  double current_limit() const { return i_max ? *i_max : s_max.value_or(0); }
  bool has_current_limit() const { return i_max.has_value() || s_max.has_value(); }
};

struct NetworkCase {
  std::string name;
  double base_mva = 100;
  std::vector<Bus> buses;
  std::vector<Gen> gens;
  std::vector<Branch> branches;

  // Position of a bus id in `buses`.
  int bus_index(int id) const;
  int reference_index() const;
  void reindex();

 private:
  std::unordered_map<int, int> lookup_;
};

inline constexpr double default_angle_bound = std::numbers::pi / 6;

template <typename Scalar>
std::complex<Scalar> branch_admittance(Scalar r, Scalar x) {
  Scalar d = r * r + x * x;
  if (d == Scalar(0)) {
    throw NetworkError("branch has zero impedance");
  }
  return {r / d, -x / d};
}

template <typename Scalar>
std::complex<Scalar> transformer_phasor(Scalar tap, Scalar shift) {
  using std::cos, std::sin;
  return {tap * cos(shift), tap * sin(shift)};
}

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

NetworkCase build_network(const RawCase& raw);

// Throws NetworkError naming the first violated invariant.
void validate(const NetworkCase& net);

// Writes the parameters of `net` back into the rows of `raw` it was built from.
RawCase apply_network(RawCase raw, const NetworkCase& net);

}  // namespace opfbench
