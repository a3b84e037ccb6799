#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace opfbench {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);

  int line() const { return line_; }

 private:
  int line_;
};

// Columns beyond the named ones are kept in `extra` so they survive a round
// trip untouched.
struct BusRow {
  int id = 0;
  int type = 1;
  double pd = 0, qd = 0, gs = 0, bs = 0;
  double area = 1;
  double vm = 1, va = 0;
  double base_kv = 0;
  double zone = 1;
  double vmax = 1.1, vmin = 0.9;
  std::vector<double> extra;

  bool operator==(const BusRow&) const = default;
};

struct GenRow {
  int bus = 0;
  double pg = 0, qg = 0, qmax = 0, qmin = 0;
  double vg = 1, mbase = 100;
  int status = 1;
  double pmax = 0, pmin = 0;
  std::vector<double> extra;

  bool operator==(const GenRow&) const = default;
};

struct BranchRow {
  int from = 0, to = 0;
  double r = 0, x = 0, b = 0;
  double rate_a = 0, rate_b = 0, rate_c = 0;
  double tap = 0, shift = 0;
  int status = 1;
  double angmin = -360, angmax = 360;
  std::vector<double> extra;

  bool operator==(const BranchRow&) const = default;
};

// model 1 is piecewise linear (coefficients hold x/y pairs), model 2 is
// polynomial with coefficients ordered highest degree first.
struct GencostRow {
  int model = 2;
  double startup = 0, shutdown = 0;
  int n = 0;
  std::vector<double> coefficients;
  std::vector<double> extra;

  bool operator==(const GencostRow&) const = default;
};

struct UnknownSection {
  std::string name;
  std::string text;

  bool operator==(const UnknownSection&) const = default;
};

struct RawCase {
  std::string name;
  double base_mva = 100;
  std::vector<BusRow> bus_rows;
  std::vector<GenRow> gen_rows;
  std::vector<BranchRow> branch_rows;
  std::vector<GencostRow> gencost_rows;
  std::vector<UnknownSection> unknown_sections;

  bool operator==(const RawCase&) const = default;
};

RawCase parse_case(const std::string& text);
RawCase read_case(const std::filesystem::path& path);

std::string write_case(const RawCase& raw);
void save_case(const RawCase& raw, const std::filesystem::path& path);

}  // namespace opfbench
