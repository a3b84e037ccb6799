#include "opfbench/matpower_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace opfbench {

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_{line} {}

namespace {

struct Token {
  std::string text;
  int line;
};

using Row = std::vector<Token>;

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_{text} {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  int line() const { return line_; }
  size_t pos() const { return pos_; }

  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
    }
    return c;
  }

  void skip_to_eol() {
    while (!done() && peek() != '\n') {
      get();
    }
  }

  // Skips whitespace and comments; newlines are skipped too unless
  // `stop_at_newline` is set.
  void skip_blank(bool stop_at_newline = false) {
    while (!done()) {
      char c = peek();
      if (c == '%') {
        skip_to_eol();
      } else if (c == '\n' && stop_at_newline) {
        return;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '.' && text_.compare(pos_, 3, "...") == 0) {
        // line continuation
        skip_to_eol();
        if (!done()) {
          get();
        }
      } else {
        return;
      }
    }
  }

  std::string identifier() {
    std::string out;
    while (!done()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        out += get();
      } else {
        break;
      }
    }
    return out;
  }

  // Consumes a bracketed block verbatim, honoring quotes and comments.
  void skip_block(char open, char close) {
    int start_line = line_;
    int depth = 0;
    while (!done()) {
      char c = get();
      if (c == '%') {
        skip_to_eol();
      } else if (c == '\'' ) {
        while (!done() && peek() != '\'' && peek() != '\n') {
          get();
        }
        if (!done() && peek() == '\'') {
          get();
        }
      } else if (c == open) {
        ++depth;
      } else if (c == close) {
        if (--depth == 0) {
          return;
        }
      }
    }
    throw ParseError(start_line, std::string("unterminated '") + open + "'");
  }

  std::vector<Row> matrix() {
    int start_line = line_;
    get();  // '['
    std::vector<Row> rows;
    Row row;
    while (true) {
      if (done()) {
        throw ParseError(start_line, "unterminated '['");
      }
      char c = peek();
      if (c == '%') {
        skip_to_eol();
      } else if (c == ']') {
        get();
        break;
      } else if (c == ';' || c == '\n') {
        get();
        if (!row.empty()) {
          rows.push_back(std::move(row));
          row.clear();
        }
      } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
        get();
      } else if (c == '.' && text_.compare(pos_, 3, "...") == 0) {
        skip_to_eol();
        if (!done()) {
          get();
        }
      } else {
        Token tok{"", line_};
        while (!done()) {
          char d = peek();
          if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == ',' || d == ';' || d == ']' ||
              d == '%') {
            break;
          }
          tok.text += get();
        }
        row.push_back(std::move(tok));
      }
    }
    if (!row.empty()) {
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::string slice(size_t begin, size_t end) const { return text_.substr(begin, end - begin); }

 private:
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
};

double to_number(const Token& tok) {
  std::string_view s = tok.text;
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(tok.line, "invalid number '" + tok.text + "'");
  }
  return value;
}

int to_int(const Token& tok) {
  double value = to_number(tok);
  if (value != std::floor(value) || std::abs(value) > 2e9) {
    throw ParseError(tok.line, "expected an integer, got '" + tok.text + "'");
  }
  return static_cast<int>(value);
}

void require_arity(const Row& row, size_t min, const char* table) {
  if (row.size() < min) {
    throw ParseError(row.front().line, std::string(table) + " row has " + std::to_string(row.size()) +
                                           " columns, expected at least " + std::to_string(min));
  }
}

std::vector<double> tail(const Row& row, size_t from) {
  std::vector<double> out;
  for (size_t i = from; i < row.size(); ++i) {
    out.push_back(to_number(row[i]));
  }
  return out;
}

BusRow bus_row(const Row& r) {
  require_arity(r, 13, "bus");
  BusRow b;
  b.id = to_int(r[0]);
  b.type = to_int(r[1]);
  b.pd = to_number(r[2]);
  b.qd = to_number(r[3]);
  b.gs = to_number(r[4]);
  b.bs = to_number(r[5]);
  b.area = to_number(r[6]);
  b.vm = to_number(r[7]);
  b.va = to_number(r[8]);
  b.base_kv = to_number(r[9]);
  b.zone = to_number(r[10]);
  b.vmax = to_number(r[11]);
  b.vmin = to_number(r[12]);
  b.extra = tail(r, 13);
  return b;
}

GenRow gen_row(const Row& r) {
  require_arity(r, 10, "gen");
  GenRow g;
  g.bus = to_int(r[0]);
  g.pg = to_number(r[1]);
  g.qg = to_number(r[2]);
  g.qmax = to_number(r[3]);
  g.qmin = to_number(r[4]);
  g.vg = to_number(r[5]);
  g.mbase = to_number(r[6]);
  g.status = to_int(r[7]);
  g.pmax = to_number(r[8]);
  g.pmin = to_number(r[9]);
  g.extra = tail(r, 10);
  return g;
}

BranchRow branch_row(const Row& r) {
  require_arity(r, 13, "branch");
  BranchRow l;
  l.from = to_int(r[0]);
  l.to = to_int(r[1]);
  l.r = to_number(r[2]);
  l.x = to_number(r[3]);
  l.b = to_number(r[4]);
  l.rate_a = to_number(r[5]);
  l.rate_b = to_number(r[6]);
  l.rate_c = to_number(r[7]);
  l.tap = to_number(r[8]);
  l.shift = to_number(r[9]);
  l.status = to_int(r[10]);
  l.angmin = to_number(r[11]);
  l.angmax = to_number(r[12]);
  l.extra = tail(r, 13);
  return l;
}

GencostRow gencost_row(const Row& r) {
  require_arity(r, 4, "gencost");
  GencostRow c;
  c.model = to_int(r[0]);
  c.startup = to_number(r[1]);
  c.shutdown = to_number(r[2]);
  c.n = to_int(r[3]);
  if (c.model != 1 && c.model != 2) {
    throw ParseError(r[0].line, "unknown cost model " + r[0].text);
  }
  if (c.n < 0) {
    throw ParseError(r[3].line, "negative coefficient count");
  }
  size_t count = c.model == 1 ? 2 * static_cast<size_t>(c.n) : static_cast<size_t>(c.n);
  require_arity(r, 4 + count, "gencost");
  for (size_t i = 0; i < count; ++i) {
    c.coefficients.push_back(to_number(r[4 + i]));
  }
  c.extra = tail(r, 4 + count);
  return c;
}

template <typename T, typename F>
std::vector<T> convert(const std::vector<Row>& rows, F&& f) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back(f(row));
  }
  return out;
}

}  // namespace

RawCase parse_case(const std::string& text) {
  RawCase raw;
  Lexer lex{text};
  std::optional<std::vector<Row>> bus, gen, branch, gencost;
  bool have_base = false;

  while (true) {
    lex.skip_blank();
    if (lex.done()) {
      break;
    }
    int line = lex.line();
    size_t begin = lex.pos();
    std::string ident = lex.identifier();
    if (ident.empty()) {
      throw ParseError(line, std::string("unexpected character '") + lex.peek() + "'");
    }
    if (ident == "function") {
      lex.skip_blank(true);
      std::string out = lex.identifier();
      lex.skip_blank(true);
      if (lex.peek() == '=') {
        lex.get();
        lex.skip_blank(true);
        raw.name = lex.identifier();
      } else {
        raw.name = out;
      }
      lex.skip_to_eol();
      continue;
    }
    if (ident == "end" || ident == "return") {
      lex.skip_to_eol();
      continue;
    }
    if (ident.rfind("mpc.", 0) != 0 || ident.size() == 4) {
      throw ParseError(line, "expected an 'mpc.<field> = ...' statement, got '" + ident + "'");
    }
    std::string field = ident.substr(4);
    lex.skip_blank(true);
    if (lex.peek() != '=') {
      throw ParseError(lex.line(), "expected '=' after " + ident);
    }
    lex.get();
    lex.skip_blank(true);

    auto finish = [&] {
      lex.skip_blank(true);
      if (lex.peek() == ';') {
        lex.get();
      }
    };

    char c = lex.peek();
    auto known_table = [&]() -> std::optional<std::vector<Row>>* {
      if (field == "bus") return &bus;
      if (field == "gen") return &gen;
      if (field == "branch") return &branch;
      if (field == "gencost") return &gencost;
      return nullptr;
    }();

    if (known_table != nullptr) {
      if (c != '[') {
        throw ParseError(lex.line(), "expected '[' to open mpc." + field);
      }
      if (known_table->has_value()) {
        throw ParseError(line, "duplicate mpc." + field + " section");
      }
      *known_table = lex.matrix();
      finish();
      continue;
    }
    if (field == "baseMVA") {
      Token tok{"", lex.line()};
      while (!lex.done() && lex.peek() != ';' && lex.peek() != '\n' && lex.peek() != '%') {
        tok.text += lex.get();
      }
      while (!tok.text.empty() && std::isspace(static_cast<unsigned char>(tok.text.back()))) {
        tok.text.pop_back();
      }
      raw.base_mva = to_number(tok);
      have_base = true;
      finish();
      continue;
    }

    // Anything else is kept as written.
    if (c == '[') {
      lex.skip_block('[', ']');
    } else if (c == '{') {
      lex.skip_block('{', '}');
    } else if (c == '\'') {
      lex.get();
      while (!lex.done() && lex.peek() != '\'' && lex.peek() != '\n') {
        lex.get();
      }
      if (lex.peek() != '\'') {
        throw ParseError(lex.line(), "unterminated string");
      }
      lex.get();
    } else {
      while (!lex.done() && lex.peek() != ';' && lex.peek() != '\n' && lex.peek() != '%') {
        lex.get();
      }
    }
    lex.skip_blank(true);
    if (lex.peek() == ';') {
      lex.get();
    }
    raw.unknown_sections.push_back({field, lex.slice(begin, lex.pos())});
  }

  int last = lex.line();
  if (!have_base) throw ParseError(last, "missing mpc.baseMVA");
  if (!bus) throw ParseError(last, "missing mpc.bus section");
  if (!gen) throw ParseError(last, "missing mpc.gen section");
  if (!branch) throw ParseError(last, "missing mpc.branch section");

  raw.bus_rows = convert<BusRow>(*bus, bus_row);
  raw.gen_rows = convert<GenRow>(*gen, gen_row);
  raw.branch_rows = convert<BranchRow>(*branch, branch_row);
  if (gencost) {
    raw.gencost_rows = convert<GencostRow>(*gencost, gencost_row);
    if (!raw.gencost_rows.empty() && raw.gencost_rows.size() != raw.gen_rows.size()) {
      throw ParseError(gencost->front().front().line,
                       "mpc.gencost has " + std::to_string(raw.gencost_rows.size()) + " rows for " +
                           std::to_string(raw.gen_rows.size()) + " generators");
    }
  }
  return raw;
}

RawCase read_case(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  RawCase raw = parse_case(ss.str());
  if (raw.name.empty()) {
    raw.name = path.stem().string();
  }
  return raw;
}

namespace {

void put(std::string& out, double v) {
  char buf[64];
  if (std::isinf(v)) {
    out += v > 0 ? "Inf" : "-Inf";
    return;
  }
  if (std::isnan(v)) {
    out += "NaN";
    return;
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void put(std::string& out, int v) { out += std::to_string(v); }

template <typename... Ts>
void put_row(std::string& out, const std::vector<double>& extra, Ts... values) {
  out += '\t';
  bool first = true;
  auto one = [&](auto v) {
    if (!first) {
      out += '\t';
    }
    first = false;
    put(out, v);
  };
  (one(values), ...);
  for (double v : extra) {
    one(v);
  }
  out += ";\n";
}

}  // namespace

std::string write_case(const RawCase& raw) {
  std::string out;
  out += "function mpc = " + (raw.name.empty() ? std::string("case") : raw.name) + "\n";
  // A leading run of version statements goes on top, everything else at the
  // bottom, so the section order is stable under a round trip.
  size_t head = 0;
  while (head < raw.unknown_sections.size() && raw.unknown_sections[head].name == "version") {
    out += raw.unknown_sections[head++].text + "\n";
  }
  out += "mpc.baseMVA = ";
  put(out, raw.base_mva);
  out += ";\n\n";

  out += "%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out += "mpc.bus = [\n";
  for (const auto& b : raw.bus_rows) {
    put_row(out, b.extra, b.id, b.type, b.pd, b.qd, b.gs, b.bs, b.area, b.vm, b.va, b.base_kv, b.zone,
            b.vmax, b.vmin);
  }
  out += "];\n\n";

  out += "%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  out += "mpc.gen = [\n";
  for (const auto& g : raw.gen_rows) {
    put_row(out, g.extra, g.bus, g.pg, g.qg, g.qmax, g.qmin, g.vg, g.mbase, g.status, g.pmax, g.pmin);
  }
  out += "];\n\n";

  out += "%% branch data\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  out += "mpc.branch = [\n";
  for (const auto& l : raw.branch_rows) {
    put_row(out, l.extra, l.from, l.to, l.r, l.x, l.b, l.rate_a, l.rate_b, l.rate_c, l.tap, l.shift,
            l.status, l.angmin, l.angmax);
  }
  out += "];\n";

  if (!raw.gencost_rows.empty()) {
    out += "\n%% generator cost data\n%\tmodel\tstartup\tshutdown\tn\tc(n-1)\t...\tc0\n";
    out += "mpc.gencost = [\n";
    for (const auto& c : raw.gencost_rows) {
      std::vector<double> rest = c.coefficients;
      rest.insert(rest.end(), c.extra.begin(), c.extra.end());
      put_row(out, rest, c.model, c.startup, c.shutdown, c.n);
    }
    out += "];\n";
  }

  for (size_t i = head; i < raw.unknown_sections.size(); ++i) {
    out += "\n" + raw.unknown_sections[i].text + "\n";
  }
  return out;
}

void save_case(const RawCase& raw, const std::filesystem::path& path) {
  std::ofstream out{path};
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << write_case(raw);
}

}  // namespace opfbench
