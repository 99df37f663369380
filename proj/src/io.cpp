#include "bn/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bn {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw std::runtime_error("not a number: '" + text + "'");
  return v;
}

namespace {

struct LineReader {
  std::istream& is;
  std::size_t lineno = 0;

  bool next(std::string& line) {
    if (!std::getline(is, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("line " + std::to_string(lineno) + ": " + msg);
  }
};

// key=value fields of a header line
std::string field(const std::string& line, const std::string& key) {
  std::istringstream ls(line);
  std::string tok;
  while (ls >> tok) {
    if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
  }
  return {};
}

GridPtr read_grid_block(LineReader& in) {
  std::string line;
  if (!in.next(line) || line.rfind("# bn-grid", 0) != 0) in.fail("expected '# bn-grid' header");
  const std::string header = line;
  const std::string n_text = field(header, "N");
  const std::string g_text = field(header, "grading");
  if (n_text.empty() || g_text.empty()) in.fail("grid header needs N= and grading=");
  const int n = std::stoi(n_text);
  if (n < 2) in.fail("grid header: N too small");

  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    if (!in.next(line)) in.fail("grid block ended after " + std::to_string(k) + " nodes");
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a >> b)) in.fail("expected 'x weight'");
    try {
      x[k] = parse_double(a);
      w[k] = parse_double(b);
    } catch (const std::exception& e) {
      in.fail(e.what());
    }
  }

  GridSpec spec;
  spec.grading = Grading::parse(g_text);
  spec.first_node = x[0];
  if (const std::string a = field(header, "singular"); !a.empty()) {
    try {
      spec.singular_exponent = parse_double(a);
    } catch (const std::exception& e) {
      in.fail(e.what());
    }
    if (!(spec.singular_exponent >= 0.0 && spec.singular_exponent < 1.0)) in.fail("singular exponent outside [0, 1)");
  }
  try {
    return std::make_shared<const EnergyGrid>(spec, std::move(x), std::move(w));
  } catch (const std::exception& e) {
    in.fail(e.what());
  }
}

}  // namespace

void write_grid(std::ostream& os, const EnergyGrid& grid) {
  os << "# bn-grid N=" << grid.size() << " xmax=" << format_double(grid.x_max())
     << " grading=" << grid.spec().grading.to_string();
  if (grid.spec().singular_exponent > 0.0) os << " singular=" << format_double(grid.spec().singular_exponent);
  os << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) os << format_double(grid.node(i)) << ' ' << format_double(grid.weight(i)) << '\n';
}

GridPtr read_grid(std::istream& is) {
  LineReader in{is};
  return read_grid_block(in);
}

void write_checkpoint(std::ostream& os, const Distribution& dist, const std::optional<RunState>& state) {
  write_grid(os, *dist.grid);
  os << "t=" << format_double(dist.time) << '\n';
  os << "# step=" << dist.step << '\n';
  if (state) {
    os << "# state dt_prev=" << format_double(state->dt_prev) << " target_mass=" << format_double(state->target_mass)
       << " target_energy=" << format_double(state->target_energy)
       << " supxf_initial=" << format_double(state->supxf_initial) << '\n';
  }
  for (double v : dist.values) os << format_double(v) << '\n';
}

Checkpoint read_checkpoint(std::istream& is) {
  LineReader in{is};
  GridPtr grid = read_grid_block(in);
  std::string line;
  if (!in.next(line) || line.rfind("t=", 0) != 0) in.fail("expected 't=<time>'");
  Checkpoint cp;
  double t = 0.0;
  try {
    t = parse_double(line.substr(2));
  } catch (const std::exception& e) {
    in.fail(e.what());
  }
  long step = 0;
  std::vector<double> values;
  values.reserve(grid->size());
  while (in.next(line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string s = field(line, "step");
      if (!s.empty()) step = std::stol(s);
      if (line.rfind("# state", 0) == 0) {
        RunState st;
        try {
          st.dt_prev = parse_double(field(line, "dt_prev"));
          st.target_mass = parse_double(field(line, "target_mass"));
          st.target_energy = parse_double(field(line, "target_energy"));
          st.supxf_initial = parse_double(field(line, "supxf_initial"));
        } catch (const std::exception& e) {
          in.fail(std::string("state line: ") + e.what());
        }
        cp.state = st;
      }
      continue;
    }
    try {
      values.push_back(parse_double(line));
    } catch (const std::exception& e) {
      in.fail(e.what());
    }
  }
  if (values.size() != grid->size())
    in.fail("expected " + std::to_string(grid->size()) + " values, found " + std::to_string(values.size()));
  cp.dist = Distribution(grid, std::move(values), t, step);
  cp.dist.validate();
  return cp;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_checkpoint(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_checkpoint(const std::string& path, const Distribution& dist, const std::optional<RunState>& state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_checkpoint(out, dist, state);
}

}  // namespace bn
