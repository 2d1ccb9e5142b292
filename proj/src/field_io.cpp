#include "pfkit/field_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace pfkit {

namespace {

void expect(std::istream& is, const std::string& key) {
  std::string word;
  if (!(is >> word) || word != key) throw std::runtime_error("field dump: expected '" + key + "'");
}

}  // namespace

void write_fields(std::ostream& os, const State& state) {
  const Grid& g = state.grid();
  const SparsePhaseField& f = state.phases;
  os << std::setprecision(17);
  os << "pfkit-fields 1\n";
  os << "dims " << g.dims() << "\n";
  os << "extents";
  for (auto e : g.extents()) os << ' ' << e;
  os << "\nspacing " << g.spacing() << "\n";
  os << "boundaries";
  for (int a = 0; a < g.dims(); ++a) os << ' ' << to_string(g.boundary(a));
  os << "\ntime " << state.time << "\n";
  os << "capacity " << f.capacity() << "\n";
  os << "phases " << f.phase_count() << "\n";
  os << "narrow_band " << (f.narrow_band() ? 1 : 0) << "\n";
  os << "fields phi" << (state.concentration ? " c" : "") << "\n";
  if (state.concentration) {
    os << "dirichlet";
    for (int a = 0; a < g.dims(); ++a) {
      os << ' ' << state.concentration->dirichlet(a, 0) << ' ' << state.concentration->dirichlet(a, 1);
    }
    os << "\n";
  }
  os << "end_header\n";
  for (Index i = 0; i < g.cells(); ++i) {
    const auto ids = f.ids(i);
    const auto vals = f.values(i);
    os << ids.size();
    for (std::size_t k = 0; k < ids.size(); ++k) os << ' ' << ids[k] << ':' << vals[k];
    os << '\n';
  }
  if (state.concentration) {
    for (Index i = 0; i < g.cells(); ++i) os << (*state.concentration)[i] << '\n';
  }
}

void write_fields(const std::string& path, const State& state) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_fields(os, state);
}

State read_fields(std::istream& is) {
  expect(is, "pfkit-fields");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("field dump: unsupported version");
  int dims = 0;
  expect(is, "dims");
  is >> dims;
  if (dims < 1 || dims > 3) throw std::runtime_error("field dump: bad dimensionality");
  std::vector<Index> extents(dims);
  expect(is, "extents");
  for (auto& e : extents) is >> e;
  double spacing = 0.0;
  expect(is, "spacing");
  is >> spacing;
  std::vector<Boundary> bounds(dims);
  expect(is, "boundaries");
  for (auto& b : bounds) {
    std::string name;
    is >> name;
    b = boundary_from_string(name);
  }
  State s;
  expect(is, "time");
  is >> s.time;
  int capacity = 0;
  int phases = 0;
  int narrow = 1;
  expect(is, "capacity");
  is >> capacity;
  expect(is, "phases");
  is >> phases;
  expect(is, "narrow_band");
  is >> narrow;
  expect(is, "fields");
  std::string line;
  std::getline(is, line);
  const bool has_c = line.find(" c") != std::string::npos;
  std::array<std::array<double, 2>, 3> dirichlet{};
  if (has_c) {
    expect(is, "dirichlet");
    for (int a = 0; a < dims; ++a) is >> dirichlet[a][0] >> dirichlet[a][1];
  }
  expect(is, "end_header");
  if (!is) throw std::runtime_error("field dump: malformed header");

  Grid grid(extents, spacing, bounds);
  Eigen::ArrayXXd dense = Eigen::ArrayXXd::Zero(phases, grid.cells());
  for (Index i = 0; i < grid.cells(); ++i) {
    int n = 0;
    is >> n;
    for (int k = 0; k < n; ++k) {
      std::string tok;
      is >> tok;
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw std::runtime_error("field dump: bad phase entry");
      const int id = std::stoi(tok.substr(0, colon));
      std::istringstream vs(tok.substr(colon + 1));
      double v = 0.0;
      vs >> v;
      if (id < 0 || id >= phases) throw std::runtime_error("field dump: phase id out of range");
      dense(id, i) = v;
    }
  }
  s.phases = SparsePhaseField::from_dense(grid, capacity, dense, narrow != 0);
  if (has_c) {
    ScalarField c(grid);
    for (Index i = 0; i < grid.cells(); ++i) is >> c[i];
    for (int a = 0; a < dims; ++a) {
      c.set_dirichlet(a, 0, dirichlet[a][0]);
      c.set_dirichlet(a, 1, dirichlet[a][1]);
    }
    s.concentration = std::move(c);
  }
  if (!is) throw std::runtime_error("field dump: truncated data");
  return s;
}

State read_fields(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_fields(is);
}

}  // namespace pfkit
