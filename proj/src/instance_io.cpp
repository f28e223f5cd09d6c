#include "jsr/instance_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "jsr/csv.hpp"

namespace jsr {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return f;
}

}  // namespace

void write_coo(std::ostream& out, const SensingMatrix& phi) {
  out << phi.rows() << ' ' << phi.cols() << ' ' << phi.nnz() << '\n';
  for (const MatrixEntry& e : phi.edges()) {
    out << e.row + 1 << ' ' << e.col + 1 << ' ' << format_double(e.value) << '\n';
  }
}

SensingMatrix read_coo(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("coo: missing header");
  std::istringstream head(line);
  int M = 0;
  int N = 0;
  long nnz = 0;
  if (!(head >> M >> N >> nnz) || nnz < 0) throw std::runtime_error("coo: bad header '" + line + "'");
  std::vector<MatrixEntry> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int m = 0;
    int n = 0;
    std::string value;
    if (!(ls >> m >> n >> value)) throw std::runtime_error("coo: bad entry '" + line + "'");
    entries.push_back({m - 1, n - 1, parse_double(value)});
  }
  if (static_cast<long>(entries.size()) != nnz) {
    throw std::runtime_error("coo: header announces " + std::to_string(nnz) + " entries, found " +
                             std::to_string(entries.size()));
  }
  return SensingMatrix(M, N, std::move(entries));
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::string& prefix) {
  std::vector<std::string> fields(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) fields[static_cast<std::size_t>(j)] = prefix + std::to_string(j + 1);
  write_csv_row(out, fields);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) fields[static_cast<std::size_t>(j)] = format_double(m(i, j));
    write_csv_row(out, fields);
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(t.rows[i][j]);
    }
  }
  return m;
}

void dump_instance(const Instance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto f = open_out(dir / "phi.coo");
    write_coo(f, inst.phi);
  }
  {
    auto f = open_out(dir / "signal.csv");
    const auto J = inst.signal.X.cols();
    std::vector<std::string> fields{"support"};
    for (Eigen::Index j = 0; j < J; ++j) fields.push_back("x" + std::to_string(j + 1));
    write_csv_row(f, fields);
    for (Eigen::Index n = 0; n < inst.signal.X.rows(); ++n) {
      fields[0] = std::to_string(inst.signal.support[n]);
      for (Eigen::Index j = 0; j < J; ++j) {
        fields[static_cast<std::size_t>(j) + 1] = format_double(inst.signal.X(n, j));
      }
      write_csv_row(f, fields);
    }
  }
  {
    auto f = open_out(dir / "measurements.csv");
    write_matrix_csv(f, inst.meas.Y, "y");
  }
  {
    auto f = open_out(dir / "instance.json");
    const nlohmann::json meta = {{"M", inst.phi.rows()},
                                 {"N", inst.phi.cols()},
                                 {"J", inst.meas.Y.cols()},
                                 {"sigma2", inst.meas.sigma2}};
    f << meta.dump(2) << '\n';
  }
}

Instance load_instance(const std::filesystem::path& dir) {
  Instance inst;
  {
    auto f = open_in(dir / "phi.coo");
    inst.phi = read_coo(f);
  }
  {
    auto f = open_in(dir / "signal.csv");
    const CsvTable t = read_csv(f);
    if (t.header.empty() || t.header[0] != "support") throw std::runtime_error("signal.csv: bad header");
    const auto N = static_cast<Eigen::Index>(t.rows.size());
    const auto J = static_cast<Eigen::Index>(t.header.size()) - 1;
    inst.signal.X.resize(N, J);
    inst.signal.support.resize(N);
    for (Eigen::Index n = 0; n < N; ++n) {
      const auto& row = t.rows[static_cast<std::size_t>(n)];
      inst.signal.support[n] = static_cast<int>(parse_integer(row[0]));
      for (Eigen::Index j = 0; j < J; ++j) inst.signal.X(n, j) = parse_double(row[static_cast<std::size_t>(j) + 1]);
    }
  }
  {
    auto f = open_in(dir / "measurements.csv");
    inst.meas.Y = read_matrix_csv(f);
  }
  {
    auto f = open_in(dir / "instance.json");
    const auto meta = nlohmann::json::parse(f);
    inst.meas.sigma2 = meta.at("sigma2").get<double>();
  }
  if (inst.signal.X.rows() != inst.phi.cols() || inst.meas.Y.rows() != inst.phi.rows() ||
      inst.meas.Y.cols() != inst.signal.X.cols()) {
    throw std::runtime_error("instance: inconsistent dimensions in " + dir.string());
  }
  return inst;
}

}  // namespace jsr
