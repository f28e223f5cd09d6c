#pragma once

// Text interchange for problem instances.
//
//   phi.coo           "M N nnz" header, then one "m n value" line per entry (1-based)
//   signal.csv        support,x1,...,xJ
//   measurements.csv  y1,...,yJ
//   instance.json     {"M", "N", "J", "sigma2"}

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "jsr/model.hpp"

namespace jsr {

void write_coo(std::ostream& out, const SensingMatrix& phi);
SensingMatrix read_coo(std::istream& in);

/// Header prefix1,...,prefixJ followed by one row per matrix row.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::string& prefix);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

void dump_instance(const Instance& inst, const std::filesystem::path& dir);
Instance load_instance(const std::filesystem::path& dir);

}  // namespace jsr
