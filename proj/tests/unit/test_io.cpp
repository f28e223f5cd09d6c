#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "jsr/csv.hpp"
#include "jsr/instance_io.hpp"
#include "jsr/model.hpp"

using Eigen::MatrixXd;

TEST_CASE("doubles round-trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 600) - 300);
    CHECK(jsr::parse_double(jsr::format_double(v)) == v);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(jsr::parse_double(jsr::format_double(inf)) == inf);
  CHECK(jsr::parse_double(jsr::format_double(-inf)) == -inf);
  CHECK(std::isnan(jsr::parse_double(jsr::format_double(std::nan("")))));
  CHECK(jsr::format_double(0.1) == "0.1");
  CHECK_THROWS(jsr::parse_double("1.5x"));
  CHECK_THROWS(jsr::parse_double(""));
  CHECK(jsr::parse_integer("-42") == -42);
  CHECK_THROWS(jsr::parse_integer("4.2"));
}

TEST_CASE("csv tables") {
  std::stringstream ss;
  jsr::write_csv_row(ss, {"a", "b", "c"});
  jsr::write_csv_row(ss, {"1", "x", jsr::format_double(2.5)});
  jsr::write_csv_row(ss, {"2", "y", "nan"});
  const auto t = jsr::read_csv(ss);
  REQUIRE(t.rows.size() == 2u);
  CHECK(t.column("c") == 2u);
  CHECK(t.rows[1][1] == "y");
  CHECK(jsr::parse_double(t.rows[0][t.column("c")]) == 2.5);
  CHECK_THROWS_AS(t.column("d"), std::out_of_range);

  std::stringstream ragged("a,b\n1,2,3\n");
  CHECK_THROWS(jsr::read_csv(ragged));
  CHECK(jsr::split_csv_line("1,,3").size() == 3u);
}

TEST_CASE("coo and matrix csv") {
  jsr::ModelConfig cfg;
  cfg.seed = 3;
  const auto phi = jsr::gen_sensing_matrix(cfg);
  std::stringstream coo;
  jsr::write_coo(coo, phi);
  std::string head;
  std::getline(std::stringstream(coo.str()), head);
  CHECK(head == "50 100 " + std::to_string(phi.nnz()));
  const auto back = jsr::read_coo(coo);
  CHECK((back.to_dense() - phi.to_dense()).norm() == 0.0);

  std::stringstream one_based("2 2 1\n2 1 0.5\n");
  const auto small = jsr::read_coo(one_based);
  CHECK(small.to_dense()(1, 0) == 0.5);
  std::stringstream short_coo("2 2 2\n1 1 1.0\n");
  CHECK_THROWS(jsr::read_coo(short_coo));

  const MatrixXd m = MatrixXd::Random(7, 3);
  std::stringstream mc;
  jsr::write_matrix_csv(mc, m, "x");
  CHECK(mc.str().rfind("x1,x2,x3\n", 0) == 0);
  CHECK((jsr::read_matrix_csv(mc) - m).norm() == 0.0);
}

TEST_CASE("instance dump and load") {
  jsr::ModelConfig cfg;
  cfg.seed = 4;
  const auto inst = jsr::generate_instance(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "jsr_test_io_instance";
  std::filesystem::remove_all(dir);
  jsr::dump_instance(inst, dir);
  for (const char* f : {"phi.coo", "signal.csv", "measurements.csv", "instance.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto back = jsr::load_instance(dir);
  CHECK((back.phi.to_dense() - inst.phi.to_dense()).norm() == 0.0);
  CHECK((back.signal.X - inst.signal.X).norm() == 0.0);
  CHECK((back.signal.support - inst.signal.support).cwiseAbs().sum() == 0);
  CHECK((back.meas.Y - inst.meas.Y).norm() == 0.0);
  CHECK(back.meas.sigma2 == inst.meas.sigma2);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(jsr::load_instance(dir));
}
