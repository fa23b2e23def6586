#include <doctest.h>

#include <limits>

#include "ipc/error.hpp"
#include "ipc/model.hpp"
#include "ipc/simulation.hpp"
#include "support.hpp"

using namespace ipc;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("well-formed DGP draw validates") {
    auto [data, truth] = generate_dgp1({40, 40, 3});
    CHECK(data.n_units() == 40);
    CHECK(data.n_periods() == 40);
    CHECK(data.n_regressors() == 2);
    CHECK_NOTHROW(validate(data, IpcConfig{}));
  }

  TEST_CASE("constant regressor is reported with 1-based indices") {
    auto [data, truth] = generate_dgp1({40, 40, 3});
    Eigen::MatrixXd x = data.x();
    x.col(2 * 2 + 0).setConstant(5.0);  // unit i=3, regressor j=1
    const PanelDataset bad(data.y(), x, 2);
    try {
      validate(bad, IpcConfig{});
      FAIL("expected TimeInvariantRegressor");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TimeInvariantRegressor);
      const std::string msg = e.what();
      CHECK(msg.find("i=3") != std::string::npos);
      CHECK(msg.find("j=1") != std::string::npos);
    }
  }

  TEST_CASE("configuration bounds") {
    auto [data, truth] = generate_dgp1({40, 40, 3});
    IpcConfig c;
    c.d_max = 50;
    CHECK(code_of([&] { validate(data, c); }) == ErrorCode::DmaxTooLarge);
    c.d_max = 40;
    CHECK(code_of([&] { validate(data, c); }) == ErrorCode::DmaxTooLarge);
    c.d_max = 39;
    CHECK_NOTHROW(validate(data, c));
    c.d_max = 0;
    CHECK(code_of([&] { validate(data, c); }) == ErrorCode::InvalidConfig);
    c = IpcConfig{};
    c.delta = -0.5;
    CHECK(code_of([&] { validate(data, c); }) == ErrorCode::InvalidConfig);
    c = IpcConfig{};
    c.delta = 0.0;
    CHECK_NOTHROW(validate(data, c));
  }

  TEST_CASE("shape and finiteness checks") {
    CHECK(code_of([] { PanelDataset(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 5), 2); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([] {
            PanelDataset(Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 2), 1, {"a"});
          }) == ErrorCode::DimensionMismatch);
    NormalGenerator gen(1);
    Eigen::MatrixXd y = ipc::testing::gaussian(5, 3, gen);
    const Eigen::MatrixXd x = ipc::testing::gaussian(5, 3, gen);
    y(2, 1) = std::numeric_limits<double>::infinity();
    const PanelDataset d(y, x, 1);
    CHECK(code_of([&] { validate_dataset(d); }) == ErrorCode::NonFiniteData);
    const PanelDataset tiny(Eigen::MatrixXd::Ones(1, 3), Eigen::MatrixXd::Ones(1, 3), 1);
    CHECK(code_of([&] { validate_dataset(tiny); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("default labels and accessors") {
    NormalGenerator gen(2);
    const Eigen::MatrixXd y = ipc::testing::gaussian(4, 3, gen);
    const Eigen::MatrixXd x = ipc::testing::gaussian(4, 6, gen);
    const PanelDataset d(y, x, 2);
    CHECK(d.unit_labels() == std::vector<std::string>{"1", "2", "3"});
    CHECK(d.time_labels() == std::vector<std::string>{"1", "2", "3", "4"});
    CHECK(d.x_at(1, 2, 3) == x(3, 5));
    CHECK(d.regressor(1).col(2) == x.col(5));
    const Eigen::Vector2d beta(0.5, -2.0);
    const Eigen::MatrixXd u = d.residual(beta);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const Eigen::VectorXd expected = y.col(i) - d.x_unit(i) * beta;
      CHECK((u.col(i) - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("sub-panels keep the selected rows and labels") {
    NormalGenerator gen(3);
    const PanelDataset d(ipc::testing::gaussian(5, 4, gen), ipc::testing::gaussian(5, 8, gen), 2);
    const PanelDataset u = d.select_units({3, 1});
    CHECK(u.n_units() == 2);
    CHECK(u.y().col(0) == d.y().col(3));
    CHECK(u.x_unit(1) == d.x_unit(1));
    CHECK(u.unit_labels() == std::vector<std::string>{"4", "2"});
    const PanelDataset p = d.select_periods({0, 2, 4});
    CHECK(p.n_periods() == 3);
    CHECK(p.y().row(1) == d.y().row(2));
    CHECK(p.x().row(2) == d.x().row(4));
    CHECK(p.time_labels() == std::vector<std::string>{"1", "3", "5"});
  }

  TEST_CASE("error codes map to exit classes") {
    CHECK(kind_of(ErrorCode::DuplicateCell) == ErrorKind::Data);
    CHECK(kind_of(ErrorCode::TimeInvariantRegressor) == ErrorKind::Data);
    CHECK(kind_of(ErrorCode::SingularZGram) == ErrorKind::Numerical);
    CHECK(kind_of(ErrorCode::IoError) == ErrorKind::Io);
    CHECK(std::string(to_string(ErrorCode::GroupBudgetExceeded)) == "GroupBudgetExceeded");
  }
}
