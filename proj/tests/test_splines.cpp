#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "spikerace/splines.hpp"

using namespace spikerace;

TEST_SUITE("splines") {

// reference design matrices from scipy.interpolate.BSpline.design_matrix on
// the same clamped knot vectors, leading column dropped
TEST_CASE("cubic basis with quartile knots matches scipy") {
    BasisConfig cfg;
    cfg.degree = 3;
    cfg.t_lo = 0.0;
    cfg.t_hi = 1.0;
    cfg.interior = {0.25, 0.5, 0.75};
    REQUIRE(cfg.dim() == 6);

    const double table[][7] = {
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {0.1, 0.59200000000000008, 0.18133333333333335, 0.010666666666666670, 0.0, 0.0, 0.0},
        {0.25, 0.25, 0.58333333333333326, 0.16666666666666666, 0.0, 0.0, 0.0},
        {0.33, 0.078607999999999983, 0.55444799999999994, 0.36148266666666673,
         0.0054613333333333371, 0.0, 0.0},
        {0.5, 0.0, 0.16666666666666666, 0.66666666666666663, 0.16666666666666666, 0.0, 0.0},
        {0.77, 0.0, 0.0, 0.12978133333333330, 0.55580266666666667, 0.31390400000000002,
         0.00051200000000000139},
        {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0},
    };
    for (const auto& row : table) {
        const Eigen::VectorXd b = eval_basis(cfg, row[0]);
        REQUIRE(b.size() == 6);
        for (int k = 0; k < 6; ++k)
            CHECK(b[k] == doctest::Approx(row[k + 1]).epsilon(1e-13));
    }
}

TEST_CASE("quadratic basis on a shifted window matches scipy") {
    BasisConfig cfg;
    cfg.degree = 2;
    cfg.t_lo = 0.0;
    cfg.t_hi = 2.0;
    cfg.interior = {0.4};
    REQUIRE(cfg.dim() == 3);

    const double table[][4] = {
        {0.0, 0.0, 0.0, 0.0},
        {0.2, 0.69999999999999996, 0.05, 0.0},
        {0.4, 0.80000000000000004, 0.2, 0.0},
        {1.1, 0.25312499999999999, 0.55546874999999996, 0.19140625000000003},
        {2.0, 0.0, 0.0, 1.0},
    };
    for (const auto& row : table) {
        const Eigen::VectorXd b = eval_basis(cfg, row[0]);
        for (int k = 0; k < 3; ++k)
            CHECK(b[k] == doctest::Approx(row[k + 1]).epsilon(1e-13));
    }
}

TEST_CASE("retained functions complete the partition of unity past the first span") {
    // the dropped leading function's support ends at the first interior knot,
    // so beyond it the retained ones must sum to one exactly
    BasisConfig cfg = default_basis(1.0);
    for (double t : {0.25, 0.3, 0.5, 0.9, 1.0})
        CHECK(eval_basis(cfg, t).sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (double t : {0.0, 0.05, 0.2})
        CHECK(eval_basis(cfg, t).sum() < 1.0);
    CHECK(eval_basis(cfg, 0.0).sum() == 0.0);
}

TEST_CASE("basis values are never negative") {
    BasisConfig cfg = default_basis(2.5);
    for (int i = 0; i <= 100; ++i) {
        const Eigen::VectorXd b = eval_basis(cfg, 2.5 * i / 100.0);
        CHECK(b.minCoeff() >= 0.0);
    }
}

TEST_CASE("matrix form stacks the per-point rows") {
    BasisConfig cfg = default_basis(1.0);
    const std::vector<double> ts = {0.1, 0.6, 0.95};
    const Eigen::MatrixXd m = eval_basis_matrix(cfg, ts);
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == cfg.dim());
    for (int i = 0; i < 3; ++i)
        CHECK((m.row(i).transpose() - eval_basis(cfg, ts[i])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("configuration and domain errors") {
    BasisConfig cfg = default_basis(1.0);
    CHECK_THROWS_AS(eval_basis(cfg, -0.01), std::domain_error);
    CHECK_THROWS_AS(eval_basis(cfg, 1.01), std::domain_error);

    BasisConfig bad = cfg;
    bad.degree = 0;
    CHECK_THROWS_AS(validate_basis(bad), std::invalid_argument);
    bad = cfg;
    bad.interior = {0.5, 0.25};
    CHECK_THROWS_AS(validate_basis(bad), std::invalid_argument);
    bad = cfg;
    bad.interior = {1.5};
    CHECK_THROWS_AS(validate_basis(bad), std::invalid_argument);
    bad = cfg;
    bad.t_hi = 0.0;
    CHECK_THROWS_AS(validate_basis(bad), std::invalid_argument);
    CHECK_NOTHROW(validate_basis(cfg));
}

}  // TEST_SUITE
