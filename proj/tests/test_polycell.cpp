#include "terrain/polycell.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"

using namespace terrain;
using namespace terrain::polycell;

namespace {

CornerConstraintSet random_constraints(const CellConfig& cfg, std::uint64_t seed) {
    auto cs = CornerConstraintSet::zeros(cfg);
    auto gen = oracle::rng(seed);
    for (auto& corner : cs.values)
        for (auto& v : corner) v = oracle::uniform(gen);
    return cs;
}

PolyCoefficients random_poly(const CellConfig& cfg, std::uint64_t seed) {
    PolyCoefficients poly{cfg, {}};
    std::size_t total = 1;
    for (int k = 0; k < cfg.dims; ++k) total *= static_cast<std::size_t>(cfg.degree + 1);
    poly.coeffs.resize(total);
    auto gen = oracle::rng(seed);
    for (auto& c : poly.coeffs) c = oracle::uniform(gen);
    return poly;
}

}  // namespace

TEST(Counting, ConstraintExamples) {
    EXPECT_EQ(count_constraints(2, 1), 12);
    EXPECT_EQ(count_constraints(1, 0), 2);
    EXPECT_EQ(count_constraints(3, 1), 32);
    EXPECT_EQ(count_constraints(2, 2), 24);
    EXPECT_EQ(count_constraints(CellConfig{2, 1, 3}), 12);
}

TEST(Counting, FeasibilityExamples) {
    EXPECT_FALSE(is_feasible(1, 8, 1));
    EXPECT_TRUE(is_feasible(2, 1, 3));
    EXPECT_FALSE(is_feasible(2, 1, 2));
}

TEST(Counting, MinFeasibleDegreeExamples) {
    EXPECT_EQ(min_feasible_degree(2, 1), 3);
    EXPECT_EQ(min_feasible_degree(2, 2), 4);
    EXPECT_EQ(min_feasible_degree(3, 2), 4);
    EXPECT_EQ(min_feasible_degree(1, 1), 3);
}

TEST(Counting, MinFeasibleDegreeIsTight) {
    for (int D = 1; D <= 4; ++D) {
        for (int m = 0; m <= 3; ++m) {
            const int n = min_feasible_degree(D, m);
            EXPECT_TRUE(is_feasible(D, m, n)) << "D=" << D << " m=" << m;
            if (n > 0) EXPECT_FALSE(is_feasible(D, m, n - 1)) << "D=" << D << " m=" << m;
        }
    }
}

TEST(Counting, RejectsBadArguments) {
    EXPECT_THROW(count_constraints(0, 1), ValidationError);
    EXPECT_THROW(count_constraints(2, -1), ValidationError);
    EXPECT_THROW(is_feasible(2, 1, -1), ValidationError);
}

TEST(Layout, CornerOrder2D) {
    const auto corners = corner_points(2);
    ASSERT_EQ(corners.size(), 4u);
    EXPECT_EQ(corners[0], (MultiIndex{0, 0}));
    EXPECT_EQ(corners[1], (MultiIndex{1, 0}));
    EXPECT_EQ(corners[2], (MultiIndex{0, 1}));
    EXPECT_EQ(corners[3], (MultiIndex{1, 1}));
}

TEST(Layout, ConstrainedDerivativesD2M1) {
    const auto d = constrained_derivatives(2, 1);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0], (MultiIndex{0, 0}));
    EXPECT_EQ(d[1], (MultiIndex{1, 0}));
    EXPECT_EQ(d[2], (MultiIndex{0, 1}));
}

TEST(Layout, FlatIndexRoundTrip) {
    const PolyCoefficients poly = random_poly(CellConfig{3, 1, 3}, 7);
    for (std::size_t idx = 0; idx < poly.coeffs.size(); ++idx)
        EXPECT_EQ(poly.flat_index(poly.unflatten(idx)), idx);
}

TEST(System, ShapeD2M1N3) {
    const CellConfig cfg{2, 1, 3};
    const auto sys = build_system(cfg, CornerConstraintSet::zeros(cfg));
    EXPECT_EQ(sys.matrix.rows(), 12);
    EXPECT_EQ(sys.matrix.cols(), 16);

    const auto pinned = build_system(cfg, CornerConstraintSet::zeros(cfg), true);
    EXPECT_EQ(pinned.matrix.rows(), 12 + 16);
    EXPECT_EQ(pinned.matrix.cols(), 16);
}

TEST(System, InfeasibleConfigurationThrows) {
    const CellConfig low{2, 1, 2};
    EXPECT_THROW(build_system(low, CornerConstraintSet::zeros(CellConfig{2, 1, 3})),
                 ValidationError);
    const CellConfig spike{1, 8, 1};
    EXPECT_THROW(build_system(spike, CornerConstraintSet::zeros(CellConfig{1, 8, 17})),
                 ValidationError);
}

TEST(System, MismatchedConstraintSetThrows) {
    const CellConfig cfg{2, 1, 3};
    EXPECT_THROW(build_system(cfg, CornerConstraintSet::zeros(CellConfig{2, 2, 5})),
                 ValidationError);
    auto cs = CornerConstraintSet::zeros(cfg);
    cs.values.pop_back();
    EXPECT_THROW(build_system(cfg, cs), ValidationError);
}

TEST(Solve, CubicSmoothstepFromEndpointData) {
    const CellConfig cfg{1, 1, 3};
    auto cs = CornerConstraintSet::zeros(cfg);
    cs.at(1, MultiIndex{0}) = 1.0;  // h(1) = 1, slopes zero
    const auto poly = solve_cell(build_system(cfg, cs));
    ASSERT_EQ(poly.coeffs.size(), 4u);
    EXPECT_NEAR(poly.coeffs[0], 0.0, 1e-12);
    EXPECT_NEAR(poly.coeffs[1], 0.0, 1e-12);
    EXPECT_NEAR(poly.coeffs[2], 3.0, 1e-12);
    EXPECT_NEAR(poly.coeffs[3], -2.0, 1e-12);
}

TEST(Solve, QuinticSmoothstepFromEndpointData) {
    const CellConfig cfg{1, 2, 5};
    auto cs = CornerConstraintSet::zeros(cfg);
    cs.at(1, MultiIndex{0}) = 1.0;  // value 1, first and second derivatives zero
    const auto poly = solve_cell(build_system(cfg, cs));
    const std::vector<double> expected{0.0, 0.0, 0.0, 10.0, -15.0, 6.0};
    ASSERT_EQ(poly.coeffs.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        EXPECT_NEAR(poly.coeffs[i], expected[i], 1e-12) << "coefficient " << i;
}

TEST(Solve, HomogeneousGivesZero) {
    const CellConfig cfg{2, 1, 3};
    const auto poly = solve_cell(build_system(cfg, CornerConstraintSet::zeros(cfg)));
    for (const double c : poly.coeffs) EXPECT_NEAR(c, 0.0, 1e-12);
}

TEST(Solve, CornerExactnessAcrossConfigurations) {
    const std::vector<CellConfig> configs{
        {1, 1, 3}, {2, 1, 3}, {2, 2, 5}, {3, 1, 3}, {2, 0, 1}, {1, 2, 5}};
    for (const auto& cfg : configs) {
        const auto cs = random_constraints(cfg, 100 + static_cast<std::uint64_t>(cfg.dims));
        const auto poly = solve_cell(build_system(cfg, cs));
        const auto corners = corner_points(cfg.dims);
        for (std::size_t ci = 0; ci < corners.size(); ++ci) {
            std::vector<double> point(corners[ci].begin(), corners[ci].end());
            for (std::size_t di = 0; di < cs.derivatives.size(); ++di) {
                const auto deriv = poly_derivative(poly, cs.derivatives[di]);
                EXPECT_NEAR(poly_eval(deriv, point), cs.values[ci][di], 1e-9)
                    << "D=" << cfg.dims << " m=" << cfg.max_deriv_order << " corner " << ci
                    << " slot " << di;
            }
        }
    }
}

TEST(Solve, Deterministic) {
    const CellConfig cfg{2, 1, 3};
    const auto cs = random_constraints(cfg, 55);
    const auto sys = build_system(cfg, cs);
    const auto a = solve_cell(sys);
    const auto b = solve_cell(sys);
    EXPECT_EQ(a.coeffs, b.coeffs);
}

TEST(Solve, PinnedZeroCoefficientsStayZero) {
    const CellConfig cfg{2, 1, 3};
    const auto cs = random_constraints(cfg, 9);
    const std::vector<MultiIndex> quad{{2, 2}, {2, 3}, {3, 2}, {3, 3}};
    const auto poly = solve_cell(build_system(cfg, cs, false, quad));
    for (const auto& a : quad) EXPECT_EQ(poly.coeffs[poly.flat_index(a)], 0.0);
    const auto corners = corner_points(cfg.dims);
    for (std::size_t ci = 0; ci < corners.size(); ++ci) {
        std::vector<double> point(corners[ci].begin(), corners[ci].end());
        EXPECT_NEAR(poly_eval(poly, point), cs.values[ci][0], 1e-9);
    }
}

TEST(Solve, CountFeasibleIsNotAlwaysSolvable) {
    // D2M2N4 passes the coefficient count (24 <= 25), yet its edge
    // restriction is a quartic carrying six endpoint conditions, so random
    // corner data is unreachable. The solver must report this, not mask it.
    const CellConfig cfg{2, 2, 4};
    const auto cs = random_constraints(cfg, 321);
    EXPECT_THROW(solve_cell(build_system(cfg, cs)), SolveError);
}

TEST(Solve, InconsistentSystemRaises) {
    // Degree pinned down to a line, but four incompatible endpoint rows.
    const CellConfig cfg{1, 1, 3};
    auto cs = CornerConstraintSet::zeros(cfg);
    cs.at(0, MultiIndex{0}) = 0.0;
    cs.at(1, MultiIndex{0}) = 1.0;
    cs.at(0, MultiIndex{1}) = 3.0;
    cs.at(1, MultiIndex{1}) = 7.0;
    const std::vector<MultiIndex> pinned{{2}, {3}};
    try {
        solve_cell(build_system(cfg, cs, false, pinned));
        FAIL() << "expected SolveError";
    } catch (const SolveError& e) {
        EXPECT_GT(e.max_residual(), 1e-6);
    }
}

TEST(Eval, MatchesNaiveExpansion) {
    for (const auto& cfg : {CellConfig{2, 1, 3}, CellConfig{3, 1, 2}}) {
        const auto poly = random_poly(cfg, 1234);
        auto gen = oracle::rng(77);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> point(static_cast<std::size_t>(cfg.dims));
            for (auto& x : point) x = oracle::uniform(gen, 0.0, 1.0);
            EXPECT_NEAR(poly_eval(poly, point), oracle::naive_poly_eval(poly, point), 1e-12);
        }
    }
}

TEST(Eval, KnownValues) {
    PolyCoefficients s3{CellConfig{1, 1, 3}, {0.0, 0.0, 3.0, -2.0}};
    const std::vector<double> half{0.5};
    EXPECT_DOUBLE_EQ(poly_eval(s3, half), 0.5);

    PolyCoefficients zero{CellConfig{2, 1, 3}, std::vector<double>(16, 0.0)};
    const std::vector<double> p{0.3, 0.8};
    EXPECT_EQ(poly_eval(zero, p), 0.0);
}

TEST(Eval, DimensionMismatchThrows) {
    const auto poly = random_poly(CellConfig{2, 1, 3}, 3);
    const std::vector<double> p{0.5};
    EXPECT_THROW(poly_eval(poly, p), ValidationError);
}

TEST(Derivative, KnownPolynomials) {
    PolyCoefficients s3{CellConfig{1, 1, 3}, {0.0, 0.0, 3.0, -2.0}};
    const auto ds3 = poly_derivative(s3, MultiIndex{1});
    EXPECT_EQ(ds3.coeffs, (std::vector<double>{0.0, 6.0, -6.0, 0.0}));

    // c * x * y, mixed derivative is the constant c.
    PolyCoefficients xy{CellConfig{2, 1, 1}, {0.0, 0.0, 0.0, 2.5}};
    const auto dxy = poly_derivative(xy, MultiIndex{1, 1});
    EXPECT_EQ(dxy.coeffs, (std::vector<double>{2.5, 0.0, 0.0, 0.0}));

    // Differentiating past the degree empties the polynomial.
    const auto gone = poly_derivative(s3, MultiIndex{4});
    for (const double c : gone.coeffs) EXPECT_EQ(c, 0.0);
}

TEST(Derivative, MatchesFiniteDifference) {
    const CellConfig cfg{2, 1, 3};
    const auto poly = random_poly(cfg, 4242);
    const auto dx = poly_derivative(poly, MultiIndex{1, 0});
    const auto dy = poly_derivative(poly, MultiIndex{0, 1});
    const auto f = [&](const std::vector<double>& p) { return poly_eval(poly, p); };
    auto gen = oracle::rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> p{oracle::uniform(gen, 0.1, 0.9), oracle::uniform(gen, 0.1, 0.9)};
        EXPECT_NEAR(poly_eval(dx, p), oracle::central_diff(f, p, 0), 1e-6);
        EXPECT_NEAR(poly_eval(dy, p), oracle::central_diff(f, p, 1), 1e-6);
    }
}

TEST(Derivative, MixedPartialsCommuteExactly) {
    const auto poly = random_poly(CellConfig{2, 2, 4}, 31);
    const auto route_a =
        poly_derivative(poly_derivative(poly, MultiIndex{1, 0}), MultiIndex{0, 1});
    const auto route_b =
        poly_derivative(poly_derivative(poly, MultiIndex{0, 1}), MultiIndex{1, 0});
    EXPECT_EQ(route_a.coeffs, route_b.coeffs);
}

TEST(EdgePinning, SharedEdgeMatchesAcrossCells) {
    // Two horizontally adjacent cells with shared corner data along x=1 / x=0.
    const CellConfig cfg{2, 1, 3};
    auto gen = oracle::rng(2024);
    const auto corner = [&gen]() {
        return std::array<double, 3>{oracle::uniform(gen), oracle::uniform(gen),
                                     oracle::uniform(gen)};
    };
    const auto A = corner(), B = corner(), C = corner(), Dc = corner();
    const auto E = corner(), F = corner();

    const auto fill = [](CornerConstraintSet& cs, std::size_t ci, const std::array<double, 3>& v) {
        cs.values[ci][0] = v[0];
        cs.values[ci][1] = v[1];
        cs.values[ci][2] = v[2];
    };
    auto left = CornerConstraintSet::zeros(cfg);
    fill(left, 0, A);
    fill(left, 1, B);
    fill(left, 2, C);
    fill(left, 3, Dc);
    auto right = CornerConstraintSet::zeros(cfg);
    fill(right, 0, B);
    fill(right, 1, E);
    fill(right, 2, Dc);
    fill(right, 3, F);

    const auto pl = solve_cell(build_system(cfg, left, true));
    const auto pr = solve_cell(build_system(cfg, right, true));
    for (int i = 0; i < 50; ++i) {
        const double t = i / 49.0;
        const std::vector<double> l{1.0, t}, r{0.0, t};
        EXPECT_NEAR(poly_eval(pl, l), poly_eval(pr, r), 1e-9) << "t=" << t;
    }
}

TEST(EdgePinning, SystemStaysConsistent) {
    const CellConfig cfg{2, 1, 3};
    const auto cs = random_constraints(cfg, 500);
    const auto sys = build_system(cfg, cs, true);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.matrix);
    EXPECT_LE(qr.rank(), 16);
    EXPECT_GE(qr.rank(), 12);
    EXPECT_NO_THROW(solve_cell(sys));
}

TEST(EdgePinning, DegreeTooLowThrows) {
    const CellConfig cfg{2, 2, 4};  // feasible, but 4 < 2m+1 = 5
    EXPECT_THROW(build_system(cfg, CornerConstraintSet::zeros(cfg), true), ValidationError);
}

TEST(Csv, GoldenSmoothstep) {
    PolyCoefficients s3{CellConfig{1, 1, 3}, {0.0, 0.0, 3.0, -2.0}};
    std::ostringstream os;
    export_csv(s3, os);
    EXPECT_EQ(os.str(), "a1,coefficient\n0,0\n1,0\n2,3\n3,-2\n");
}

TEST(Csv, ValuesRoundTrip) {
    const auto poly = random_poly(CellConfig{2, 1, 3}, 90);
    std::ostringstream os;
    export_csv(poly, os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "a1,a2,coefficient");
    std::string line;
    std::size_t idx = 0;
    while (std::getline(is, line)) {
        int a1 = -1, a2 = -1;
        double v = 0.0;
        ASSERT_EQ(std::sscanf(line.c_str(), "%d,%d,%lf", &a1, &a2, &v), 3);
        const auto a = poly.unflatten(idx);
        EXPECT_EQ(a1, a[0]);
        EXPECT_EQ(a2, a[1]);
        EXPECT_EQ(v, poly.coeffs[idx]);  // %.17g round-trips exactly
        ++idx;
    }
    EXPECT_EQ(idx, poly.coeffs.size());
}
