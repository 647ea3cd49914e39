#pragma once

// Boundary-constrained multivariate polynomial cells: feasibility counting,
// constraint-system assembly, minimum-norm solving, evaluation, derivatives.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "terrain/errors.hpp"

namespace terrain::polycell {

// Exponent (or derivative-order) tuple, one entry per axis.
using MultiIndex = std::vector<int>;

struct CellConfig {
    int dims = 2;             // D
    int max_deriv_order = 1;  // m, highest constrained derivative order per corner
    int degree = 3;           // n, per-axis polynomial degree

    void validate() const {
        if (dims < 1 || dims > 10)
            throw ValidationError("cell config: dims must be in [1, 10]");
        if (max_deriv_order < 0 || max_deriv_order > 10)
            throw ValidationError("cell config: max_deriv_order must be in [0, 10]");
        if (degree < 0 || degree > 100)
            throw ValidationError("cell config: degree must be in [0, 100]");
        double terms = 1.0;
        for (int k = 0; k < dims; ++k) terms *= degree + 1;
        if (terms > 16.0 * 1024.0 * 1024.0)
            throw ValidationError("cell config: coefficient count exceeds 16M");
    }

    bool operator==(const CellConfig&) const = default;
};

inline long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Corner constraints per cell: 2^D corners, each pinning every mixed
// derivative of total order <= m (the order-0 slot is the value itself).
inline long long count_constraints(int dims, int max_deriv_order) {
    if (dims < 1) throw ValidationError("count_constraints: dims must be positive");
    if (max_deriv_order < 0) throw ValidationError("count_constraints: order must be non-negative");
    long long per_corner = 0;
    for (int i = 0; i <= max_deriv_order; ++i)
        per_corner += binomial(dims + i - 1, i);
    return (1LL << dims) * per_corner;
}

inline long long count_constraints(const CellConfig& config) {
    config.validate();
    return count_constraints(config.dims, config.max_deriv_order);
}

inline bool is_feasible(int dims, int max_deriv_order, int degree) {
    if (degree < 0) throw ValidationError("is_feasible: degree must be non-negative");
    const long long constraints = count_constraints(dims, max_deriv_order);
    // (degree+1)^dims coefficients, with overflow guard on the product.
    long long coeffs = 1;
    for (int k = 0; k < dims; ++k) {
        if (coeffs > constraints) return true;
        coeffs *= degree + 1;
    }
    return constraints <= coeffs;
}

inline int min_feasible_degree(int dims, int max_deriv_order) {
    for (int n = 0;; ++n)
        if (is_feasible(dims, max_deriv_order, n)) return n;
}

// Corners of the unit D-cube; axis k of corner b is bit k of b, so for D=2
// the order is (0,0), (1,0), (0,1), (1,1).
inline std::vector<MultiIndex> corner_points(int dims) {
    std::vector<MultiIndex> corners;
    corners.reserve(std::size_t{1} << dims);
    for (std::uint32_t b = 0; b < (1u << dims); ++b) {
        MultiIndex s(dims);
        for (int k = 0; k < dims; ++k) s[k] = (b >> k) & 1;
        corners.push_back(std::move(s));
    }
    return corners;
}

namespace detail {

inline void compositions_rec(int dims, int remaining, MultiIndex& cur,
                             std::vector<MultiIndex>& out) {
    if (dims == 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur.push_back(v);
        compositions_rec(dims - 1, remaining - v, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

// Derivative tuples constrained at each corner: total order 0..m, graded,
// earlier axes carrying the larger exponents first within each order.
inline std::vector<MultiIndex> constrained_derivatives(int dims, int max_deriv_order) {
    std::vector<MultiIndex> out;
    MultiIndex cur;
    for (int order = 0; order <= max_deriv_order; ++order)
        detail::compositions_rec(dims, order, cur, out);
    return out;
}

struct CornerConstraintSet {
    CellConfig config;
    std::vector<MultiIndex> derivatives;       // slot layout, canonical order
    std::vector<std::vector<double>> values;   // [corner][slot]

    static CornerConstraintSet zeros(const CellConfig& config) {
        config.validate();
        CornerConstraintSet set;
        set.config = config;
        set.derivatives = constrained_derivatives(config.dims, config.max_deriv_order);
        set.values.assign(std::size_t{1} << config.dims,
                          std::vector<double>(set.derivatives.size(), 0.0));
        return set;
    }

    int slot_of(const MultiIndex& d) const {
        for (std::size_t i = 0; i < derivatives.size(); ++i)
            if (derivatives[i] == d) return static_cast<int>(i);
        return -1;
    }

    double& at(std::size_t corner, const MultiIndex& d) {
        const int slot = slot_of(d);
        if (corner >= values.size() || slot < 0)
            throw ValidationError("constraint set: unknown corner or derivative");
        return values[corner][static_cast<std::size_t>(slot)];
    }

    double at(std::size_t corner, const MultiIndex& d) const {
        return const_cast<CornerConstraintSet*>(this)->at(corner, d);
    }
};

// Dense coefficient grid c_a over per-axis exponents 0..n, flattened
// row-major with the first axis most significant.
struct PolyCoefficients {
    CellConfig config;
    std::vector<double> coeffs;

    std::size_t flat_index(const MultiIndex& a) const {
        if (static_cast<int>(a.size()) != config.dims)
            throw ValidationError("flat_index: wrong multi-index length");
        std::size_t idx = 0;
        for (int k = 0; k < config.dims; ++k) {
            if (a[k] < 0 || a[k] > config.degree)
                throw ValidationError("flat_index: exponent out of range");
            idx = idx * (config.degree + 1) + static_cast<std::size_t>(a[k]);
        }
        return idx;
    }

    MultiIndex unflatten(std::size_t idx) const {
        MultiIndex a(config.dims);
        for (int k = config.dims - 1; k >= 0; --k) {
            a[k] = static_cast<int>(idx % (config.degree + 1));
            idx /= config.degree + 1;
        }
        return a;
    }

    std::size_t size() const { return coeffs.size(); }
};

struct LinearSystem {
    CellConfig config;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    std::vector<MultiIndex> pinned_zero;  // coefficients forced to zero before solving
    bool edge_pinning = false;
};

namespace detail {

inline long long falling_factorial(int a, int d) {
    long long r = 1;
    for (int i = 0; i < d; ++i) r *= a - i;
    return r;
}

// d/dx^d of x^a evaluated at s in {0,1}: falling factorial times s^(a-d).
inline double corner_monomial_derivative(int a, int d, int s) {
    if (d > a) return 0.0;
    if (s == 0 && a != d) return 0.0;
    return static_cast<double>(falling_factorial(a, d));
}

inline std::size_t power_count(const CellConfig& config) {
    std::size_t n = 1;
    for (int k = 0; k < config.dims; ++k) n *= static_cast<std::size_t>(config.degree + 1);
    return n;
}

}  // namespace detail

inline PolyCoefficients solve_cell(const LinearSystem& system);

namespace detail {

// 1D Hermite interpolant of degree 2m+1 matching values and derivatives up
// to order m at t = 0 and t = 1. Returned as 2m+2 monomial coefficients.
inline std::vector<double> hermite_coefficients(int max_deriv_order,
                                                std::span<const double> left,
                                                std::span<const double> right);

}  // namespace detail

// Rows: one per (corner, derivative) pair, corners outer in corner_points
// order, derivatives inner in constrained_derivatives order. With
// edge_pinning, extra rows force each edge restriction to equal the 1D
// Hermite interpolant of the edge endpoint data (requires n >= 2m+1).
inline LinearSystem build_system(const CellConfig& config,
                                 const CornerConstraintSet& constraints,
                                 bool edge_pinning = false,
                                 std::vector<MultiIndex> pinned_zero = {}) {
    config.validate();
    if (!is_feasible(config.dims, config.max_deriv_order, config.degree))
        throw ValidationError("build_system: infeasible cell configuration (too few coefficients)");
    const auto corners = corner_points(config.dims);
    const auto derivs = constrained_derivatives(config.dims, config.max_deriv_order);
    if (constraints.config != config || constraints.derivatives != derivs ||
        constraints.values.size() != corners.size())
        throw ValidationError("build_system: constraint set does not match configuration");
    for (const auto& v : constraints.values)
        if (v.size() != derivs.size())
            throw ValidationError("build_system: incomplete constraint set");
    if (edge_pinning && config.degree < 2 * config.max_deriv_order + 1)
        throw ValidationError("build_system: edge pinning needs degree >= 2m+1");

    const int D = config.dims;
    const int n = config.degree;
    const std::size_t cols = detail::power_count(config);
    const std::size_t corner_rows = corners.size() * derivs.size();
    const std::size_t edge_rows =
        edge_pinning ? static_cast<std::size_t>(D) * (corners.size() / 2) * (n + 1) : 0;

    LinearSystem system;
    system.config = config;
    system.edge_pinning = edge_pinning;
    system.pinned_zero = std::move(pinned_zero);
    system.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corner_rows + edge_rows),
                                          static_cast<Eigen::Index>(cols));
    system.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(corner_rows + edge_rows));

    PolyCoefficients layout{config, {}};
    MultiIndex a(D);

    // Corner derivative rows.
    Eigen::Index row = 0;
    for (std::size_t ci = 0; ci < corners.size(); ++ci) {
        for (std::size_t di = 0; di < derivs.size(); ++di, ++row) {
            system.rhs(row) = constraints.values[ci][di];
            for (std::size_t col = 0; col < cols; ++col) {
                // Rebuild the exponent tuple once per column.
                std::size_t rem = col;
                double entry = 1.0;
                for (int k = D - 1; k >= 0; --k) {
                    a[k] = static_cast<int>(rem % static_cast<std::size_t>(n + 1));
                    rem /= static_cast<std::size_t>(n + 1);
                }
                for (int k = 0; k < D && entry != 0.0; ++k)
                    entry *= detail::corner_monomial_derivative(a[k], derivs[di][k], corners[ci][k]);
                if (entry != 0.0) system.matrix(row, static_cast<Eigen::Index>(col)) = entry;
            }
        }
    }

    if (!edge_pinning) return system;

    // Edge rows: for each axis e and each 0/1 assignment of the other axes,
    // match the edge-restricted coefficient of t^j against the Hermite target.
    const int m = config.max_deriv_order;
    const auto corner_index = [D](const MultiIndex& s) {
        std::size_t b = 0;
        for (int k = 0; k < D; ++k) b |= static_cast<std::size_t>(s[k]) << k;
        return b;
    };
    for (int e = 0; e < D; ++e) {
        for (std::uint32_t fixed = 0; fixed < (1u << (D - 1)); ++fixed) {
            MultiIndex s(D, 0);
            int bit = 0;
            for (int k = 0; k < D; ++k) {
                if (k == e) continue;
                s[k] = (fixed >> bit) & 1;
                ++bit;
            }
            s[e] = 0;
            const std::size_t c0 = corner_index(s);
            s[e] = 1;
            const std::size_t c1 = corner_index(s);

            // Endpoint values and pure axis-e derivatives up to order m.
            std::vector<double> left(m + 1), right(m + 1);
            MultiIndex d(D, 0);
            for (int r = 0; r <= m; ++r) {
                d[e] = r;
                const int slot = constraints.slot_of(d);
                left[r] = constraints.values[c0][static_cast<std::size_t>(slot)];
                right[r] = constraints.values[c1][static_cast<std::size_t>(slot)];
            }
            const auto hermite = detail::hermite_coefficients(m, left, right);

            for (int j = 0; j <= n; ++j, ++row) {
                system.rhs(row) =
                    j < static_cast<int>(hermite.size()) ? hermite[static_cast<std::size_t>(j)] : 0.0;
                // Columns with a_e == j and every fixed axis satisfying
                // s_k == 1 or a_k == 0 contribute coefficient 1.
                for (std::size_t col = 0; col < cols; ++col) {
                    std::size_t rem = col;
                    for (int k = D - 1; k >= 0; --k) {
                        a[k] = static_cast<int>(rem % static_cast<std::size_t>(n + 1));
                        rem /= static_cast<std::size_t>(n + 1);
                    }
                    if (a[e] != j) continue;
                    bool live = true;
                    for (int k = 0; k < D && live; ++k)
                        if (k != e && s[k] == 0 && a[k] != 0) live = false;
                    if (live) system.matrix(row, static_cast<Eigen::Index>(col)) = 1.0;
                }
            }
        }
    }
    return system;
}

// Minimum-norm least-squares solve with pinned coefficients removed first.
// Residuals above kSolveTolerance raise SolveError.
inline constexpr double kSolveTolerance = 1e-9;

inline PolyCoefficients solve_cell(const LinearSystem& system) {
    system.config.validate();
    const std::size_t cols = detail::power_count(system.config);
    if (system.matrix.cols() != static_cast<Eigen::Index>(cols) ||
        system.matrix.rows() != system.rhs.size())
        throw ValidationError("solve_cell: system shape mismatch");

    PolyCoefficients out{system.config, std::vector<double>(cols, 0.0)};
    std::vector<bool> pinned(cols, false);
    for (const auto& a : system.pinned_zero)
        pinned[out.flat_index(a)] = true;

    std::vector<Eigen::Index> free_cols;
    free_cols.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c)
        if (!pinned[c]) free_cols.push_back(static_cast<Eigen::Index>(c));

    Eigen::MatrixXd reduced(system.matrix.rows(), static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t i = 0; i < free_cols.size(); ++i)
        reduced.col(static_cast<Eigen::Index>(i)) = system.matrix.col(free_cols[i]);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
    const Eigen::VectorXd x = cod.solve(system.rhs);
    for (std::size_t i = 0; i < free_cols.size(); ++i)
        out.coeffs[static_cast<std::size_t>(free_cols[i])] = x(static_cast<Eigen::Index>(i));

    Eigen::Map<const Eigen::VectorXd> full(out.coeffs.data(),
                                           static_cast<Eigen::Index>(out.coeffs.size()));
    const double residual = (system.matrix * full - system.rhs).cwiseAbs().maxCoeff();
    if (!(residual < kSolveTolerance))
        throw SolveError("solve_cell: residual " + std::to_string(residual) +
                             " exceeds tolerance (inconsistent constraints?)",
                         residual);
    return out;
}

// Horner evaluation, first axis outermost. Deterministic operation order.
namespace detail {

inline double eval_block(const double* c, int dims_left, std::size_t stride, int degree,
                         std::span<const double> point, int axis) {
    if (dims_left == 1) {
        double acc = c[degree];
        for (int i = degree - 1; i >= 0; --i) acc = acc * point[static_cast<std::size_t>(axis)] + c[i];
        return acc;
    }
    const std::size_t sub = stride / static_cast<std::size_t>(degree + 1);
    double acc = eval_block(c + static_cast<std::size_t>(degree) * sub, dims_left - 1, sub, degree,
                            point, axis + 1);
    for (int i = degree - 1; i >= 0; --i)
        acc = acc * point[static_cast<std::size_t>(axis)] +
              eval_block(c + static_cast<std::size_t>(i) * sub, dims_left - 1, sub, degree, point,
                         axis + 1);
    return acc;
}

}  // namespace detail

inline double poly_eval(const PolyCoefficients& poly, std::span<const double> point) {
    if (static_cast<int>(point.size()) != poly.config.dims)
        throw ValidationError("poly_eval: point dimension mismatch");
    if (poly.coeffs.size() != detail::power_count(poly.config))
        throw ValidationError("poly_eval: coefficient count mismatch");
    const std::size_t stride = poly.coeffs.size() / static_cast<std::size_t>(poly.config.degree + 1);
    return detail::eval_block(poly.coeffs.data(), poly.config.dims,
                              stride * static_cast<std::size_t>(poly.config.degree + 1),
                              poly.config.degree, point, 0);
}

// Coefficient-level partial derivative. The integer falling-factorial
// product is formed exactly first, so mixed derivatives commute bit-exactly.
inline PolyCoefficients poly_derivative(const PolyCoefficients& poly, const MultiIndex& order) {
    if (static_cast<int>(order.size()) != poly.config.dims)
        throw ValidationError("poly_derivative: order length mismatch");
    for (int d : order)
        if (d < 0) throw ValidationError("poly_derivative: negative derivative order");

    PolyCoefficients out{poly.config, std::vector<double>(poly.coeffs.size(), 0.0)};
    const std::size_t n1 = static_cast<std::size_t>(poly.config.degree + 1);
    const std::size_t total = poly.coeffs.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        std::size_t src = 0;
        long long factor = 1;
        bool live = true;
        std::size_t scale = 1;
        // Walk axes from least significant; a_k + d_k must stay within degree.
        for (int k = poly.config.dims - 1; k >= 0; --k) {
            const int a = static_cast<int>(rem % n1);
            rem /= n1;
            const int shifted = a + order[static_cast<std::size_t>(k)];
            if (shifted > poly.config.degree) {
                live = false;
                break;
            }
            factor *= detail::falling_factorial(shifted, order[static_cast<std::size_t>(k)]);
            src += static_cast<std::size_t>(shifted) * scale;
            scale *= n1;
        }
        if (live) out.coeffs[idx] = poly.coeffs[src] * static_cast<double>(factor);
    }
    return out;
}

namespace detail {

inline std::vector<double> hermite_coefficients(int max_deriv_order,
                                                std::span<const double> left,
                                                std::span<const double> right) {
    const CellConfig cfg{1, max_deriv_order, 2 * max_deriv_order + 1};
    auto cs = CornerConstraintSet::zeros(cfg);
    for (int r = 0; r <= max_deriv_order; ++r) {
        cs.values[0][static_cast<std::size_t>(r)] = left[static_cast<std::size_t>(r)];
        cs.values[1][static_cast<std::size_t>(r)] = right[static_cast<std::size_t>(r)];
    }
    return solve_cell(build_system(cfg, cs)).coeffs;
}

}  // namespace detail

// One row per coefficient: exponents then the value, header included,
// decimal point, LF endings. %.17g keeps doubles round-trippable.
inline void export_csv(const PolyCoefficients& poly, std::ostream& os) {
    for (int k = 1; k <= poly.config.dims; ++k) os << 'a' << k << ',';
    os << "coefficient\n";
    char buf[64];
    for (std::size_t idx = 0; idx < poly.coeffs.size(); ++idx) {
        const MultiIndex a = poly.unflatten(idx);
        for (int k = 0; k < poly.config.dims; ++k) os << a[static_cast<std::size_t>(k)] << ',';
        std::snprintf(buf, sizeof buf, "%.17g", poly.coeffs[idx]);
        os << buf << '\n';
    }
}

}  // namespace terrain::polycell
