#include "diffsplines/kernel.hpp"

#include "diffsplines/numerics.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <vector>

namespace diffsplines {

KernelVariant parse_kernel_variant(const std::string& name) {
    if (name == "clamped") return KernelVariant::clamped;
    if (name == "affine") return KernelVariant::affine;
    throw DomainError("unknown kernel variant '" + name + "'");
}

std::string to_string(KernelVariant v) {
    return v == KernelVariant::clamped ? "clamped" : "affine";
}

namespace {

void check_unit(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError(std::string("kernel argument ") + name + "=" + std::to_string(x) +
                          " outside [0,1]");
}

// Cubic spline kernel int_0^1 (t-u)_+ (s-u)_+ du and its s-derivatives.
double base_part(double s, double t, int order) {
    if (s < t) {
        switch (order) {
            case 0: return 0.5 * t * s * s - s * s * s / 6.0;
            case 1: return t * s - 0.5 * s * s;
            default: return t - s;
        }
    }
    switch (order) {
        case 0: return 0.5 * s * t * t - t * t * t / 6.0;
        case 1: return 0.5 * t * t;
        default: return 0.0;
    }
}

// (-1 + (s+t)/2 - ts/3) (ts)^2 written as t^2 [(-1 + t/2) s^2 + (1/2 - t/3) s^3].
double correction_part(double s, double t, int order) {
    const double c2 = -1.0 + 0.5 * t;
    const double c3 = 0.5 - t / 3.0;
    const double t2 = t * t;
    switch (order) {
        case 0: return t2 * s * s * (c2 + c3 * s);
        case 1: return t2 * s * (2.0 * c2 + 3.0 * c3 * s);
        default: return t2 * (2.0 * c2 + 6.0 * c3 * s);
    }
}

}  // namespace

double kernel_eval(const KernelModel& model, double s, double t, int ds_order) {
    check_unit(s, "s");
    check_unit(t, "t");
    if (ds_order < 0 || ds_order > 2) throw DomainError("kernel derivative order must be 0, 1 or 2");
    if (model.variant == KernelVariant::clamped) {
        // Exact zeros of the Green's function, kept exact so boundary nodes never move.
        if (t == 0.0 || t == 1.0) return 0.0;
        if ((s == 0.0 || s == 1.0) && ds_order < 2) return 0.0;
    }
    double k = base_part(s, t, ds_order) + correction_part(s, t, ds_order);
    if (model.variant == KernelVariant::affine) {
        if (ds_order == 0) k += 1.0 + s * t;
        else if (ds_order == 1) k += t;
    }
    return k;
}

Eigen::MatrixXd kernel_matrix(const KernelModel& model, std::span<const double> points) {
    for (double x : points)
        if (!(x > 0.0 && x < 1.0)) throw DomainError("kernel matrix points must lie in (0,1)");
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = kernel_eval(model, points[i], points[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = kernel_eval(model, points[i], points[j]);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

double velocity_field(const KernelModel& model, const LandmarkState& state, double x,
                      int dx_order) {
    check_unit(x, "x");
    double v = 0.0;
    for (std::size_t j = 0; j < state.q.size(); ++j)
        v += kernel_eval(model, x, state.q[j], dx_order) * state.p[j];
    return v;
}

double kernel_oracle_biharmonic(double s, double t, std::size_t n) {
    check_unit(s, "s");
    check_unit(t, "t");
    if (n < 5) throw DomainError("biharmonic oracle needs at least 5 nodes");
    const auto N = static_cast<Eigen::Index>(n - 1);
    const double h = 1.0 / static_cast<double>(N);
    // Unknowns u_1..u_{N-1}; u_0 = u_N = 0 and ghost nodes mirror the neighbours (u' = 0).
    const Eigen::Index m = N - 1;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(5 * m));
    const double stencil[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = r + 1;
        for (int o = -2; o <= 2; ++o) {
            Eigen::Index j = i + o;
            if (j == -1) j = 1;
            if (j == N + 1) j = N - 1;
            if (j <= 0 || j >= N) continue;
            entries.emplace_back(r, j - 1, stencil[o + 2] / std::pow(h, 4));
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(entries.begin(), entries.end());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    const double u = s / h;
    const auto left = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(u)), N - 1);
    const double w = u - static_cast<double>(left);
    if (left >= 1) rhs[left - 1] += (1.0 - w) / h;
    if (left + 1 <= N - 1) rhs[left] += w / h;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) throw Error("biharmonic system is singular");
    const Eigen::VectorXd sol = solver.solve(rhs);

    Eigen::VectorXd full = Eigen::VectorXd::Zero(N + 1);
    full.segment(1, m) = sol;
    return sample_in_space(full, h, t);
}

}  // namespace diffsplines
