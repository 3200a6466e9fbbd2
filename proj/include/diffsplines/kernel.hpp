#pragma once

#include "diffsplines/landmark_state.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace diffsplines {

enum class KernelVariant { clamped, affine };

KernelVariant parse_kernel_variant(const std::string& name);
std::string to_string(KernelVariant v);

/// Reproducing kernel of H^2_0(0,1) with inner product int f'' g''.
/// `clamped` is the Green's function of the clamped beam; `affine` adds 1 + s t.
struct KernelModel {
    KernelVariant variant = KernelVariant::clamped;
};

/// d^order/ds^order k(s,t) for order in {0,1,2}.
double kernel_eval(const KernelModel& model, double s, double t, int ds_order = 0);

Eigen::MatrixXd kernel_matrix(const KernelModel& model, std::span<const double> points);

/// v(x) = sum_j k(x, q_j) p_j and its x-derivatives up to order 2.
double velocity_field(const KernelModel& model, const LandmarkState& state, double x,
                      int dx_order = 0);

/// Finite-difference solution of u'''' = delta_s with clamped ends, evaluated at t.
double kernel_oracle_biharmonic(double s, double t, std::size_t n);

}  // namespace diffsplines
