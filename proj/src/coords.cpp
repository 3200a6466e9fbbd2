#include "diffsplines/coords.hpp"

#include <cmath>
#include <string>

namespace diffsplines {

namespace {

constexpr double kMaxExponent = 700.0;

void same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw DomainError("fields live on different grids");
}

}  // namespace

void QState::validate() const {
    const ConstraintResiduals r = check_constraints(q);
    if (std::abs(r.r1) > tol || std::abs(r.r2) > tol)
        throw ConstraintViolation("q violates its constraints: r1=" + std::to_string(r.r1) +
                                  " r2=" + std::to_string(r.r2));
}

void CotangentState::validate() const {
    q.validate();
    same_grid(q.q, p);
    const ScalarField proj = project_cotangent(q.q, p);
    const double err = std::sqrt(trapezoid((proj.values - p.values).array().square().matrix(),
                                           p.grid.h()));
    if (err > q.tol) throw ConstraintViolation("momentum is not its canonical representative");
}

Eigen::Matrix2d HilbertMatrix2::matrix() {
    Eigen::Matrix2d m;
    m << 1.0, 0.5, 0.5, 1.0 / 3.0;
    return m;
}

Eigen::Matrix2d HilbertMatrix2::inverse() {
    Eigen::Matrix2d m;
    m << 4.0, -6.0, -6.0, 12.0;
    return m;
}

Vector eta_from_q(const Vector& q, double h) {
    if (!q.allFinite()) throw DomainError("q contains non-finite values");
    const Vector expo = cumulative_trapezoid(q, h);
    const double worst = expo.cwiseAbs().maxCoeff();
    if (worst > kMaxExponent)
        throw DomainError("eta overflow: max |int_0^x q| = " + std::to_string(worst));
    return expo.array().exp().matrix();
}

QGeometry::QGeometry(const Vector& q, double h) : h_(h), eta_(eta_from_q(q, h)) {
    phi_ = cumulative_trapezoid(eta_, h);
    const double g00 = trapezoid(eta_, h);
    const double g01 = trapezoid(phi_.cwiseProduct(eta_), h);
    const double g11 = trapezoid(phi_.cwiseProduct(phi_).cwiseProduct(eta_), h);
    gram_ << g00, g01, g01, g11;
    gram_inv_ = gram_.inverse();
}

double QGeometry::eta_inner(const Vector& a, const Vector& b) const {
    return trapezoid(a.cwiseProduct(b).cwiseProduct(eta_), h_);
}

Vector QGeometry::span_one_phi(const Eigen::Vector2d& c) const {
    const Eigen::Vector2d w = gram_inv_ * c;
    return (w[0] + w[1] * phi_.array()).matrix();
}

Vector QGeometry::project_tangent(const Vector& f) const {
    const Eigen::Vector2d c(trapezoid(f, h_), trapezoid(f.cwiseProduct(phi_), h_));
    const Eigen::Vector2d w = gram_inv_ * c;
    return f - (eta_.array() * (w[0] + w[1] * phi_.array())).matrix();
}

Vector QGeometry::project_cotangent(const Vector& p) const {
    const Eigen::Vector2d c(eta_inner(p, Vector::Ones(p.size())), eta_inner(p, phi_));
    return p - span_one_phi(c);
}

ScalarField eta_of_q(const ScalarField& q) {
    return ScalarField(q.grid, eta_from_q(q.values, q.grid.h()));
}

ScalarField phi_of_q(const ScalarField& q) {
    return ScalarField(q.grid, cumulative_trapezoid(eta_from_q(q.values, q.grid.h()), q.grid.h()));
}

ScalarField q_of_phi(const ScalarField& phi) {
    const Vector& v = phi.values;
    const auto n = v.size();
    for (Eigen::Index i = 1; i < n; ++i)
        if (!(v[i] > v[i - 1])) throw DomainError("phi must be strictly increasing");
    const Vector phix = diff_x(v, phi.grid.h());
    if (!(phix.minCoeff() > 0.0))
        throw DomainError("phi_x is not positive; grid too coarse for this phi");
    return ScalarField(phi.grid, diff_x(phix.array().log().matrix(), phi.grid.h()));
}

ConstraintResiduals check_constraints(const ScalarField& q) {
    const double h = q.grid.h();
    return {trapezoid(q.values, h), trapezoid(eta_from_q(q.values, h), h) - 1.0};
}

double metric_inner(const ScalarField& q, const ScalarField& x, const ScalarField& y) {
    same_grid(q, x);
    same_grid(q, y);
    const Vector eta = eta_from_q(q.values, q.grid.h());
    return trapezoid((x.values.array() * y.values.array() / eta.array()).matrix(), q.grid.h());
}

ScalarField project_tangent(const ScalarField& q, const ScalarField& f) {
    same_grid(q, f);
    return ScalarField(q.grid, QGeometry(q.values, q.grid.h()).project_tangent(f.values));
}

ScalarField project_cotangent(const ScalarField& q, const ScalarField& p) {
    same_grid(q, p);
    return ScalarField(q.grid, QGeometry(q.values, q.grid.h()).project_cotangent(p.values));
}

PathField eta_time_derivative(const PathField& q_path, const PathField& qdot_path) {
    if (!(q_path.grid == qdot_path.grid) || !(q_path.times == qdot_path.times))
        throw DomainError("paths live on different grids");
    const double h = q_path.grid.h();
    PathField out(q_path.times, q_path.grid);
    for (std::size_t k = 0; k < q_path.times.samples(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const Vector eta = eta_from_q(q_path.values.row(kk).transpose(), h);
        const Vector inner = cumulative_trapezoid(qdot_path.values.row(kk).transpose(), h);
        out.set_slice(k, eta.cwiseProduct(inner));
    }
    return out;
}

Vector repair_constraints(const Vector& q, double h, int iterations) {
    Vector out = q;
    for (int it = 0; it < iterations; ++it) {
        const Vector eta = eta_from_q(out, h);
        const Vector phi = cumulative_trapezoid(eta, h);
        const Eigen::Vector2d r(trapezoid(out, h), trapezoid(eta, h) - 1.0);
        if (r.cwiseAbs().maxCoeff() < 1e-15) break;
        const Vector d0 = eta;
        const Vector d1 = phi.cwiseProduct(eta);
        auto dr2 = [&](const Vector& dq) {
            return trapezoid(eta.cwiseProduct(cumulative_trapezoid(dq, h)), h);
        };
        Eigen::Matrix2d jac;
        jac << trapezoid(d0, h), trapezoid(d1, h), dr2(d0), dr2(d1);
        const Eigen::Vector2d c = jac.partialPivLu().solve(-r);
        out += c[0] * d0 + c[1] * d1;
    }
    return out;
}

ScalarField repair_constraints(const ScalarField& q, int iterations) {
    return ScalarField(q.grid, repair_constraints(q.values, q.grid.h(), iterations));
}

}  // namespace diffsplines
