#pragma once

#include "biot/vec3.hpp"

namespace biot::app {

/// Closed-form steady solution on the unit cube:
///
///     phi = prod_i sin^2(pi x_i),  dp_f = phi,  u = curl(phi, phi, phi),
///
/// so div u = 0, u vanishes on the boundary and grad phi . n = 0 there.
/// The effective pressure is -alpha phi and the rotation mu div(S* u) = -mu curl u.
class ManufacturedSolution {
public:
    struct Parameters {
        double mu = 0.01;
        double lambda = 1.0;
        double alpha = 1.0;
        double mobility = 1.0; ///< K / mu_w
    };

    explicit ManufacturedSolution(const Parameters& p) : p_(p) {}

    const Parameters& parameters() const { return p_; }

    double phi(const Vec3& x) const;
    Vec3 grad_phi(const Vec3& x) const;
    Mat3 hessian_phi(const Vec3& x) const;
    double laplacian_phi(const Vec3& x) const;
    Vec3 grad_laplacian_phi(const Vec3& x) const;

    double pressure(const Vec3& x) const { return phi(x); }
    Vec3 displacement(const Vec3& x) const;
    double divergence_u(const Vec3& x) const;
    Vec3 curl_u(const Vec3& x) const;
    Vec3 rotation(const Vec3& x) const;
    double effective_pressure(const Vec3& x) const;

    /// -mu lap(u) - mu grad(div u) + alpha grad(phi)
    Vec3 body_force(const Vec3& x) const;
    /// -(K / mu_w) lap(phi); the steady mass source.
    double flow_source(const Vec3& x) const;

    /// d^a/dx^a d^b/dy^b d^c/dz^c phi for a, b, c in 0..3.
    double derivative(const Vec3& x, int a, int b, int c) const;

private:
    Parameters p_;
};

} // namespace biot::app
