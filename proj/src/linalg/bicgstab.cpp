#include "biot/linalg/bicgstab.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace biot::linalg {

LinearOperator as_operator(const CsrMatrix& a)
{
    return [&a](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
}

namespace {

constexpr double kBreakdown = 1e-30;

void residual(const LinearOperator& a, std::span<const double> b, std::span<const double> x,
              std::span<double> r)
{
    a(x, r);
    for (std::size_t i = 0; i < b.size(); ++i)
        r[i] = b[i] - r[i];
}

} // namespace

KrylovResult bicgstab(const LinearOperator& a, std::span<const double> b,
                      const LinearOperator* preconditioner, const BicgstabOptions& options,
                      std::span<const double> x0)
{
    const std::size_t n = b.size();
    KrylovResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty())
        std::copy(x0.begin(), x0.end(), res.x.begin());

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        res.residuals.push_back(0.0);
        return res;
    }

    auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (preconditioner)
            (*preconditioner)(in, out);
        else
            std::copy(in.begin(), in.end(), out.begin());
    };

    Vector r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), s(n), shat(n), t(n);
    auto& x = res.x;
    residual(a, b, x, r);
    double rel = norm2(r) / bnorm;
    res.residuals.push_back(rel);
    if (rel <= options.rtol)
        return res;

    bool restarted = false;
    auto start = [&] {
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
    };
    start();
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;

    auto breakdown = [&](const char* what) {
        if (!restarted) {
            restarted = true;
            ++res.restarts;
            residual(a, b, x, r);
            start();
            rho_old = alpha = omega = 1.0;
            return true;
        }
        res.status = KrylovStatus::Breakdown;
        res.message = fmt::format("BiCGStab breakdown ({}) at iteration {} with relative residual {:.3e}",
                                  what, res.iterations, rel);
        return false;
    };

    while (res.iterations < options.max_iter) {
        const double rho = dot(rhat, r);
        if (std::abs(rho) < kBreakdown * norm2(rhat) * norm2(r)) {
            if (breakdown("rho"))
                continue;
            return res;
        }
        const double beta = (rho / rho_old) * (alpha / omega);
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        precondition(p, phat);
        a(phat, v);
        const double rv = dot(rhat, v);
        if (std::abs(rv) < kBreakdown * norm2(rhat) * norm2(v) || rv == 0.0) {
            if (breakdown("<rhat, v>"))
                continue;
            return res;
        }
        alpha = rho / rv;
        for (std::size_t i = 0; i < n; ++i)
            s[i] = r[i] - alpha * v[i];
        ++res.iterations;

        if (norm2(s) / bnorm <= options.rtol) {
            axpy(alpha, phat, x);
            residual(a, b, x, r);
            rel = norm2(r) / bnorm;
            res.residuals.push_back(rel);
            if (rel <= options.rtol)
                return res;
            start();
            rho_old = alpha = omega = 1.0;
            continue;
        }

        precondition(s, shat);
        a(shat, t);
        const double tt = dot(t, t);
        if (tt == 0.0) {
            axpy(alpha, phat, x);
            if (breakdown("<t, t>"))
                continue;
            return res;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        rho_old = rho;
        rel = norm2(r) / bnorm;
        if (rel <= options.rtol) {
            // Confirm with the true residual before stopping.
            residual(a, b, x, r);
            rel = norm2(r) / bnorm;
            res.residuals.push_back(rel);
            if (rel <= options.rtol)
                return res;
            start();
            rho_old = alpha = omega = 1.0;
            continue;
        }
        res.residuals.push_back(rel);
        if (omega == 0.0) {
            if (breakdown("omega"))
                continue;
            return res;
        }
    }
    res.status = KrylovStatus::MaxIterations;
    res.message = fmt::format("BiCGStab did not reach rtol {:.1e} in {} iterations (residual {:.3e})",
                              options.rtol, options.max_iter, rel);
    return res;
}

} // namespace biot::linalg
