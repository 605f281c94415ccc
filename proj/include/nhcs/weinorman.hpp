#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "propagation.hpp"

namespace nhcs {

namespace detail {

// Traceless 2x2 realization of the spec; Wei-Norman coefficients are matched
// here and transfer to every spin (the factorization is an algebra identity).
inline Eigen::Matrix2cd wn_fundamental(const HamiltonianSpec& spec, double z) {
    if (const auto* p = std::get_if<PTArray>(&spec)) {
        const PTArray half{SpinLabel(1), p->gamma, p->lambda, p->convention};
        return build_hamiltonian(half, z);
    }
    if (system_dimension(spec) != 2)
        throw std::invalid_argument("wei_norman_solve: spec not expressible in span{K+,Kz,K-}");
    return build_hamiltonian(spec, z);
}

inline void wn_validate(const HamiltonianSpec& spec, double z0, double z1) {
    if (std::holds_alternative<PTArray>(spec)) return;
    for (int k = 0; k <= 8; ++k) {
        const double z = z0 + (z1 - z0) * k / 8.0;
        const Eigen::Matrix2cd h = wn_fundamental(spec, z);
        if (std::abs(h(0, 0) + h(1, 1)) > 1e-12 * (1.0 + h.norm()))
            throw std::invalid_argument(
                "wei_norman_solve: spec is not traceless, reduce it first (dimer_reduce)");
    }
}

// iH = h+ K+ + h0 Kz + h- K- in the fundamental (K+ = [[0,-1],[0,0]],
// Kz = diag(1/2,-1/2), K- = [[0,0],[1,0]]).
struct WNCoeffs {
    cdouble hp, h0, hm;
};

inline WNCoeffs wn_coeffs(const HamiltonianSpec& spec, double z) {
    const Eigen::Matrix2cd m = iu * wn_fundamental(spec, z);
    return {-m(0, 1), 2.0 * m(0, 0), m(1, 0)};
}

}  // namespace detail

/// Ordered-product factorization U(z,z0) = e^{i u+ K+} e^{i uz Kz} e^{i u- K-}.
/// With a = i u+ etc. the matching to iH(z) gives
///   a' = h+ + h0 a + h- a^2   (Riccati)
///   b' = h0 + 2 h- a
///   c' = h- e^b
/// The flow is defined up to the first exit from the Gauss cell (|a| blowing
/// up); the exit location is reported, not treated as an error.
struct WNFactorization {
    double z0 = 0.0;
    std::vector<double> z;                  // ascending sample grid, z[0] = z0
    std::vector<cdouble> a, b, c;           // factor exponents
    std::vector<cdouble> da, db, dc;        // derivatives (for dense output)
    std::optional<double> singular_z;       // Riccati blow-up location, if hit

    static constexpr std::array<const char*, 3> ordering{"K+", "Kz", "K-"};
    static constexpr double blowup_threshold = 1e8;

    double z_end() const { return z.empty() ? z0 : z.back(); }

    cdouble u_plus(std::size_t k) const { return -iu * a[k]; }
    cdouble u_z(std::size_t k) const { return -iu * b[k]; }
    cdouble u_minus(std::size_t k) const { return -iu * c[k]; }
};

namespace detail {

struct WNState {
    cdouble a, b, c;
};

inline WNState wn_rhs(const HamiltonianSpec& spec, double z, const WNState& s) {
    const WNCoeffs h = wn_coeffs(spec, z);
    return {h.hp + h.h0 * s.a + h.hm * s.a * s.a, h.h0 + 2.0 * h.hm * s.a, h.hm * std::exp(s.b)};
}

inline WNFactorization wn_integrate(const HamiltonianSpec& spec, double z0, double z1, int steps) {
    WNFactorization f;
    f.z0 = z0;
    const double h = (z1 - z0) / steps;
    WNState s{0.0, 0.0, 0.0};
    auto push = [&](double z, const WNState& st) {
        const WNState d = wn_rhs(spec, z, st);
        f.z.push_back(z);
        f.a.push_back(st.a);
        f.b.push_back(st.b);
        f.c.push_back(st.c);
        f.da.push_back(d.a);
        f.db.push_back(d.b);
        f.dc.push_back(d.c);
    };
    push(z0, s);
    for (int k = 0; k < steps; ++k) {
        const double z = z0 + k * h;
        auto scaled = [](const WNState& s0, double w, const WNState& d) {
            return WNState{s0.a + w * d.a, s0.b + w * d.b, s0.c + w * d.c};
        };
        const WNState k1 = wn_rhs(spec, z, s);
        const WNState k2 = wn_rhs(spec, z + 0.5 * h, scaled(s, 0.5 * h, k1));
        const WNState k3 = wn_rhs(spec, z + 0.5 * h, scaled(s, 0.5 * h, k2));
        const WNState k4 = wn_rhs(spec, z + h, scaled(s, h, k3));
        s.a += (h / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        s.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
        s.c += (h / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
        const bool blown = !std::isfinite(std::abs(s.a)) || !std::isfinite(std::abs(s.c)) ||
                           std::abs(s.a) > WNFactorization::blowup_threshold;
        if (blown) {
            f.singular_z = z + h;
            return f;
        }
        push(z + h, s);
    }
    return f;
}

}  // namespace detail

/// Solve the Wei-Norman coefficient ODEs on [z0, z1]. Refines the step until
/// the samples settle; a Riccati blow-up truncates the valid range and is
/// recorded in singular_z.
inline WNFactorization wei_norman_solve(const HamiltonianSpec& spec, double z0, double z1,
                                        int steps = 256) {
    if (!(z1 > z0)) throw std::invalid_argument("wei_norman_solve: need z1 > z0");
    if (steps < 1) throw std::invalid_argument("wei_norman_solve: steps must be >= 1");
    detail::wn_validate(spec, z0, z1);

    int n = std::max(steps, 256);
    WNFactorization f = detail::wn_integrate(spec, z0, z1, n);
    for (int iter = 0; iter < 8; ++iter) {
        const WNFactorization f2 = detail::wn_integrate(spec, z0, z1, 2 * n);
        bool converged = false;
        if (f.singular_z && f2.singular_z) {
            converged = std::abs(*f.singular_z - *f2.singular_z) < 4.0 * (z1 - z0) / n;
        } else if (!f.singular_z && !f2.singular_z) {
            double delta = 0.0;
            for (std::size_t k = 0; k < f.z.size(); ++k) {
                const std::size_t k2 = 2 * k;
                delta = std::max(delta, std::abs(f.a[k] - f2.a[k2]) + std::abs(f.b[k] - f2.b[k2]) +
                                            std::abs(f.c[k] - f2.c[k2]));
            }
            converged = delta < 1e-11;
        }
        f = f2;
        n *= 2;
        if (converged) return f;
    }
    return f;  // best effort at the refinement cap; tests pin the accuracy
}

namespace detail {

inline cdouble hermite(double z, double za, double zb, cdouble ya, cdouble yb, cdouble da, cdouble db) {
    const double h = zb - za, t = (z - za) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * yb +
           (t3 - t2) * h * db;
}

}  // namespace detail

/// Evaluate the factorized propagator at spin j. A single fundamental solve
/// determines every spin: the factors are exponentials of the spin-j images
/// of K+, Kz, K-.
inline RepMatrix wn_propagator(const WNFactorization& f, SpinLabel j, double z) {
    if (f.z.empty() || z < f.z.front() - 1e-12 || z > f.z_end() + 1e-12)
        throw std::domain_error("wn_propagator: z outside the solved nonsingular range");
    const auto it = std::lower_bound(f.z.begin(), f.z.end(), z);
    std::size_t hi = std::min<std::size_t>(it - f.z.begin(), f.z.size() - 1);
    std::size_t lo = hi > 0 ? hi - 1 : 0;
    cdouble av, bv, cv;
    if (hi == lo || std::abs(f.z[hi] - z) < 1e-14) {
        av = f.a[hi];
        bv = f.b[hi];
        cv = f.c[hi];
    } else {
        av = detail::hermite(z, f.z[lo], f.z[hi], f.a[lo], f.a[hi], f.da[lo], f.da[hi]);
        bv = detail::hermite(z, f.z[lo], f.z[hi], f.b[lo], f.b[hi], f.db[lo], f.db[hi]);
        cv = detail::hermite(z, f.z[lo], f.z[hi], f.c[lo], f.c[hi], f.dc[lo], f.dc[hi]);
    }

    const GeneratorSet g = spin_generators(j);
    const int d = j.dimension();
    RepMatrix mid = RepMatrix::Zero(d, d);
    for (int n = 0; n < d; ++n) mid(n, n) = std::exp(bv * j.m_of(n));
    return mat_exp(av * g.Kplus) * mid * mat_exp(cv * g.Kminus);
}

}  // namespace nhcs
