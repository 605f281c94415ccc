#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "algebra.hpp"
#include "common.hpp"

namespace nhcs {

/// SU(1,1) element in disk coordinates: zeta in the open unit disk and the
/// double-cover angle beta in [0, 4pi). Every group element is reached
/// exactly once; construction rejects |zeta| >= 1.
class GroupPoint {
public:
    GroupPoint() : zeta_(0.0, 0.0), beta_(0.0) {}
    GroupPoint(cdouble zeta, double beta) : zeta_(zeta), beta_(reduce_beta(beta)) {
        if (!(std::abs(zeta) < 1.0))
            throw std::invalid_argument("GroupPoint: |zeta| must be < 1");
        if (!std::isfinite(beta)) throw std::invalid_argument("GroupPoint: beta must be finite");
    }

    cdouble zeta() const { return zeta_; }
    double beta() const { return beta_; }

    static double reduce_beta(double beta) {
        const double period = 4.0 * pi;
        double b = std::fmod(beta, period);
        if (b < 0.0) b += period;
        return b;
    }

    static GroupPoint identity() { return GroupPoint(); }

private:
    cdouble zeta_;
    double beta_;
};

/// xi = zeta * artanh(|zeta|)/|zeta|, with the series fallback near zero
/// (artanh(r)/r = 1 + r^2/3 + r^4/5 + ...) to avoid 0/0.
inline cdouble xi_from_zeta(cdouble zeta) {
    const double r = std::abs(zeta);
    if (r < 1e-4) return zeta * (1.0 + r * r / 3.0 + r * r * r * r / 5.0);
    return zeta * (std::atanh(r) / r);
}

/// Hermitian positive-definite factor exp(xi J+ + xi* J-) of the polar
/// decomposition; its largest eigenvalue diverges as (1-|zeta|)^{-j}.
inline RepMatrix polar_factor(SpinLabel j, cdouble zeta) {
    const GeneratorSet g = spin_generators(j);
    const RepMatrix jplus = g.Jx + iu * g.Jy;
    const cdouble xi = xi_from_zeta(zeta);
    return mat_exp(xi * jplus + std::conj(xi) * RepMatrix(jplus.adjoint()));
}

/// Compact-factor diagonal exp(i beta Kz) = diag(e^{i beta m}), m = j..-j.
inline RepMatrix compact_factor(SpinLabel j, double beta) {
    const int d = j.dimension();
    RepMatrix u = RepMatrix::Zero(d, d);
    for (int n = 0; n < d; ++n) u(n, n) = std::exp(iu * beta * j.m_of(n));
    return u;
}

/// Non-unitary spin-j representation matrix rho_j(zeta, zeta*, beta).
/// At j=1/2 this is
///   1/sqrt(1-|zeta|^2) [[e^{i b/2}, e^{i b/2} zeta], [e^{-i b/2} zeta*, e^{-i b/2}]].
inline RepMatrix rep_element(SpinLabel j, const GroupPoint& g) {
    return compact_factor(j, g.beta()) * polar_factor(j, g.zeta());
}

namespace detail {

// 2x2 fundamental matrix and its exact adjugate inverse (det = 1).
inline Eigen::Matrix2cd fundamental(const GroupPoint& g) {
    return rep_element(SpinLabel(1), g);
}

inline Eigen::Matrix2cd inverse2(const Eigen::Matrix2cd& m) {
    Eigen::Matrix2cd r;
    r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return r;
}

}  // namespace detail

/// Recover (zeta, beta) from a matrix in the image of rep_element at j=1/2.
/// The (0,0) phase fixes beta/2 on the double cover uniquely; the rebuild
/// residual (which includes the (1,1) phase consistency) guards the chart.
inline GroupPoint coordinates_from_matrix(const Eigen::Matrix2cd& m, double tol = 1e-8) {
    if (!m.allFinite() || std::abs(m(0, 0)) == 0.0)
        throw std::invalid_argument("coordinates_from_matrix: matrix not in the SU(1,1) chart");
    const cdouble zeta = m(0, 1) / m(0, 0);
    if (!(std::abs(zeta) < 1.0))
        throw std::invalid_argument("coordinates_from_matrix: |zeta| >= 1, outside the chart");
    const double beta = GroupPoint::reduce_beta(2.0 * std::arg(m(0, 0)));
    const GroupPoint g(zeta, beta);
    const double resid = (detail::fundamental(g) - m).cwiseAbs().maxCoeff();
    if (resid > tol)
        throw std::invalid_argument("coordinates_from_matrix: consistency residual " +
                                    std::to_string(resid) + " exceeds tolerance");
    return g;
}

/// Group product computed in the fundamental representation and mapped back
/// to coordinates, so rep_element(j, compose(g1,g2)) = rep_element(j,g1) *
/// rep_element(j,g2) for every j.
inline GroupPoint compose(const GroupPoint& g1, const GroupPoint& g2) {
    return coordinates_from_matrix(detail::fundamental(g1) * detail::fundamental(g2));
}

inline GroupPoint inverse(const GroupPoint& g) {
    return coordinates_from_matrix(detail::inverse2(detail::fundamental(g)));
}

/// Contragredient representation rho*(g) = rho(g^{-1})^dag; pairs invariantly
/// with rho: <rho*(g) psi, rho(g) phi> = <psi, phi>.
inline RepMatrix contragredient_element(SpinLabel j, const GroupPoint& g) {
    return rep_element(j, inverse(g)).adjoint();
}

// ---------------------------------------------------------------------------
// Haar quadrature grids on subgroups and compact subsets
// ---------------------------------------------------------------------------

struct MaximalCompact {};
struct Elliptic {
    GroupPoint v;
};
struct Circle {
    double r0;
};
struct Annulus {
    double rm, rM;
};
struct DiscreteCircle {
    double r0;
    int N;
};
struct TruncatedDisk {
    double r;
};

using HaarDomain = std::variant<MaximalCompact, Elliptic, Circle, Annulus, DiscreteCircle, TruncatedDisk>;

struct HaarNode {
    GroupPoint g;
    double weight;
};

/// Quadrature grid with weights carrying the Haar density
/// 1/(1-|zeta|^2)^2 * dbeta/(4pi) and the subset's geometric measure.
/// beta runs over [0,4pi) with total weight 1 (maximal compact mass 1).
struct HaarGrid {
    HaarDomain domain;
    std::vector<HaarNode> nodes;

    double total_mass() const {
        double s = 0.0;
        for (const auto& n : nodes) s += n.weight;
        return s;
    }
};

struct GridResolution {
    int n_beta = 64;    // periodic trapezoid nodes in beta over [0,4pi)
    int n_phi = 64;     // periodic trapezoid nodes in arg(zeta) over [0,2pi)
    int n_radial = 32;  // Gauss-Legendre order per radial panel
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

// Radial panels graded toward the outer edge so the (1-rho)^{-2j-2} Haar
// density is resolved; edges at 1-(1-rM)*2^k.
inline std::vector<std::pair<double, double>> radial_panels(double rm, double rM) {
    std::vector<std::pair<double, double>> panels;
    const double sm = 1.0 - rm, sM = 1.0 - rM;
    if (sm / sM <= 4.0) {
        panels.emplace_back(rm, rM);
        return panels;
    }
    std::vector<double> edges{rM};
    double s = sM;
    while (s * 2.0 < sm) {
        s *= 2.0;
        edges.push_back(1.0 - s);
    }
    edges.push_back(rm);
    for (std::size_t k = edges.size() - 1; k > 0; --k) panels.emplace_back(edges[k], edges[k - 1]);
    return panels;
}

inline double haar_density(double rho) {
    const double t = 1.0 - rho * rho;
    return 1.0 / (t * t);
}

}  // namespace detail

inline HaarGrid build_haar_grid(const HaarDomain& domain, const GridResolution& res = {}) {
    if (res.n_beta < 1 || res.n_phi < 1 || res.n_radial < 1)
        throw std::invalid_argument("build_haar_grid: quadrature orders must be >= 1");
    HaarGrid grid{domain, {}};
    const double wbeta = 1.0 / res.n_beta;  // dbeta/(4pi) over [0,4pi)
    std::vector<double> betas(res.n_beta);
    for (int b = 0; b < res.n_beta; ++b) betas[b] = 4.0 * pi * b / res.n_beta;

    auto add_circle = [&](double radius, double circle_weight) {
        for (int p = 0; p < res.n_phi; ++p) {
            const double phi = 2.0 * pi * p / res.n_phi;
            const cdouble zeta = std::polar(radius, phi);
            for (double beta : betas)
                grid.nodes.push_back({GroupPoint(zeta, beta), circle_weight * wbeta});
        }
    };
    auto add_radial = [&](double rm, double rM) {
        std::vector<double> gx, gw;
        detail::gauss_legendre(res.n_radial, gx, gw);
        for (const auto& [a, b] : detail::radial_panels(rm, rM)) {
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int k = 0; k < res.n_radial; ++k) {
                const double rho = mid + half * gx[k];
                const double wr = half * gw[k] * rho * detail::haar_density(rho);
                add_circle(rho, wr * 2.0 * pi / res.n_phi);
            }
        }
    };

    if (std::holds_alternative<MaximalCompact>(domain)) {
        for (double beta : betas) grid.nodes.push_back({GroupPoint(cdouble(0.0, 0.0), beta), wbeta});
    } else if (const auto* e = std::get_if<Elliptic>(&domain)) {
        const Eigen::Matrix2cd v = detail::fundamental(e->v);
        const Eigen::Matrix2cd vinv = detail::inverse2(v);
        for (double beta : betas) {
            const Eigen::Matrix2cd k = detail::fundamental(GroupPoint(cdouble(0.0, 0.0), beta));
            grid.nodes.push_back({coordinates_from_matrix(v * k * vinv), wbeta});
        }
    } else if (const auto* c = std::get_if<Circle>(&domain)) {
        if (!(c->r0 > 0.0 && c->r0 < 1.0))
            throw std::invalid_argument("build_haar_grid: circle radius outside (0,1)");
        add_circle(c->r0, detail::haar_density(c->r0) * 2.0 * pi / res.n_phi);
    } else if (const auto* dc = std::get_if<DiscreteCircle>(&domain)) {
        if (!(dc->r0 > 0.0 && dc->r0 < 1.0) || dc->N < 1)
            throw std::invalid_argument("build_haar_grid: invalid discrete circle parameters");
        for (int k = 0; k < dc->N; ++k) {
            const cdouble zeta = std::polar(dc->r0, 2.0 * pi * k / dc->N);
            for (double beta : betas)
                grid.nodes.push_back(
                    {GroupPoint(zeta, beta), detail::haar_density(dc->r0) * wbeta / dc->N});
        }
    } else if (const auto* an = std::get_if<Annulus>(&domain)) {
        if (!(an->rm >= 0.0 && an->rm <= an->rM && an->rM < 1.0))
            throw std::invalid_argument("build_haar_grid: annulus radii must satisfy 0 <= rm <= rM < 1");
        add_radial(an->rm, an->rM);
    } else if (const auto* td = std::get_if<TruncatedDisk>(&domain)) {
        if (!(td->r > 0.0 && td->r < 1.0))
            throw std::invalid_argument("build_haar_grid: disk radius outside (0,1)");
        add_radial(0.0, td->r);
    }
    return grid;
}

}  // namespace nhcs
