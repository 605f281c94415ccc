#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "group.hpp"

namespace nhcs {

/// Fiducial (admissible) vectors for the representation and its
/// contragredient. Both must be nonzero.
struct FiducialPair {
    StateVector phi;
    StateVector psi_tilde;

    FiducialPair(StateVector phi_, StateVector psi_tilde_)
        : phi(std::move(phi_)), psi_tilde(std::move(psi_tilde_)) {
        if (phi.size() != psi_tilde.size())
            throw std::invalid_argument("FiducialPair: dimension mismatch");
        if (phi.norm() == 0.0 || psi_tilde.norm() == 0.0)
            throw std::invalid_argument("FiducialPair: fiducial vectors must be nonzero");
    }

    int dimension() const { return static_cast<int>(phi.size()); }
};

namespace detail {

inline void require_dim(SpinLabel j, Eigen::Index n, const char* what) {
    if (n != j.dimension()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

// Coherent-state evaluation over a grid exploits rho(zeta,beta) =
// compact(beta) * polar(zeta): the polar-transformed fiducials are cached per
// zeta (grids keep beta innermost), the beta factor is a diagonal phase.
struct FamilyCache {
    SpinLabel j;
    StateVector phi, psi;
    bool has = false;
    cdouble zeta{};
    StateVector u, w;  // polar(zeta) phi, polar(-zeta) psi_tilde

    FamilyCache(SpinLabel j_, const FiducialPair& pair) : j(j_), phi(pair.phi), psi(pair.psi_tilde) {}

    void refresh(cdouble z) {
        if (has && z == zeta) return;
        zeta = z;
        u = polar_factor(j, z) * phi;
        w = polar_factor(j, -z) * psi;
        has = true;
    }

    // rho(g) phi and rho*(g) psi_tilde; rho*(zeta,beta) = compact(beta) polar(-zeta).
    void states(const GroupPoint& g, StateVector& phi_g, StateVector& psi_g) {
        refresh(g.zeta());
        const int d = j.dimension();
        phi_g.resize(d);
        psi_g.resize(d);
        for (int n = 0; n < d; ++n) {
            const cdouble ph = std::exp(iu * g.beta() * j.m_of(n));
            phi_g(n) = ph * u(n);
            psi_g(n) = ph * w(n);
        }
    }
};

}  // namespace detail

/// Coherent state Phi_g = rho(g) Phi.
inline StateVector coherent_state(SpinLabel j, const StateVector& phi, const GroupPoint& g) {
    detail::require_dim(j, phi.size(), "coherent_state");
    return rep_element(j, g) * phi;
}

/// Dual coherent state Psi~_g = rho*(g) Psi~.
inline StateVector dual_coherent_state(SpinLabel j, const StateVector& psi_tilde, const GroupPoint& g) {
    detail::require_dim(j, psi_tilde.size(), "dual_coherent_state");
    return contragredient_element(j, g) * psi_tilde;
}

/// Overlapping kernel kappa(g', g) = <Psi~_{g'}, Phi_g>; depends only on
/// g'^{-1} g.
inline cdouble overlap_kernel(SpinLabel j, const FiducialPair& pair, const GroupPoint& g_prime,
                              const GroupPoint& g) {
    detail::require_dim(j, pair.dimension(), "overlap_kernel");
    return pairing(dual_coherent_state(j, pair.psi_tilde, g_prime), coherent_state(j, pair.phi, g));
}

enum class SamplingSide {
    dual,    // T~(phi)(g) = <Psi~_g, phi>         (coefficients of phi in V)
    primary  // T(psi)(g) = conj(<psi, Phi_g>)      (coefficients of psi in V*)
};

/// Sampling operator evaluated on the grid nodes.
inline std::vector<cdouble> analyze(SpinLabel j, const FiducialPair& pair, const HaarGrid& grid,
                                    const StateVector& input, SamplingSide side = SamplingSide::dual) {
    detail::require_dim(j, pair.dimension(), "analyze");
    detail::require_dim(j, input.size(), "analyze");
    detail::FamilyCache cache(j, pair);
    std::vector<cdouble> coeffs;
    coeffs.reserve(grid.nodes.size());
    StateVector phi_g, psi_g;
    for (const auto& node : grid.nodes) {
        cache.states(node.g, phi_g, psi_g);
        coeffs.push_back(side == SamplingSide::dual ? pairing(psi_g, input)
                                                    : std::conj(pairing(input, phi_g)));
    }
    return coeffs;
}

/// Synthesis operator: weighted sum over the chosen family,
/// sum_i w_i gamma_i Phi_{g_i} (primary) or Psi~_{g_i} (dual).
inline StateVector synthesize(SpinLabel j, const FiducialPair& pair, const HaarGrid& grid,
                              const std::vector<cdouble>& coeffs,
                              SamplingSide family = SamplingSide::primary) {
    detail::require_dim(j, pair.dimension(), "synthesize");
    if (coeffs.size() != grid.nodes.size())
        throw std::invalid_argument("synthesize: coefficient list does not match grid");
    detail::FamilyCache cache(j, pair);
    StateVector out = StateVector::Zero(j.dimension());
    StateVector phi_g, psi_g;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        cache.states(grid.nodes[i].g, phi_g, psi_g);
        out += grid.nodes[i].weight * coeffs[i] * (family == SamplingSide::primary ? phi_g : psi_g);
    }
    return out;
}

/// Resolution operator A = sum_i w_i Phi_{g_i} <Psi~_{g_i}, .> with
/// invertibility and identity-proportionality diagnostics.
struct ResolutionReport {
    RepMatrix A;
    HaarDomain domain;
    bool is_invertible = false;
    double condition_number = 0.0;
    std::optional<cdouble> proportionality;  // set only when residual < tolerance
    double proportionality_residual = 0.0;

    static constexpr double invertibility_threshold = 1e10;
    static constexpr double proportionality_tolerance = 1e-8;
};

inline ResolutionReport resolution_operator(SpinLabel j, const FiducialPair& pair, const HaarGrid& grid) {
    detail::require_dim(j, pair.dimension(), "resolution_operator");
    const int d = j.dimension();
    detail::FamilyCache cache(j, pair);
    RepMatrix a = RepMatrix::Zero(d, d);
    StateVector phi_g, psi_g;
    for (const auto& node : grid.nodes) {
        cache.states(node.g, phi_g, psi_g);
        a.noalias() += node.weight * (phi_g * psi_g.adjoint());
    }

    ResolutionReport rep;
    rep.A = a;
    rep.domain = grid.domain;
    Eigen::JacobiSVD<RepMatrix> svd(a);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(d - 1);
    rep.condition_number = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    rep.is_invertible = smin > 0.0 && rep.condition_number < ResolutionReport::invertibility_threshold;

    const cdouble lambda = a.trace() / static_cast<double>(d);
    const double scale = std::abs(lambda) * std::sqrt(static_cast<double>(d));
    rep.proportionality_residual =
        (scale > 0.0) ? (a - lambda * RepMatrix::Identity(d, d)).norm() / scale : a.norm();
    if (rep.proportionality_residual < ResolutionReport::proportionality_tolerance)
        rep.proportionality = lambda;
    return rep;
}

/// Reconstruct phi from its analysis coefficients: A^{-1} synthesize(coeffs).
/// Refuses when the report flags A as non-invertible.
inline StateVector reconstruct(SpinLabel j, const FiducialPair& pair, const HaarGrid& grid,
                               const std::vector<cdouble>& coeffs, const ResolutionReport& report) {
    if (!report.is_invertible)
        throw std::domain_error("reconstruct: resolution operator is not invertible on this domain");
    return report.A.colPivHouseholderQr().solve(synthesize(j, pair, grid, coeffs));
}

/// ||A(TruncatedDisk(r))|| sampled toward r -> 1 and the fitted exponent of
/// log||A|| against log(1-r). The non-unitary representation gives
/// -(2j+1); a unitary family on the same grids would follow the Haar mass
/// exponent -1.
struct DivergenceProbe {
    std::vector<double> radii;
    std::vector<double> norms;
    double exponent = 0.0;
};

inline DivergenceProbe divergence_probe(SpinLabel j, const FiducialPair& pair,
                                        const std::vector<double>& radii,
                                        const GridResolution& res = {}) {
    if (radii.size() < 3)
        throw std::invalid_argument("divergence_probe: need at least 3 radii for the fit");
    DivergenceProbe probe;
    probe.radii = radii;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double r : radii) {
        if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("divergence_probe: radii must be in (0,1)");
        const HaarGrid grid = build_haar_grid(TruncatedDisk{r}, res);
        const double norm = resolution_operator(j, pair, grid).A.norm();
        probe.norms.push_back(norm);
        const double x = std::log(1.0 - r), y = std::log(norm);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(radii.size());
    probe.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return probe;
}

// ---------------------------------------------------------------------------
// One-parameter subgroup orbit probes (square-integrability diagnostics)
// ---------------------------------------------------------------------------

struct EllipticOrbit {
    GroupPoint v;  // conjugated compact rotation v e^{it Kz} v^{-1}
};
struct HyperbolicOrbit {};  // boost generated by i Kx = -Jx
struct ParabolicOrbit {};   // nilpotent generator i(Kz + Kx)

using OrbitKind = std::variant<EllipticOrbit, HyperbolicOrbit, ParabolicOrbit>;

enum class OrbitClass { Bounded, PolynomialGrowth, ExponentialGrowth };

struct OrbitTrace {
    std::vector<double> t;
    std::vector<double> norm;
    double exp_rate = 0.0;     // tail slope of log||Phi(t)|| vs t
    double poly_degree = 0.0;  // tail slope of log||Phi(t)|| vs log t
    OrbitClass classification = OrbitClass::Bounded;
};

inline OrbitTrace subgroup_orbit_probe(const OrbitKind& kind, SpinLabel j, const FiducialPair& pair,
                                       double t_max, int samples = 200) {
    detail::require_dim(j, pair.dimension(), "subgroup_orbit_probe");
    if (!(t_max > 0.0) || samples < 8)
        throw std::invalid_argument("subgroup_orbit_probe: invalid parameter range");
    const GeneratorSet gen = spin_generators(j);

    RepMatrix x;  // generator in the real Lie algebra su(1,1)
    if (std::holds_alternative<HyperbolicOrbit>(kind)) {
        x = iu * gen.Kx;  // = -Jx
    } else if (std::holds_alternative<ParabolicOrbit>(kind)) {
        x = iu * (gen.Kz + gen.Kx);  // nilpotent: zero-Omega direction
    } else {
        const auto& e = std::get<EllipticOrbit>(kind);
        const RepMatrix rv = rep_element(j, e.v);
        const RepMatrix rvi = rep_element(j, inverse(e.v));
        x = rv * (iu * gen.Kz) * rvi;
    }

    OrbitTrace trace;
    trace.t.reserve(samples);
    trace.norm.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        const double t = t_max * (k + 1) / samples;
        trace.t.push_back(t);
        trace.norm.push_back((mat_exp(t * x) * pair.phi).norm());
    }

    auto fit_slope = [&](auto xval, int from, int to) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int k = from; k < to; ++k) {
            const double xv = xval(k), yv = std::log(trace.norm[k]);
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
        const double n = to - from;
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const int half = samples / 2, quarter = 3 * samples / 4;
    trace.exp_rate = fit_slope([&](int k) { return trace.t[k]; }, half, samples);
    trace.poly_degree = fit_slope([&](int k) { return std::log(trace.t[k]); }, half, samples);
    const double rate_late = fit_slope([&](int k) { return trace.t[k]; }, quarter, samples);

    // exponential growth keeps a converged positive log-slope; polynomial
    // growth shows it decaying ~ degree/t; anything else is bounded
    if (trace.exp_rate > 0.02 && rate_late > 0.75 * trace.exp_rate)
        trace.classification = OrbitClass::ExponentialGrowth;
    else if (trace.poly_degree > 0.5)
        trace.classification = OrbitClass::PolynomialGrowth;
    else
        trace.classification = OrbitClass::Bounded;
    return trace;
}

/// The unique (up to scale) dual fiducial making the elliptic-subgroup
/// resolution operator proportional to the identity, for a given Phi and v.
/// The map conj(Psi~) -> A is linear; the solution is the nullspace of its
/// projection orthogonal to the identity component. Returned unit-normalized.
inline StateVector dual_for_identity(SpinLabel j, const StateVector& phi, const GroupPoint& v,
                                     const GridResolution& res = {}) {
    detail::require_dim(j, phi.size(), "dual_for_identity");
    const int d = j.dimension();
    const HaarGrid grid = build_haar_grid(Elliptic{v}, res);

    Eigen::MatrixXcd l(d * d, d);
    for (int k = 0; k < d; ++k) {
        StateVector ek = StateVector::Zero(d);
        ek(k) = 1.0;  // real basis vector: conj(Psi~) = Psi~ = e_k
        const RepMatrix a = resolution_operator(j, FiducialPair(phi, ek), grid).A;
        for (int c = 0; c < d; ++c)
            for (int r = 0; r < d; ++r) l(c * d + r, k) = a(r, c);
    }
    Eigen::VectorXcd id_vec = Eigen::VectorXcd::Zero(d * d);
    for (int n = 0; n < d; ++n) id_vec(n * d + n) = 1.0;
    id_vec.normalize();
    const Eigen::MatrixXcd m = l - id_vec * (id_vec.adjoint() * l);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (int k = 0; k < sv.size(); ++k)
        if (sv(k) < sv(0) * 1e-8) ++null_dim;
    if (null_dim != 1)
        throw std::runtime_error("dual_for_identity: solution space dimension is " +
                                 std::to_string(null_dim) + ", expected 1");
    StateVector y = svd.matrixV().col(d - 1);
    StateVector psi = y.conjugate();
    // reject the degenerate direction A(y) = 0
    if ((l * y).norm() < 1e-10 * l.norm()) throw std::runtime_error("dual_for_identity: A vanishes");
    psi.normalize();
    return psi;
}

}  // namespace nhcs
