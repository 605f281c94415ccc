#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "algebra.hpp"
#include "common.hpp"

namespace nhcs {

/// Coefficient function of the propagation distance z. Restricted to
/// serializable built-in families plus sampled tables; no user code hooks.
class CoefficientFn {
public:
    enum class Kind { Constant, Harmonic, Polynomial, Table };

    static CoefficientFn constant(cdouble c) {
        CoefficientFn f;
        f.kind_ = Kind::Constant;
        f.coeffs_ = {c};
        return f;
    }
    /// c0 + cc*cos(omega z) + cs*sin(omega z)
    static CoefficientFn harmonic(cdouble c0, cdouble cc, cdouble cs, double omega) {
        if (omega == 0.0) throw std::invalid_argument("CoefficientFn: harmonic omega must be nonzero");
        CoefficientFn f;
        f.kind_ = Kind::Harmonic;
        f.coeffs_ = {c0, cc, cs};
        f.omega_ = omega;
        return f;
    }
    /// coeffs[0] + coeffs[1] z + coeffs[2] z^2 + ...
    static CoefficientFn polynomial(std::vector<cdouble> coeffs) {
        if (coeffs.empty()) throw std::invalid_argument("CoefficientFn: empty polynomial");
        CoefficientFn f;
        f.kind_ = Kind::Polynomial;
        f.coeffs_ = std::move(coeffs);
        return f;
    }
    /// Linear interpolation through (z_i, v_i); z_i strictly increasing.
    static CoefficientFn table(std::vector<double> z, std::vector<cdouble> v) {
        if (z.size() != v.size() || z.size() < 2)
            throw std::invalid_argument("CoefficientFn: table needs >= 2 aligned samples");
        for (std::size_t i = 1; i < z.size(); ++i)
            if (!(z[i] > z[i - 1]))
                throw std::invalid_argument("CoefficientFn: table abscissae must increase");
        CoefficientFn f;
        f.kind_ = Kind::Table;
        f.table_z_ = std::move(z);
        f.coeffs_ = std::move(v);
        return f;
    }

    cdouble operator()(double z) const {
        switch (kind_) {
            case Kind::Constant:
                return coeffs_[0];
            case Kind::Harmonic:
                return coeffs_[0] + coeffs_[1] * std::cos(omega_ * z) + coeffs_[2] * std::sin(omega_ * z);
            case Kind::Polynomial: {
                cdouble acc = 0.0;
                for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
                return acc;
            }
            case Kind::Table: {
                if (z < table_z_.front() || z > table_z_.back())
                    throw std::domain_error("CoefficientFn: table evaluated outside its range");
                const auto it = std::upper_bound(table_z_.begin(), table_z_.end(), z);
                const std::size_t hi = std::min<std::size_t>(it - table_z_.begin(), table_z_.size() - 1);
                const std::size_t lo = hi - (hi > 0 ? 1 : 0);
                if (hi == lo) return coeffs_[lo];
                const double s = (z - table_z_[lo]) / (table_z_[hi] - table_z_[lo]);
                return coeffs_[lo] * (1.0 - s) + coeffs_[hi] * s;
            }
        }
        return 0.0;
    }

    /// Exact antiderivative integral over [z0, z1] (trapezoid for tables).
    cdouble integral(double z0, double z1) const {
        switch (kind_) {
            case Kind::Constant:
                return coeffs_[0] * (z1 - z0);
            case Kind::Harmonic:
                return coeffs_[0] * (z1 - z0) +
                       coeffs_[1] / omega_ * (std::sin(omega_ * z1) - std::sin(omega_ * z0)) -
                       coeffs_[2] / omega_ * (std::cos(omega_ * z1) - std::cos(omega_ * z0));
            case Kind::Polynomial: {
                cdouble acc = 0.0;
                for (std::size_t k = coeffs_.size(); k-- > 0;)
                    acc += coeffs_[k] / (static_cast<double>(k) + 1.0) *
                           (std::pow(z1, static_cast<double>(k) + 1) - std::pow(z0, static_cast<double>(k) + 1));
                return acc;
            }
            case Kind::Table: {
                // trapezoid over the table resolution
                const int steps = 512;
                cdouble acc = 0.0;
                double prev_z = z0;
                cdouble prev_v = (*this)(z0);
                for (int k = 1; k <= steps; ++k) {
                    const double z = z0 + (z1 - z0) * k / steps;
                    const cdouble v = (*this)(z);
                    acc += 0.5 * (v + prev_v) * (z - prev_z);
                    prev_z = z;
                    prev_v = v;
                }
                return acc;
            }
        }
        return 0.0;
    }

    bool is_constant() const { return kind_ == Kind::Constant; }
    bool is_real() const {
        for (const auto& c : coeffs_)
            if (c.imag() != 0.0) return false;
        return true;
    }

    Kind kind() const { return kind_; }
    const std::vector<cdouble>& coefficients() const { return coeffs_; }
    const std::vector<double>& table_abscissae() const { return table_z_; }
    double omega() const { return omega_; }

private:
    Kind kind_ = Kind::Constant;
    std::vector<cdouble> coeffs_{cdouble(0.0)};
    std::vector<double> table_z_{};
    double omega_ = 0.0;
};

// ---------------------------------------------------------------------------
// Hamiltonian specifications (Eq.-of-motion dE/dz = +i H(z) E)
// ---------------------------------------------------------------------------

/// Finite waveguide array: diagonal propagation constants f_n(z) and
/// symmetric nearest-neighbour couplings g_n(z) (g_n couples sites n-1, n).
struct GeneralTridiagonal {
    std::vector<CoefficientFn> diagonal;  // f_0 .. f_{N-1}
    std::vector<CoefficientFn> coupling;  // g_1 .. g_{N-1}
};

/// General non-Hermitian two-waveguide coupler [[a1, b1], [b2, a2]].
struct Dimer {
    CoefficientFn alpha1, alpha2, beta1, beta2;
};

enum class PTConvention {
    math,     // H = i gamma(z) Jz + lambda(z) Jx   (diagonal gain/loss)
    physical  // H = i gamma(z) Jx + lambda(z) Jy   (axis-substituted form)
};

/// PT-symmetric array of 2j+1 waveguides with balanced gain/loss gamma(z)
/// and coupling profile lambda(z).
struct PTArray {
    SpinLabel j;
    CoefficientFn gamma;
    CoefficientFn lambda;
    PTConvention convention = PTConvention::math;
};

using HamiltonianSpec = std::variant<GeneralTridiagonal, Dimer, PTArray>;

inline int system_dimension(const HamiltonianSpec& spec) {
    if (const auto* t = std::get_if<GeneralTridiagonal>(&spec)) {
        const int n = static_cast<int>(t->diagonal.size());
        if (n < 1 || t->coupling.size() + 1 != t->diagonal.size())
            throw std::invalid_argument("GeneralTridiagonal: need N >= 1 diagonals and N-1 couplings");
        return n;
    }
    if (std::holds_alternative<Dimer>(spec)) return 2;
    return std::get<PTArray>(spec).j.dimension();
}

inline bool is_z_independent(const HamiltonianSpec& spec) {
    if (const auto* t = std::get_if<GeneralTridiagonal>(&spec)) {
        for (const auto& f : t->diagonal)
            if (!f.is_constant()) return false;
        for (const auto& g : t->coupling)
            if (!g.is_constant()) return false;
        return true;
    }
    if (const auto* d = std::get_if<Dimer>(&spec))
        return d->alpha1.is_constant() && d->alpha2.is_constant() && d->beta1.is_constant() &&
               d->beta2.is_constant();
    const auto& p = std::get<PTArray>(spec);
    return p.gamma.is_constant() && p.lambda.is_constant();
}

inline RepMatrix build_hamiltonian(const HamiltonianSpec& spec, double z) {
    RepMatrix h;
    if (const auto* t = std::get_if<GeneralTridiagonal>(&spec)) {
        const int n = system_dimension(spec);
        h = RepMatrix::Zero(n, n);
        for (int k = 0; k < n; ++k) h(k, k) = t->diagonal[k](z);
        for (int k = 0; k + 1 < n; ++k) h(k, k + 1) = h(k + 1, k) = t->coupling[k](z);
    } else if (const auto* d = std::get_if<Dimer>(&spec)) {
        h = RepMatrix::Zero(2, 2);
        h << d->alpha1(z), d->beta1(z), d->beta2(z), d->alpha2(z);
    } else {
        const auto& p = std::get<PTArray>(spec);
        if (!p.gamma.is_real() || !p.lambda.is_real())
            throw std::invalid_argument("PTArray: gamma and lambda must be real coefficient functions");
        const GeneratorSet g = spin_generators(p.j);
        const cdouble gam = p.gamma(z), lam = p.lambda(z);
        h = (p.convention == PTConvention::math) ? RepMatrix(iu * gam * g.Jz + lam * g.Jx)
                                                 : RepMatrix(iu * gam * g.Jx + lam * g.Jy);
    }
    require_finite(h, "build_hamiltonian");
    return h;
}

// ---------------------------------------------------------------------------
// Dimer reduction and sl(2,C) decomposition
// ---------------------------------------------------------------------------

/// Split a general dimer into a global phase (average propagation constant)
/// and the traceless system: full solution = phase_factor x traceless one,
/// where the traceless coupler is [[alpha, beta1],[beta2, -alpha]].
struct DimerReduction {
    double z0;
    CoefficientFn alpha1, alpha2;
    CoefficientFn beta1, beta2;  // pass through unchanged

    cdouble alpha(double z) const { return 0.5 * (alpha1(z) - alpha2(z)); }
    cdouble alpha0(double z) const { return 0.5 * (alpha1(z) + alpha2(z)); }
    cdouble phase_factor(double z) const {
        return std::exp(iu * 0.5 * (alpha1.integral(z0, z) + alpha2.integral(z0, z)));
    }

    /// Traceless coupling matrix of the reduced system at z.
    RepMatrix reduced_matrix(double z) const {
        RepMatrix h(2, 2);
        h << alpha(z), beta1(z), beta2(z), -alpha(z);
        return h;
    }
};

inline DimerReduction dimer_reduce(const CoefficientFn& alpha1, const CoefficientFn& alpha2,
                                   const CoefficientFn& beta1, const CoefficientFn& beta2,
                                   double z0 = 0.0) {
    return DimerReduction{z0, alpha1, alpha2, beta1, beta2};
}

/// Real coefficients of the traceless dimer [[alpha, beta1],[beta2, -alpha]]
/// over the sl(2,C) basis {Jx, iJx, Jy, iJy, Jz, iJz}.
inline std::array<double, 6> dimer_decompose(cdouble alpha, cdouble beta1, cdouble beta2) {
    return {std::real(beta1 + beta2), std::imag(beta1 + beta2), std::imag(beta2 - beta1),
            std::real(beta1 - beta2), 2.0 * std::real(alpha),   2.0 * std::imag(alpha)};
}

inline RepMatrix dimer_reassemble(const std::array<double, 6>& c) {
    const GeneratorSet g = spin_generators(SpinLabel(1));
    return c[0] * g.Jx + c[1] * (iu * g.Jx) + c[2] * g.Jy + c[3] * (iu * g.Jy) + c[4] * g.Jz +
           c[5] * (iu * g.Jz);
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

struct FieldState {
    StateVector amplitudes;
    double z = 0.0;
};

struct PropagationTrace {
    std::vector<double> z;
    std::vector<StateVector> amplitudes;
    std::vector<double> power;  // P(z) = sum_n |E_n|^2
};

class PropagationOverflow : public std::runtime_error {
public:
    PropagationOverflow(double z)
        : std::runtime_error("propagation overflowed floating range at z = " + std::to_string(z)),
          z_at(z) {}
    double z_at;
};

namespace detail {

// One RK4 step for U' = i H(z) U.
inline void rk4_step(const HamiltonianSpec& spec, double z, double h, RepMatrix& u) {
    const RepMatrix k1 = iu * (build_hamiltonian(spec, z) * u);
    const RepMatrix k2 = iu * (build_hamiltonian(spec, z + 0.5 * h) * (u + 0.5 * h * k1));
    const RepMatrix k3 = iu * (build_hamiltonian(spec, z + 0.5 * h) * (u + 0.5 * h * k2));
    const RepMatrix k4 = iu * (build_hamiltonian(spec, z + h) * (u + h * k3));
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline RepMatrix ode_propagator(const HamiltonianSpec& spec, double z0, double z1, int substeps) {
    const int d = system_dimension(spec);
    RepMatrix u = RepMatrix::Identity(d, d);
    const double h = (z1 - z0) / substeps;
    for (int k = 0; k < substeps; ++k) {
        rk4_step(spec, z0 + k * h, h, u);
        if (!u.allFinite()) throw PropagationOverflow(z0 + (k + 1) * h);
    }
    return u;
}

}  // namespace detail

/// Propagator U(z1, z0). Constant specs use the matrix exponential; the
/// z-dependent path is RK4 with step halving until the result moves less
/// than tol.
inline RepMatrix propagator(const HamiltonianSpec& spec, double z0, double z1, double tol = 1e-9) {
    if (z1 == z0) return RepMatrix::Identity(system_dimension(spec), system_dimension(spec));
    if (is_z_independent(spec)) return mat_exp(iu * (z1 - z0) * build_hamiltonian(spec, z0));
    int substeps = std::max(16, static_cast<int>(std::ceil(std::abs(z1 - z0) * 8.0)));
    RepMatrix u = detail::ode_propagator(spec, z0, z1, substeps);
    for (int iter = 0; iter < 14; ++iter) {
        substeps *= 2;
        const RepMatrix u2 = detail::ode_propagator(spec, z0, z1, substeps);
        const double delta = (u2 - u).norm() / std::max(1.0, u2.norm());
        u = u2;
        if (delta < tol) return u;
    }
    throw std::runtime_error("propagator: step halving failed to converge");
}

/// Integrate dE/dz = i H(z) E from z0 to z1 and record `steps` intervals
/// (steps+1 samples including both ends).
inline PropagationTrace propagate(const HamiltonianSpec& spec, double z0, double z1,
                                  const FieldState& e0, int steps) {
    if (!(z1 > z0)) throw std::invalid_argument("propagate: need z1 > z0");
    if (steps < 1) throw std::invalid_argument("propagate: steps must be >= 1");
    if (e0.amplitudes.size() != system_dimension(spec))
        throw std::invalid_argument("propagate: field dimension does not match the spec");

    PropagationTrace trace;
    trace.z.reserve(steps + 1);
    trace.amplitudes.reserve(steps + 1);
    const double h = (z1 - z0) / steps;

    auto record = [&trace](double z, const StateVector& e) {
        if (!e.allFinite()) throw PropagationOverflow(z);
        trace.z.push_back(z);
        trace.amplitudes.push_back(e);
        trace.power.push_back(e.squaredNorm());
    };

    if (is_z_independent(spec)) {
        const RepMatrix ustep = mat_exp(iu * h * build_hamiltonian(spec, z0));
        StateVector e = e0.amplitudes;
        record(z0, e);
        for (int k = 1; k <= steps; ++k) {
            e = ustep * e;
            record(z0 + k * h, e);
        }
        return trace;
    }

    // z-dependent: RK4 with global substep halving until the sampled trace
    // settles below 1e-9 (mixed absolute/relative).
    int substeps = 4;
    std::vector<StateVector> prev;
    for (int iter = 0; iter < 14; ++iter) {
        PropagationTrace attempt;
        StateVector e = e0.amplitudes;
        attempt.z.push_back(z0);
        attempt.amplitudes.push_back(e);
        attempt.power.push_back(e.squaredNorm());
        RepMatrix emat = e;  // column vector as matrix for rk4_step
        for (int k = 0; k < steps; ++k) {
            const double za = z0 + k * h;
            const double hsub = h / substeps;
            for (int s = 0; s < substeps; ++s) {
                detail::rk4_step(spec, za + s * hsub, hsub, emat);
                if (!emat.allFinite()) throw PropagationOverflow(za + (s + 1) * hsub);
            }
            attempt.z.push_back(za + h);
            attempt.amplitudes.push_back(emat.col(0));
            attempt.power.push_back(emat.col(0).squaredNorm());
        }
        if (!prev.empty()) {
            double delta = 0.0;
            for (std::size_t k = 0; k < attempt.amplitudes.size(); ++k)
                delta = std::max(delta, (attempt.amplitudes[k] - prev[k]).norm() /
                                            (1.0 + attempt.amplitudes[k].norm()));
            if (delta < 1e-9) return attempt;
        }
        prev = attempt.amplitudes;
        substeps *= 2;
    }
    throw std::runtime_error("propagate: step halving failed to converge");
}

/// || U(z2,z1) U(z1,z0) - U(z2,z0) ||_F
inline double composition_check(const HamiltonianSpec& spec, double z0, double z1, double z2) {
    if (!(z0 <= z1 && z1 <= z2)) throw std::invalid_argument("composition_check: need z0 <= z1 <= z2");
    const RepMatrix u10 = propagator(spec, z0, z1);
    const RepMatrix u21 = propagator(spec, z1, z2);
    const RepMatrix u20 = propagator(spec, z0, z2);
    return (u21 * u10 - u20).norm();
}

// ---------------------------------------------------------------------------
// PT regime classification, symmetry check, revivals
// ---------------------------------------------------------------------------

enum class RegimeKind { Periodic, PowerLaw, Exponential };

struct Regime {
    RegimeKind kind;
    double rate;  // Omega for Periodic, sqrt(gamma^2-lambda^2) for Exponential, 0 otherwise
};

/// Omega^2 = lambda^2 - gamma^2 decides the propagation character.
inline Regime classify_regime(double gamma, double lambda) {
    const double omega_sq = lambda * lambda - gamma * gamma;
    if (omega_sq > 0.0) return {RegimeKind::Periodic, std::sqrt(omega_sq)};
    if (omega_sq == 0.0) return {RegimeKind::PowerLaw, 0.0};
    return {RegimeKind::Exponential, std::sqrt(-omega_sq)};
}

/// PT symmetry of a PT-array spec: H^PT(z) = P conj(H(-z)) P with P the
/// waveguide-index reversal n -> 2j-n. Holds iff gamma and lambda are even
/// (checked on a symmetric z sample set; parity P applies to the default
/// math convention's realization).
inline bool pt_check(const HamiltonianSpec& spec, double z_scale = 1.0) {
    const auto* p = std::get_if<PTArray>(&spec);
    if (!p) throw std::invalid_argument("pt_check: spec must be a PTArray");
    const int d = p->j.dimension();
    RepMatrix rev = RepMatrix::Zero(d, d);
    for (int n = 0; n < d; ++n) rev(n, d - 1 - n) = 1.0;

    const std::array<double, 5> samples{0.0, 0.31, 0.57, 0.83, 1.0};
    for (double s : samples) {
        const double z = s * z_scale;
        const RepMatrix h = build_hamiltonian(spec, z);
        const RepMatrix hpt = rev * build_hamiltonian(spec, -z).conjugate() * rev;
        if ((hpt - h).norm() > 1e-10) return false;
    }
    return true;
}

/// Smallest L with U(L) = e^{i theta} I (global phase allowed), when the
/// spectrum of iH is purely oscillatory and commensurate; nullopt otherwise.
inline std::optional<double> revival_length(const HamiltonianSpec& spec) {
    if (!is_z_independent(spec))
        throw std::invalid_argument("revival_length: spec must be z-independent");
    const RepMatrix ih = iu * build_hamiltonian(spec, 0.0);
    Eigen::ComplexEigenSolver<RepMatrix> es(ih);
    const auto& ev = es.eigenvalues();

    double max_re = 0.0;
    for (int k = 0; k < ev.size(); ++k) max_re = std::max(max_re, std::abs(ev(k).real()));
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (max_re > 1e-9 * scale) return std::nullopt;  // growth: no revivals

    // collect positive frequency gaps and take their approximate gcd
    std::vector<double> gaps;
    for (int a = 0; a < ev.size(); ++a)
        for (int b = 0; b < ev.size(); ++b) {
            const double gap = ev(a).imag() - ev(b).imag();
            if (gap > 1e-9 * scale) gaps.push_back(gap);
        }
    if (gaps.empty()) return std::nullopt;  // H proportional to identity: trivial
    double g = *std::min_element(gaps.begin(), gaps.end());
    for (double gap : gaps) {
        const double q = gap / g;
        if (std::abs(q - std::round(q)) > 1e-6) return std::nullopt;  // incommensurate
    }
    const double length = 2.0 * pi / g;
    const RepMatrix u = mat_exp(iu * length * build_hamiltonian(spec, 0.0));
    const cdouble phase = u(0, 0) / std::abs(u(0, 0));
    const int d = static_cast<int>(u.rows());
    if ((u - phase * RepMatrix::Identity(d, d)).norm() > 1e-8) return std::nullopt;
    return length;
}

}  // namespace nhcs
