#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "common.hpp"

namespace nhcs {

/// Spin-j matrices for su(2) and the su(1,1) realization
/// {Kx = i Jx, Ky = i Jy, Kz = Jz}, with ladder operators
/// K± = -Ky ± i Kx (so K+† = -K-).
struct GeneratorSet {
    SpinLabel j;
    RepMatrix Jx, Jy, Jz;
    RepMatrix Kx, Ky, Kz;
    RepMatrix Kplus, Kminus;
};

/// Basis ordering is descending in m (index n=0 is m=j), so the parity map
/// n -> 2j-n is plain matrix reversal.
inline GeneratorSet spin_generators(SpinLabel j) {
    const int d = j.dimension();
    RepMatrix jz = RepMatrix::Zero(d, d);
    RepMatrix jplus = RepMatrix::Zero(d, d);
    for (int n = 0; n < d; ++n) jz(n, n) = j.m_of(n);
    for (int n = 1; n < d; ++n) {
        const double m = j.m_of(n);  // J+ |j,m> = sqrt(j(j+1)-m(m+1)) |j,m+1>
        jplus(n - 1, n) = std::sqrt(j.j() * (j.j() + 1.0) - m * (m + 1.0));
    }
    const RepMatrix jminus = jplus.adjoint();

    GeneratorSet g{j,
                   0.5 * (jplus + jminus),
                   (jplus - jminus) / (2.0 * iu),
                   jz,
                   RepMatrix{},
                   RepMatrix{},
                   RepMatrix{},
                   RepMatrix{},
                   RepMatrix{}};
    g.Kx = iu * g.Jx;
    g.Ky = iu * g.Jy;
    g.Kz = g.Jz;
    g.Kplus = -g.Ky + iu * g.Kx;
    g.Kminus = -g.Ky - iu * g.Kx;
    return g;
}

namespace detail {

inline RepMatrix pade13(const RepMatrix& a) {
    // Pade(13,13) numerator/denominator coefficients
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const int d = static_cast<int>(a.rows());
    const RepMatrix id = RepMatrix::Identity(d, d);
    const RepMatrix a2 = a * a;
    const RepMatrix a4 = a2 * a2;
    const RepMatrix a6 = a2 * a4;
    const RepMatrix u =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const RepMatrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace detail

/// Dense matrix exponential by Pade-13 scaling and squaring. Deterministic;
/// tol is the backward-error target (values below double roundoff are
/// clamped to what the arithmetic can deliver). Throws std::overflow_error
/// when exp(M) leaves the floating range instead of saturating silently.
inline RepMatrix mat_exp(const RepMatrix& m, double tol = 1e-13) {
    if (tol <= 0.0) throw std::invalid_argument("mat_exp: tol must be > 0");
    if (m.rows() != m.cols()) throw std::invalid_argument("mat_exp: matrix must be square");
    require_finite(m, "mat_exp");

    const double theta13 = 5.371920351148152;
    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    if (s > 64) throw std::overflow_error("mat_exp: ||M|| too large, exp(M) overflows");

    RepMatrix f = detail::pade13(m / std::pow(2.0, s));
    for (int k = 0; k < s; ++k) f = f * f;
    if (!f.allFinite()) throw std::overflow_error("mat_exp: result overflowed floating range");
    return f;
}

/// Residuals of the su(2) and induced su(1,1) commutation relations plus the
/// ladder adjoint identity, in Frobenius norm.
struct StructureReport {
    std::vector<std::pair<std::string, double>> residuals;

    double max_residual() const {
        double r = 0.0;
        for (const auto& [name, v] : residuals) r = std::max(r, v);
        return r;
    }
    bool passed(double tol) const { return max_residual() < tol; }
};

inline StructureReport verify_structure(const GeneratorSet& g, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("verify_structure: tol must be > 0");
    auto comm = [](const RepMatrix& a, const RepMatrix& b) -> RepMatrix { return a * b - b * a; };
    StructureReport rep;
    auto push = [&rep](const std::string& name, const RepMatrix& resid) {
        rep.residuals.emplace_back(name, resid.norm());
    };
    push("[Jx,Jy]-iJz", comm(g.Jx, g.Jy) - iu * g.Jz);
    push("[Jy,Jz]-iJx", comm(g.Jy, g.Jz) - iu * g.Jx);
    push("[Jz,Jx]-iJy", comm(g.Jz, g.Jx) - iu * g.Jy);
    push("[Kx,Ky]+iKz", comm(g.Kx, g.Ky) + iu * g.Kz);
    push("[Ky,Kz]-iKx", comm(g.Ky, g.Kz) - iu * g.Kx);
    push("[Kz,Kx]-iKy", comm(g.Kz, g.Kx) - iu * g.Ky);
    push("K+^dag + K-", RepMatrix(g.Kplus.adjoint() + g.Kminus));
    return rep;
}

}  // namespace nhcs
