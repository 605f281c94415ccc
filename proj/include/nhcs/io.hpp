#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "coherent.hpp"
#include "group.hpp"
#include "propagation.hpp"
#include "weinorman.hpp"

namespace nhcs {

inline constexpr const char* tool_version = "0.1.0";

using json = nlohmann::json;

/// Round-trip decimal formatting (17 significant digits).
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a 64-bit hash as 16 hex chars; used to stamp outputs with the config.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// JSON encodings
// ---------------------------------------------------------------------------

inline json to_json(cdouble c) { return json::array({c.real(), c.imag()}); }

inline cdouble complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("expected complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const StateVector& v) {
    json arr = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(to_json(v(k)));
    return arr;
}

inline StateVector vector_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("expected nonempty vector");
    StateVector v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) v(k) = complex_from_json(j[k]);
    return v;
}

inline json to_json(const RepMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}

inline json to_json(const CoefficientFn& f) {
    json j;
    switch (f.kind()) {
        case CoefficientFn::Kind::Constant:
            j["kind"] = "constant";
            j["value"] = to_json(f.coefficients()[0]);
            break;
        case CoefficientFn::Kind::Harmonic:
            j["kind"] = "harmonic";
            j["c0"] = to_json(f.coefficients()[0]);
            j["cos"] = to_json(f.coefficients()[1]);
            j["sin"] = to_json(f.coefficients()[2]);
            j["omega"] = f.omega();
            break;
        case CoefficientFn::Kind::Polynomial: {
            j["kind"] = "polynomial";
            json c = json::array();
            for (const auto& v : f.coefficients()) c.push_back(to_json(v));
            j["coeffs"] = c;
            break;
        }
        case CoefficientFn::Kind::Table: {
            j["kind"] = "table";
            j["z"] = f.table_abscissae();
            json c = json::array();
            for (const auto& v : f.coefficients()) c.push_back(to_json(v));
            j["values"] = c;
            break;
        }
    }
    return j;
}

inline CoefficientFn coefficient_from_json(const json& j) {
    if (j.is_number()) return CoefficientFn::constant(j.get<double>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        reject_unknown_keys(j, {"kind", "value"}, "coefficient");
        const json& v = j.at("value");
        return CoefficientFn::constant(v.is_number() ? cdouble(v.get<double>())
                                                     : complex_from_json(v));
    }
    if (kind == "harmonic") {
        reject_unknown_keys(j, {"kind", "c0", "cos", "sin", "omega"}, "coefficient");
        auto get = [&](const char* key) -> cdouble {
            if (!j.contains(key)) return 0.0;
            const json& v = j.at(key);
            return v.is_number() ? cdouble(v.get<double>()) : complex_from_json(v);
        };
        return CoefficientFn::harmonic(get("c0"), get("cos"), get("sin"), j.at("omega").get<double>());
    }
    if (kind == "polynomial") {
        reject_unknown_keys(j, {"kind", "coeffs"}, "coefficient");
        std::vector<cdouble> c;
        for (const auto& v : j.at("coeffs"))
            c.push_back(v.is_number() ? cdouble(v.get<double>()) : complex_from_json(v));
        return CoefficientFn::polynomial(std::move(c));
    }
    if (kind == "table") {
        reject_unknown_keys(j, {"kind", "z", "values"}, "coefficient");
        std::vector<cdouble> c;
        for (const auto& v : j.at("values"))
            c.push_back(v.is_number() ? cdouble(v.get<double>()) : complex_from_json(v));
        return CoefficientFn::table(j.at("z").get<std::vector<double>>(), std::move(c));
    }
    throw std::invalid_argument("coefficient: unknown kind '" + kind + "'");
}

inline json to_json(const HamiltonianSpec& spec) {
    json j;
    if (const auto* t = std::get_if<GeneralTridiagonal>(&spec)) {
        j["variant"] = "tridiagonal";
        json diag = json::array(), coup = json::array();
        for (const auto& f : t->diagonal) diag.push_back(to_json(f));
        for (const auto& g : t->coupling) coup.push_back(to_json(g));
        j["diagonal"] = diag;
        j["coupling"] = coup;
    } else if (const auto* d = std::get_if<Dimer>(&spec)) {
        j["variant"] = "dimer";
        j["alpha1"] = to_json(d->alpha1);
        j["alpha2"] = to_json(d->alpha2);
        j["beta1"] = to_json(d->beta1);
        j["beta2"] = to_json(d->beta2);
    } else {
        const auto& p = std::get<PTArray>(spec);
        j["variant"] = "pt_array";
        j["two_j"] = p.j.two_j();
        j["gamma"] = to_json(p.gamma);
        j["lambda"] = to_json(p.lambda);
        j["convention"] = p.convention == PTConvention::math ? "math" : "physical";
    }
    return j;
}

inline HamiltonianSpec hamiltonian_from_json(const json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "tridiagonal") {
        reject_unknown_keys(j, {"variant", "diagonal", "coupling"}, "tridiagonal spec");
        GeneralTridiagonal t;
        for (const auto& f : j.at("diagonal")) t.diagonal.push_back(coefficient_from_json(f));
        for (const auto& g : j.at("coupling")) t.coupling.push_back(coefficient_from_json(g));
        if (t.diagonal.empty() || t.coupling.size() + 1 != t.diagonal.size())
            throw std::invalid_argument("tridiagonal spec: need N diagonals and N-1 couplings");
        return t;
    }
    if (variant == "dimer") {
        reject_unknown_keys(j, {"variant", "alpha1", "alpha2", "beta1", "beta2"}, "dimer spec");
        return Dimer{coefficient_from_json(j.at("alpha1")), coefficient_from_json(j.at("alpha2")),
                     coefficient_from_json(j.at("beta1")), coefficient_from_json(j.at("beta2"))};
    }
    if (variant == "pt_array") {
        reject_unknown_keys(j, {"variant", "two_j", "gamma", "lambda", "convention"}, "pt_array spec");
        PTConvention conv = PTConvention::math;
        if (j.contains("convention")) {
            const std::string c = j.at("convention").get<std::string>();
            if (c == "physical")
                conv = PTConvention::physical;
            else if (c != "math")
                throw std::invalid_argument("pt_array spec: convention must be math|physical");
        }
        return PTArray{SpinLabel(j.at("two_j").get<int>()), coefficient_from_json(j.at("gamma")),
                       coefficient_from_json(j.at("lambda")), conv};
    }
    throw std::invalid_argument("hamiltonian spec: unknown variant '" + variant + "'");
}

inline json to_json(const HaarDomain& domain) {
    json j;
    if (std::holds_alternative<MaximalCompact>(domain)) {
        j["tag"] = "maximal_compact";
    } else if (const auto* e = std::get_if<Elliptic>(&domain)) {
        j["tag"] = "elliptic";
        j["v_zeta"] = to_json(e->v.zeta());
        j["v_beta"] = e->v.beta();
    } else if (const auto* c = std::get_if<Circle>(&domain)) {
        j["tag"] = "circle";
        j["r0"] = c->r0;
    } else if (const auto* a = std::get_if<Annulus>(&domain)) {
        j["tag"] = "annulus";
        j["rm"] = a->rm;
        j["rM"] = a->rM;
    } else if (const auto* dc = std::get_if<DiscreteCircle>(&domain)) {
        j["tag"] = "discrete_circle";
        j["r0"] = dc->r0;
        j["N"] = dc->N;
    } else if (const auto* td = std::get_if<TruncatedDisk>(&domain)) {
        j["tag"] = "truncated_disk";
        j["r"] = td->r;
    }
    return j;
}

inline HaarDomain domain_from_json(const json& j) {
    const std::string tag = j.at("tag").get<std::string>();
    if (tag == "maximal_compact") return MaximalCompact{};
    if (tag == "elliptic")
        return Elliptic{GroupPoint(complex_from_json(j.at("v_zeta")), j.at("v_beta").get<double>())};
    if (tag == "circle") return Circle{j.at("r0").get<double>()};
    if (tag == "annulus") return Annulus{j.at("rm").get<double>(), j.at("rM").get<double>()};
    if (tag == "discrete_circle")
        return DiscreteCircle{j.at("r0").get<double>(), j.at("N").get<int>()};
    if (tag == "truncated_disk") return TruncatedDisk{j.at("r").get<double>()};
    throw std::invalid_argument("haar domain: unknown tag '" + tag + "'");
}

inline json to_json(const HaarGrid& grid) {
    json j;
    j["domain"] = to_json(grid.domain);
    json nodes = json::array();
    for (const auto& n : grid.nodes)
        nodes.push_back(json::array(
            {n.g.zeta().real(), n.g.zeta().imag(), n.g.beta(), n.weight}));
    j["nodes"] = nodes;
    return j;
}

inline HaarGrid grid_from_json(const json& j) {
    HaarGrid grid{domain_from_json(j.at("domain")), {}};
    for (const auto& n : j.at("nodes")) {
        if (!n.is_array() || n.size() != 4)
            throw std::invalid_argument("haar grid: node must be [re zeta, im zeta, beta, weight]");
        grid.nodes.push_back({GroupPoint(cdouble(n[0].get<double>(), n[1].get<double>()),
                                         n[2].get<double>()),
                              n[3].get<double>()});
    }
    return grid;
}

inline json to_json(const ResolutionReport& rep) {
    json j;
    j["domain"] = to_json(rep.domain);
    j["A"] = to_json(rep.A);
    j["is_invertible"] = rep.is_invertible;
    j["condition_number"] = rep.condition_number;
    j["proportionality_residual"] = rep.proportionality_residual;
    j["proportional"] = rep.proportionality.has_value();
    if (rep.proportionality) j["proportionality"] = to_json(*rep.proportionality);
    return j;
}

// ---------------------------------------------------------------------------
// CSV writers (every file is stamped with tool version and config hash)
// ---------------------------------------------------------------------------

inline void write_trace_csv(const std::string& path, const PropagationTrace& trace,
                            const std::string& config_hash, bool renormalized = false) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# tool=nhcs version=" << tool_version << " config_hash=" << config_hash << "\n";
    const Eigen::Index d = trace.amplitudes.empty() ? 0 : trace.amplitudes.front().size();
    out << "z";
    for (Eigen::Index n = 0; n < d; ++n) out << ",re_E" << n;
    for (Eigen::Index n = 0; n < d; ++n) out << ",im_E" << n;
    out << ",P";
    if (renormalized)
        for (Eigen::Index n = 0; n < d; ++n) out << ",I" << n << "_rel";
    out << "\n";
    for (std::size_t k = 0; k < trace.z.size(); ++k) {
        out << fmt17(trace.z[k]);
        for (Eigen::Index n = 0; n < d; ++n) out << "," << fmt17(trace.amplitudes[k](n).real());
        for (Eigen::Index n = 0; n < d; ++n) out << "," << fmt17(trace.amplitudes[k](n).imag());
        out << "," << fmt17(trace.power[k]);
        if (renormalized)
            for (Eigen::Index n = 0; n < d; ++n)
                out << ","
                    << fmt17(trace.power[k] > 0.0
                                 ? std::norm(trace.amplitudes[k](n)) / trace.power[k]
                                 : 0.0);
        out << "\n";
    }
}

inline void write_wn_csv(const std::string& path, const WNFactorization& f,
                         const std::string& config_hash, std::size_t stride = 1) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# tool=nhcs version=" << tool_version << " config_hash=" << config_hash << "\n";
    out << "z,re_u_plus,im_u_plus,re_u_z,im_u_z,re_u_minus,im_u_minus\n";
    for (std::size_t k = 0; k < f.z.size(); k += stride) {
        const cdouble up = f.u_plus(k), uz = f.u_z(k), um = f.u_minus(k);
        out << fmt17(f.z[k]) << "," << fmt17(up.real()) << "," << fmt17(up.imag()) << ","
            << fmt17(uz.real()) << "," << fmt17(uz.imag()) << "," << fmt17(um.real()) << ","
            << fmt17(um.imag()) << "\n";
    }
}

}  // namespace nhcs
