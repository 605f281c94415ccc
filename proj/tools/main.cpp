// nhcs command-line front end: simulate | resolution | kernel | weinorman | probe
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <nhcs/coherent.hpp>
#include <nhcs/io.hpp>
#include <nhcs/propagation.hpp>
#include <nhcs/weinorman.hpp>

using namespace nhcs;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

int parse_two_j(const std::string& text) {
    try {
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            const int num = std::stoi(text.substr(0, slash));
            const int den = std::stoi(text.substr(slash + 1));
            if (den != 2) throw ConfigError("spin must be a half-integer, got " + text);
            return num;
        }
        const double j = std::stod(text);
        const double two_j = 2.0 * j;
        if (std::abs(two_j - std::round(two_j)) > 1e-9 || two_j < 0)
            throw ConfigError("spin must be a non-negative half-integer, got " + text);
        return static_cast<int>(std::round(two_j));
    } catch (const std::invalid_argument&) {
        throw ConfigError("cannot parse spin '" + text + "'");
    }
}

// fiducial vectors: "ones", "e1", or a comma list of re[:im] components
StateVector parse_vector(const std::string& text, int dim) {
    if (text == "ones") return StateVector::Ones(dim);
    if (text == "e1") {
        StateVector v = StateVector::Zero(dim);
        v(0) = 1.0;
        return v;
    }
    std::vector<cdouble> parts;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto colon = token.find(':');
        try {
            if (colon == std::string::npos)
                parts.emplace_back(std::stod(token), 0.0);
            else
                parts.emplace_back(std::stod(token.substr(0, colon)),
                                   std::stod(token.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse vector component '" + token + "'");
        }
    }
    if (static_cast<int>(parts.size()) != dim)
        throw ConfigError("vector has " + std::to_string(parts.size()) + " components, expected " +
                          std::to_string(dim));
    StateVector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = parts[k];
    return v;
}

json load_config_overlay(const std::string& path, json flags) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json file;
    try {
        in >> file;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!file.is_object()) throw ConfigError("config root must be an object");
    for (const auto& [key, value] : file.items()) flags[key] = value;  // config overrides flags
    return flags;
}

void check_keys(const json& cfg, std::initializer_list<const char*> allowed) {
    reject_unknown_keys(cfg, allowed, "config");
}

std::string hash_of(const json& cfg) { return fnv1a_hex(cfg.dump()); }

void write_manifest(const std::string& path, const std::string& command, const json& cfg,
                    const json& summary, const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "nhcs";
    m["version"] = tool_version;
    m["command"] = command;
    m["config"] = cfg;
    m["config_hash"] = hash_of(cfg);
    m["summary"] = summary;
    m["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << m.dump(2) << "\n";
}

HamiltonianSpec spec_from_config(const json& cfg) {
    if (cfg.contains("hamiltonian")) return hamiltonian_from_json(cfg.at("hamiltonian"));
    const std::string variant = cfg.value("variant", "pt");
    if (variant != "pt") throw ConfigError("dimer/tridiagonal specs need a config file");
    if (!cfg.contains("lambda")) throw ConfigError("missing --lambda (or a config hamiltonian)");
    if (!cfg.contains("two_j")) throw ConfigError("missing --j");
    PTConvention conv = PTConvention::math;
    if (cfg.value("convention", "math") == "physical") conv = PTConvention::physical;
    return PTArray{SpinLabel(cfg.at("two_j").get<int>()),
                   CoefficientFn::constant(cfg.value("gamma", 0.0)),
                   CoefficientFn::constant(cfg.at("lambda").get<double>()), conv};
}

HaarDomain domain_from_config(const json& cfg) {
    const std::string name = cfg.value("domain", "maximal-compact");
    if (name == "maximal-compact") return MaximalCompact{};
    if (name == "circle") return Circle{cfg.value("r0", 0.5)};
    if (name == "annulus") return Annulus{cfg.value("rm", 0.0), cfg.value("rM", 0.5)};
    if (name == "discrete-circle") return DiscreteCircle{cfg.value("r0", 0.5), cfg.value("N", 8)};
    if (name == "truncated-disk") return TruncatedDisk{cfg.value("r", 0.5)};
    if (name == "elliptic")
        return Elliptic{GroupPoint(cdouble(cfg.value("v_zeta_re", 0.0), cfg.value("v_zeta_im", 0.0)),
                                   cfg.value("v_beta", 0.0))};
    throw ConfigError("unknown domain '" + name + "'");
}

GridResolution resolution_from_config(const json& cfg) {
    GridResolution res;
    res.n_beta = cfg.value("n_beta", 64);
    res.n_phi = cfg.value("n_phi", 64);
    res.n_radial = cfg.value("n_radial", 32);
    return res;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const json& cfg) {
    check_keys(cfg, {"variant", "two_j", "gamma", "lambda", "convention", "hamiltonian", "z0",
                     "z_max", "steps", "input", "renormalize", "output"});
    const HamiltonianSpec spec = spec_from_config(cfg);
    const int dim = system_dimension(spec);
    const double z0 = cfg.value("z0", 0.0);
    const double z_max = cfg.value("z_max", 10.0);
    const int steps = cfg.value("steps", 1000);
    const bool renorm = cfg.value("renormalize", false);
    const std::string prefix = cfg.value("output", "simulate");

    StateVector e0 = StateVector::Zero(dim);
    const json input = cfg.value("input", json("central"));
    if (input.is_string()) {
        const std::string name = input.get<std::string>();
        if (name == "central")
            e0(dim / 2) = 1.0;
        else if (name == "first")
            e0(0) = 1.0;
        else if (name == "last")
            e0(dim - 1) = 1.0;
        else if (name.rfind("index:", 0) == 0) {
            const int idx = std::stoi(name.substr(6));
            if (idx < 0 || idx >= dim) throw ConfigError("input index out of range");
            e0(idx) = 1.0;
        } else {
            throw ConfigError("unknown input '" + name + "'");
        }
    } else {
        e0 = vector_from_json(input);
        if (e0.size() != dim) throw ConfigError("input amplitudes do not match the array size");
    }

    json summary;
    if (const auto* p = std::get_if<PTArray>(&spec); p && is_z_independent(spec)) {
        const Regime regime = classify_regime(p->gamma(z0).real(), p->lambda(z0).real());
        const char* name = regime.kind == RegimeKind::Periodic   ? "Periodic"
                           : regime.kind == RegimeKind::PowerLaw ? "PowerLaw"
                                                                 : "Exponential";
        summary["regime"] = name;
        summary["rate"] = regime.rate;
        std::cout << "regime: " << name;
        if (regime.kind != RegimeKind::PowerLaw) std::cout << " (rate " << fmt17(regime.rate) << ")";
        std::cout << "\n";
    }

    const PropagationTrace trace = propagate(spec, z0, z_max, FieldState{e0, z0}, steps);
    summary["final_power"] = trace.power.back();
    summary["samples"] = trace.z.size();

    const std::string csv = prefix + ".csv";
    const std::string manifest = prefix + ".json";
    write_trace_csv(csv, trace, hash_of(cfg), renorm);
    write_manifest(manifest, "simulate", cfg, summary, {csv});
    return exit_ok;
}

int cmd_resolution(const json& cfg) {
    check_keys(cfg, {"two_j", "phi", "psi", "domain", "r0", "rm", "rM", "N", "r", "v_zeta_re",
                     "v_zeta_im", "v_beta", "n_beta", "n_phi", "n_radial", "output"});
    if (!cfg.contains("two_j")) throw ConfigError("missing --j");
    const SpinLabel j(cfg.at("two_j").get<int>());
    const StateVector phi = parse_vector(cfg.value("phi", "ones"), j.dimension());
    const StateVector psi = parse_vector(cfg.value("psi", "ones"), j.dimension());
    const HaarGrid grid = build_haar_grid(domain_from_config(cfg), resolution_from_config(cfg));
    const ResolutionReport rep = resolution_operator(j, FiducialPair(phi, psi), grid);

    json out = to_json(rep);
    out["tool"] = "nhcs";
    out["version"] = tool_version;
    out["config"] = cfg;
    out["config_hash"] = hash_of(cfg);
    const double norm = rep.A.norm();
    out["norm"] = norm;
    if (norm > 1e3) {
        out["divergence_warning"] =
            "resolution norm is large; the family diverges as (1-|zeta|)^{-(2j+1)} toward the "
            "disk edge";
        std::cerr << "warning: ||A|| = " << fmt17(norm) << " -- near-boundary divergence\n";
    }
    const std::string path = cfg.value("output", std::string("resolution")) + ".json";
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open " + path);
    file << out.dump(2) << "\n";
    std::cout << "invertible: " << (rep.is_invertible ? "true" : "false")
              << "  proportional: " << (rep.proportionality ? "true" : "false") << "\n";
    return exit_ok;
}

int cmd_kernel(const json& cfg) {
    check_keys(cfg, {"two_j", "phi", "psi", "pairs", "seed", "rmax", "output"});
    if (!cfg.contains("two_j")) throw ConfigError("missing --j");
    const SpinLabel j(cfg.at("two_j").get<int>());
    const StateVector phi = parse_vector(cfg.value("phi", "e1"), j.dimension());
    const StateVector psi = parse_vector(cfg.value("psi", "e1"), j.dimension());
    const FiducialPair pair(phi, psi);
    const int pairs = cfg.value("pairs", 100);
    const double rmax = cfg.value("rmax", 0.9);
    if (pairs < 1 || !(rmax > 0.0 && rmax < 1.0)) throw ConfigError("invalid pairs/rmax");
    std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.value("seed", 1)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_point = [&]() {
        const double r = std::sqrt(unit(rng)) * rmax;
        return GroupPoint(std::polar(r, 2.0 * pi * unit(rng)), 4.0 * pi * unit(rng));
    };

    const std::string prefix = cfg.value("output", "kernel");
    const std::string csv = prefix + ".csv";
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot open " + csv);
    out << "# tool=nhcs version=" << tool_version << " config_hash=" << hash_of(cfg) << "\n";
    out << "re_zeta_p,im_zeta_p,beta_p,re_zeta,im_zeta,beta,re_kappa,im_kappa,conv_residual\n";
    double worst = 0.0;
    json table = json::array();
    for (int k = 0; k < pairs; ++k) {
        const GroupPoint gp = random_point(), g = random_point();
        const cdouble kappa = overlap_kernel(j, pair, gp, g);
        const cdouble via_quotient =
            overlap_kernel(j, pair, GroupPoint::identity(), compose(inverse(gp), g));
        const double resid = std::abs(kappa - via_quotient);
        worst = std::max(worst, resid);
        out << fmt17(gp.zeta().real()) << "," << fmt17(gp.zeta().imag()) << "," << fmt17(gp.beta())
            << "," << fmt17(g.zeta().real()) << "," << fmt17(g.zeta().imag()) << ","
            << fmt17(g.beta()) << "," << fmt17(kappa.real()) << "," << fmt17(kappa.imag()) << ","
            << fmt17(resid) << "\n";
        table.push_back(json::array({gp.zeta().real(), gp.zeta().imag(), gp.beta(),
                                     g.zeta().real(), g.zeta().imag(), g.beta(), kappa.real(),
                                     kappa.imag()}));
    }
    json summary;
    summary["pairs"] = pairs;
    summary["max_convolution_residual"] = worst;
    summary["table"] = table;
    write_manifest(prefix + ".json", "kernel", cfg, summary, {csv});
    std::cout << "max convolution residual: " << fmt17(worst) << "\n";
    return exit_ok;
}

int cmd_weinorman(const json& cfg) {
    check_keys(cfg, {"two_j", "gamma", "lambda", "convention", "hamiltonian", "z0", "z1", "steps",
                     "output"});
    json spec_cfg = cfg;
    if (!cfg.contains("hamiltonian") && !cfg.contains("two_j")) spec_cfg["two_j"] = 1;
    const HamiltonianSpec spec = spec_from_config(spec_cfg);
    const double z0 = cfg.value("z0", 0.0);
    const double z1 = cfg.value("z1", 2.0);
    const int steps = cfg.value("steps", 256);
    const SpinLabel j(cfg.contains("two_j") ? cfg.at("two_j").get<int>() : 1);

    const WNFactorization f = wei_norman_solve(spec, z0, z1, steps);
    double residual = 0.0;
    const int probes = 12;
    for (int k = 1; k <= probes; ++k) {
        const double z = z0 + (f.z_end() - z0) * k / probes;
        residual = std::max(residual, (wn_propagator(f, j, z) - propagator(spec, z0, z)).norm());
    }

    const std::string prefix = cfg.value("output", "weinorman");
    const std::string csv = prefix + ".csv";
    const std::size_t stride = std::max<std::size_t>(1, f.z.size() / 512);
    write_wn_csv(csv, f, hash_of(cfg), stride);

    json summary;
    summary["max_residual"] = residual;
    summary["z_end"] = f.z_end();
    summary["blowup"] = f.singular_z.has_value();
    if (f.singular_z) {
        summary["blowup_z"] = *f.singular_z;
        std::cout << "Riccati blow-up at z = " << fmt17(*f.singular_z) << " (Gauss-cell exit)\n";
    }
    std::cout << "max residual vs direct propagator: " << fmt17(residual) << "\n";
    write_manifest(prefix + ".json", "weinorman", cfg, summary, {csv});
    return exit_ok;
}

int cmd_probe(const json& cfg) {
    check_keys(cfg, {"kind", "two_j", "phi", "psi", "radii", "t_max", "samples", "v_zeta_re",
                     "v_zeta_im", "v_beta", "n_beta", "n_phi", "n_radial", "output"});
    const std::string kind = cfg.value("kind", "divergence");
    if (!cfg.contains("two_j")) throw ConfigError("missing --j");
    const SpinLabel j(cfg.at("two_j").get<int>());
    const StateVector phi = parse_vector(cfg.value("phi", "e1"), j.dimension());
    const StateVector psi = parse_vector(cfg.value("psi", "e1"), j.dimension());
    const FiducialPair pair(phi, psi);
    const std::string prefix = cfg.value("output", "probe");
    const std::string csv = prefix + ".csv";
    json summary;

    if (kind == "divergence") {
        const std::vector<double> radii =
            cfg.value("radii", std::vector<double>{0.9, 0.99, 0.999});
        const DivergenceProbe probe = divergence_probe(j, pair, radii, resolution_from_config(cfg));
        std::ofstream out(csv);
        if (!out) throw std::runtime_error("cannot open " + csv);
        out << "# tool=nhcs version=" << tool_version << " config_hash=" << hash_of(cfg) << "\n";
        out << "r,resolution_norm\n";
        for (std::size_t k = 0; k < probe.radii.size(); ++k)
            out << fmt17(probe.radii[k]) << "," << fmt17(probe.norms[k]) << "\n";
        summary["exponent"] = probe.exponent;
        summary["expected_exponent"] = -(j.two_j() + 1.0);
        std::cout << "fitted exponent: " << fmt17(probe.exponent) << " (expected "
                  << fmt17(-(j.two_j() + 1.0)) << ")\n";
    } else {
        OrbitKind orbit;
        if (kind == "elliptic")
            orbit = EllipticOrbit{GroupPoint(
                cdouble(cfg.value("v_zeta_re", 0.0), cfg.value("v_zeta_im", 0.0)),
                cfg.value("v_beta", 0.0))};
        else if (kind == "hyperbolic")
            orbit = HyperbolicOrbit{};
        else if (kind == "parabolic")
            orbit = ParabolicOrbit{};
        else
            throw ConfigError("unknown probe kind '" + kind + "'");
        const OrbitTrace trace = subgroup_orbit_probe(orbit, j, pair, cfg.value("t_max", 30.0),
                                                      cfg.value("samples", 200));
        std::ofstream out(csv);
        if (!out) throw std::runtime_error("cannot open " + csv);
        out << "# tool=nhcs version=" << tool_version << " config_hash=" << hash_of(cfg) << "\n";
        out << "t,norm\n";
        for (std::size_t k = 0; k < trace.t.size(); ++k)
            out << fmt17(trace.t[k]) << "," << fmt17(trace.norm[k]) << "\n";
        const char* cls = trace.classification == OrbitClass::Bounded            ? "Bounded"
                          : trace.classification == OrbitClass::PolynomialGrowth ? "PolynomialGrowth"
                                                                                 : "ExponentialGrowth";
        summary["classification"] = cls;
        summary["exp_rate"] = trace.exp_rate;
        summary["poly_degree"] = trace.poly_degree;
        std::cout << "orbit classification: " << cls << "\n";
    }
    write_manifest(prefix + ".json", "probe", cfg, summary, {csv});
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-Hermitian coherent states for finite PT-symmetric waveguide arrays"};
    app.require_subcommand(1);

    struct Flags {
        std::string config, j_text, output, variant = "pt", convention = "math";
        std::string input = "central", phi, psi, domain, kind = "divergence", radii;
        double gamma = 0.0, lambda = 0.0, z0 = 0.0, z_max = 10.0, z1 = 2.0;
        double r0 = 0.5, rm = 0.0, rM = 0.5, r = 0.5, v_zeta_re = 0.0, v_zeta_im = 0.0,
               v_beta = 0.0, t_max = 30.0, rmax = 0.9;
        int steps = 0, n = 8, n_beta = 64, n_phi = 64, n_radial = 32, pairs = 100, samples = 200;
        long long seed = 1;
        bool renormalize = false;
    } fl;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", fl.config, "JSON config; its keys override flags");
        sub->add_option("--output", fl.output, "output file prefix");
        sub->add_option("--j", fl.j_text, "spin j (e.g. 1, 1/2, 1.5)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "propagate light through an array");
    add_common(simulate);
    simulate->add_option("--variant", fl.variant, "pt (flags) -- dimer/tridiagonal via --config");
    simulate->add_option("--gamma", fl.gamma, "gain/loss strength");
    simulate->add_option("--lambda", fl.lambda, "coupling strength");
    simulate->add_option("--convention", fl.convention, "math | physical");
    simulate->add_option("--z0", fl.z0, "start of the propagation window");
    simulate->add_option("--z-max", fl.z_max, "end of the propagation window");
    simulate->add_option("--steps", fl.steps, "output samples");
    simulate->add_option("--input", fl.input, "central | first | last | index:k");
    simulate->add_flag("--renormalize", fl.renormalize, "add relative-intensity columns");

    CLI::App* resolution = app.add_subcommand("resolution", "assemble a resolution operator");
    add_common(resolution);
    resolution->add_option("--phi", fl.phi, "fiducial: ones | e1 | re:im,...");
    resolution->add_option("--psi", fl.psi, "dual fiducial");
    resolution->add_option("--domain", fl.domain,
                           "maximal-compact | circle | annulus | discrete-circle | truncated-disk "
                           "| elliptic");
    resolution->add_option("--r0", fl.r0, "circle radius");
    resolution->add_option("--rm", fl.rm, "annulus inner radius");
    resolution->add_option("--rM", fl.rM, "annulus outer radius");
    resolution->add_option("--r", fl.r, "truncated disk radius");
    resolution->add_option("--N", fl.n, "discrete circle points");
    resolution->add_option("--v-zeta-re", fl.v_zeta_re, "elliptic v: Re zeta");
    resolution->add_option("--v-zeta-im", fl.v_zeta_im, "elliptic v: Im zeta");
    resolution->add_option("--v-beta", fl.v_beta, "elliptic v: beta");
    resolution->add_option("--n-beta", fl.n_beta, "beta nodes");
    resolution->add_option("--n-phi", fl.n_phi, "angular nodes");
    resolution->add_option("--n-radial", fl.n_radial, "radial nodes per panel");

    CLI::App* kernel = app.add_subcommand("kernel", "tabulate the overlapping kernel");
    add_common(kernel);
    kernel->add_option("--phi", fl.phi, "fiducial");
    kernel->add_option("--psi", fl.psi, "dual fiducial");
    kernel->add_option("--pairs", fl.pairs, "number of random point pairs");
    kernel->add_option("--seed", fl.seed, "RNG seed");
    kernel->add_option("--rmax", fl.rmax, "disk radius bound for samples");

    CLI::App* weinorman = app.add_subcommand("weinorman", "factorize the propagator");
    add_common(weinorman);
    weinorman->add_option("--gamma", fl.gamma, "gain/loss strength");
    weinorman->add_option("--lambda", fl.lambda, "coupling strength");
    weinorman->add_option("--convention", fl.convention, "math | physical");
    weinorman->add_option("--z0", fl.z0, "start");
    weinorman->add_option("--z1", fl.z1, "end");
    weinorman->add_option("--steps", fl.steps, "initial integrator steps");

    CLI::App* probe = app.add_subcommand("probe", "divergence and orbit probes");
    add_common(probe);
    probe->add_option("--kind", fl.kind, "divergence | elliptic | hyperbolic | parabolic");
    probe->add_option("--phi", fl.phi, "fiducial");
    probe->add_option("--psi", fl.psi, "dual fiducial");
    probe->add_option("--radii", fl.radii, "comma list of truncation radii");
    probe->add_option("--t-max", fl.t_max, "orbit parameter range");
    probe->add_option("--samples", fl.samples, "orbit samples");
    probe->add_option("--v-zeta-re", fl.v_zeta_re, "elliptic v: Re zeta");
    probe->add_option("--v-zeta-im", fl.v_zeta_im, "elliptic v: Im zeta");
    probe->add_option("--v-beta", fl.v_beta, "elliptic v: beta");
    probe->add_option("--n-beta", fl.n_beta, "beta nodes");
    probe->add_option("--n-phi", fl.n_phi, "angular nodes");
    probe->add_option("--n-radial", fl.n_radial, "radial nodes per panel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        json cfg;
        auto put_if = [&](CLI::App* sub, const char* flag, const char* key, auto value) {
            if (sub->count(flag)) cfg[key] = value;
        };
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--j")) cfg["two_j"] = parse_two_j(fl.j_text);
        put_if(sub, "--output", "output", fl.output);

        int code = exit_config;
        if (sub == simulate) {
            put_if(sub, "--variant", "variant", fl.variant);
            put_if(sub, "--gamma", "gamma", fl.gamma);
            put_if(sub, "--lambda", "lambda", fl.lambda);
            put_if(sub, "--convention", "convention", fl.convention);
            put_if(sub, "--z0", "z0", fl.z0);
            put_if(sub, "--z-max", "z_max", fl.z_max);
            put_if(sub, "--steps", "steps", fl.steps);
            put_if(sub, "--input", "input", fl.input);
            if (fl.renormalize) cfg["renormalize"] = true;
            if (!fl.config.empty()) cfg = load_config_overlay(fl.config, cfg);
            code = cmd_simulate(cfg);
        } else if (sub == resolution) {
            put_if(sub, "--phi", "phi", fl.phi);
            put_if(sub, "--psi", "psi", fl.psi);
            put_if(sub, "--domain", "domain", fl.domain);
            put_if(sub, "--r0", "r0", fl.r0);
            put_if(sub, "--rm", "rm", fl.rm);
            put_if(sub, "--rM", "rM", fl.rM);
            put_if(sub, "--r", "r", fl.r);
            put_if(sub, "--N", "N", fl.n);
            put_if(sub, "--v-zeta-re", "v_zeta_re", fl.v_zeta_re);
            put_if(sub, "--v-zeta-im", "v_zeta_im", fl.v_zeta_im);
            put_if(sub, "--v-beta", "v_beta", fl.v_beta);
            put_if(sub, "--n-beta", "n_beta", fl.n_beta);
            put_if(sub, "--n-phi", "n_phi", fl.n_phi);
            put_if(sub, "--n-radial", "n_radial", fl.n_radial);
            if (!fl.config.empty()) cfg = load_config_overlay(fl.config, cfg);
            code = cmd_resolution(cfg);
        } else if (sub == kernel) {
            put_if(sub, "--phi", "phi", fl.phi);
            put_if(sub, "--psi", "psi", fl.psi);
            put_if(sub, "--pairs", "pairs", fl.pairs);
            put_if(sub, "--seed", "seed", fl.seed);
            put_if(sub, "--rmax", "rmax", fl.rmax);
            if (!fl.config.empty()) cfg = load_config_overlay(fl.config, cfg);
            code = cmd_kernel(cfg);
        } else if (sub == weinorman) {
            put_if(sub, "--gamma", "gamma", fl.gamma);
            put_if(sub, "--lambda", "lambda", fl.lambda);
            put_if(sub, "--convention", "convention", fl.convention);
            put_if(sub, "--z0", "z0", fl.z0);
            put_if(sub, "--z1", "z1", fl.z1);
            put_if(sub, "--steps", "steps", fl.steps);
            if (!fl.config.empty()) cfg = load_config_overlay(fl.config, cfg);
            code = cmd_weinorman(cfg);
        } else if (sub == probe) {
            put_if(sub, "--kind", "kind", fl.kind);
            put_if(sub, "--phi", "phi", fl.phi);
            put_if(sub, "--psi", "psi", fl.psi);
            if (sub->count("--radii")) {
                std::vector<double> radii;
                std::stringstream ss(fl.radii);
                std::string token;
                while (std::getline(ss, token, ',')) radii.push_back(std::stod(token));
                cfg["radii"] = radii;
            }
            put_if(sub, "--t-max", "t_max", fl.t_max);
            put_if(sub, "--samples", "samples", fl.samples);
            put_if(sub, "--v-zeta-re", "v_zeta_re", fl.v_zeta_re);
            put_if(sub, "--v-zeta-im", "v_zeta_im", fl.v_zeta_im);
            put_if(sub, "--v-beta", "v_beta", fl.v_beta);
            put_if(sub, "--n-beta", "n_beta", fl.n_beta);
            put_if(sub, "--n-phi", "n_phi", fl.n_phi);
            put_if(sub, "--n-radial", "n_radial", fl.n_radial);
            if (!fl.config.empty()) cfg = load_config_overlay(fl.config, cfg);
            code = cmd_probe(cfg);
        }
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const PropagationOverflow& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
}
