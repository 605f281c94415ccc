#include <catch2/catch_amalgamated.hpp>

#include <nhcs/coherent.hpp>
#include <nhcs/propagation.hpp>

#include "oracles.hpp"

using namespace nhcs;

namespace {

PTArray trimer(double gamma, double lambda) {
    return PTArray{SpinLabel(2), CoefficientFn::constant(gamma), CoefficientFn::constant(lambda)};
}

StateVector central_input(int dim) {
    StateVector v = StateVector::Zero(dim);
    v(dim / 2) = 1.0;
    return v;
}

// mean spacing of dominant peaks of P(z), refined by parabolic interpolation
double peak_period(const PropagationTrace& trace) {
    const double pmax = *std::max_element(trace.power.begin(), trace.power.end());
    std::vector<double> peaks;
    for (std::size_t k = 1; k + 1 < trace.power.size(); ++k) {
        const double y0 = trace.power[k - 1], y1 = trace.power[k], y2 = trace.power[k + 1];
        if (y1 >= y0 && y1 >= y2 && y1 > 0.7 * pmax) {
            const double denom = y0 - 2.0 * y1 + y2;
            const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
            peaks.push_back(trace.z[k] + shift * (trace.z[1] - trace.z[0]));
        }
    }
    REQUIRE(peaks.size() >= 3);
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

}  // namespace

TEST_CASE("coefficient functions evaluate and integrate in closed form", "[propagation]") {
    const auto c = CoefficientFn::constant(cdouble(2.0, -1.0));
    CHECK(c(3.7) == cdouble(2.0, -1.0));
    CHECK(c.integral(0.0, 2.0) == cdouble(4.0, -2.0));

    const auto h = CoefficientFn::harmonic(0.5, 1.0, -0.25, 2.0);
    CHECK(std::abs(h(1.3) - (0.5 + std::cos(2.6) - 0.25 * std::sin(2.6))) < 1e-15);
    const cdouble ih = h.integral(0.2, 1.7);
    const cdouble expected = 0.5 * 1.5 + 0.5 * (std::sin(3.4) - std::sin(0.4)) +
                             0.125 * (std::cos(3.4) - std::cos(0.4));
    CHECK(std::abs(ih - expected) < 1e-14);

    const auto p = CoefficientFn::polynomial({cdouble(1.0), cdouble(0.0), cdouble(3.0)});
    CHECK(std::abs(p(2.0) - cdouble(13.0)) < 1e-15);
    CHECK(std::abs(p.integral(0.0, 1.0) - cdouble(2.0)) < 1e-15);

    const auto t = CoefficientFn::table({0.0, 1.0, 2.0}, {cdouble(0.0), cdouble(1.0), cdouble(0.0)});
    CHECK(std::abs(t(0.5) - cdouble(0.5)) < 1e-15);
    CHECK_THROWS_AS(t(3.0), std::domain_error);
    CHECK_THROWS_AS(CoefficientFn::table({0.0, 0.0}, {cdouble(1.0), cdouble(1.0)}),
                    std::invalid_argument);
}

TEST_CASE("two-site coupling builds 2 lambda Jx", "[propagation]") {
    const double lambda = 0.8;
    GeneralTridiagonal t{{CoefficientFn::constant(0.0), CoefficientFn::constant(0.0)},
                         {CoefficientFn::constant(lambda)}};
    const RepMatrix h = build_hamiltonian(t, 0.0);
    const RepMatrix expected = 2.0 * lambda * spin_generators(SpinLabel(1)).Jx;
    CHECK((h - expected).norm() < 1e-15);
}

TEST_CASE("the PT dimer equals the j=1/2 PT array", "[propagation]") {
    const double gamma = 0.4, lambda = 1.1;
    Dimer d{CoefficientFn::constant(cdouble(0.0, gamma / 2.0)),
            CoefficientFn::constant(cdouble(0.0, -gamma / 2.0)),
            CoefficientFn::constant(lambda / 2.0), CoefficientFn::constant(lambda / 2.0)};
    PTArray p{SpinLabel(1), CoefficientFn::constant(gamma), CoefficientFn::constant(lambda)};
    CHECK((build_hamiltonian(d, 0.3) - build_hamiltonian(p, 0.3)).norm() < 1e-15);
}

TEST_CASE("the PT trimer has gain, central and loss rows", "[propagation]") {
    const RepMatrix h = build_hamiltonian(trimer(0.6, 1.0), 0.0);
    REQUIRE(h.rows() == 3);
    const double c = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(h(0, 0) - cdouble(0.0, 0.6)) < 1e-15);
    CHECK(std::abs(h(1, 1)) < 1e-15);
    CHECK(std::abs(h(2, 2) - cdouble(0.0, -0.6)) < 1e-15);
    CHECK(std::abs(h(0, 1) - c) < 1e-15);
    CHECK(std::abs(h(1, 2) - c) < 1e-15);
    CHECK(std::abs(h(0, 2)) == 0.0);
}

TEST_CASE("physical convention applies the axis substitution", "[propagation]") {
    PTArray p{SpinLabel(1), CoefficientFn::constant(0.7), CoefficientFn::constant(1.3),
              PTConvention::physical};
    const GeneratorSet g = spin_generators(SpinLabel(1));
    CHECK((build_hamiltonian(p, 0.0) - RepMatrix(iu * 0.7 * g.Jx + 1.3 * g.Jy)).norm() < 1e-15);
}

TEST_CASE("dimer reduction splits off the average phase", "[propagation]") {
    const auto coupling = CoefficientFn::constant(1.0);
    // alpha1 = 2, alpha2 = 1: alpha = 1/2, phase = e^{i 3 z / 2}
    const auto red = dimer_reduce(CoefficientFn::constant(2.0), CoefficientFn::constant(1.0),
                                  coupling, coupling, 0.0);
    CHECK(std::abs(red.alpha(1.7) - cdouble(0.5)) < 1e-15);
    CHECK(std::abs(red.phase_factor(2.0) - std::exp(iu * 3.0)) < 1e-14);

    const auto equal = dimer_reduce(CoefficientFn::constant(cdouble(0, 1.0)),
                                    CoefficientFn::constant(cdouble(0, 1.0)), coupling, coupling,
                                    0.0);
    CHECK(std::abs(equal.alpha(0.9)) == 0.0);

    const auto balanced = dimer_reduce(CoefficientFn::constant(cdouble(0, 0.5)),
                                       CoefficientFn::constant(cdouble(0, -0.5)), coupling,
                                       coupling, 0.0);
    CHECK(std::abs(balanced.phase_factor(5.0) - cdouble(1.0)) < 1e-15);
}

TEST_CASE("full dimer solution = phase factor times traceless solution", "[propagation]") {
    const cdouble a1(0.8, 0.3), a2(-0.1, 0.5), b1(1.0, -0.2), b2(0.6, 0.4);
    Dimer full{CoefficientFn::constant(a1), CoefficientFn::constant(a2),
               CoefficientFn::constant(b1), CoefficientFn::constant(b2)};
    const auto red = dimer_reduce(full.alpha1, full.alpha2, full.beta1, full.beta2, 0.0);
    Dimer traceless{CoefficientFn::constant(red.alpha(0.0)),
                    CoefficientFn::constant(-red.alpha(0.0)), CoefficientFn::constant(b1),
                    CoefficientFn::constant(b2)};
    CHECK((red.reduced_matrix(0.7) - build_hamiltonian(traceless, 0.7)).norm() < 1e-15);
    const double z = 1.4;
    StateVector e0(2);
    e0 << cdouble(0.9, 0.1), cdouble(-0.3, 0.7);
    const StateVector full_sol = propagator(full, 0.0, z) * e0;
    const StateVector red_sol = red.phase_factor(z) * (propagator(traceless, 0.0, z) * e0);
    CHECK((full_sol - red_sol).norm() < 1e-12);
}

TEST_CASE("dimer decomposition reproduces the PT coefficients and reassembles", "[propagation]") {
    const auto pt = dimer_decompose(cdouble(0, 0.45), 0.9, 0.9);  // alpha=i gamma/2, beta=lambda
    CHECK(pt[0] == Catch::Approx(1.8));
    CHECK(pt[1] == 0.0);
    CHECK(pt[2] == 0.0);
    CHECK(pt[3] == 0.0);
    CHECK(pt[4] == 0.0);
    CHECK(pt[5] == Catch::Approx(0.9));

    const auto zeros = dimer_decompose(0.0, 0.0, 0.0);
    for (double c : zeros) CHECK(c == 0.0);

    oracles::Rng rng(0xE0);
    for (int trial = 0; trial < 30; ++trial) {
        const cdouble alpha(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const cdouble beta1(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const cdouble beta2(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const RepMatrix m = dimer_reassemble(dimer_decompose(alpha, beta1, beta2));
        RepMatrix expected(2, 2);
        expected << alpha, beta1, beta2, -alpha;
        CHECK((m - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("the sign convention dE/dz = +iHE fixes the beat direction", "[propagation]") {
    // two coupled guides, input in guide 0: E1(z) = i sin(lambda z) under the
    // +i convention, so Im E1 > 0 just after launch
    GeneralTridiagonal t{{CoefficientFn::constant(0.0), CoefficientFn::constant(0.0)},
                         {CoefficientFn::constant(1.0)}};
    StateVector e0(2);
    e0 << 1.0, 0.0;
    const PropagationTrace trace = propagate(t, 0.0, 0.5, FieldState{e0, 0.0}, 10);
    for (std::size_t k = 1; k < trace.z.size(); ++k) {
        CHECK(trace.amplitudes[k](1).imag() > 0.0);
        CHECK(std::abs(trace.amplitudes[k](1).real()) < 1e-14);
        CHECK(std::abs(trace.amplitudes[k](1).imag() - std::sin(trace.z[k])) < 1e-13);
    }
}

TEST_CASE("hermitian arrays conserve power", "[propagation]") {
    for (int two_j : {1, 2, 3, 4, 5}) {
        PTArray spec{SpinLabel(two_j), CoefficientFn::constant(0.0), CoefficientFn::constant(1.0)};
        const int d = two_j + 1;
        const PropagationTrace trace =
            propagate(spec, 0.0, 20.0, FieldState{central_input(d), 0.0}, 2000);
        double drift = 0.0;
        for (double p : trace.power) drift = std::max(drift, std::abs(p - trace.power.front()));
        CHECK(drift < 1e-10);
    }
}

TEST_CASE("unbroken trimer power is periodic with period 2 pi / Omega", "[propagation]") {
    const double gamma = 0.5, lambda = 1.0;
    const double omega = std::sqrt(lambda * lambda - gamma * gamma);
    const PropagationTrace trace =
        propagate(trimer(gamma, lambda), 0.0, 30.0, FieldState{central_input(3), 0.0}, 6000);
    CHECK(peak_period(trace) == Catch::Approx(2.0 * pi / omega).epsilon(0.01));
}

TEST_CASE("broken trimer power grows at twice the top eigenvalue rate", "[propagation]") {
    const double gamma = 2.0, lambda = 1.0;
    const PropagationTrace trace =
        propagate(trimer(gamma, lambda), 0.0, 15.0, FieldState{central_input(3), 0.0}, 1500);
    // oracle: largest real part of eig(iH)
    Eigen::ComplexEigenSolver<RepMatrix> es(
        RepMatrix(iu * build_hamiltonian(trimer(gamma, lambda), 0.0)));
    const double rate = es.eigenvalues().real().maxCoeff();
    CHECK(rate == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    // fit log P over the tail
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < trace.z.size(); ++k) {
        if (trace.z[k] < 5.0) continue;
        const double x = trace.z[k], y = std::log(trace.power[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == Catch::Approx(2.0 * rate).epsilon(0.01));
}

TEST_CASE("propagation overflow is reported with its location", "[propagation]") {
    try {
        propagate(trimer(80.0, 1.0), 0.0, 20.0, FieldState{central_input(3), 0.0}, 200);
        FAIL("expected overflow");
    } catch (const PropagationOverflow& e) {
        CHECK(e.z_at > 0.0);
        CHECK(e.z_at <= 20.0);
    }
}

TEST_CASE("matrix-exponential and ODE propagators agree for constant H", "[propagation]") {
    // same Hamiltonian expressed once as constant, once as a frozen harmonic
    PTArray constant = trimer(0.5, 1.0);
    PTArray frozen{SpinLabel(2), CoefficientFn::harmonic(0.5, 0.0, 0.0, 1.0),
                   CoefficientFn::harmonic(1.0, 0.0, 0.0, 1.0)};
    CHECK_FALSE(is_z_independent(frozen));
    const RepMatrix ue = propagator(constant, 0.0, 4.0);
    const RepMatrix uo = propagator(frozen, 0.0, 4.0);
    CHECK((ue - uo).norm() < 1e-8);
}

TEST_CASE("propagator composition law", "[propagation]") {
    SECTION("constant spec composes exactly") {
        CHECK(composition_check(trimer(0.7, 1.0), 0.0, 1.3, 2.9) < 1e-12);
    }
    SECTION("degenerate interval gives zero residual") {
        CHECK(composition_check(trimer(0.7, 1.0), 0.0, 0.0, 2.0) < 1e-13);
    }
    SECTION("z-dependent spec composes to integrator tolerance") {
        PTArray spec{SpinLabel(2), CoefficientFn::harmonic(0.0, 0.0, 1.0, 1.0),
                     CoefficientFn::constant(1.0)};  // gamma(z) = sin z
        CHECK(composition_check(spec, 0.0, 0.9, 2.1) < 1e-8);
    }
}

TEST_CASE("regimes classify by the sign of lambda^2 - gamma^2", "[propagation]") {
    const Regime periodic = classify_regime(0.5, 1.0);
    CHECK(periodic.kind == RegimeKind::Periodic);
    CHECK(periodic.rate == Catch::Approx(std::sqrt(0.75)));

    const Regime power = classify_regime(1.0, 1.0);
    CHECK(power.kind == RegimeKind::PowerLaw);

    const Regime broken = classify_regime(2.0, 1.0);
    CHECK(broken.kind == RegimeKind::Exponential);
    CHECK(broken.rate == Catch::Approx(std::sqrt(3.0)));
}

TEST_CASE("pt_check accepts even profiles and rejects odd ones", "[propagation]") {
    CHECK(pt_check(trimer(0.5, 1.0)));

    PTArray odd{SpinLabel(2), CoefficientFn::polynomial({cdouble(0.0), cdouble(1.0)}),
                CoefficientFn::constant(1.0)};  // gamma(z) = z
    CHECK_FALSE(pt_check(odd));

    PTArray even{SpinLabel(2), CoefficientFn::harmonic(0.0, 1.0, 0.0, 1.0),
                 CoefficientFn::constant(1.0)};  // gamma(z) = cos z
    CHECK(pt_check(even));

    CHECK_THROWS_AS(pt_check(Dimer{CoefficientFn::constant(0.0), CoefficientFn::constant(0.0),
                                   CoefficientFn::constant(1.0), CoefficientFn::constant(1.0)}),
                    std::invalid_argument);
}

TEST_CASE("revival length matches the eigenvalue-gap oracle", "[propagation]") {
    PTArray jx_half{SpinLabel(1), CoefficientFn::constant(0.0), CoefficientFn::constant(1.0)};
    const auto l_half = revival_length(jx_half);
    REQUIRE(l_half.has_value());
    CHECK(*l_half == Catch::Approx(2.0 * pi).epsilon(1e-10));

    const auto l_trimer = revival_length(trimer(0.5, 1.0));
    REQUIRE(l_trimer.has_value());
    CHECK(*l_trimer == Catch::Approx(2.0 * pi / std::sqrt(0.75)).epsilon(1e-10));
    const RepMatrix u = propagator(trimer(0.5, 1.0), 0.0, *l_trimer);
    const cdouble phase = u(0, 0) / std::abs(u(0, 0));
    CHECK((u - phase * RepMatrix::Identity(3, 3)).norm() < 1e-8);

    CHECK_FALSE(revival_length(trimer(2.0, 1.0)).has_value());
    CHECK_THROWS_AS(
        revival_length(PTArray{SpinLabel(1), CoefficientFn::harmonic(0.0, 0.5, 0.0, 1.0),
                               CoefficientFn::constant(1.0)}),
        std::invalid_argument);
}

TEST_CASE("oscillation period diverges toward the regime boundary", "[propagation]") {
    const double base = peak_period(
        propagate(trimer(0.5, 1.0), 0.0, 30.0, FieldState{central_input(3), 0.0}, 4000));
    double prev = base;
    for (double gamma : {0.9, 0.999}) {
        const double omega = std::sqrt(1.0 - gamma * gamma);
        const double horizon = 3.5 * 2.0 * pi / omega;
        const double period = peak_period(
            propagate(trimer(gamma, 1.0), 0.0, horizon, FieldState{central_input(3), 0.0}, 8000));
        CHECK(period > 1.9 * prev);
        prev = period;
    }
    CHECK(prev > 15.0 * base);
}

TEST_CASE("power non-conservation stays bounded in the unbroken regime", "[propagation]") {
    const PropagationTrace trace =
        propagate(trimer(0.6, 1.0), 0.0, 40.0, FieldState{central_input(3), 0.0}, 4000);
    const double pmax = *std::max_element(trace.power.begin(), trace.power.end());
    const double pmin = *std::min_element(trace.power.begin(), trace.power.end());
    CHECK(pmax / pmin > 1.1);    // genuinely non-conserved
    CHECK(pmax / pmin < 100.0);  // but bounded oscillation
}

TEST_CASE("constant PT propagation is a coherent-state orbit in the chart", "[propagation]") {
    // Kz-compact realization of the PT generator: H = i gamma Jy + lambda Jz,
    // whose propagator stays inside the (zeta, beta) chart.
    const double gamma = 0.5, lambda = 1.0;
    Dimer chart{CoefficientFn::constant(lambda / 2.0), CoefficientFn::constant(-lambda / 2.0),
                CoefficientFn::constant(gamma / 2.0), CoefficientFn::constant(-gamma / 2.0)};
    const GeneratorSet g = spin_generators(SpinLabel(1));
    CHECK((build_hamiltonian(chart, 0.0) - RepMatrix(iu * gamma * g.Jy + lambda * g.Jz)).norm() <
          1e-15);

    oracles::Rng rng(0xE1);
    const StateVector e0 = rng.vector(2);
    for (double z : {0.4, 1.1, 2.7, 5.0}) {
        const Eigen::Matrix2cd u = propagator(chart, 0.0, z);
        const GroupPoint gz = coordinates_from_matrix(u);
        const StateVector direct = u * e0;
        const StateVector orbit = coherent_state(SpinLabel(1), e0, gz);
        CHECK((direct - orbit).norm() < 1e-10);
    }
}

TEST_CASE("trace sampling is consistent", "[propagation]") {
    const PropagationTrace trace =
        propagate(trimer(0.5, 1.0), 0.0, 5.0, FieldState{central_input(3), 0.0}, 50);
    REQUIRE(trace.z.size() == 51);
    CHECK(trace.z.front() == 0.0);
    CHECK(trace.z.back() == Catch::Approx(5.0));
    for (std::size_t k = 1; k < trace.z.size(); ++k) CHECK(trace.z[k] > trace.z[k - 1]);
    for (std::size_t k = 0; k < trace.z.size(); ++k)
        CHECK(trace.power[k] == Catch::Approx(trace.amplitudes[k].squaredNorm()));
    CHECK_THROWS_AS(propagate(trimer(0.5, 1.0), 1.0, 0.0, FieldState{central_input(3), 0.0}, 10),
                    std::invalid_argument);
}
