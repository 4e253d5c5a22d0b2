#include <catch2/catch_amalgamated.hpp>

#include "kamnls/params.hpp"

using namespace kamnls;

TEST_CASE("budget fixed fields follow tau and mu1") {
    auto b3 = derive_budget(3, 3 + 1, 0);
    CHECK(b3.kappa4 == 7 * 4 + 3);
    auto bt3 = derive_budget(2, 3, 0);  // tau = 3
    CHECK(bt3.kappa4 == 24);
    CHECK(bt3.kappa5 == 26);

    auto b = derive_budget(2, 4, 0);
    CHECK(b.p0 == 2);
    CHECK(b.eta1 == 16);  // 2 p0 + 2 tau + 4
    CHECK(b.mu == 35);    // mu1 = 0
    CHECK(b.kappa0 == 41);
    CHECK(b.m1 == 2 + 2 * 2 + 10);
    CHECK(b.m2 == b.m1 + b.kappa5);
    CHECK(b.kappa3 == b.kappa1 + b.eta1);
    CHECK(b.a_exp == Rat(1, 4 * b.kappa0 + b.kappa2 + 1));
}

TEST_CASE("derived budgets satisfy the exponent inequalities on re-check") {
    for (int d : {2, 3, 4}) {
        for (long tau : {long(d + 1), long(d + 2)}) {
            for (long mu1 : {0L, 3L}) {
                auto b = derive_budget(d, tau, mu1);
                auto c = check_exponents(b);
                INFO("d=" << d << " tau=" << tau << " mu1=" << mu1);
                CHECK(c.exp1);
                CHECK(c.exp2);
                CHECK(c.exp3);
                CHECK(c.exp4);
                CHECK(b.p2 == b.p1 + b.dp);
            }
        }
    }
}

TEST_CASE("seeds at or below the minimum do not change the result, larger seeds are kept") {
    auto b0 = derive_budget(2, 4, 0);
    auto b1 = derive_budget(2, 4, 0, 1, 1);
    CHECK(b0.kappa1 == b1.kappa1);
    CHECK(b0.kappa2 == b1.kappa2);
    auto b2 = derive_budget(2, 4, 0, b0.kappa1 + 50, b0.kappa2);
    CHECK(b2.kappa1 == b0.kappa1 + 50);
    CHECK(b2.kappa2 >= b0.kappa2);
    CHECK(check_exponents(b2).all());
}

TEST_CASE("schedule matches the closed forms") {
    auto b = derive_budget(2, 4, 0);
    auto s0 = schedule(b, 0, 10.0, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0);
    CHECK(s0.gamma_n == 0.5);
    CHECK(s0.rho_n == 0.0);
    CHECK(s0.Kn == 10.0);

    auto s1 = schedule(b, 1, 10.0, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0);
    CHECK(s1.Kn == Catch::Approx(std::pow(10.0, 1.5)));
    CHECK(s1.gamma_n == Catch::Approx(0.5 * 7.0 / 8.0));
    CHECK(s1.rho_n == std::pow(0.5, 9));

    // recursion vs closed form, and K_{n+1} = K_n^{3/2} exactly in log rep
    double g = 0.5;
    for (int n = 1; n <= 12; ++n) {
        g *= 1.0 - std::pow(0.5, n + 2);
        auto sn = schedule(b, n, 10.0, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0);
        CHECK(sn.gamma_n == Catch::Approx(g).epsilon(1e-15));
        auto sm = schedule(b, n - 1, 10.0, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0);
        CHECK(sn.log2_Kn == Catch::Approx(1.5 * sm.log2_Kn).epsilon(1e-15));
        CHECK(sn.gamma_n >= 0.5 * 0.5);
        CHECK(sn.a_n >= 0.5);
        CHECK(sn.s_n >= 0.5);
    }
    // geometric limits
    auto sbig = schedule(b, 40, 10.0, 0.5, 1.0, 1.0, 1.0, 2.0, 1.0);
    CHECK(sbig.a_n == Catch::Approx(0.5).epsilon(1e-10));
    CHECK(sbig.G_n == Catch::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("n_star depth") {
    auto b = derive_budget(2, 4, 0);
    auto s = schedule(b, 2, 4.0, 0.5, 1, 1, 1, 1, 1);
    double raw = 2 + std::log(double(b.kappa2) / double(b.kappa4)) / std::log(1.5);
    CHECK(s.n_star >= raw - 1e-9);
    CHECK(s.n_star < raw + 1.0);
}

TEST_CASE("smallness: tiny eps0 passes the eps0-power bounds") {
    auto b = derive_budget(2, 4, 0);
    auto rep = check_smallness(b, 1e-300, 2.0, 1e-100, 10.0);
    REQUIRE(rep.items.size() == 5);
    CHECK(rep.items[0].pass);  // eps0 G0^3
    CHECK(rep.items[1].pass);  // eps0 G0^2 / R0
    CHECK(rep.items[2].pass);  // (1s1)
}

TEST_CASE("smallness: direct failure case eps0*G0^3 = 2") {
    auto b = derive_budget(2, 4, 0);
    auto rep = check_smallness(b, 0.25, 2.0, 1.0, 10.0);
    CHECK(rep.order_ok);
    CHECK_FALSE(rep.items[0].pass);
    CHECK(rep.items[0].log10_lhs == Catch::Approx(std::log10(2.0)));
}

TEST_CASE("smallness threshold under the scale ties: found, monotone, reproducible") {
    auto b = derive_budget(2, 4, 0);
    const double c_gamma = 0.01, G0 = 2.0;
    double thr = smallness_threshold_log10xi(b, c_gamma, G0);
    REQUIRE(std::isfinite(thr));
    CHECK(check_smallness_tied(b, std::pow(10.0, thr - 1.0), c_gamma, G0).all());
    CHECK_FALSE(check_smallness_tied(b, std::pow(10.0, thr + 1.0), c_gamma, G0).all());

    // decreasing |xi| never flips pass -> fail
    bool passed_before = false;
    for (double l10 = thr + 5.0; l10 > thr - 30.0; l10 -= 0.5) {
        bool p = check_smallness_tied(b, std::pow(10.0, l10), c_gamma, G0).all();
        if (passed_before) CHECK(p);
        passed_before = passed_before || p;
    }
    CHECK(passed_before);

    // bit-for-bit reproducibility
    double thr2 = smallness_threshold_log10xi(derive_budget(2, 4, 0), c_gamma, G0);
    CHECK(std::memcmp(&thr, &thr2, sizeof(double)) == 0);
}

TEST_CASE("unsatisfiable seeds are reported") {
    CHECK_THROWS_AS(derive_budget(2, 4, 0, 999999, 999999, 1000000), KamError);
    CHECK_THROWS_AS(derive_budget(1, 4, 0), KamError);
    CHECK_THROWS_AS(derive_budget(3, 2, 0), KamError);
}
