#include "doctest.h"
#include "toda/jets.hpp"
#include "toda/util.hpp"

using namespace toda;

namespace {
Jet random_jet(Rng& rng, int lead, int depth, bool unit_lead = false) {
    std::vector<cplx> c(size_t(depth) + 1);
    for (auto& x : c) x = rng.box(1.0);
    if (unit_lead) c[0] = 1.0;
    return Jet(lead, std::move(c));
}
}  // namespace

TEST_CASE("(1 + a/k)(1 - a/k) = 1 - a^2/k^2") {
    cplx a(0.7, -0.3);
    Jet j1(0, {1.0, a, 0.0});
    Jet j2(0, {1.0, -a, 0.0});
    Jet p = j1 * j2;
    CHECK(p.lead() == 0);
    CHECK(std::abs(p.coeff(0) - 1.0) == 0.0);
    CHECK(std::abs(p.coeff(-1)) == 0.0);
    CHECK(std::abs(p.coeff(-2) + a * a) < 1e-15);
}

TEST_CASE("inverse of 1 + 1/k to depth 4 alternates signs") {
    Jet j(0, {1.0, 1.0, 0.0, 0.0, 0.0});
    Jet inv = j.inverse();
    std::vector<double> expect = {1, -1, 1, -1, 1};
    for (int s = 0; s <= 4; ++s) CHECK(std::abs(inv.coeff(-s) - expect[size_t(s)]) < 1e-15);
}

TEST_CASE("exp(log(j)) = j for random unit-lead jets") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        Jet j = random_jet(rng, 0, 8, true);
        Jet back = jet_exp(jet_log(j));
        CHECK(jet_distance(back, j) < 1e-13);
    }
}

TEST_CASE("ring axioms hold to roundoff on random jets") {
    Rng rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        Jet a = random_jet(rng, rng.raw() % 3 - 1, 8);
        Jet b = random_jet(rng, rng.raw() % 3 - 1, 8);
        Jet c = random_jet(rng, rng.raw() % 3 - 1, 8);
        CHECK(jet_distance((a * b) * c, a * (b * c)) < 1e-13 * (1 + a.max_abs() * b.max_abs() * c.max_abs()));
        CHECK(jet_distance(a * (b + c), a * b + a * c) < 1e-13 * (1 + a.max_abs() * (b.max_abs() + c.max_abs())));
        CHECK(jet_distance(a + b, b + a) == 0.0);
    }
}

TEST_CASE("j * inverse(j) = 1 within depth") {
    Rng rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        Jet j = random_jet(rng, 2, 8);
        if (std::abs(j.c0()) < 0.05) continue;
        Jet inv = j.inverse();
        Jet p = j * inv;
        double scale = 1.0 + j.max_abs() * inv.max_abs();
        CHECK(p.lead() == 0);
        CHECK(std::abs(p.coeff(0) - 1.0) < 1e-13 * scale);
        for (int s = 1; s <= p.depth(); ++s) CHECK(std::abs(p.coeff(-s)) < 1e-13 * scale);
    }
}

TEST_CASE("division and log reject singular jets") {
    Jet z(0, {0.0, 1.0, 2.0});
    Jet ok(0, {1.0, 0.5});
    CHECK_THROWS_AS((void)(ok / z), singular_jet_error);
    CHECK_THROWS_AS((void)jet_log(z), singular_jet_error);
    Jet pos(1, {1.0, 0.5});
    CHECK_THROWS_AS((void)jet_log(pos), std::domain_error);
    CHECK_THROWS_AS((void)jet_exp(pos), std::domain_error);
}

TEST_CASE("scale_shift multiplies by alpha k^m") {
    Jet j(0, {1.0, 2.0, 3.0});
    Jet s = jet_scale_shift(j, cplx(0, 2), -3);
    CHECK(s.lead() == -3);
    CHECK(std::abs(s.coeff(-3) - cplx(0, 2)) < 1e-15);
    CHECK(std::abs(s.coeff(-4) - cplx(0, 4)) < 1e-15);
}

TEST_CASE("arithmetic keeps the minimum common depth") {
    Jet a(0, {1.0, 1.0, 1.0, 1.0});  // valid to k^-3
    Jet b(0, {1.0, 1.0});            // valid to k^-1
    CHECK((a + b).tail_power() == -1);
    CHECK((a * b).depth() == 1);
}
