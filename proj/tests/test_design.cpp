#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "waveinform/design.hpp"
#include "waveinform/sparse_fast.hpp"

#include <algorithm>
#include <cmath>

using namespace waveinform;

namespace {

HyperBox unit_box(int d) {
    HyperBox b;
    b.lower = Eigen::VectorXd::Zero(d);
    b.upper = Eigen::VectorXd::Ones(d);
    return b;
}

HyperBox mixed_box() {
    HyperBox b;
    b.lower = Eigen::Vector3d(-1.0, 0.2, 1e-8);
    b.upper = Eigen::Vector3d(3.0, 0.8, 1e-2);
    b.log_scale = {false, false, true};
    return b;
}

double unit_coord(double x, const HyperBox& b, Eigen::Index a) {
    if (b.is_log(a)) return std::log(x / b.lower[a]) / std::log(b.upper[a] / b.lower[a]);
    return (x - b.lower[a]) / (b.upper[a] - b.lower[a]);
}

}  // namespace

TEST_CASE("LHS puts one point in every stratum of every axis") {
    const HyperBox box = mixed_box();
    for (int n : {1, 7, 20, 64}) {
        const auto pts = lhs_design(n, box, 5, 99);
        REQUIRE(pts.size() == static_cast<std::size_t>(n));
        for (Eigen::Index a = 0; a < box.dim(); ++a) {
            std::vector<int> strata;
            for (const auto& p : pts) {
                CHECK(p[a] >= box.lower[a]);
                CHECK(p[a] <= box.upper[a]);
                strata.push_back(std::min(n - 1, static_cast<int>(std::floor(unit_coord(p[a], box, a) * n))));
            }
            std::sort(strata.begin(), strata.end());
            for (int i = 0; i < n; ++i) CHECK(strata[i] == i);
        }
    }
}

TEST_CASE("maximin restarts never worsen the design and are reproducible") {
    const HyperBox box = unit_box(4);
    const auto one = lhs_design(15, box, 1, 5);
    const auto many = lhs_design(15, box, 50, 5);
    CHECK(min_pairwise_distance(many) >= min_pairwise_distance(one));
    CHECK(lhs_design(15, box, 50, 5) == many);
    CHECK(lhs_design(15, box, 50, 6) != many);
    CHECK_THROWS((void)lhs_design(0, box, 1, 1));
}

TEST_CASE("logit map round trip") {
    const HyperBox box = mixed_box();
    const Eigen::Vector3d x(0.5, 0.61, 3e-5);
    const Eigen::VectorXd back = to_box(to_unbounded(x, box), box);
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd huge = to_box(Eigen::Vector3d(1e3, -1e3, 40.0), box);
    CHECK(huge[0] == box.upper[0]);
    CHECK(huge[1] == box.lower[1]);
    CHECK(huge[2] <= box.upper[2]);
}

TEST_CASE("Nelder-Mead finds interior and boundary minima") {
    const HyperBox box = mixed_box();
    const Eigen::Vector3d target(1.2, 0.35, 1e-4);
    const Objective bowl = [&](const Eigen::VectorXd& x) {
        return std::pow(x[0] - target[0], 2) + std::pow(x[1] - target[1], 2) +
               std::pow(std::log10(x[2] / target[2]), 2);
    };
    const auto r = minimize_box(bowl, box, Eigen::Vector3d(-0.5, 0.7, 1e-6), 1e-8, 5000);
    CHECK(r.x[0] == doctest::Approx(target[0]).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(target[1]).epsilon(1e-5));
    CHECK(r.x[2] == doctest::Approx(target[2]).epsilon(1e-4));
    CHECK(r.f < 1e-9);

    const Objective tilted = [](const Eigen::VectorXd& x) { return x[0] - x[1]; };
    const auto b = minimize_box(tilted, unit_box(2), Eigen::Vector2d(0.5, 0.5), 1e-9, 5000);
    CHECK(b.x[0] < 1e-6);
    CHECK(b.x[1] > 1 - 1e-6);

    const Objective rosen = [](const Eigen::VectorXd& x) {
        return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    };
    HyperBox sq;
    sq.lower = Eigen::Vector2d(-2, -2);
    sq.upper = Eigen::Vector2d(2, 3);
    const auto rr = minimize_box(rosen, sq, Eigen::Vector2d(-1.2, 1.0), 1e-10, 10000);
    CHECK(rr.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(rr.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("Nelder-Mead respects the evaluation budget and skips non-finite values") {
    int calls = 0;
    const Objective f = [&](const Eigen::VectorXd& x) {
        ++calls;
        return x[0] > 0.7 ? std::nan("") : std::pow(x[0] - 0.9, 2) + x[1] * x[1];
    };
    const auto r = minimize_box(f, unit_box(2), Eigen::Vector2d(0.2, 0.5), 1e-12, 60);
    CHECK(r.evals == calls);
    CHECK(r.evals <= 60 + 3);
    CHECK(std::isfinite(r.f));
    CHECK(r.x[0] <= 0.7);
    const Objective dead = [](const Eigen::VectorXd&) { return std::nan(""); };
    CHECK_THROWS((void)minimize_box(dead, unit_box(2), Eigen::Vector2d(0.2, 0.5)));
}

TEST_CASE("parameter layout") {
    HyperParams p;
    p.c = 0.45;
    p.lambda = 3e-4;
    p.u = ComponentParams{Vec3(0.1, 0.2, 0.3), 0.25, 0.2, 3.0};
    p.v = ComponentParams{Vec3(0.4, 0.5, 0.6), 0.15, 0.03, 2.0};
    const ParamLayout both{true, true};
    const Eigen::VectorXd x = both.encode(p);
    CHECK(x.size() == 14);
    CHECK(both.names().size() == 14);
    CHECK(both.names().front() == "x0_x_u");
    CHECK(both.names().back() == "lambda");
    const HyperParams q = both.decode(x);
    CHECK(q.v->rho == 0.03);
    CHECK(q.u->x0 == p.u->x0);
    CHECK(q.c == p.c);
    CHECK(both.encode(q) == x);

    const ParamLayout vonly{false, true};
    CHECK(vonly.encode(p).size() == 8);
    CHECK_FALSE(vonly.decode(vonly.encode(p)).u.has_value());
    HyperParams none;
    CHECK_THROWS((void)vonly.encode(none));

    const HyperBox bb = default_box(both), bu = default_box(ParamLayout{});
    CHECK(bb.dim() == 14);
    CHECK(bu.dim() == 8);
    CHECK(bu.lower[3] == 0.03);
    CHECK(bb.lower[3] == 0.05);
    CHECK(bu.is_log(7));
    CHECK_FALSE(bu.is_log(6));
}

TEST_CASE("multistart escapes a local minimum and is reproducible") {
    // Deep well near the upper corner, shallow well near the lower one.
    const ParamLayout layout;
    HyperBox box = default_box(layout);
    Eigen::VectorXd deep = box.lower + 0.8 * (box.upper - box.lower);
    Eigen::VectorXd shallow = box.lower + 0.2 * (box.upper - box.lower);
    deep[7] = 1e-4;
    shallow[7] = 1e-7;
    const auto scaled = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double d = i == 7 ? std::log10(x[i] / c[i]) / 6.0 : (x[i] - c[i]) / (box.upper[i] - box.lower[i]);
            s += d * d;
        }
        return s;
    };
    const Objective f = [&](const Eigen::VectorXd& x) {
        return std::min(scaled(x, deep) - 1.0, scaled(x, shallow) - 0.5);
    };
    const auto fit = multistart_minimize(f, layout, box, 12, 7, FitOptions{1e-7, 4000, 10});
    CHECK(fit.trace.size() == 12);
    CHECK(fit.best_nll == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(fit.best.c == doctest::Approx(deep[6]).epsilon(1e-3));
    double lowest = 1e300;
    for (const auto& rec : fit.trace) {
        CHECK_FALSE(rec.failed);
        CHECK(rec.evals > 0);
        lowest = std::min(lowest, rec.nll_end);
    }
    CHECK(fit.best_nll == lowest);
    const auto again = multistart_minimize(f, layout, box, 12, 7, FitOptions{1e-7, 4000, 10});
    for (std::size_t s = 0; s < fit.trace.size(); ++s) {
        CHECK(again.trace[s].theta_end == fit.trace[s].theta_end);
        CHECK(again.trace[s].nll_end == fit.trace[s].nll_end);
    }
}

TEST_CASE("likelihood objective decodes parameters and matches the fast path") {
    SensorDataset d;
    d.positions = {Vec3(0.4, 0.5, 0.5), Vec3(0.6, 0.4, 0.5)};
    for (int k = 0; k < 10; ++k) d.times.push_back(0.1 * k);
    for (int i = 0; i < 20; ++i) d.values.push_back(std::sin(0.3 * i));
    const ParamLayout layout;
    HyperParams p;
    p.c = 0.5;
    p.lambda = 1e-3;
    p.u = ComponentParams{Vec3(0.5, 0.5, 0.5), 0.3, 0.2, 3.0};
    const auto Z = d.points();
    const double direct = fast_nll(WaveKernel(p), std::span<const SpaceTimePoint>(Z),
                                   std::span<const double>(d.values), p.lambda);
    CHECK(wave_nll_objective(d, layout)(layout.encode(p)) == direct);
}
