#include "waveinform/design.hpp"
#include "waveinform/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

namespace waveinform {

void HyperBox::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw std::invalid_argument("box bounds differ in length");
    if (!log_scale.empty() && log_scale.size() != static_cast<std::size_t>(lower.size()))
        throw std::invalid_argument("log-scale flags differ in length from the box");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw std::invalid_argument("box needs lower < upper");
        if (is_log(i) && !(lower[i] > 0)) throw std::invalid_argument("log-scale bound must be positive");
    }
}

namespace {

bool log_axis(const HyperBox& b, Eigen::Index i) {
    return !b.log_scale.empty() && b.log_scale[static_cast<std::size_t>(i)];
}

// Box coordinate -> [0,1] and back, honouring log-scale axes.
double to_unit(double x, const HyperBox& b, Eigen::Index i) {
    if (log_axis(b, i))
        return (std::log(x) - std::log(b.lower[i])) / (std::log(b.upper[i]) - std::log(b.lower[i]));
    return (x - b.lower[i]) / (b.upper[i] - b.lower[i]);
}

double from_unit(double u, const HyperBox& b, Eigen::Index i) {
    if (log_axis(b, i))
        return std::exp(std::log(b.lower[i]) + u * (std::log(b.upper[i]) - std::log(b.lower[i])));
    return b.lower[i] + u * (b.upper[i] - b.lower[i]);
}

}  // namespace

bool HyperBox::is_log(Eigen::Index i) const { return log_axis(*this, i); }

double min_pairwise_distance(const std::vector<Eigen::VectorXd>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, (pts[i] - pts[j]).norm());
    return best;
}

std::vector<Eigen::VectorXd> lhs_design(int n, const HyperBox& box, int restarts,
                                        std::uint64_t seed) {
    box.validate();
    if (n < 1) throw std::invalid_argument("design needs at least one point");
    const Eigen::Index d = box.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    std::vector<Eigen::VectorXd> best;
    double best_score = -1.0;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        std::vector<Eigen::VectorXd> unit(n, Eigen::VectorXd(d));
        std::vector<int> perm(n);
        for (Eigen::Index a = 0; a < d; ++a) {
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int i = 0; i < n; ++i) unit[i][a] = (perm[i] + U(rng)) / n;
        }
        // maximin is judged in unit coordinates so axes weigh equally
        const double score = n > 1 ? min_pairwise_distance(unit) : 0.0;
        if (score > best_score) {
            best_score = score;
            best = std::move(unit);
        }
    }
    for (auto& p : best)
        for (Eigen::Index a = 0; a < d; ++a) p[a] = from_unit(p[a], box, a);
    return best;
}

Eigen::VectorXd to_unbounded(const Eigen::VectorXd& x, const HyperBox& box) {
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double u = std::clamp(to_unit(x[i], box, i), 1e-12, 1.0 - 1e-12);
        y[i] = std::log(u / (1.0 - u));
    }
    return y;
}

Eigen::VectorXd to_box(const Eigen::VectorXd& y, const HyperBox& box) {
    Eigen::VectorXd x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double u = 1.0 / (1.0 + std::exp(-y[i]));
        x[i] = std::clamp(from_unit(u, box, i), box.lower[i], box.upper[i]);
    }
    return x;
}

MinimizeResult minimize_box(const Objective& f, const HyperBox& box, const Eigen::VectorXd& x_start,
                            double tol, int max_evals) {
    box.validate();
    const Eigen::Index d = box.dim();
    if (x_start.size() != d) throw std::invalid_argument("start point has wrong dimension");
    MinimizeResult res;
    auto eval = [&](const Eigen::VectorXd& y) {
        ++res.evals;
        const double v = f(to_box(y, box));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    auto unit_of = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd u(d);
        for (Eigen::Index i = 0; i < d; ++i) u[i] = 1.0 / (1.0 + std::exp(-y[i]));
        return u;
    };

    std::vector<Eigen::VectorXd> simplex(d + 1, to_unbounded(x_start, box));
    for (Eigen::Index i = 0; i < d; ++i) simplex[i + 1][i] += simplex[i + 1][i] > 0 ? -0.5 : 0.5;
    std::vector<double> fv(d + 1);
    for (Eigen::Index i = 0; i <= d; ++i) fv[i] = eval(simplex[i]);
    if (std::all_of(fv.begin(), fv.end(), [](double v) { return !std::isfinite(v); }))
        throw std::runtime_error("objective is non-finite at every initial simplex vertex");

    std::vector<Eigen::Index> order(d + 1);
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const Eigen::Index best = order.front(), worst = order.back(), second = order[d - 1];

        double diameter = 0.0;
        const Eigen::VectorXd ub = unit_of(simplex[best]);
        for (Eigen::Index i = 0; i <= d; ++i)
            diameter = std::max(diameter, (unit_of(simplex[i]) - ub).cwiseAbs().maxCoeff());
        if (diameter <= tol || res.evals >= max_evals) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = 0; i <= d; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= static_cast<double>(d);

        const Eigen::VectorXd xr = centroid + (centroid - simplex[worst]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        const Eigen::VectorXd xc = outside ? centroid + 0.5 * (xr - centroid)
                                           : centroid + 0.5 * (simplex[worst] - centroid);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            simplex[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (Eigen::Index i = 0; i <= d; ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
            fv[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    res.x = to_box(simplex[static_cast<std::size_t>(it - fv.begin())], box);
    res.f = *it;
    return res;
}

Eigen::VectorXd ParamLayout::encode(const HyperParams& p) const {
    Eigen::VectorXd x(size());
    int k = 0;
    auto put = [&](const std::optional<ComponentParams>& c, bool on) {
        if (!on) return;
        if (!c) throw std::invalid_argument("parameters lack a component the layout expects");
        x.segment<3>(k) = c->x0;
        x[k + 3] = c->R;
        x[k + 4] = c->rho;
        x[k + 5] = c->sigma2;
        k += 6;
    };
    put(p.u, u);
    put(p.v, v);
    x[k] = p.c;
    x[k + 1] = p.lambda;
    return x;
}

HyperParams ParamLayout::decode(const Eigen::VectorXd& x) const {
    if (x.size() != size()) throw std::invalid_argument("encoded parameters have wrong length");
    HyperParams p;
    p.alpha_cut = alpha_cut;
    int k = 0;
    auto take = [&]() {
        ComponentParams c;
        c.x0 = x.segment<3>(k);
        c.R = x[k + 3];
        c.rho = x[k + 4];
        c.sigma2 = x[k + 5];
        k += 6;
        return c;
    };
    if (u) p.u = take();
    if (v) p.v = take();
    p.c = x[k];
    p.lambda = x[k + 1];
    return p;
}

std::vector<std::string> ParamLayout::names() const {
    std::vector<std::string> out;
    for (const char* comp : {"u", "v"}) {
        if ((comp[0] == 'u' && !u) || (comp[0] == 'v' && !v)) continue;
        for (const char* f : {"x0_x", "x0_y", "x0_z", "R", "rho", "sigma2"})
            out.push_back(std::string(f) + "_" + comp);
    }
    out.emplace_back("c");
    out.emplace_back("lambda");
    return out;
}

HyperBox default_box(const ParamLayout& layout) {
    const bool both = layout.u && layout.v;
    std::vector<double> lo, hi;
    auto block = [&] {
        for (int i = 0; i < 3; ++i) lo.push_back(0.0), hi.push_back(1.0);
        lo.push_back(both ? 0.05 : 0.03), hi.push_back(both ? 0.4 : 0.5);
        lo.push_back(0.02), hi.push_back(2.0);
        lo.push_back(0.1), hi.push_back(5.0);
    };
    if (layout.u) block();
    if (layout.v) block();
    lo.push_back(0.2), hi.push_back(0.8);
    lo.push_back(1e-8), hi.push_back(1e-2);
    HyperBox b;
    b.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    b.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    b.log_scale.assign(lo.size(), false);
    b.log_scale.back() = true;
    return b;
}

FitResult multistart_minimize(const Objective& objective, const ParamLayout& layout,
                              const HyperBox& box, int n_mult, std::uint64_t seed,
                              const FitOptions& opts) {
    if (n_mult < 1) throw std::invalid_argument("multistart needs at least one start");
    if (box.dim() != layout.size()) throw std::invalid_argument("box does not match the layout");
    const auto starts = lhs_design(n_mult, box, opts.lhs_restarts, seed);
    std::vector<StartRecord> trace(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < n_mult; ++s) {
        auto& rec = trace[s];
        rec.start_id = s;
        rec.theta_start = starts[s];
        try {
            const auto r = minimize_box(objective, box, starts[s], opts.tol, opts.max_evals);
            rec.theta_end = r.x;
            rec.nll_end = r.f;
            rec.evals = r.evals;
            rec.failed = !std::isfinite(r.f);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
            rec.theta_end = starts[s];
            rec.nll_end = std::numeric_limits<double>::infinity();
        }
    }
    FitResult out;
    out.trace = std::move(trace);
    int best = -1;
    for (int s = 0; s < n_mult; ++s)
        if (!out.trace[s].failed && (best < 0 || out.trace[s].nll_end < out.trace[best].nll_end))
            best = s;
    if (best < 0) {
        std::string msg = "all " + std::to_string(n_mult) + " starts failed";
        if (!out.trace.front().error.empty()) msg += ": " + out.trace.front().error;
        throw std::runtime_error(msg);
    }
    out.best = layout.decode(out.trace[best].theta_end);
    out.best_nll = out.trace[best].nll_end;
    return out;
}

Objective wave_nll_objective(const SensorDataset& data, const ParamLayout& layout) {
    auto Z = std::make_shared<std::vector<SpaceTimePoint>>(data.points());
    auto y = std::make_shared<std::vector<double>>(data.values);
    return [Z, y, layout](const Eigen::VectorXd& theta) {
        try {
            const HyperParams p = layout.decode(theta);
            return fast_nll(WaveKernel(p), std::span<const SpaceTimePoint>(*Z),
                            std::span<const double>(*y), p.lambda);
        } catch (const SingularCovarianceError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
}

FitResult multistart_fit(const SensorDataset& data, const ParamLayout& layout, const HyperBox& box,
                         int n_mult, std::uint64_t seed, const FitOptions& opts) {
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    return multistart_minimize(wave_nll_objective(data, layout), layout, box, n_mult, seed, opts);
}

}  // namespace waveinform
