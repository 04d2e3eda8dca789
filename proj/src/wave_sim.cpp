#include "waveinform/wave_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace waveinform {

int SimConfig::cells() const { return static_cast<int>(std::ceil(L / dx - 1e-9)); }

void SimConfig::validate() const {
    if (!(L > 0 && dx > 0 && dt > 0 && c > 0 && T > 0))
        throw std::invalid_argument("simulation parameters must be positive");
    if (abc_order != 1 && abc_order != 2) throw std::invalid_argument("abc_order must be 1 or 2");
    if (courant() > 1.0 / std::sqrt(3.0)) {
        std::ostringstream os;
        os << "CFL violated: c dt / dx = " << courant() << " > 1/sqrt(3)";
        throw std::invalid_argument(os.str());
    }
}

InitialCondition InitialCondition::raised_cosine(const Vec3& x0, double R, double A) {
    InitialCondition ic;
    ic.kind = Kind::raised_cosine;
    ic.x0 = x0;
    ic.R = R;
    ic.A = A;
    ic.validate();
    return ic;
}

InitialCondition InitialCondition::ring_cosine(const Vec3& x0, double R1, double R2, double A) {
    InitialCondition ic;
    ic.kind = Kind::ring_cosine;
    ic.x0 = x0;
    ic.R1 = R1;
    ic.R2 = R2;
    ic.A = A;
    ic.validate();
    return ic;
}

void InitialCondition::validate() const {
    if (kind == Kind::raised_cosine && !(R > 0)) throw std::invalid_argument("radius must be positive");
    if (kind == Kind::ring_cosine && !(R1 > 0 && R1 < R2))
        throw std::invalid_argument("ring radii must satisfy 0 < R1 < R2");
    if (kind == Kind::custom && !custom) throw std::invalid_argument("custom initial condition without handle");
}

namespace {

double raised(double d, double R, double A) {
    return d <= R ? A * (1.0 + std::cos(std::numbers::pi * d / R)) : 0.0;
}

double ring(double d, double R1, double R2, double A) {
    if (d < R1 || d > R2) return 0.0;
    return A * (1.0 + std::cos(2.0 * std::numbers::pi * (d - 0.5 * (R1 + R2)) / (R2 - R1)));
}

}  // namespace

double ic_eval(const InitialCondition& ic, const Vec3& x) {
    switch (ic.kind) {
        case InitialCondition::Kind::zero: return 0.0;
        case InitialCondition::Kind::raised_cosine: return raised((x - ic.x0).norm(), ic.R, ic.A);
        case InitialCondition::Kind::ring_cosine:
            return ring((x - ic.x0).norm(), ic.R1, ic.R2, ic.A);
        case InitialCondition::Kind::custom: return ic.custom(x);
    }
    return 0.0;
}

RadialProfile radial_profile(const InitialCondition& ic) {
    RadialProfile p;
    p.centre = ic.x0;
    const double A = ic.A;
    switch (ic.kind) {
        case InitialCondition::Kind::zero:
            p.value = p.derivative = p.antiderivative = [](double) { return 0.0; };
            return p;
        case InitialCondition::Kind::raised_cosine: {
            const double R = ic.R, k = std::numbers::pi / R;
            p.support = R;
            p.value = [=](double r) { return raised(r, R, A); };
            p.derivative = [=](double r) { return r <= R ? -A * k * std::sin(k * r) : 0.0; };
            // int_0^rho 2 u A (1 + cos k u) du
            p.antiderivative = [=](double s) {
                const double rho = std::min(std::sqrt(std::max(s, 0.0)), R);
                return A * (rho * rho + 2.0 * rho * std::sin(k * rho) / k +
                            2.0 * (std::cos(k * rho) - 1.0) / (k * k));
            };
            return p;
        }
        case InitialCondition::Kind::ring_cosine: {
            const double R1 = ic.R1, R2 = ic.R2, k = 2.0 * std::numbers::pi / (R2 - R1);
            const double m = 0.5 * (R1 + R2);
            p.support = R2;
            p.value = [=](double r) { return ring(r, R1, R2, A); };
            p.derivative = [=](double r) {
                return (r < R1 || r > R2) ? 0.0 : -A * k * std::sin(k * (r - m));
            };
            auto prim = [=](double u) {
                return u * u + 2.0 * u * std::sin(k * (u - m)) / k +
                       2.0 * std::cos(k * (u - m)) / (k * k);
            };
            p.antiderivative = [=](double s) {
                const double rho = std::clamp(std::sqrt(std::max(s, 0.0)), R1, R2);
                return A * (prim(rho) - prim(R1));
            };
            return p;
        }
        case InitialCondition::Kind::custom: break;
    }
    throw std::invalid_argument("custom initial conditions have no radial profile");
}

ScalarField3D render(const InitialCondition& ic, const GridSpec& g) {
    return ScalarField3D::sample(g, [&](const Vec3& x) { return ic_eval(ic, x); });
}

namespace {

void interior_plane(FdtdState& s, int k) {
    const int n = s.n;
    const double C2 = std::pow(s.c * s.dt / s.dx, 2);
    const std::size_t sx = 1, sy = static_cast<std::size_t>(n),
                      sz = static_cast<std::size_t>(n) * n;
    for (int j = 1; j < n - 1; ++j) {
        std::size_t id = s.idx(1, j, k);
        for (int i = 1; i < n - 1; ++i, ++id) {
            const double u = s.cur[id];
            const double lap = s.cur[id + sx] + s.cur[id - sx] + s.cur[id + sy] + s.cur[id - sy] +
                               s.cur[id + sz] + s.cur[id - sz] - 6.0 * u;
            s.next[id] = 2.0 * u - s.prev[id] + C2 * lap;
        }
    }
}

// First-order outgoing condition along axis `a` with inward step `dir`.
double mur1(const FdtdState& s, int i, int j, int k, int a, int dir) {
    std::array<int, 3> in{i, j, k};
    in[a] += dir;
    const double cdt = s.c * s.dt;
    const double coef = (cdt - s.dx) / (cdt + s.dx);
    const std::size_t b = s.idx(i, j, k), q = s.idx(in[0], in[1], in[2]);
    return s.cur[q] + coef * (s.next[q] - s.cur[b]);
}

double mur2(const FdtdState& s, int i, int j, int k, int a, int dir) {
    std::array<int, 3> p{i, j, k}, in{i, j, k};
    in[a] += dir;
    const double cdt = s.c * s.dt;
    const double denom = cdt + s.dx;
    const std::size_t b = s.idx(i, j, k), q = s.idx(in[0], in[1], in[2]);
    double transverse = 0.0;
    for (int t = 0; t < 3; ++t) {
        if (t == a) continue;
        for (const auto& base : {p, in}) {
            auto up = base, dn = base;
            up[t] += 1;
            dn[t] -= 1;
            transverse += s.cur[s.idx(up[0], up[1], up[2])] - 2.0 * s.cur[s.idx(base[0], base[1], base[2])] +
                          s.cur[s.idx(dn[0], dn[1], dn[2])];
        }
    }
    return -s.prev[q] + (cdt - s.dx) / denom * (s.next[q] + s.prev[b]) +
           2.0 * s.dx / denom * (s.cur[b] + s.cur[q]) +
           cdt * cdt / (2.0 * s.dx * denom) * transverse;
}

void boundary_update(FdtdState& s, int abc_order) {
    const int n = s.n, last = n - 1;
    auto on = [&](int v) { return v == 0 || v == last; };
    auto inward = [&](int v) { return v == 0 ? 1 : -1; };
    // Faces, then edges, then corners: each class reads only updated neighbours.
    for (int count = 1; count <= 3; ++count) {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const std::array<int, 3> c{i, j, k};
                    int nb = 0;
                    for (int v : c) nb += on(v);
                    if (nb != count) continue;
                    double sum = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        if (!on(c[a])) continue;
                        sum += (count == 1 && abc_order == 2) ? mur2(s, i, j, k, a, inward(c[a]))
                                                              : mur1(s, i, j, k, a, inward(c[a]));
                    }
                    s.next[s.idx(i, j, k)] = sum / count;
                }
    }
}

void finish_step(FdtdState& s) {
    for (double v : s.next)
        if (!std::isfinite(v)) throw std::runtime_error("FDTD instability: non-finite field value");
    std::swap(s.prev, s.cur);
    std::swap(s.cur, s.next);
}

}  // namespace

void fdtd_step(FdtdState& s, int abc_order) {
#pragma omp parallel for schedule(static)
    for (int k = 1; k < s.n - 1; ++k) interior_plane(s, k);
    boundary_update(s, abc_order);
    finish_step(s);
}

namespace reference {
void fdtd_step(FdtdState& s, int abc_order) {
    for (int k = 1; k < s.n - 1; ++k) interior_plane(s, k);
    boundary_update(s, abc_order);
    finish_step(s);
}
}  // namespace reference

ScalarField3D FieldHistory::snapshot(std::size_t k) const {
    ScalarField3D f(grid);
    f.values = snapshots.at(k);
    return f;
}

FieldHistory run_simulation(const SimConfig& cfg, const InitialCondition& u0,
                            const InitialCondition& v0, double sample_rate, bool parallel) {
    cfg.validate();
    const int cells = cfg.cells();
    const double stride_f = 1.0 / (sample_rate * cfg.dt);
    const int stride = static_cast<int>(std::lround(stride_f));
    if (stride < 1 || std::abs(stride_f - stride) > 1e-6)
        throw std::invalid_argument("sample rate must divide the simulation rate");
    const int steps = static_cast<int>(std::lround(cfg.T / cfg.dt));

    FdtdState s;
    s.n = cells + 1;
    s.dx = cfg.grid_step();
    s.dt = cfg.dt;
    s.c = cfg.c;
    FieldHistory h;
    h.grid.origin = Vec3::Zero();
    h.grid.dx = s.dx;
    h.grid.dims = {s.n, s.n, s.n};
    h.rate = sample_rate;

    const std::size_t total = h.grid.size();
    s.prev.assign(total, 0.0);
    s.cur.assign(total, 0.0);
    s.next.assign(total, 0.0);
    std::vector<double> vel(total, 0.0);
    for (int k = 0; k < s.n; ++k)
        for (int j = 0; j < s.n; ++j)
            for (int i = 0; i < s.n; ++i) {
                const Vec3 x = h.grid.point(i, j, k);
                s.cur[s.idx(i, j, k)] = ic_eval(u0, x);
                vel[s.idx(i, j, k)] = ic_eval(v0, x);
            }

    auto record = [&](int step) {
        h.times.push_back(step * cfg.dt);
        h.snapshots.push_back(s.cur);
    };
    record(0);

    // Second-order start: w1 = w0 + dt v0 + (c dt)^2 / 2 lap w0.
    const double half_C2 = 0.5 * std::pow(s.c * s.dt / s.dx, 2);
    const int n = s.n;
    for (std::size_t id = 0; id < total; ++id) s.next[id] = s.cur[id] + s.dt * vel[id];
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const std::size_t id = s.idx(i, j, k);
                const double lap = s.cur[id + 1] + s.cur[id - 1] + s.cur[id + n] + s.cur[id - n] +
                                   s.cur[id + static_cast<std::size_t>(n) * n] +
                                   s.cur[id - static_cast<std::size_t>(n) * n] - 6.0 * s.cur[id];
                s.next[id] += half_C2 * lap;
            }
    finish_step(s);

    for (int step = 1; step < steps; ++step) {
        if (step % stride == 0) record(step);
        if (parallel)
            fdtd_step(s, cfg.abc_order);
        else
            reference::fdtd_step(s, cfg.abc_order);
    }
    return h;
}

double trilinear(const GridSpec& g, const std::vector<double>& values, const Vec3& x) {
    std::array<int, 3> i0{};
    std::array<double, 3> f{};
    for (int a = 0; a < 3; ++a) {
        const double u = (x[a] - g.origin[a]) / g.dx;
        if (u < -1e-9 || u > g.dims[a] - 1 + 1e-9)
            throw std::out_of_range("point outside the simulation box");
        i0[a] = std::clamp(static_cast<int>(std::floor(u)), 0, g.dims[a] - 2);
        f[a] = std::clamp(u - i0[a], 0.0, 1.0);
    }
    double v = 0.0;
    for (int c = 0; c < 8; ++c) {
        const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
        const double w = (di ? f[0] : 1 - f[0]) * (dj ? f[1] : 1 - f[1]) * (dk ? f[2] : 1 - f[2]);
        if (w != 0.0) v += w * values[g.index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
    }
    return v;
}

SensorDataset sample_sensors(const FieldHistory& h, const std::vector<Vec3>& positions,
                             double sample_rate) {
    const double stride_f = h.rate / sample_rate;
    const auto stride = static_cast<std::size_t>(std::lround(stride_f));
    if (stride < 1 || std::abs(stride_f - static_cast<double>(stride)) > 1e-6)
        throw std::invalid_argument("sample rate must divide the stored snapshot rate");
    SensorDataset d;
    d.positions = positions;
    for (std::size_t k = 0; k < h.times.size(); k += stride) d.times.push_back(h.times[k]);
    for (const auto& x : positions)
        for (std::size_t k = 0; k < h.times.size(); k += stride)
            d.values.push_back(trilinear(h.grid, h.snapshots[k], x));
    return d;
}

SensorDataset add_noise(SensorDataset d, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
    if (sigma == 0.0) return d;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : d.values) v += noise(rng);
    return d;
}

}  // namespace waveinform
