#include "waveinform/experiments.hpp"
#include "waveinform/gp.hpp"
#include "waveinform/io.hpp"
#include "waveinform/sparse_fast.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <limits>

namespace waveinform {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 json_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json norm_json(double p) { return p == kInfinityNorm ? json("inf") : json(p); }
double json_norm(const json& j) { return j.is_string() && j.get<std::string>() == "inf" ? kInfinityNorm : j.get<double>(); }
std::string norm_name(double p) { return p == kInfinityNorm ? "inf" : io::format_double(p); }

json component_json(const ComponentParams& c) {
    return {{"x0", vec_json(c.x0)}, {"R", c.R}, {"rho", c.rho}, {"sigma2", c.sigma2}};
}

ComponentParams json_component(const json& j) {
    return {json_vec(j.at("x0")), j.at("R").get<double>(), j.at("rho").get<double>(),
            j.at("sigma2").get<double>()};
}

json params_to_json(const HyperParams& p) {
    json j;
    j["c"] = p.c;
    j["lambda"] = p.lambda;
    j["alpha_cut"] = p.alpha_cut;
    if (p.u) j["u"] = component_json(*p.u);
    if (p.v) j["v"] = component_json(*p.v);
    return j;
}

HyperParams json_to_params(const json& j) {
    HyperParams p;
    p.c = j.at("c");
    p.lambda = j.at("lambda");
    p.alpha_cut = j.value("alpha_cut", 0.8);
    if (j.contains("u")) p.u = json_component(j["u"]);
    if (j.contains("v")) p.v = json_component(j["v"]);
    return p;
}

json ic_json(const InitialCondition& ic) {
    switch (ic.kind) {
        case InitialCondition::Kind::zero: return {{"kind", "zero"}};
        case InitialCondition::Kind::raised_cosine:
            return {{"kind", "raised_cosine"}, {"x0", vec_json(ic.x0)}, {"R", ic.R}, {"A", ic.A}};
        case InitialCondition::Kind::ring_cosine:
            return {{"kind", "ring_cosine"}, {"x0", vec_json(ic.x0)}, {"R1", ic.R1},
                    {"R2", ic.R2},           {"A", ic.A}};
        case InitialCondition::Kind::custom: break;
    }
    throw std::invalid_argument("custom initial conditions cannot be serialized");
}

InitialCondition json_ic(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zero") return InitialCondition::zero();
    if (kind == "raised_cosine")
        return InitialCondition::raised_cosine(json_vec(j.at("x0")), j.at("R"), j.at("A"));
    if (kind == "ring_cosine")
        return InitialCondition::ring_cosine(json_vec(j.at("x0")), j.at("R1"), j.at("R2"), j.at("A"));
    throw std::invalid_argument("unknown initial condition kind '" + kind + "'");
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void ExperimentConfig::validate() const {
    sim.validate();
    u0.validate();
    v0.validate();
    truth.validate();
    if (!(dt_v > 0.0)) throw std::invalid_argument("dt_v must be positive");
    if (!(dx_grid > 0.0)) throw std::invalid_argument("dx_grid must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    if (sensors.positions.empty() && sensors.count < 1)
        throw std::invalid_argument("need at least one sensor");
    if (fit_sensors < 1 || recon_sensors < 1) throw std::invalid_argument("sensor subsets must be non-empty");
    if (n_mult < 0) throw std::invalid_argument("n_mult must be non-negative");
    if (!layout.u && !layout.v) throw std::invalid_argument("fit layout needs a component");
    const HyperBox b = search_box();
    b.validate();
    if (b.dim() != layout.size()) throw std::invalid_argument("fit box does not match the layout");
}

ExperimentConfig preset(int test_case) {
    ExperimentConfig cfg;
    cfg.test_case = test_case;
    const Vec3 xu(0.65, 0.3, 0.5), xv(0.3, 0.6, 0.7);
    const double noise_var = 0.09 * 0.09;
    cfg.truth.c = 0.5;
    cfg.truth.lambda = noise_var;
    switch (test_case) {
        case 0:
        case 1:
            cfg.u0 = InitialCondition::raised_cosine(xu, 0.25, 5.0);
            cfg.truth.u = ComponentParams{xu, 0.3, 0.2, 3.0};
            cfg.layout = ParamLayout{true, false};
            break;
        case 2:
            cfg.v0 = InitialCondition::ring_cosine(xv, 0.05, 0.15, 50.0);
            cfg.truth.v = ComponentParams{xv, 0.15, 0.03, 3.0};
            cfg.layout = ParamLayout{false, true};
            break;
        case 3:
            cfg.u0 = InitialCondition::raised_cosine(xu, 0.25, 2.5);
            cfg.v0 = InitialCondition::ring_cosine(xv, 0.05, 0.15, 30.0);
            cfg.truth.u = ComponentParams{xu, 0.3, 0.2, 0.3};
            cfg.truth.v = ComponentParams{xv, 0.15, 0.03, 3.0};
            cfg.layout = ParamLayout{true, true};
            break;
        default: throw std::invalid_argument("test case must be 0 (custom), 1, 2 or 3");
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg = preset(j.value("test_case", 1));
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        cfg.sim.L = s.value("L", cfg.sim.L);
        cfg.sim.dx = s.value("dx", cfg.sim.dx);
        cfg.sim.dt = s.value("dt", cfg.sim.dt);
        cfg.sim.c = s.value("c", cfg.sim.c);
        cfg.sim.T = s.value("T", cfg.sim.T);
        cfg.sim.abc_order = s.value("abc_order", cfg.sim.abc_order);
    }
    if (j.contains("initial")) {
        if (j["initial"].contains("u0")) cfg.u0 = json_ic(j["initial"]["u0"]);
        if (j["initial"].contains("v0")) cfg.v0 = json_ic(j["initial"]["v0"]);
    }
    if (j.contains("sensors")) {
        const auto& s = j["sensors"];
        auto& L = cfg.sensors;
        L.count = s.value("count", L.count);
        L.lo = s.value("lo", L.lo);
        L.hi = s.value("hi", L.hi);
        L.rate = s.value("rate", L.rate);
        L.seed = s.value("seed", L.seed);
        L.restarts = s.value("restarts", L.restarts);
        if (s.contains("positions")) {
            L.positions.clear();
            for (const auto& p : s["positions"]) L.positions.push_back(json_vec(p));
        }
    }
    if (j.contains("noise")) {
        cfg.noise_sigma = j["noise"].value("sigma", cfg.noise_sigma);
        cfg.noise_seed = j["noise"].value("seed", cfg.noise_seed);
    }
    if (j.contains("truth")) cfg.truth = json_to_params(j["truth"]);
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        cfg.fit_sensors = f.value("sensors", cfg.fit_sensors);
        cfg.n_mult = f.value("n_mult", cfg.n_mult);
        cfg.fit_seed = f.value("seed", cfg.fit_seed);
        cfg.fit_options.tol = f.value("tol", cfg.fit_options.tol);
        cfg.fit_options.max_evals = f.value("max_evals", cfg.fit_options.max_evals);
        cfg.fit_options.lhs_restarts = f.value("lhs_restarts", cfg.fit_options.lhs_restarts);
        if (f.contains("components")) {
            const auto comp = f["components"].get<std::string>();
            cfg.layout.u = comp.find('u') != std::string::npos;
            cfg.layout.v = comp.find('v') != std::string::npos;
        }
        cfg.layout.alpha_cut = f.value("alpha_cut", cfg.truth.alpha_cut);
        if (f.contains("box")) {
            const auto& b = f["box"];
            HyperBox box;
            const auto lo = b.at("lower").get<std::vector<double>>();
            const auto hi = b.at("upper").get<std::vector<double>>();
            box.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
            box.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
            if (b.contains("log_scale")) box.log_scale = b["log_scale"].get<std::vector<bool>>();
            cfg.box = box;
        }
    }
    if (j.contains("reconstruct")) {
        const auto& r = j["reconstruct"];
        cfg.recon_sensors = r.value("sensors", cfg.recon_sensors);
        cfg.dx_grid = r.value("dx_grid", cfg.dx_grid);
        cfg.dt_v = r.value("dt_v", cfg.dt_v);
        if (r.contains("theta")) {
            const auto src = r["theta"].get<std::string>();
            if (src != "truth" && src != "fit") throw std::invalid_argument("reconstruct.theta must be 'truth' or 'fit'");
            cfg.recon_from_fit = src == "fit";
        }
        if (r.contains("norms")) {
            cfg.error_norms.clear();
            for (const auto& p : r["norms"]) cfg.error_norms.push_back(json_norm(p));
        }
    }
    if (j.contains("pointsource")) {
        const auto& p = j["pointsource"];
        auto& P = cfg.pointsource;
        P.sensors = p.value("sensors", P.sensors);
        P.R = p.value("R", P.R);
        P.scan_nodes = p.value("scan_nodes", P.scan_nodes);
        P.rate = p.value("rate", P.rate);
        P.T = p.value("T", P.T);
        if (p.contains("source")) P.source = json_vec(p["source"]);
        P.lambda = p.value("lambda", P.lambda);
        P.lo = p.value("lo", P.lo);
        P.hi = p.value("hi", P.hi);
        P.seed = p.value("seed", P.seed);
    }
    if (j.contains("seed")) apply_master_seed(cfg, j["seed"].get<std::uint64_t>());
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(io::read_file(path)); }

std::string config_json(const ExperimentConfig& cfg) {
    json j;
    j["test_case"] = cfg.test_case;
    j["sim"] = {{"L", cfg.sim.L}, {"dx", cfg.sim.dx}, {"dt", cfg.sim.dt},
                {"c", cfg.sim.c}, {"T", cfg.sim.T},   {"abc_order", cfg.sim.abc_order}};
    j["initial"] = {{"u0", ic_json(cfg.u0)}, {"v0", ic_json(cfg.v0)}};
    json s = {{"count", cfg.sensors.count}, {"lo", cfg.sensors.lo},     {"hi", cfg.sensors.hi},
              {"rate", cfg.sensors.rate},   {"seed", cfg.sensors.seed}, {"restarts", cfg.sensors.restarts}};
    if (!cfg.sensors.positions.empty()) {
        s["positions"] = json::array();
        for (const auto& p : cfg.sensors.positions) s["positions"].push_back(vec_json(p));
    }
    j["sensors"] = s;
    j["noise"] = {{"sigma", cfg.noise_sigma}, {"seed", cfg.noise_seed}};
    j["truth"] = params_to_json(cfg.truth);
    const HyperBox b = cfg.search_box();
    std::vector<double> lo(b.lower.data(), b.lower.data() + b.lower.size());
    std::vector<double> hi(b.upper.data(), b.upper.data() + b.upper.size());
    std::vector<bool> lg = b.log_scale;
    j["fit"] = {{"sensors", cfg.fit_sensors},
                {"n_mult", cfg.n_mult},
                {"seed", cfg.fit_seed},
                {"tol", cfg.fit_options.tol},
                {"max_evals", cfg.fit_options.max_evals},
                {"lhs_restarts", cfg.fit_options.lhs_restarts},
                {"components", std::string(cfg.layout.u ? "u" : "") + (cfg.layout.v ? "v" : "")},
                {"alpha_cut", cfg.layout.alpha_cut},
                {"box", {{"lower", lo}, {"upper", hi}, {"log_scale", lg}}}};
    json norms = json::array();
    for (double p : cfg.error_norms) norms.push_back(norm_json(p));
    j["reconstruct"] = {{"sensors", cfg.recon_sensors},
                        {"dx_grid", cfg.dx_grid},
                        {"dt_v", cfg.dt_v},
                        {"theta", cfg.recon_from_fit ? "fit" : "truth"},
                        {"norms", norms}};
    const auto& P = cfg.pointsource;
    j["pointsource"] = {{"sensors", P.sensors}, {"R", P.R},         {"scan_nodes", P.scan_nodes},
                        {"rate", P.rate},       {"T", P.T},         {"source", vec_json(P.source)},
                        {"lambda", P.lambda},   {"lo", P.lo},       {"hi", P.hi},
                        {"seed", P.seed}};
    return j.dump(2) + "\n";
}

void apply_master_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    std::uint64_t state = seed;
    cfg.sensors.seed = splitmix64(state);
    cfg.noise_seed = splitmix64(state);
    cfg.fit_seed = splitmix64(state);
    cfg.pointsource.seed = splitmix64(state);
}

std::string hyperparams_json(const HyperParams& p) { return params_to_json(p).dump(2) + "\n"; }
HyperParams parse_hyperparams(const std::string& text) { return json_to_params(json::parse(text)); }

std::vector<Vec3> sensor_positions(const SensorLayout& layout) {
    if (!layout.positions.empty()) return layout.positions;
    HyperBox box;
    box.lower = Eigen::Vector3d::Constant(layout.lo);
    box.upper = Eigen::Vector3d::Constant(layout.hi);
    std::vector<Vec3> out;
    for (const auto& p : lhs_design(layout.count, box, layout.restarts, layout.seed)) out.emplace_back(p);
    return out;
}

SensorDataset first_sensors(const SensorDataset& d, std::size_t n) {
    n = std::min(n, d.sensors());
    SensorDataset out;
    out.times = d.times;
    out.positions.assign(d.positions.begin(), d.positions.begin() + static_cast<std::ptrdiff_t>(n));
    out.values.assign(d.values.begin(), d.values.begin() + static_cast<std::ptrdiff_t>(n * d.samples()));
    return out;
}

SensorDataset generate_dataset(const ExperimentConfig& cfg, FieldHistory* history) {
    FieldHistory h = run_simulation(cfg.sim, cfg.u0, cfg.v0, cfg.sensors.rate);
    SensorDataset d = add_noise(sample_sensors(h, sensor_positions(cfg.sensors), cfg.sensors.rate),
                                cfg.noise_sigma, cfg.noise_seed);
    if (history) *history = std::move(h);
    return d;
}

Reconstruction reconstruct(const SensorDataset& data, const HyperParams& theta, const GridSpec& g,
                           double dt_v, bool parallel) {
    if (!(dt_v > 0.0)) throw std::invalid_argument("dt_v must be positive");
    const auto Z = data.points();
    const auto model = fit_posterior(WaveKernel(theta), std::span<const SpaceTimePoint>(Z),
                                     std::span<const double>(data.values), theta.lambda);
    Reconstruction r;
    r.active = model.active.p;
    r.u0 = parallel ? predict_mean_grid(model, g, 0.0) : reference::predict_mean_grid(model, g, 0.0);
    r.v0 = parallel ? predict_mean_grid(model, g, dt_v) : reference::predict_mean_grid(model, g, dt_v);
    for (std::size_t i = 0; i < r.v0.values.size(); ++i)
        r.v0.values[i] = (r.v0.values[i] - r.u0.values[i]) / dt_v;
    return r;
}

std::vector<ErrorRow> reconstruction_errors(const ScalarField3D& u_rec, const ScalarField3D& v_rec,
                                            const InitialCondition& u0, const InitialCondition& v0,
                                            const std::vector<double>& norms) {
    std::vector<ErrorRow> rows;
    auto add = [&](const char* name, const ScalarField3D& rec, const InitialCondition& ic) {
        if (ic.kind == InitialCondition::Kind::zero) return;
        const ScalarField3D truth = render(ic, rec.grid);
        for (double p : norms) rows.push_back({name, p, lp_relative_error(rec, truth, p)});
    };
    add("u0", u_rec, u0);
    add("v0", v_rec, v0);
    return rows;
}

SensorDataset point_source_traces(const std::vector<Vec3>& sensors, const Vec3& source, double c,
                                  double R, double rate, double T, double alpha) {
    const RegularizedGreen G(c, R, alpha);
    SensorDataset d;
    d.positions = sensors;
    const int N = static_cast<int>(std::lround(T * rate)) + 1;
    for (int k = 0; k < N; ++k) d.times.push_back(k / rate);
    for (const auto& x : sensors)
        for (double t : d.times) d.values.push_back(G(x - source, t));
    return d;
}

double point_source_nll(const SensorDataset& W, const Vec3& x0, double c, double R, double lambda,
                        double alpha) {
    const RegularizedGreen G(c, R, alpha);
    RankOneData d;
    d.lambda = lambda;
    d.W = W.values;
    d.F.reserve(W.size());
    for (const auto& x : W.positions)
        for (double t : W.times) d.F.push_back(G(x - x0, t));
    return rank_one_nll(d);
}

PointSourceScan point_source_scan(const SensorDataset& W, const GridSpec& grid, double c, double R,
                                  double lambda, double alpha) {
    double ww = 0.0;
    for (double w : W.values) ww += w * w;
    if (ww == 0.0) throw std::invalid_argument("point-source scan on all-zero traces");
    PointSourceScan s;
    s.nll = ScalarField3D(grid);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i)
                s.nll.at(i, j, k) = point_source_nll(W, grid.point(i, j, k), c, R, lambda, alpha);
    const auto it = std::min_element(s.nll.values.begin(), s.nll.values.end());
    const auto idx = static_cast<std::size_t>(it - s.nll.values.begin());
    const auto nx = static_cast<std::size_t>(grid.dims[0]), ny = static_cast<std::size_t>(grid.dims[1]);
    s.argmin = grid.point(static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
                          static_cast<int>(idx / (nx * ny)));
    s.min_value = *it;
    return s;
}

void save_history(const FieldHistory& h, const fs::path& stem) {
    auto bin = stem, header = stem;
    bin += ".bin";
    header += ".json";
    const std::size_t per = h.grid.size();
    std::string bytes(per * h.snapshots.size() * sizeof(double), '\0');
    for (std::size_t k = 0; k < h.snapshots.size(); ++k)
        std::memcpy(bytes.data() + k * per * sizeof(double), h.snapshots[k].data(), per * sizeof(double));
    io::write_atomic(bin, bytes);
    json j;
    j["origin"] = vec_json(h.grid.origin);
    j["dx"] = h.grid.dx;
    j["dims"] = h.grid.dims;
    j["order"] = "x-fastest, snapshot-major";
    j["dtype"] = "float64-le";
    j["rate"] = h.rate;
    j["times"] = h.times;
    j["data"] = bin.filename().string();
    io::write_atomic(header, j.dump(2) + "\n");
}

FieldHistory load_history(const fs::path& stem) {
    auto bin = stem, header = stem;
    bin += ".bin";
    header += ".json";
    const json j = json::parse(io::read_file(header));
    FieldHistory h;
    h.grid.origin = json_vec(j.at("origin"));
    h.grid.dx = j.at("dx");
    h.grid.dims = j.at("dims").get<std::array<int, 3>>();
    h.rate = j.at("rate");
    h.times = j.at("times").get<std::vector<double>>();
    const std::string bytes = io::read_file(bin);
    const std::size_t per = h.grid.size();
    if (bytes.size() != per * h.times.size() * sizeof(double))
        throw std::runtime_error(bin.string() + ": size does not match header");
    h.snapshots.assign(h.times.size(), std::vector<double>(per));
    for (std::size_t k = 0; k < h.times.size(); ++k)
        std::memcpy(h.snapshots[k].data(), bytes.data() + k * per * sizeof(double), per * sizeof(double));
    return h;
}

void write_fit_trace(const FitResult& fit, const ParamLayout& layout, const fs::path& path) {
    std::string out = "start_id";
    const auto names = layout.names();
    for (const auto& n : names) out += ",start_" + n;
    for (const auto& n : names) out += ",end_" + n;
    out += ",nll_end,evals\n";
    for (const auto& r : fit.trace) {
        out += std::to_string(r.start_id);
        for (Eigen::Index i = 0; i < r.theta_start.size(); ++i) out += ',' + io::format_double(r.theta_start[i]);
        for (Eigen::Index i = 0; i < r.theta_end.size(); ++i) out += ',' + io::format_double(r.theta_end[i]);
        out += ',' + io::format_double(r.nll_end) + ',' + std::to_string(r.evals) + '\n';
    }
    io::write_atomic(path, out);
}

namespace cmd {

namespace {

std::vector<fs::path> with_stem(const fs::path& stem) {
    auto a = stem, b = stem;
    a += ".bin";
    b += ".json";
    return {a, b};
}

HyperParams theta_for_reconstruction(const ExperimentConfig& cfg, const fs::path& out) {
    if (!cfg.recon_from_fit) return cfg.truth;
    const auto path = out / "theta.json";
    if (!fs::exists(path)) throw std::runtime_error("reconstruct.theta = fit but " + path.string() + " is missing; run fit first");
    return parse_hyperparams(io::read_file(path));
}

}  // namespace

void simulate(const ExperimentConfig& cfg, const fs::path& out) {
    FieldHistory h;
    const SensorDataset d = generate_dataset(cfg, &h);
    save_history(h, out / "history");
    const SensorDataset clean = sample_sensors(h, d.positions, cfg.sensors.rate);
    io::write_sensor_csv(d, out / "sensors.csv");
    io::write_sensor_csv(clean, out / "sensors_clean.csv");
    io::write_atomic(out / "config.json", config_json(cfg));
    auto files = with_stem(out / "history");
    files.insert(files.end(), {out / "sensors.csv", out / "sensors_clean.csv", out / "config.json"});
    json meta = {{"sensors", d.sensors()},
                 {"samples_per_sensor", d.samples()},
                 {"observations", d.size()},
                 {"grid_nodes_per_axis", h.grid.dims[0]},
                 {"grid_step", h.grid.dx},
                 {"snapshots", h.times.size()}};
    io::update_manifest(out, files, "simulate", meta.dump());
}

void sample(const ExperimentConfig& cfg, const fs::path& out) {
    const FieldHistory h = load_history(out / "history");
    const SensorDataset clean = sample_sensors(h, sensor_positions(cfg.sensors), cfg.sensors.rate);
    const SensorDataset d = add_noise(clean, cfg.noise_sigma, cfg.noise_seed);
    io::write_sensor_csv(d, out / "sensors.csv");
    io::write_sensor_csv(clean, out / "sensors_clean.csv");
    json meta = {{"sensors", d.sensors()}, {"observations", d.size()},
                 {"noise_sigma", cfg.noise_sigma}, {"noise_seed", cfg.noise_seed},
                 {"layout_seed", cfg.sensors.seed}};
    io::update_manifest(out, {out / "sensors.csv", out / "sensors_clean.csv"}, "sample", meta.dump());
}

void fit(const ExperimentConfig& cfg, const fs::path& out) {
    const SensorDataset all = io::read_sensor_csv(out / "sensors.csv");
    const SensorDataset d = first_sensors(all, static_cast<std::size_t>(cfg.fit_sensors));
    FitResult res;
    if (cfg.n_mult == 0) {
        // true parameters supplied: no search
        res.best = cfg.truth;
        const auto Z = d.points();
        res.best_nll = fast_nll(WaveKernel(cfg.truth), std::span<const SpaceTimePoint>(Z),
                                std::span<const double>(d.values), cfg.truth.lambda);
    } else {
        res = multistart_fit(d, cfg.layout, cfg.search_box(), cfg.n_mult, cfg.fit_seed, cfg.fit_options);
    }
    io::write_atomic(out / "theta.json", hyperparams_json(res.best));
    write_fit_trace(res, cfg.layout, out / "fit_trace.csv");

    // one summary row per run, in the layout of the estimated-hyperparameter table
    std::string row = "test_case,n_sensors,n_mult,rho_u,sigma2_u,rho_v,sigma2_v,lambda,c,R_u,R_v,x0_err_u,x0_err_v,nll\n";
    auto f = [](const std::optional<ComponentParams>& c, double ComponentParams::*m) {
        return c ? io::format_double((*c).*m) : std::string("nan");
    };
    auto x0_err = [](const std::optional<ComponentParams>& est, const std::optional<ComponentParams>& tru) {
        return est && tru ? io::format_double((est->x0 - tru->x0).norm()) : std::string("nan");
    };
    const auto& b = res.best;
    row += std::to_string(cfg.test_case) + ',' + std::to_string(d.sensors()) + ',' +
           std::to_string(cfg.n_mult) + ',' + f(b.u, &ComponentParams::rho) + ',' +
           f(b.u, &ComponentParams::sigma2) + ',' + f(b.v, &ComponentParams::rho) + ',' +
           f(b.v, &ComponentParams::sigma2) + ',' + io::format_double(b.lambda) + ',' +
           io::format_double(b.c) + ',' + f(b.u, &ComponentParams::R) + ',' +
           f(b.v, &ComponentParams::R) + ',' + x0_err(b.u, cfg.truth.u) + ',' +
           x0_err(b.v, cfg.truth.v) + ',' + io::format_double(res.best_nll) + '\n';
    io::write_atomic(out / "fit_summary.csv", row);
    json meta = {{"n_sensors", d.sensors()}, {"observations", d.size()}, {"n_mult", cfg.n_mult},
                 {"seed", cfg.fit_seed},     {"best_nll", res.best_nll}};
    io::update_manifest(out, {out / "theta.json", out / "fit_trace.csv", out / "fit_summary.csv"},
                        "fit", meta.dump());
}

void reconstruct(const ExperimentConfig& cfg, const fs::path& out) {
    const SensorDataset all = io::read_sensor_csv(out / "sensors.csv");
    const SensorDataset d = first_sensors(all, static_cast<std::size_t>(cfg.recon_sensors));
    const HyperParams theta = theta_for_reconstruction(cfg, out);
    const GridSpec g = GridSpec::cube(0.0, cfg.sim.L, cfg.dx_grid);
    const Reconstruction r = reconstruct(d, theta, g, cfg.dt_v);
    save_field(r.u0, out / "u0_rec");
    save_field(r.v0, out / "v0_rec");
    auto files = with_stem(out / "u0_rec");
    for (auto& p : with_stem(out / "v0_rec")) files.push_back(p);
    json meta = {{"n_sensors", d.sensors()},
                 {"active_points", r.active},
                 {"grid_nodes", g.size()},
                 {"dt_v", cfg.dt_v},
                 {"theta", cfg.recon_from_fit ? "fit" : "truth"}};
    io::update_manifest(out, files, "reconstruct", meta.dump());
}

void errors(const ExperimentConfig& cfg, const fs::path& out) {
    const ScalarField3D u = load_field(out / "u0_rec"), v = load_field(out / "v0_rec");
    if (!(u.grid == v.grid)) throw std::invalid_argument("reconstructed fields live on different grids");
    const auto rows = reconstruction_errors(u, v, cfg.u0, cfg.v0, cfg.error_norms);
    std::string csv = "field,p,relative_error\n";
    for (const auto& r : rows) csv += r.field + ',' + norm_name(r.p) + ',' + io::format_double(r.error) + '\n';
    io::write_atomic(out / "errors.csv", csv);
    io::update_manifest(out, {out / "errors.csv"}, "errors", json{{"rows", rows.size()}}.dump());
}

void pointsource_scan(const ExperimentConfig& cfg, const fs::path& out) {
    const auto& P = cfg.pointsource;
    SensorLayout layout;
    layout.count = P.sensors;
    layout.lo = P.lo;
    layout.hi = P.hi;
    layout.seed = P.seed;
    const SensorDataset W =
        point_source_traces(sensor_positions(layout), P.source, cfg.truth.c, P.R, P.rate, P.T);
    GridSpec g;
    g.origin = Vec3::Zero();
    g.dx = cfg.sim.L / (P.scan_nodes - 1);
    g.dims = {P.scan_nodes, P.scan_nodes, P.scan_nodes};
    const PointSourceScan s = point_source_scan(W, g, cfg.truth.c, P.R, P.lambda);
    io::write_sensor_csv(W, out / "pointsource_traces.csv");
    save_field(s.nll, out / "pointsource_nll");
    json res = {{"argmin", vec_json(s.argmin)},
                {"min_nll", s.min_value},
                {"source", vec_json(P.source)},
                {"distance", (s.argmin - P.source).norm()},
                {"scan_step", g.dx},
                {"within_one_cell", ((s.argmin - P.source).cwiseAbs().maxCoeff() <= g.dx)}};
    io::write_atomic(out / "pointsource.json", res.dump(2) + "\n");
    auto files = with_stem(out / "pointsource_nll");
    files.insert(files.end(), {out / "pointsource_traces.csv", out / "pointsource.json"});
    io::update_manifest(out, files, "pointsource-scan", res.dump());
}

}  // namespace cmd

}  // namespace waveinform
