#include "bldgsim/thermal/zone_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::thermal {

namespace {

constexpr double kPenaltySharpness = 10.0;
constexpr char kMagic[] = "bldgsim-zone-model";

inline double sp(double x) { return ad::softplus(x); }
inline ad::Var sp(ad::Var x) { return ad::softplus(x); }
inline double ex(double x) { return std::exp(x); }
inline ad::Var ex(ad::Var x) { return ad::exp(x); }
inline double th(double x) { return std::tanh(x); }
inline ad::Var th(ad::Var x) { return ad::tanh(x); }
inline double hinge(double x) { return x > 0.0 ? x : 0.0; }
inline ad::Var hinge(ad::Var x) { return ad::max0_smooth(x, kPenaltySharpness); }

double uniform(std::mt19937& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) / 4294967296.0);
}

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

double guard(double s) { return (std::isfinite(s) && s > 1e-9) ? s : 1.0; }

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean = v.empty() ? 0.0 : mean / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    sd = guard(v.empty() ? 0.0 : std::sqrt(var / static_cast<double>(v.size())));
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        if (std::abs(a[c][c]) < 1e-300) throw RuntimeError("warm start: singular normal equations");
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t k = r + 1; k < n; ++k) acc -= a[r][k] * x[k];
        x[r] = acc / a[r][r];
    }
    return x;
}

void accumulate_normal(std::vector<std::vector<double>>& ata, std::vector<double>& aty, const std::vector<double>& row,
                       double y) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        aty[i] += row[i] * y;
        for (std::size_t j = 0; j < row.size(); ++j) ata[i][j] += row[i] * row[j];
    }
}

} // namespace

std::vector<Exogenous> exogenous_series(const ThermalTrace& trace, std::size_t begin, std::size_t end) {
    std::vector<Exogenous> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back({trace.t_out[i], trace.ghi[i], trace.occupancy[i], trace.activity_at(i)});
    }
    return out;
}

Normalization Normalization::identity(std::size_t activities) {
    Normalization n;
    n.mean.assign(5 + activities, 0.0);
    n.stdev.assign(5 + activities, 1.0);
    n.scale.assign(4 + activities, 1.0);
    n.step_scale = 1.0;
    return n;
}

Normalization Normalization::fit(const ThermalTrace& trace) {
    trace.validate();
    Normalization n;
    const std::size_t k = trace.activity.size();
    n.mean.resize(5 + k);
    n.stdev.resize(5 + k);
    const std::vector<double>* in[] = {&trace.t_zone, &trace.t_out, &trace.ghi, &trace.occupancy, &trace.q_hvac};
    for (std::size_t i = 0; i < 5; ++i) mean_std(*in[i], n.mean[i], n.stdev[i]);
    for (std::size_t i = 0; i < k; ++i) mean_std(trace.activity[i], n.mean[5 + i], n.stdev[5 + i]);

    std::vector<double> delta(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) delta[i] = trace.t_out[i] - trace.t_zone[i];
    n.scale = {guard(rms(delta)), guard(rms(trace.ghi)), guard(rms(trace.occupancy)), guard(rms(trace.q_hvac))};
    for (const auto& a : trace.activity) n.scale.push_back(guard(rms(a)));

    std::vector<double> steps;
    for (std::size_t i = 1; i < trace.size(); ++i) steps.push_back(trace.t_zone[i] - trace.t_zone[i - 1]);
    n.step_scale = guard(rms(steps));
    return n;
}

// ---------------------------------------------------------------------------

ZoneModel::ZoneModel(double dt, std::vector<std::string> activity_names)
    : dt_(dt), activity_names_(std::move(activity_names)), norm_(Normalization::identity(activity_names_.size())) {
    if (!(dt > 0.0)) throw InvalidArgument("zone model dt must be > 0");
}

void ZoneModel::set_normalization(Normalization norm) {
    const std::size_t k = activity_names_.size();
    if (norm.mean.size() != 5 + k || norm.stdev.size() != 5 + k || norm.scale.size() != 4 + k) {
        throw InvalidArgument("normalization does not match the model's activity count");
    }
    for (double s : norm.stdev) {
        if (!(s > 0.0)) throw InvalidArgument("normalization stdev must be > 0");
    }
    for (double s : norm.scale) {
        if (!(s > 0.0)) throw InvalidArgument("normalization scale must be > 0");
    }
    if (!(norm.step_scale > 0.0)) throw InvalidArgument("normalization step scale must be > 0");
    norm_ = std::move(norm);
}

void ZoneModel::write(std::ostream& out) const {
    using core::format_double;
    out << kMagic << " 1\n";
    out << "kind " << kind() << '\n';
    out << "dt " << format_double(dt_) << '\n';
    out << "activities " << activity_names_.size();
    for (const auto& a : activity_names_) out << ' ' << a;
    out << '\n';
    write_header(out);
    auto vec = [&](const char* name, const std::vector<double>& v) {
        out << "norm " << name << ' ' << v.size();
        for (double x : v) out << ' ' << format_double(x);
        out << '\n';
    };
    vec("mean", norm_.mean);
    vec("stdev", norm_.stdev);
    vec("scale", norm_.scale);
    out << "norm step_scale 1 " << format_double(norm_.step_scale) << '\n';
    std::size_t offset = 0;
    for (const auto& [name, count] : blocks()) {
        out << "param " << name << ' ' << count;
        for (std::size_t i = 0; i < count; ++i) out << ' ' << format_double(params_.at(offset + i));
        out << '\n';
        offset += count;
    }
    out << "end\n";
}

// ---------------------------------------------------------------------------

PhysicsZoneModel::PhysicsZoneModel(double dt, std::vector<std::string> activity_names, PhysicsModelConfig config)
    : ZoneModel(dt, std::move(activity_names)), config_(config) {
    if (config_.head == HeadKind::Mlp && config_.hidden < 1) throw InvalidArgument("hidden width must be >= 1");
    initialize_params();
}

std::size_t PhysicsZoneModel::head_size() const noexcept {
    if (config_.head == HeadKind::Affine) return 5;
    const auto w = static_cast<std::size_t>(config_.hidden);
    return 6 * w + 1;
}

void PhysicsZoneModel::initialize_params() {
    const std::size_t hs = head_size();
    params_.assign(1 + head_count() * hs, 0.0);
    const double bias = config_.sign_projection ? ad::inverse_softplus(config_.initial_gain) : config_.initial_gain;
    std::mt19937 rng(config_.init_seed);
    for (std::size_t h = 0; h < head_count(); ++h) {
        const std::size_t o = 1 + h * hs;
        if (config_.head == HeadKind::Affine) {
            params_[o] = bias;
        } else {
            const auto w = static_cast<std::size_t>(config_.hidden);
            for (std::size_t i = 0; i < 4 * w; ++i) params_[o + i] = uniform(rng, -0.5, 0.5);
            for (std::size_t j = 0; j < w; ++j) params_[o + 5 * w + j] = uniform(rng, -0.1, 0.1);
            params_[o + 6 * w] = bias;
        }
    }
}

PhysicsZoneModel PhysicsZoneModel::from_rc(const RcZoneSpec& spec, double dt, std::vector<std::string> activity_names,
                                           PhysicsModelConfig config, Normalization norm) {
    spec.validate();
    PhysicsZoneModel m(dt, std::move(activity_names), config);
    if (norm.mean.empty()) norm = Normalization::identity(m.activity_names_.size());
    m.set_normalization(norm);
    const std::size_t hs = m.head_size();
    const double k = dt / spec.capacitance / norm.step_scale;
    std::vector<double> gains = {k / spec.resistance * norm.scale[0], k * spec.solar_aperture * norm.scale[1],
                                 k * spec.gain_per_occupant * norm.scale[2], k * norm.scale[3]};
    for (std::size_t a = 0; a < m.activity_names_.size(); ++a) {
        auto it = spec.activity_gains.find(m.activity_names_[a]);
        gains.push_back(k * (it == spec.activity_gains.end() ? 0.0 : it->second) * norm.scale[4 + a]);
    }
    std::fill(m.params_.begin(), m.params_.end(), 0.0);
    for (std::size_t h = 0; h < gains.size(); ++h) {
        const std::size_t bias_at = 1 + h * hs + (config.head == HeadKind::Affine ? 0 : hs - 1);
        double b = gains[h];
        if (config.sign_projection) b = gains[h] > 0.0 ? ad::inverse_softplus(gains[h]) : -50.0;
        m.params_[bias_at] = b;
    }
    return m;
}

void PhysicsZoneModel::warm_start(const ThermalTrace& trace) {
    trace.validate();
    if (trace.activity_names != activity_names_) throw InvalidArgument("trace activities do not match the model");
    if (trace.size() < 2) throw InvalidArgument("warm start needs at least two samples");
    const std::size_t k = head_count();
    const Normalization& n = norm_;
    std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
    std::vector<double> aty(k, 0.0);
    std::vector<double> row(k);
    const double unit = n.step_scale * std::exp(params_[0]);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        row[0] = (trace.t_out[i] - trace.t_zone[i]) / n.scale[0];
        row[1] = trace.ghi[i] / n.scale[1];
        row[2] = trace.occupancy[i] / n.scale[2];
        row[3] = trace.q_hvac[i] / n.scale[3];
        for (std::size_t a = 0; a < activity_names_.size(); ++a) row[4 + a] = trace.activity[a][i] / n.scale[4 + a];
        accumulate_normal(ata, aty, row, (trace.t_zone[i + 1] - trace.t_zone[i]) / unit);
    }
    std::vector<double> g(k, 0.0);
    if (config_.sign_projection) {
        // Projected coordinate descent on the normal equations.
        for (int sweep = 0; sweep < 2000; ++sweep) {
            for (std::size_t j = 0; j < k; ++j) {
                if (ata[j][j] <= 0.0) {
                    g[j] = 0.0;
                    continue;
                }
                double r = aty[j];
                for (std::size_t l = 0; l < k; ++l) {
                    if (l != j) r -= ata[j][l] * g[l];
                }
                g[j] = std::max(0.0, r / ata[j][j]);
            }
        }
    } else {
        for (std::size_t j = 0; j < k; ++j) ata[j][j] += 1e-12 + (ata[j][j] == 0.0 ? 1.0 : 0.0);
        g = solve_dense(ata, aty);
    }
    const std::size_t hs = head_size();
    for (std::size_t h = 0; h < k; ++h) {
        const std::size_t o = 1 + h * hs;
        const double b = config_.sign_projection ? ad::inverse_softplus(std::max(g[h], 1e-6)) : g[h];
        if (config_.head == HeadKind::Affine) {
            params_[o] = b;
            for (std::size_t w = 1; w < 5; ++w) params_[o + w] = 0.0;
        } else {
            const auto w = static_cast<std::size_t>(config_.hidden);
            for (std::size_t j = 0; j < w; ++j) params_[o + 5 * w + j] = 0.0;
            params_[o + 6 * w] = b;
        }
    }
}

template <class S>
S PhysicsZoneModel::head(std::span<const S> p, std::size_t index, S z0, const double (&zx)[3]) const {
    const std::size_t o = 1 + index * head_size();
    if (config_.head == HeadKind::Affine) {
        return p[o] + p[o + 1] * z0 + p[o + 2] * zx[0] + p[o + 3] * zx[1] + p[o + 4] * zx[2];
    }
    const auto w = static_cast<std::size_t>(config_.hidden);
    S out = p[o + 6 * w];
    for (std::size_t j = 0; j < w; ++j) {
        const std::size_t r = o + 4 * j;
        S a = p[o + 4 * w + j] + p[r] * z0 + p[r + 1] * zx[0] + p[r + 2] * zx[1] + p[r + 3] * zx[2];
        out = out + p[o + 5 * w + j] * th(a);
    }
    return out;
}

template <class S>
S PhysicsZoneModel::step_impl(std::span<const S> p, S t_zone, const Exogenous& x, S q_hvac, S* penalty) const {
    if (x.activity.size() != activity_names_.size()) {
        throw InvalidArgument("exogenous activity count does not match the model");
    }
    const Normalization& n = norm_;
    S z0 = (t_zone - n.mean[0]) * (1.0 / n.stdev[0]);
    const double zx[3] = {(x.t_out - n.mean[1]) / n.stdev[1], (x.ghi - n.mean[2]) / n.stdev[2],
                          (x.occupancy - n.mean[3]) / n.stdev[3]};
    auto gain = [&](std::size_t i) {
        S h = head<S>(p, i, z0, zx);
        if (penalty) {
            S v = hinge(-h);
            *penalty = *penalty + v * v;
        }
        return config_.sign_projection ? sp(h) : h;
    };
    S total = ((x.t_out - t_zone) * (1.0 / n.scale[0])) * gain(0);
    total = total + gain(1) * (x.ghi / n.scale[1]);
    total = total + gain(2) * (x.occupancy / n.scale[2]);
    total = total + (q_hvac * (1.0 / n.scale[3])) * gain(3);
    for (std::size_t k = 0; k < activity_names_.size(); ++k) {
        total = total + gain(4 + k) * (x.activity[k] / n.scale[4 + k]);
    }
    return t_zone + ex(p[0]) * (total * n.step_scale);
}

double PhysicsZoneModel::step(std::span<const double> p, double t_zone, const Exogenous& x, double q_hvac) const {
    if (p.size() != params_.size()) throw InvalidArgument("parameter vector has the wrong size");
    for (double v : p) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite model parameter");
    }
    return step_impl<double>(p, t_zone, x, q_hvac, nullptr);
}

ad::Var PhysicsZoneModel::step(std::span<const ad::Var> p, ad::Var t_zone, const Exogenous& x, ad::Var q_hvac,
                               ad::Var* penalty) const {
    if (p.size() != params_.size()) throw InvalidArgument("parameter vector has the wrong size");
    return step_impl<ad::Var>(p, t_zone, x, q_hvac, penalty);
}

PhysicsZoneModel::Flows PhysicsZoneModel::flows(double t_zone, const Exogenous& x, double q_hvac) const {
    // Evaluate each driving term alone through the full step.
    auto only = [&](double t_out, double ghi, double occ, bool act, double q) {
        Exogenous e = x;
        e.t_out = t_out;
        e.ghi = ghi;
        e.occupancy = occ;
        if (!act) std::fill(e.activity.begin(), e.activity.end(), 0.0);
        return step(t_zone, e, q) - t_zone;
    };
    return {only(x.t_out, 0.0, 0.0, false, 0.0), only(t_zone, x.ghi, 0.0, false, 0.0),
            only(t_zone, 0.0, x.occupancy, true, 0.0), only(t_zone, 0.0, 0.0, false, q_hvac)};
}

void PhysicsZoneModel::write_header(std::ostream& out) const {
    out << "head " << (config_.head == HeadKind::Affine ? "affine" : "mlp") << '\n';
    out << "hidden " << config_.hidden << '\n';
    out << "sign_projection " << (config_.sign_projection ? 1 : 0) << '\n';
}

std::vector<std::pair<std::string, std::size_t>> PhysicsZoneModel::blocks() const {
    std::vector<std::pair<std::string, std::size_t>> b = {{"log_c_inv", 1}};
    const char* names[] = {"head_env", "head_solar", "head_occupancy", "head_hvac"};
    for (const char* n : names) b.emplace_back(n, head_size());
    for (const auto& a : activity_names_) b.emplace_back("head_act_" + a, head_size());
    return b;
}

// ---------------------------------------------------------------------------

BaselineZoneModel::BaselineZoneModel(double dt, std::vector<std::string> activity_names, int hidden, unsigned seed)
    : ZoneModel(dt, std::move(activity_names)), hidden_(hidden), seed_(seed) {
    if (hidden < 1) throw InvalidArgument("hidden width must be >= 1");
    initialize_params();
}

void BaselineZoneModel::initialize_params() {
    const auto w = static_cast<std::size_t>(hidden_);
    const std::size_t nin = inputs();
    params_.assign(w * nin + 2 * w + 1, 0.0);
    std::mt19937 rng(seed_);
    const double a = 1.0 / std::sqrt(static_cast<double>(nin));
    for (std::size_t i = 0; i < w * nin; ++i) params_[i] = uniform(rng, -a, a);
    for (std::size_t j = 0; j < w; ++j) params_[w * nin + j] = uniform(rng, -0.1, 0.1);
    for (std::size_t j = 0; j < w; ++j) params_[w * nin + w + j] = uniform(rng, -0.1, 0.1);
}

void BaselineZoneModel::warm_start(const ThermalTrace& trace) {
    trace.validate();
    if (trace.activity_names != activity_names_) throw InvalidArgument("trace activities do not match the model");
    if (trace.size() < 2) throw InvalidArgument("warm start needs at least two samples");
    const auto w = static_cast<std::size_t>(hidden_);
    const std::size_t nin = inputs();
    const Normalization& n = norm_;
    std::vector<std::vector<double>> ata(w + 1, std::vector<double>(w + 1, 0.0));
    std::vector<double> aty(w + 1, 0.0);
    std::vector<double> row(w + 1), z(nin);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        z[0] = (trace.t_zone[i] - n.mean[0]) / n.stdev[0];
        z[1] = (trace.t_out[i] - n.mean[1]) / n.stdev[1];
        z[2] = (trace.ghi[i] - n.mean[2]) / n.stdev[2];
        z[3] = (trace.occupancy[i] - n.mean[3]) / n.stdev[3];
        z[4] = (trace.q_hvac[i] - n.mean[4]) / n.stdev[4];
        for (std::size_t a = 0; a < activity_names_.size(); ++a) {
            z[5 + a] = (trace.activity[a][i] - n.mean[5 + a]) / n.stdev[5 + a];
        }
        for (std::size_t j = 0; j < w; ++j) {
            double a = params_[w * nin + j];
            for (std::size_t l = 0; l < nin; ++l) a += params_[j * nin + l] * z[l];
            row[j] = std::tanh(a);
        }
        row[w] = 1.0;
        accumulate_normal(ata, aty, row, (trace.t_zone[i + 1] - trace.t_zone[i]) / n.step_scale);
    }
    const double ridge = 1e-4 * static_cast<double>(trace.size());
    for (std::size_t j = 0; j < w; ++j) ata[j][j] += ridge;
    ata[w][w] += 1e-12;
    const auto theta = solve_dense(ata, aty);
    for (std::size_t j = 0; j < w; ++j) params_[w * nin + w + j] = theta[j];
    params_[w * nin + 2 * w] = theta[w];
}

template <class S>
S BaselineZoneModel::step_impl(std::span<const S> p, S t_zone, const Exogenous& x, S q_hvac) const {
    if (x.activity.size() != activity_names_.size()) {
        throw InvalidArgument("exogenous activity count does not match the model");
    }
    const Normalization& n = norm_;
    const auto w = static_cast<std::size_t>(hidden_);
    const std::size_t nin = inputs();
    S zt = (t_zone - n.mean[0]) * (1.0 / n.stdev[0]);
    S zq = (q_hvac - n.mean[4]) * (1.0 / n.stdev[4]);
    std::vector<double> zx = {(x.t_out - n.mean[1]) / n.stdev[1], (x.ghi - n.mean[2]) / n.stdev[2],
                              (x.occupancy - n.mean[3]) / n.stdev[3]};
    for (std::size_t k = 0; k < activity_names_.size(); ++k) {
        zx.push_back((x.activity[k] - n.mean[5 + k]) / n.stdev[5 + k]);
    }
    S out = p[w * nin + 2 * w];
    for (std::size_t j = 0; j < w; ++j) {
        const std::size_t r = j * nin;
        S a = p[w * nin + j] + p[r] * zt + p[r + 4] * zq;
        a = a + p[r + 1] * zx[0] + p[r + 2] * zx[1] + p[r + 3] * zx[2];
        for (std::size_t k = 0; k < activity_names_.size(); ++k) a = a + p[r + 5 + k] * zx[3 + k];
        out = out + p[w * nin + w + j] * th(a);
    }
    return t_zone + out * n.step_scale;
}

double BaselineZoneModel::step(std::span<const double> p, double t_zone, const Exogenous& x, double q_hvac) const {
    if (p.size() != params_.size()) throw InvalidArgument("parameter vector has the wrong size");
    return step_impl<double>(p, t_zone, x, q_hvac);
}

ad::Var BaselineZoneModel::step(std::span<const ad::Var> p, ad::Var t_zone, const Exogenous& x, ad::Var q_hvac,
                                ad::Var*) const {
    if (p.size() != params_.size()) throw InvalidArgument("parameter vector has the wrong size");
    return step_impl<ad::Var>(p, t_zone, x, q_hvac);
}

void BaselineZoneModel::write_header(std::ostream& out) const {
    out << "hidden " << hidden_ << '\n';
    out << "seed " << seed_ << '\n';
}

std::vector<std::pair<std::string, std::size_t>> BaselineZoneModel::blocks() const {
    const auto w = static_cast<std::size_t>(hidden_);
    return {{"W", w * inputs()}, {"c", w}, {"v", w}, {"b", 1}};
}

// ---------------------------------------------------------------------------

std::unique_ptr<ZoneModel> read_zone_model(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError("zone model line " + std::to_string(lineno) + ": " + msg);
    };
    std::map<std::string, std::vector<std::string>> header;
    std::map<std::string, std::vector<double>> norms;
    std::vector<std::pair<std::string, std::vector<double>>> params;
    bool magic = false, ended = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key[0] == '#') continue;
        if (!magic) {
            int version = 0;
            if (key != kMagic || !(ls >> version) || version != 1) throw fail("not a zone model file");
            magic = true;
            continue;
        }
        if (key == "end") {
            ended = true;
            break;
        }
        if (key == "norm" || key == "param") {
            std::string name;
            std::size_t count = 0;
            if (!(ls >> name >> count)) throw fail("expected name and count");
            std::vector<double> v;
            std::string tok;
            while (ls >> tok) {
                double d = 0.0;
                auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
                if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(d)) {
                    throw fail("bad number '" + tok + "'");
                }
                v.push_back(d);
            }
            if (v.size() != count) throw fail(name + ": expected " + std::to_string(count) + " values");
            if (key == "norm") norms[name] = std::move(v);
            else params.emplace_back(name, std::move(v));
            continue;
        }
        std::vector<std::string> rest;
        std::string tok;
        while (ls >> tok) rest.push_back(tok);
        header[key] = rest;
    }
    if (!magic || !ended) throw ParseError("zone model: truncated file");

    auto one = [&](const std::string& k) -> std::string {
        auto it = header.find(k);
        if (it == header.end() || it->second.empty()) throw ParseError("zone model: missing '" + k + "'");
        return it->second[0];
    };
    const double dt = std::stod(one("dt"));
    std::vector<std::string> acts;
    {
        const auto& a = header.at("activities");
        const auto n = static_cast<std::size_t>(std::stoul(a.at(0)));
        if (a.size() != n + 1) throw ParseError("zone model: activity count mismatch");
        acts.assign(a.begin() + 1, a.end());
    }

    std::unique_ptr<ZoneModel> model;
    const std::string kind = one("kind");
    if (kind == "physics") {
        PhysicsModelConfig cfg;
        const std::string head = one("head");
        if (head != "affine" && head != "mlp") throw ParseError("zone model: unknown head '" + head + "'");
        cfg.head = head == "affine" ? HeadKind::Affine : HeadKind::Mlp;
        cfg.hidden = std::stoi(one("hidden"));
        cfg.sign_projection = one("sign_projection") == "1";
        model = std::make_unique<PhysicsZoneModel>(dt, acts, cfg);
    } else if (kind == "baseline") {
        model = std::make_unique<BaselineZoneModel>(dt, acts, std::stoi(one("hidden")),
                                                    static_cast<unsigned>(std::stoul(one("seed"))));
    } else {
        throw ParseError("zone model: unknown kind '" + kind + "'");
    }

    Normalization n;
    try {
        n.mean = norms.at("mean");
        n.stdev = norms.at("stdev");
        n.scale = norms.at("scale");
        n.step_scale = norms.at("step_scale").at(0);
    } catch (const std::out_of_range&) {
        throw ParseError("zone model: missing normalization constants");
    }
    model->set_normalization(std::move(n));

    const auto expected = model->blocks();
    if (expected.size() != params.size()) throw ParseError("zone model: wrong number of parameter blocks");
    std::vector<double> flat;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i].first != params[i].first || expected[i].second != params[i].second.size()) {
            throw ParseError("zone model: expected block '" + expected[i].first + "' of " +
                             std::to_string(expected[i].second) + " values");
        }
        flat.insert(flat.end(), params[i].second.begin(), params[i].second.end());
    }
    model->params() = std::move(flat);
    return model;
}

std::unique_ptr<ZoneModel> load_zone_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    return read_zone_model(in);
}

void save_zone_model(const ZoneModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file '" + path + "'");
    model.write(out);
}

std::vector<double> rollout_predict(const ZoneModel& model, double t0, std::span<const Exogenous> horizon,
                                    std::span<const double> q_hvac) {
    if (horizon.size() != q_hvac.size()) {
        throw InvalidArgument("rollout_predict: disturbance and Q_hvac horizons differ in length");
    }
    std::vector<double> out;
    out.reserve(horizon.size() + 1);
    out.push_back(t0);
    double t = t0;
    for (std::size_t k = 0; k < horizon.size(); ++k) {
        t = model.step(t, horizon[k], q_hvac[k]);
        out.push_back(t);
    }
    return out;
}

ViolationReport physics_violation_metric(const ZoneModel& model, const ThermalTrace& trace) {
    trace.validate();
    ViolationReport r;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.q_hvac[i] != 0.0 || !(trace.t_out[i] > trace.t_zone[i])) continue;
        if (trace.ghi[i] < 0.0 || trace.occupancy[i] < 0.0) continue;
        auto act = trace.activity_at(i);
        if (std::any_of(act.begin(), act.end(), [](double a) { return a < 0.0; })) continue;
        ++r.qualifying;
        Exogenous x{trace.t_out[i], trace.ghi[i], trace.occupancy[i], act};
        if (model.step(trace.t_zone[i], x, 0.0) < trace.t_zone[i]) ++r.violating;
    }
    r.fraction = r.qualifying == 0 ? 0.0 : static_cast<double>(r.violating) / static_cast<double>(r.qualifying);
    return r;
}

} // namespace bldgsim::thermal
