#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bldgsim/autodiff/tape.hpp"
#include "bldgsim/thermal/rc_zone.hpp"
#include "bldgsim/thermal/trace.hpp"

namespace bldgsim::thermal {

/// Exogenous inputs of one zone step.
struct Exogenous {
    double t_out = 0.0;
    double ghi = 0.0;
    double occupancy = 0.0;
    std::vector<double> activity;   // one flag per model activity name
};

std::vector<Exogenous> exogenous_series(const ThermalTrace& trace, std::size_t begin, std::size_t end);

/// Training-set statistics stored with a model.
///
/// `mean`/`stdev` cover [t_zone, t_out, ghi, occupancy, q_hvac, activities...]
/// and standardize learned-head inputs. `scale` covers the driving terms
/// [t_out - t_zone, ghi, occupancy, q_hvac, activities...] and is a pure
/// rescaling (no centering) so that their signs survive.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> stdev;
    std::vector<double> scale;
    double step_scale = 1.0;   // typical |T(k+1) - T(k)| in K

    static Normalization identity(std::size_t activities);
    static Normalization fit(const ThermalTrace& trace);
};

/// Common interface of the trainable zone models. Each model is a map
/// T(k+1) = f(params, T(k), exogenous(k), Q_hvac(k)) evaluated either on
/// plain doubles or on an autodiff tape.
class ZoneModel {
public:
    virtual ~ZoneModel() = default;

    virtual std::string kind() const = 0;
    virtual std::unique_ptr<ZoneModel> clone() const = 0;

    virtual double step(std::span<const double> p, double t_zone, const Exogenous& x, double q_hvac) const = 0;
    /// Differentiable step. When `penalty` is non-null the model adds its
    /// sign-violation penalty for this step to it.
    virtual ad::Var step(std::span<const ad::Var> p, ad::Var t_zone, const Exogenous& x, ad::Var q_hvac,
                         ad::Var* penalty) const = 0;

    double step(double t_zone, const Exogenous& x, double q_hvac) const { return step(params_, t_zone, x, q_hvac); }

    std::vector<double>& params() noexcept { return params_; }
    const std::vector<double>& params() const noexcept { return params_; }
    double dt() const noexcept { return dt_; }
    const std::vector<std::string>& activity_names() const noexcept { return activity_names_; }
    const Normalization& normalization() const noexcept { return norm_; }
    void set_normalization(Normalization norm);

    /// Least-squares fit of the model's output layer to one-step changes of
    /// `trace` under the current normalization; a starting point for train().
    virtual void warm_start(const ThermalTrace& trace) = 0;

    void write(std::ostream& out) const;

protected:
    ZoneModel(double dt, std::vector<std::string> activity_names);
    virtual void write_header(std::ostream& out) const = 0;
    virtual std::vector<std::pair<std::string, std::size_t>> blocks() const = 0;

    double dt_;
    std::vector<std::string> activity_names_;
    Normalization norm_;
    std::vector<double> params_;

    friend std::unique_ptr<ZoneModel> read_zone_model(std::istream& in);
};

enum class HeadKind { Affine, Mlp };

struct PhysicsModelConfig {
    HeadKind head = HeadKind::Affine;
    int hidden = 8;
    bool sign_projection = true;   // softplus gains; false leaves signs to the loss penalty
    double initial_gain = 0.5;
    unsigned init_seed = 1234;
};

/// Physics-structured zone model. The zone heat balance is split into
/// additive heads, each a learned nonnegative gain times its driving term:
///
///   T' = T + exp(log_c_inv) * s * [ (T_out - T) g_env + GHI g_sol
///        + occ g_occ + sum_k a_k g_k + Q_hvac g_hvac ]
///
/// Gains depend on the standardized [T, T_out, GHI, occ] only, so the model
/// is exactly monotone in Q_hvac and cannot cool a free-floating zone that is
/// colder than outdoors.
class PhysicsZoneModel final : public ZoneModel {
public:
    PhysicsZoneModel(double dt, std::vector<std::string> activity_names, PhysicsModelConfig config = {});

    /// Parameters reproducing the RC oracle exactly (linear heads).
    static PhysicsZoneModel from_rc(const RcZoneSpec& spec, double dt, std::vector<std::string> activity_names,
                                    PhysicsModelConfig config = {}, Normalization norm = {});

    std::string kind() const override { return "physics"; }
    std::unique_ptr<ZoneModel> clone() const override { return std::make_unique<PhysicsZoneModel>(*this); }

    double step(std::span<const double> p, double t_zone, const Exogenous& x, double q_hvac) const override;
    ad::Var step(std::span<const ad::Var> p, ad::Var t_zone, const Exogenous& x, ad::Var q_hvac,
                 ad::Var* penalty) const override;
    using ZoneModel::step;

    /// Heat-flow terms of one step in model units (K per step before the
    /// capacitance factor): env, solar, internal, hvac.
    struct Flows {
        double env, solar, internal, hvac;
    };
    Flows flows(double t_zone, const Exogenous& x, double q_hvac) const;

    const PhysicsModelConfig& config() const noexcept { return config_; }
    std::size_t head_size() const noexcept;
    std::size_t head_count() const noexcept { return 4 + activity_names_.size(); }

    /// Resets parameters to the untrained initial point.
    void initialize_params();
    /// Nonnegative (or, without projection, plain) least-squares head gains.
    void warm_start(const ThermalTrace& trace) override;

private:
    template <class S>
    S step_impl(std::span<const S> p, S t_zone, const Exogenous& x, S q_hvac, S* penalty) const;
    template <class S>
    S head(std::span<const S> p, std::size_t index, S z0, const double (&zx)[3]) const;

    void write_header(std::ostream& out) const override;
    std::vector<std::pair<std::string, std::size_t>> blocks() const override;

    PhysicsModelConfig config_;

    friend std::unique_ptr<ZoneModel> read_zone_model(std::istream& in);
};

/// Unconstrained recurrent map with one tanh hidden layer:
/// T' = T + s * (b + v . tanh(W z + c)), z the standardized inputs.
class BaselineZoneModel final : public ZoneModel {
public:
    BaselineZoneModel(double dt, std::vector<std::string> activity_names, int hidden = 32, unsigned seed = 4321);

    std::string kind() const override { return "baseline"; }
    std::unique_ptr<ZoneModel> clone() const override { return std::make_unique<BaselineZoneModel>(*this); }

    double step(std::span<const double> p, double t_zone, const Exogenous& x, double q_hvac) const override;
    ad::Var step(std::span<const ad::Var> p, ad::Var t_zone, const Exogenous& x, ad::Var q_hvac,
                 ad::Var* penalty) const override;
    using ZoneModel::step;

    int hidden() const noexcept { return hidden_; }
    void initialize_params();
    /// Ridge regression of (v, b) on the fixed random hidden layer.
    void warm_start(const ThermalTrace& trace) override;

private:
    template <class S>
    S step_impl(std::span<const S> p, S t_zone, const Exogenous& x, S q_hvac) const;
    std::size_t inputs() const noexcept { return 5 + activity_names_.size(); }

    void write_header(std::ostream& out) const override;
    std::vector<std::pair<std::string, std::size_t>> blocks() const override;

    int hidden_;
    unsigned seed_;

    friend std::unique_ptr<ZoneModel> read_zone_model(std::istream& in);
};

/// Reads the text format produced by ZoneModel::write.
std::unique_ptr<ZoneModel> read_zone_model(std::istream& in);
std::unique_ptr<ZoneModel> load_zone_model(const std::string& path);
void save_zone_model(const ZoneModel& model, const std::string& path);

/// Iterates the model from t0; returns H + 1 temperatures including t0.
std::vector<double> rollout_predict(const ZoneModel& model, double t0, std::span<const Exogenous> horizon,
                                    std::span<const double> q_hvac);

struct ViolationReport {
    double fraction = 0.0;
    std::size_t qualifying = 0;   // steps with Q_hvac = 0, T_out > T_zone and nonnegative gains
    std::size_t violating = 0;    // of those, steps with a predicted temperature drop
};

/// One-step predictions from the measured states of `trace`.
ViolationReport physics_violation_metric(const ZoneModel& model, const ThermalTrace& trace);

} // namespace bldgsim::thermal
