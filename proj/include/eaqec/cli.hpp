#pragma once

// Run configurations and the sweep drivers behind the command-line tool. Each
// driver writes its table to `out`, a human-readable summary to `log`, and
// returns the process exit code.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eaqec/correction.hpp"
#include "eaqec/dephasing_channel.hpp"
#include "eaqec/errors.hpp"
#include "eaqec/mixed_env.hpp"
#include "eaqec/quantum_state.hpp"

namespace eaqec::cli {

enum ExitCode : int {
    kPass = 0,
    kInvariantFailure = 1,
    kConfigError = 2,
    kEmptyRegime = 3,
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

inline const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names{"roundtrip", "scan", "mixed-scan", "fig4", "check-appendix"};
    return names;
}

struct RunConfig {
    std::string mode = "roundtrip";
    // explicit relative Hamiltonians (g0, gx, gy, gz); override the coupling form
    std::optional<std::array<double, 4>> h1;
    std::optional<std::array<double, 4>> h2;
    double k = 1.0;
    std::array<double, 3> gamma{0.5, 0.0, 0.25};
    double theta = std::numbers::pi / 4;
    double phi = 0.0;
    double w = 0.9;
    BlochVector rho{1.0, 0.0, 0.0};
    double t_start = 0.0;
    double t_end = 2.0 * std::numbers::pi;
    std::int64_t t_steps = 400;
    std::uint64_t seed = 0;
    std::string output_path;
    double regime_tol = 2e-5;

    /// Defaults per mode. check-appendix uses a weak coupling with Gamma
    /// perpendicular to z, for which near-identity channels occur close to
    /// multiples of pi / |Gamma|, on a grid fine enough to resolve them.
    static RunConfig defaults_for(const std::string& mode) {
        RunConfig c;
        c.mode = mode;
        if (mode == "check-appendix") {
            c.k = 0.1;
            c.gamma = {1.0, 0.0, 0.0};
            c.theta = 0.3;
            c.t_steps = 20001;
            c.regime_tol = 2e-5;
        }
        return c;
    }

    std::vector<double> time_grid() const {
        std::vector<double> g(static_cast<std::size_t>(t_steps));
        for (std::int64_t i = 0; i < t_steps; ++i)
            g[static_cast<std::size_t>(i)] =
                t_steps == 1 ? t_start : t_start + (t_end - t_start) * static_cast<double>(i) / static_cast<double>(t_steps - 1);
        return g;
    }

    void validate() const {
        bool known = false;
        for (const auto& m : mode_names()) known = known || m == mode;
        if (!known) throw ConfigError("unknown mode '" + mode + "'");
        if (t_steps < 1) throw ConfigError("t_steps must be at least 1");
        if (!std::isfinite(t_start) || !std::isfinite(t_end)) throw ConfigError("t_start and t_end must be finite");
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) throw ConfigError("w must lie in [0, 1]");
        if (!std::isfinite(theta) || !std::isfinite(phi)) throw ConfigError("theta and phi must be finite");
        if (!std::isfinite(k)) throw ConfigError("k must be finite");
        for (double g : gamma)
            if (!std::isfinite(g)) throw ConfigError("gamma must be finite");
        if (h1.has_value() != h2.has_value()) throw ConfigError("h1 and h2 must be given together");
        if (!std::isfinite(rho.norm()) || rho.norm() > 1.0 + kBlochTol) throw ConfigError("rho Bloch vector must have norm <= 1");
        if (!(regime_tol > 0.0)) throw ConfigError("regime_tol must be positive");
    }

    ComplexMatrix hamiltonian(int which) const {
        if (h1) return from_pauli(which == 1 ? *h1 : *h2);
        const double sign = which == 1 ? 1.0 : -1.0;
        return from_pauli({0.0, gamma[0], gamma[1], gamma[2] + sign * k});
    }

    Ket psi0() const { return Ket::from_bloch_angles(theta, phi); }
    DensityMatrix initial_state() const { return bloch_to_density(rho); }
    DephasingModel pure_model() const { return {hamiltonian(1), hamiltonian(2), psi0()}; }

    MixedEnvModel mixed_model() const {
        if (h1) return MixedEnvModel::from_hamiltonians(w, hamiltonian(1), hamiltonian(2), psi0());
        return MixedEnvModel::from_coupling(w, k, gamma, theta, phi);
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
    std::string v = value;
    for (auto& ch : v)
        if (ch == ',') ch = ' ';
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
        }
        if (used != tok.size()) throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
        out.push_back(d);
    }
    return out;
}

template <std::size_t N>
std::array<double, N> parse_array(const std::string& key, const std::string& value) {
    const auto v = parse_numbers(key, value);
    if (v.size() != N) throw ConfigError("key '" + key + "' expects " + std::to_string(N) + " numbers");
    std::array<double, N> a{};
    for (std::size_t i = 0; i < N; ++i) a[i] = v[i];
    return a;
}

inline double parse_scalar(const std::string& key, const std::string& value) { return parse_array<1>(key, value)[0]; }

inline std::int64_t parse_integer(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long n = 0;
    try {
        n = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    }
    if (used != value.size()) throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    return n;
}

}  // namespace detail

/// Applies `key = value` lines ('#' starts a comment) on top of `config`.
inline void apply_config_text(RunConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");

        if (key == "h1") config.h1 = detail::parse_array<4>(key, value);
        else if (key == "h2") config.h2 = detail::parse_array<4>(key, value);
        else if (key == "k") config.k = detail::parse_scalar(key, value);
        else if (key == "gamma") config.gamma = detail::parse_array<3>(key, value);
        else if (key == "theta") config.theta = detail::parse_scalar(key, value);
        else if (key == "phi") config.phi = detail::parse_scalar(key, value);
        else if (key == "w") config.w = detail::parse_scalar(key, value);
        else if (key == "rho") {
            const auto r = detail::parse_array<3>(key, value);
            config.rho = {r[0], r[1], r[2]};
        } else if (key == "t_start") config.t_start = detail::parse_scalar(key, value);
        else if (key == "t_end") config.t_end = detail::parse_scalar(key, value);
        else if (key == "t_steps") config.t_steps = detail::parse_integer(key, value);
        else if (key == "seed") {
            const auto s = detail::parse_integer(key, value);
            if (s < 0) throw ConfigError("seed must be non-negative");
            config.seed = static_cast<std::uint64_t>(s);
        } else if (key == "output" || key == "output_path") config.output_path = value;
        else if (key == "regime_tol") config.regime_tol = detail::parse_scalar(key, value);
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

inline void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

/// 17 significant digits, '.' decimal separator regardless of locale settings
/// that affect iostreams.
inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out << ',';
        out << fmt(v);
        first = false;
    }
    out << '\n';
}

inline constexpr double kRoundTripPassDistance = 1e-8;

/// Pure-environment pipeline over the time grid.
inline int run_roundtrip(const RunConfig& config, std::ostream& out, std::ostream& log) {
    const DephasingModel model = config.pure_model();
    const DensityMatrix rho = config.initial_state();
    out << "t,re_C,im_C,p1,p2,bloch_x,bloch_y,bloch_z,dist_before,dist_after_branch1,dist_after_branch2\n";
    double worst = 0.0;
    for (double t : config.time_grid()) {
        const RoundTripReport r = round_trip(model, rho, t);
        const BlochVector b = density_to_bloch(r.channel_output);
        write_row(out, {t, r.C.real(), r.C.imag(), r.p1, r.p2, b.x, b.y, b.z, r.dist_before, r.dist_after_branch(1),
                        r.dist_after_branch(2)});
        worst = std::max(worst, r.dist_after);
    }
    const bool ok = worst < kRoundTripPassDistance;
    log << "roundtrip: max corrected distance " << fmt(worst) << (ok ? " (pass)" : " (FAIL)") << ", seed "
        << config.seed << '\n';
    return ok ? kPass : kInvariantFailure;
}

/// Relative states and measurement basis as Bloch vectors.
inline int run_scan(const RunConfig& config, std::ostream& out, std::ostream& log) {
    const DephasingModel model = config.pure_model();
    out << "t,re_C,im_C,abs_C,psi1_x,psi1_y,psi1_z,psi2_x,psi2_y,psi2_z,mu1_x,mu1_y,mu1_z,mu2_x,mu2_y,mu2_z\n";
    double worst = 0.0;
    for (double t : config.time_grid()) {
        const auto [psi1, psi2] = relative_states(model, t);
        const CorrectionPlan plan = plan_correction(model, t);
        const BlochVector a = ket_to_bloch(psi1), b = ket_to_bloch(psi2);
        const BlochVector m1 = ket_to_bloch(plan.observable.basis()[0]);
        const BlochVector m2 = ket_to_bloch(plan.observable.basis()[1]);
        write_row(out, {t, plan.overlap.value.real(), plan.overlap.value.imag(), std::abs(plan.overlap.value), a.x, a.y,
                        a.z, b.x, b.y, b.z, m1.x, m1.y, m1.z, m2.x, m2.y, m2.z});
        worst = std::max(worst, BlochVector{m1.x + m2.x, m1.y + m2.y, m1.z + m2.z}.norm());
    }
    // orthogonal qubit states sit at antipodal Bloch points
    const bool ok = worst < 1e-8;
    log << "scan: max |mu1 + mu2| on the Bloch sphere " << fmt(worst) << (ok ? " (pass)" : " (FAIL)") << '\n';
    return ok ? kPass : kInvariantFailure;
}

inline void require_mixed_weight(const RunConfig& config) {
    if (config.w <= 0.0 || config.w >= 1.0)
        throw ConfigError("mode '" + config.mode + "' needs 0 < w < 1; w = " + fmt(config.w) +
                          " is a pure environment, use the roundtrip mode instead");
}

/// Overlaps and outcome probabilities for the mixed environment.
inline int run_mixed_scan(const RunConfig& config, std::ostream& out, std::ostream& log) {
    require_mixed_weight(config);
    const MixedEnvModel model = config.mixed_model();
    const DensityMatrix rho = config.initial_state();
    out << "t,re_C,im_C,re_C_perp,im_C_perp,re_C_eff,im_C_eff,p_lambda1,p_lambda2,p_mu1,p_mu2\n";
    double worst = 0.0;
    for (double t : config.time_grid()) {
        const OverlapPair o = relative_overlaps(model, t);
        const cplx eff = o.effective(model.w());
        const CorrectedFamily f = corrected_family(model, rho, t);
        write_row(out, {t, o.C.real(), o.C.imag(), o.C_perp.real(), o.C_perp.imag(), eff.real(), eff.imag(),
                        f.p_lambda[0], f.p_lambda[1], f.p_mu[0], f.p_mu[1]});
        for (std::size_t a = 0; a < 2; ++a)
            worst = std::max(worst, std::abs(f.p_lambda[a] - mixed_outcome_probability(model.w(), f.p_ru[a])));
    }
    const bool ok = worst < 1e-8;
    log << "mixed-scan: max deviation from p(lambda) = w p + (1-w)(1-p): " << fmt(worst) << (ok ? " (pass)" : " (FAIL)")
        << '\n';
    return ok ? kPass : kInvariantFailure;
}

/// Trace distances of uncorrected and corrected states over the grid.
inline int run_fig4(const RunConfig& config, std::ostream& out, std::ostream& log) {
    require_mixed_weight(config);
    const MixedEnvModel model = config.mixed_model();
    const DensityMatrix rho = config.initial_state();
    out << "t,d_uncorrected,d_rho1c,d_rho2c,d_rhoc,d_rhotildec\n";
    std::size_t beats_protocols = 0, beats_all = 0, rows = 0;
    for (double t : config.time_grid()) {
        const DistanceReport d = distance_report(rho, corrected_family(model, rho, t), model, t);
        write_row(out, {t, d.d_uncorrected, d.d_rho1c, d.d_rho2c, d.d_rhoc, d.d_rhotildec});
        beats_protocols += d.uncorrected_beats_protocols() ? 1 : 0;
        beats_all += d.uncorrected_beats_all() ? 1 : 0;
        ++rows;
    }
    log << "fig4: crossing " << (beats_protocols > 0 ? "yes" : "no") << " (uncorrected closer than rho_c and rho~_c at "
        << beats_protocols << " of " << rows << " times; closer than every corrected state at " << beats_all << ")\n";
    return kPass;
}

struct CheckRecord {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::optional<double> t;
    std::optional<double> epsilon;

    nlohmann::json to_json() const {
        nlohmann::json j{{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}};
        if (t) j["t"] = *t;
        if (epsilon) j["epsilon"] = *epsilon;
        return j;
    }
};

/// The closed-form checks at each near-identity time, as records.
inline std::vector<CheckRecord> appendix_checks_at(const MixedEnvModel& model, const DensityMatrix& rho,
                                                   const EpsilonRegime& regime) {
    const double t = regime.t;
    const double eps = std::abs(regime.epsilon);
    const double slack = 10.0 * eps * eps;
    const double prob_bound = std::max(slack, 1e-8);
    const CorrectedFamily f = corrected_family(model, rho, t);
    const DistanceReport num = distance_report(rho, f, model, t);
    const DistanceReport ana = analytic_distances(rho(0, 1), model.w(), eps, t);

    std::vector<CheckRecord> out;
    auto add = [&](std::string name, double value, double bound) {
        out.push_back({std::move(name), value, bound, value <= bound, t, regime.epsilon});
    };
    add("distance_uncorrected", std::abs(num.d_uncorrected - ana.d_uncorrected), slack);
    add("distance_rho1c", std::abs(num.d_rho1c - ana.d_rho1c), slack);
    add("distance_rho2c", std::abs(num.d_rho2c - ana.d_rho2c), slack);
    add("distance_rhoc", std::abs(num.d_rhoc - ana.d_rhoc), slack);
    add("distance_rhotildec", std::abs(num.d_rhotildec - ana.d_rhotildec), slack);
    for (std::size_t a = 0; a < 2; ++a)
        add("probability_lambda" + std::to_string(a + 1),
            std::abs(f.p_lambda[a] - mixed_outcome_probability(model.w(), f.p_ru[a])), prob_bound);
    return out;
}

/// Re/Im overlap symmetry over the grid, then the closed forms at every
/// near-identity time; one JSON object per check.
inline int run_check_appendix(const RunConfig& config, std::ostream& out, std::ostream& log) {
    require_mixed_weight(config);
    const MixedEnvModel model = config.mixed_model();
    const DensityMatrix rho = config.initial_state();
    const auto grid = config.time_grid();

    double re_gap = 0.0, im_gap = 0.0;
    for (double t : grid) {
        const OverlapPair o = relative_overlaps(model, t);
        re_gap = std::max(re_gap, std::abs(o.C.real() - o.C_perp.real()));
        im_gap = std::max(im_gap, std::abs(o.C.imag() + o.C_perp.imag()));
    }
    std::vector<CheckRecord> records{{"symmetry_re", re_gap, 1e-10, re_gap <= 1e-10, {}, {}},
                                     {"symmetry_im", im_gap, 1e-10, im_gap <= 1e-10, {}, {}}};
    const bool symmetric = records[0].pass && records[1].pass;

    const auto regime = find_epsilon_regime(model, grid, config.regime_tol);
    records.push_back({"regime_times", static_cast<double>(regime.size()), 1.0, !regime.empty(), {}, {}});
    if (symmetric) {
        for (const auto& r : regime) {
            auto recs = appendix_checks_at(model, rho, r);
            records.insert(records.end(), recs.begin(), recs.end());
        }
    }

    std::size_t failed = 0;
    for (const auto& rec : records) {
        out << rec.to_json().dump() << '\n';
        if (!rec.pass && rec.name != "regime_times") ++failed;
    }
    log << "check-appendix: " << records.size() << " checks, " << failed << " failed, " << regime.size()
        << " near-identity times\n";
    if (failed > 0) return kInvariantFailure;
    if (regime.empty()) return kEmptyRegime;
    return kPass;
}

/// Dispatches on config.mode. ConfigError becomes exit code 2.
inline int run(const RunConfig& config, std::ostream& out, std::ostream& log) {
    try {
        config.validate();
        // model construction errors are configuration errors
        (void)config.initial_state();
        if (config.mode == "roundtrip" || config.mode == "scan") (void)config.pure_model();
        else (void)config.mixed_model();
    } catch (const Error& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    try {
        if (config.mode == "roundtrip") return run_roundtrip(config, out, log);
        if (config.mode == "scan") return run_scan(config, out, log);
        if (config.mode == "mixed-scan") return run_mixed_scan(config, out, log);
        if (config.mode == "fig4") return run_fig4(config, out, log);
        return run_check_appendix(config, out, log);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        log << "invariant failure: " << e.what() << '\n';
        return kInvariantFailure;
    }
}

}  // namespace eaqec::cli
