#include "sdd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <openssl/evp.h>

#include "sdd/error.hpp"

namespace sdd {

namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects any key that was never asked for.
class object_reader {
   public:
    object_reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) fail("must be an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) fail("missing key '" + key + "'");
        return obj_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail("'" + key + "' must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail("'" + key + "' must be finite");
        return x;
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail("'" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail("'" + key + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail("'" + key + "' must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Eigen::MatrixXd matrix(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) fail("'" + key + "' must be a non-empty array of rows");
        const auto rows = static_cast<Eigen::Index>(v.size());
        const auto cols = static_cast<Eigen::Index>(v.front().is_array() ? v.front().size() : 0);
        if (cols == 0) fail("'" + key + "' rows must be non-empty arrays");
        Eigen::MatrixXd out(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const json& row = v[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail("'" + key + "' is ragged");
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (!row[static_cast<std::size_t>(c)].is_number()) fail("'" + key + "' must hold numbers");
                out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) fail("unknown key '" + key + "'");
        }
    }

    [[noreturn]] void fail(const std::string& what) const { throw config_error(where_ + ": " + what); }

   private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

vec to_vec(const std::vector<double>& xs) { return Eigen::Map<const vec>(xs.data(), static_cast<Eigen::Index>(xs.size())); }

vec broadcast(object_reader& r, const std::string& key, int dim, double fallback) {
    if (!r.has(key)) return vec::Constant(dim, fallback);
    const json& v = r.raw(key);
    if (v.is_number()) return vec::Constant(dim, v.get<double>());
    const std::vector<double> xs = r.numbers(key);
    if (static_cast<int>(xs.size()) != dim) r.fail("'" + key + "' must have " + std::to_string(dim) + " entries");
    return to_vec(xs);
}

struct rhs_entry {
    rhs_fn f;
    double lip = 0;
    int dim = 1;
};

rhs_entry parse_f(const json& doc) {
    object_reader r(doc, "f");
    const std::string kind = r.text("kind");
    rhs_entry out;
    if (kind == "zero") {
        out.dim = static_cast<int>(r.number("dim", 1));
        const int m = out.dim;
        out.f = [m](double, const vec&, const vec&) { return vec(vec::Zero(m)); };
    } else if (kind == "linear") {
        const Eigen::MatrixXd A = r.matrix("A");
        const Eigen::MatrixXd B = r.matrix("B");
        if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
            r.fail("A and B must be square matrices of the same size");
        }
        out.dim = static_cast<int>(A.rows());
        const auto spectral = [](const Eigen::MatrixXd& M) {
            return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
        };
        out.lip = std::max(spectral(A), spectral(B));
        out.f = [A, B](double, const vec& y, const vec& yd) { return vec(A * y + B * yd); };
    } else if (kind == "scalar_negative_feedback") {
        const double a = r.number("a");
        const double b = r.number("b");
        out.lip = std::max(std::abs(a), std::abs(b));
        out.f = [a, b](double, const vec& y, const vec& yd) { return vec(-a * y - b * yd); };
    } else if (kind == "tanh_feedback") {
        // -a y - b tanh(y_delayed)
        const double a = r.number("a");
        const double b = r.number("b");
        out.lip = std::max(std::abs(a), std::abs(b));
        out.f = [a, b](double, const vec& y, const vec& yd) { return vec(-a * y - b * yd.array().tanh().matrix()); };
    } else {
        r.fail("unknown kind '" + kind + "' (zero, linear, scalar_negative_feedback, tanh_feedback)");
    }
    r.finish();
    return out;
}

struct forcing_entry {
    delay_forcing_fn G;
    double lip = 0;
    double sup = 0;
};

forcing_entry parse_G(const json& doc, int dim) {
    object_reader r(doc, "G");
    const std::string kind = r.text("kind");
    forcing_entry out;
    if (kind == "zero") {
        out.G = [](const vec&) { return 0.0; };
    } else if (kind == "scaled_tanh" || kind == "scaled_sin") {
        const double kappa = r.number("kappa");
        const vec w = broadcast(r, "w", dim, 1.0);
        out.sup = std::abs(kappa);
        out.lip = std::abs(kappa) * w.norm();
        if (kind == "scaled_tanh") {
            out.G = [kappa, w](const vec& y) { return kappa * std::tanh(w.dot(y)); };
        } else {
            out.G = [kappa, w](const vec& y) { return kappa * std::sin(w.dot(y)); };
        }
    } else {
        r.fail("unknown kind '" + kind + "' (zero, scaled_tanh, scaled_sin)");
    }
    r.finish();
    return out;
}

trajectory parse_history(const json& doc, int dim, double t0, double h, double dt) {
    object_reader r(doc, "history");
    const std::string kind = r.text("kind");
    const auto segments = static_cast<std::size_t>(std::max(1.0, std::round(h / dt)));
    const std::vector<double> mesh = uniform_nodes(t0 - h, t0, segments);
    trajectory out;
    if (kind == "constant") {
        const vec value = broadcast(r, "value", dim, 1.0);
        out = trajectory::constant(t0 - h, t0, value);
    } else if (kind == "cosine") {
        // offset + amplitude cos(frequency (t - t0) + phase)
        const vec offset = broadcast(r, "offset", dim, 0.0);
        const vec amplitude = broadcast(r, "amplitude", dim, 1.0);
        const double freq = r.number("frequency", 1.0);
        const double phase = r.number("phase", 0.0);
        out = trajectory::sample(
            mesh, [&](double t) { return vec(offset + amplitude * std::cos(freq * (t - t0) + phase)); },
            [&](double t) { return vec(-freq * amplitude * std::sin(freq * (t - t0) + phase)); });
    } else if (kind == "exponential") {
        // amplitude exp(rate (t - t0))
        const vec amplitude = broadcast(r, "amplitude", dim, 1.0);
        const double rate = r.number("rate");
        out = trajectory::sample(
            mesh, [&](double t) { return vec(amplitude * std::exp(rate * (t - t0))); },
            [&](double t) { return vec(rate * amplitude * std::exp(rate * (t - t0))); });
    } else if (kind == "table") {
        const std::vector<double> ts = r.numbers("t");
        const Eigen::MatrixXd ys = r.matrix("y");
        const Eigen::MatrixXd dys = r.matrix("dy");
        if (ys.rows() != static_cast<Eigen::Index>(ts.size()) || dys.rows() != ys.rows() || ys.cols() != dim ||
            dys.cols() != dim) {
            r.fail("table needs one row of y and dy (each of length dim) per time");
        }
        trajectory_builder b(dim);
        try {
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const auto row = static_cast<Eigen::Index>(i);
                b.push(ts[i], vec(ys.row(row).transpose()), vec(dys.row(row).transpose()));
            }
        } catch (const error& e) {
            r.fail(e.what());
        }
        out = std::move(b).finish();
    } else {
        r.fail("unknown kind '" + kind + "' (constant, cosine, exponential, table)");
    }
    r.finish();
    return out;
}

bool divides(double whole, double step) {
    const double ratio = whole / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

}  // namespace

bool scenario::wants(std::string_view check) const {
    return checks.empty() || std::find(checks.begin(), checks.end(), check) != checks.end();
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

scenario parse_scenario(const json& doc) {
    object_reader r(doc, "scenario");
    const std::string name = r.text("name");
    const rhs_entry f = parse_f(r.raw("f"));
    const forcing_entry G = parse_G(r.raw("G"), f.dim);

    params::fields fields{.mu = r.number("mu"),
                          .eta_bar = r.number("eta_bar"),
                          .dim = f.dim,
                          .f = f.f,
                          .G = G.G,
                          .lip_f = f.lip,
                          .lip_G = G.lip,
                          .g_sup = G.sup,
                          .autonomous = true};
    const double eta0 = r.number("eta0");
    const double t0 = r.number("t0", 0.0);
    const double s0 = r.number("s0", 0.0);
    const double d0 = r.number("d0");
    const double T = r.number("T");
    const double S = r.number("S");
    const double dt = r.number("dt");
    const double ds = r.number("ds");
    const std::optional<double> h1 = r.optional_number("h1");
    std::vector<std::string> checks;
    if (r.has("checks")) {
        const json& v = r.raw("checks");
        if (!v.is_array()) r.fail("'checks' must be an array of names");
        for (const auto& c : v) {
            if (!c.is_string()) r.fail("'checks' must be an array of names");
            const auto known = known_checks();
            if (std::find(known.begin(), known.end(), c.get<std::string>()) == known.end()) {
                r.fail("unknown check '" + c.get<std::string>() + "'");
            }
            checks.push_back(c.get<std::string>());
        }
    }
    const std::vector<double> deltas = r.has("deltas") ? r.numbers("deltas") : std::vector<double>{1e-2, 1e-3, 1e-4};
    const double alpha_fault = r.number("inject_alpha_fault", 0.0);

    if (!(fields.eta_bar > 0)) r.fail("eta_bar must be positive");
    const double h = 2 * fields.eta_bar;
    if (!(dt > 0) || !divides(h, dt)) r.fail("dt must be positive and divide h = 2 eta_bar");
    if (!(ds > 0) || !divides(h, ds)) r.fail("ds must be positive and divide h = 2 eta_bar");
    if (!(T > t0) || !(S > 0)) r.fail("need T > t0 and S > 0");
    for (double d : deltas) {
        if (!(d > 0)) r.fail("deltas must be positive");
    }
    trajectory g = parse_history(r.raw("history"), f.dim, t0, h, dt);
    r.finish();

    return scenario{.name = name,
                    .model = params(std::move(fields)),
                    .init = initial_data{.g = std::move(g), .eta0 = eta0, .t0 = t0},
                    .s0 = s0,
                    .d0 = d0,
                    .T = T,
                    .S = S,
                    .dt = dt,
                    .ds = ds,
                    .h1 = h1,
                    .checks = std::move(checks),
                    .deltas = deltas,
                    .alpha_fault = alpha_fault,
                    .hash = sha256_hex(doc.dump()),
                    .document = doc};
}

scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw config_error("cannot open scenario file " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(file.string() + ": " + e.what());
    }
    return parse_scenario(doc);
}

void override_steps(scenario& sc, std::optional<double> dt, std::optional<double> ds) {
    const double h = sc.model.h();
    if (dt) {
        if (!(*dt > 0) || !divides(h, *dt)) throw config_error("--dt must be positive and divide h = 2 eta_bar");
        sc.dt = *dt;
        sc.document["dt"] = *dt;
    }
    if (ds) {
        if (!(*ds > 0) || !divides(h, *ds)) throw config_error("--ds must be positive and divide h = 2 eta_bar");
        sc.ds = *ds;
        sc.document["ds"] = *ds;
    }
    if (dt || ds) sc.hash = sha256_hex(sc.document.dump());
}

}  // namespace sdd
