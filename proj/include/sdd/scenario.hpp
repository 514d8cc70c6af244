#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdd/sdd_solver.hpp"
#include "sdd/time_transform.hpp"

namespace sdd {

// A parsed scenario document. Every field is required unless marked optional;
// unknown keys anywhere in the document are rejected.
struct scenario {
    std::string name;
    params model;
    initial_data init;
    double s0 = 0;
    double d0 = 0;
    double T = 0;   // t-horizon of the SDD solve
    double S = 0;   // s-horizon of the transformed solve
    double dt = 0;
    double ds = 0;
    std::optional<double> h1;
    std::vector<std::string> checks;  // empty means all applicable checks
    std::vector<double> deltas;
    double alpha_fault = 0;  // test hook: shifts alpha before verification
    std::string hash;        // SHA-256 of the canonical document
    nlohmann::json document;

    [[nodiscard]] omega_spec omega() const { return default_omega(init, model, s0, d0); }
    [[nodiscard]] bool wants(std::string_view check) const;
};

// Raised for malformed documents; maps to exit code 1.
class config_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] scenario parse_scenario(const nlohmann::json& doc);
[[nodiscard]] scenario load_scenario(const std::filesystem::path& file);

// Overrides the step sizes (command line --dt/--ds) and re-checks that they divide h.
void override_steps(scenario& sc, std::optional<double> dt, std::optional<double> ds);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{"equivalence", "delay_invariant", "certificate", "bounds",
                                                "time_equivalence", "manifold", "stability", "assumptions",
                                                "boundedness", "restart", "dependence", "alpha_convergence"};
    return names;
}

}  // namespace sdd
