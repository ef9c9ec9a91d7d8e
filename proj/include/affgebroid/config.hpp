#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affgebroid/catalog.hpp"
#include "affgebroid/hamiltonian.hpp"
#include "affgebroid/integrator.hpp"

namespace affgebroid {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Per-invariant tolerances used by the check command.
struct CheckTolerances {
    double identities = 1e-12;
    double equations = 1e-9;
    double routes = 1e-9;
    double projectors = 1e-10;
    double legendre = 1e-10;
    double bracket_skew = 1e-12;
    double bracket_extension = 1e-9;
    double reference = 1e-9;
    double drift = 1e-6;
};

struct SystemConfig {
    std::string name;
    /// Set for catalog references.
    std::optional<std::string> catalog;
    std::map<std::string, double> parameters;
    std::map<std::string, std::string> expressions;
    std::vector<std::string> base_names;
    std::vector<std::string> fiber_names;
    Tolerances tolerances;
    CheckTolerances checks;

    std::shared_ptr<const ConstrainedSystem> system;
    /// Closed-form fiber accelerations, when the catalog knows them.
    std::function<std::optional<Eigen::VectorXd>(const PhasePoint&)> reference_accelerations;
    /// User Hamiltonian over (x, p); Legendre transform of L when absent.
    std::optional<ScalarField> hamiltonian;

    /// Names of the momenta, "p_" + fiber name.
    std::vector<std::string> momentum_names() const;
    HamiltonianData hamiltonian_data() const;
};

enum class Command { Simulate, Check, Bracket, Derive };

const char* command_name(Command c);
Command parse_command(const std::string& s);

struct RunSpec {
    Command command = Command::Check;
    std::optional<Eigen::VectorXd> x0;
    /// Fiber velocities, or momenta on the Hamiltonian side.
    std::optional<Eigen::VectorXd> y0;
    bool initial_is_momentum = false;
    double t0 = 0.0;
    double t1 = 10.0;
    double step = 1e-3;
    Method method = Method::RK4;
    bool project = false;
    bool hamiltonian = false;
    std::uint64_t seed = 1;
    std::size_t samples = 20;
    /// Explicit evaluation points for bracket and derive: (x, y) or (x, p).
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> points;
    /// Bracket arguments over (x, p, H); "H" alone is the system Hamiltonian.
    std::string h1 = "H";
    std::string h2 = "H";
    std::filesystem::path out_dir = ".";
};

struct Config {
    SystemConfig system;
    RunSpec run;
};

/// Parses and validates a JSON configuration. Errors are ParseError (syntax,
/// with line and column) or InputError (naming the offending field).
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Expression over (base, momenta, "H") turned into a function on V*, with
/// "H" bound to `H` by the chain rule.
MomentumFunction momentum_expression(const std::string& text, const SystemConfig& sys, const HamiltonianData& H);

}  // namespace affgebroid
