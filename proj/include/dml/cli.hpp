#ifndef DML_CLI_HPP
#define DML_CLI_HPP

#include <cstdint>
#include <exception>
#include <optional>
#include <string>

namespace dml {

/// Verbosity from the DML_LOG environment variable (quiet | info | debug);
/// anything else, or no value, means info. Log lines go to stderr so stdout
/// stays machine-readable.
enum class LogLevel { Quiet, Info, Debug };
LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

/// Command-line flags that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replications;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> folds;
    std::optional<std::string> output_dir;
};

int cmd_estimate(const std::string& config_path, const CliOverrides& overrides);
int cmd_simulate(const std::string& config_path, const CliOverrides& overrides);
int cmd_bounds(const std::string& config_path, const CliOverrides& overrides);
int cmd_report(const std::string& input_dir, const std::string& output_path);

/// Prints the structured error object to stdout and maps the exception to
/// the documented exit status (2 for configuration, 1 otherwise).
int report_error(const std::exception& e);

} // namespace dml

#endif
