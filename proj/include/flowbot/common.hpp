#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowbot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;

/// Base error for every failure the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed default seed used when a caller does not provide one.
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Upper bound on worker threads; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Work items must write only to their own slot;
/// nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict full-token parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_uint(std::string_view text, std::uint64_t& out);

std::vector<std::string_view> split_view(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Callback receiving non-fatal diagnostics (skipped rows, convergence, ...).
using WarningSink = std::function<void(const std::string&)>;
/// An empty sink restores the default, which writes to stderr.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace flowbot
