#include "ecofence/errors.hpp"

namespace ecofence {

namespace {

std::string summarize(const std::string& source, const std::vector<std::string>& diagnostics) {
  std::string message = source + ": " + std::to_string(diagnostics.size()) + " problem(s)";
  for (const auto& d : diagnostics) message += "\n  " + d;
  return message;
}

}  // namespace

LoadError::LoadError(std::string source, std::vector<std::string> diagnostics)
    : std::runtime_error(summarize(source, diagnostics)),
      source_(std::move(source)),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace ecofence
