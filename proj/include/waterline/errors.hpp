#ifndef WATERLINE_ERRORS_HPP
#define WATERLINE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace waterline {

/// Failure raised anywhere in the pipeline. `stage` names the step that
/// produced it ("load", "align", "region", ...) so the CLI can emit
/// `stage: message` diagnostics and map the failure to an exit code.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace waterline

#endif
