#include "kpp/errors.hpp"

namespace kpp {

ParseError::ParseError(const std::string& message, std::size_t position)
    : PreconditionError("syntax error at position " + std::to_string(position) + ": " + message),
      position_(position) {}

NumericalError::NumericalError(std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

}  // namespace kpp
